//! The feature MLP: relu hidden layers over an extracted feature vector,
//! 4-way softmax output, Adam training with optional early stopping on a
//! held-out slice.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::StanceLabel;
use crate::error::{Error, Result};
use crate::neural::{
    batch_loss_and_grads, mlp_forward, mlp_run, stable_softmax, Activation, DenseLayer, Graph,
    OptimAlgo, Optimizer, ParamSet, Tensor,
};

pub const N_CLASSES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatMlpHyper {
    pub hidden_layers: usize,
    pub hidden_size: usize,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
    /// Early-stopping patience on a 10% held-out slice; `None` disables.
    pub patience: Option<usize>,
    /// Stop once training accuracy reaches this level (capacity tests).
    pub stop_at_train_accuracy: Option<f64>,
}

impl Default for FeatMlpHyper {
    fn default() -> Self {
        FeatMlpHyper {
            hidden_layers: 6,
            hidden_size: 600,
            epochs: 30,
            batch: 32,
            lr: 1e-3,
            seed: 0,
            patience: Some(5),
            stop_at_train_accuracy: None,
        }
    }
}

impl FeatMlpHyper {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers == 0 || self.hidden_size == 0 {
            return Err(Error::invalid("featmlp needs at least one hidden unit"));
        }
        if self.batch == 0 {
            return Err(Error::invalid("featmlp batch size must be positive"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid("featmlp learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatMlpModel {
    pub params: ParamSet,
    pub layers: Vec<DenseLayer>,
    pub input_dim: usize,
}

pub struct TrainOutcome {
    pub model: FeatMlpModel,
    pub epochs_run: usize,
    pub final_loss: f64,
}

fn validate_features(rows: &[Vec<f64>]) -> Result<usize> {
    if rows.is_empty() {
        return Err(Error::invalid("no training rows"));
    }
    let width = rows[0].len();
    if width == 0 {
        return Err(Error::invalid("feature rows are empty"));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::ShapeMismatch(format!("feature row {i} has odd width")));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("feature {j} of row {i}")));
        }
    }
    Ok(width)
}

fn build_layers(
    params: &mut ParamSet,
    input_dim: usize,
    hyper: &FeatMlpHyper,
    rng: &mut ChaCha8Rng,
) -> Vec<DenseLayer> {
    let mut layers = Vec::with_capacity(hyper.hidden_layers + 1);
    let mut in_dim = input_dim;
    for i in 0..hyper.hidden_layers {
        layers.push(DenseLayer::init(
            params,
            &format!("mlp{i}"),
            in_dim,
            hyper.hidden_size,
            Activation::Relu,
            rng,
        ));
        in_dim = hyper.hidden_size;
    }
    layers.push(DenseLayer::init(
        params,
        "mlp_out",
        in_dim,
        N_CLASSES,
        Activation::Identity,
        rng,
    ));
    layers
}

fn mean_loss(model_params: &ParamSet, layers: &[DenseLayer], rows: &[Vec<f64>], gold: &[usize], idx: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for &i in idx {
        let logits = mlp_run(model_params, layers, &rows[i])?;
        let (loss, _) = crate::neural::softmax_xent(&logits, gold[i]);
        total += loss;
    }
    Ok(total / idx.len().max(1) as f64)
}

fn accuracy(model_params: &ParamSet, layers: &[DenseLayer], rows: &[Vec<f64>], gold: &[usize]) -> Result<f64> {
    let mut correct = 0usize;
    for (row, &g) in rows.iter().zip(gold) {
        let logits = mlp_run(model_params, layers, row)?;
        let probs = stable_softmax(&logits);
        let arg = (0..N_CLASSES).max_by(|&a, &b| probs[a].partial_cmp(&probs[b]).unwrap()).unwrap();
        if arg == g {
            correct += 1;
        }
    }
    Ok(correct as f64 / rows.len().max(1) as f64)
}

/// Adam-train the MLP; deterministic given the seed.
pub fn fit_featmlp(
    rows: &[Vec<f64>],
    labels: &[StanceLabel],
    hyper: &FeatMlpHyper,
) -> Result<TrainOutcome> {
    hyper.validate()?;
    let width = validate_features(rows)?;
    if rows.len() != labels.len() {
        return Err(Error::invalid("featmlp needs one label per feature row"));
    }
    let gold: Vec<usize> = labels.iter().map(|l| l.index()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut params = ParamSet::new();
    let layers = build_layers(&mut params, width, hyper, &mut rng);

    // Held-out slice for early stopping.
    let mut indices: Vec<usize> = (0..rows.len()).collect();
    indices.shuffle(&mut rng);
    let val_n = if hyper.patience.is_some() && rows.len() >= 10 {
        ((rows.len() as f64 * 0.1).round() as usize).clamp(1, rows.len() - 1)
    } else {
        0
    };
    let (val_idx, train_idx) = indices.split_at(val_n);
    let val_idx = val_idx.to_vec();
    let mut train_idx = train_idx.to_vec();

    let mut optimizer = Optimizer::new(OptimAlgo::adam(hyper.lr), &params);
    let mut best_val = f64::INFINITY;
    let mut best_params: Option<ParamSet> = None;
    let mut bad_epochs = 0usize;
    let mut epochs_run = 0usize;
    let mut final_loss = f64::NAN;

    for epoch in 0..hyper.epochs {
        epochs_run = epoch + 1;
        train_idx.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for batch in train_idx.chunks(hyper.batch) {
            let (loss, grads) = batch_loss_and_grads(&params, |g: &mut Graph<'_>| {
                let mut pairs = Vec::with_capacity(batch.len());
                for &i in batch {
                    let input = g.input(Tensor::vector(rows[i].clone()));
                    let logits = mlp_forward(g, &layers, input)?;
                    pairs.push((logits, gold[i]));
                }
                Ok(pairs)
            })?;
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!("featmlp loss at epoch {epoch}")));
            }
            optimizer.step(&mut params, &grads)?;
            epoch_loss += loss;
            batches += 1;
        }
        final_loss = epoch_loss / batches.max(1) as f64;

        if let Some(target) = hyper.stop_at_train_accuracy {
            if accuracy(&params, &layers, rows, &gold)? >= target {
                break;
            }
        }
        if let (Some(patience), true) = (hyper.patience, val_n > 0) {
            let val_loss = mean_loss(&params, &layers, rows, &gold, &val_idx)?;
            if val_loss < best_val - 1e-12 {
                best_val = val_loss;
                best_params = Some(params.clone());
                bad_epochs = 0;
            } else {
                bad_epochs += 1;
                if bad_epochs > patience {
                    break;
                }
            }
        }
    }
    if let Some(best) = best_params {
        params = best;
    }

    Ok(TrainOutcome {
        model: FeatMlpModel {
            params,
            layers,
            input_dim: width,
        },
        epochs_run,
        final_loss,
    })
}

impl FeatMlpModel {
    pub fn predict_row(&self, row: &[f64]) -> Result<(StanceLabel, [f64; 4])> {
        if row.len() != self.input_dim {
            return Err(Error::ShapeMismatch(format!(
                "featmlp expects {} features, got {}",
                self.input_dim,
                row.len()
            )));
        }
        let logits = mlp_run(&self.params, &self.layers, row)?;
        let probs = stable_softmax(&logits);
        let mut out = [0.0; 4];
        out.copy_from_slice(&probs);
        let label = StanceLabel::ALL
            .iter()
            .copied()
            .max_by(|a, b| out[a.index()].partial_cmp(&out[b.index()]).unwrap())
            .expect("four classes");
        Ok((label, out))
    }

    pub fn param_count(&self) -> usize {
        self.params.total_values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use StanceLabel::*;

    fn quick_hyper(seed: u64) -> FeatMlpHyper {
        FeatMlpHyper {
            hidden_layers: 2,
            hidden_size: 16,
            epochs: 200,
            batch: 8,
            lr: 5e-3,
            seed,
            patience: None,
            stop_at_train_accuracy: Some(1.0),
        }
    }

    /// Four well-separated gaussian blobs, one per class.
    pub(crate) fn four_blobs(n: usize, dim: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<StanceLabel>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let class = i % 4;
            let mut row = vec![0.0; dim];
            for (j, value) in row.iter_mut().enumerate() {
                let center = if j % 4 == class { 3.0 } else { 0.0 };
                *value = center + rng.gen_range(-0.5..0.5);
            }
            rows.push(row);
            labels.push(StanceLabel::ALL[class]);
        }
        (rows, labels)
    }

    #[test]
    fn memorizes_small_random_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..32)
            .map(|_| (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let labels: Vec<StanceLabel> = (0..32)
            .map(|_| StanceLabel::ALL[rng.gen_range(0..4)])
            .collect();
        let hyper = FeatMlpHyper {
            epochs: 500,
            ..quick_hyper(1)
        };
        let outcome = fit_featmlp(&rows, &labels, &hyper).unwrap();
        let correct = rows
            .iter()
            .zip(&labels)
            .filter(|(row, &gold)| outcome.model.predict_row(row).unwrap().0 == gold)
            .count();
        assert_eq!(correct, 32, "memorization failed after {} epochs", outcome.epochs_run);
        assert!(outcome.epochs_run <= 500);
    }

    #[test]
    fn separable_blobs_high_f1() {
        let (rows, labels) = four_blobs(200, 8, 3);
        let outcome = fit_featmlp(&rows, &labels, &quick_hyper(2)).unwrap();
        let predictions: Vec<StanceLabel> = rows
            .iter()
            .map(|r| outcome.model.predict_row(r).unwrap().0)
            .collect();
        let matrix = crate::eval::confusion(&labels, &predictions).unwrap();
        let (_, macro_f1) = crate::eval::f1_scores(&matrix);
        assert!(macro_f1 >= 0.95, "macro F1 = {macro_f1}");
    }

    #[test]
    fn deterministic_given_seed() {
        let (rows, labels) = four_blobs(40, 6, 4);
        let hyper = FeatMlpHyper {
            epochs: 5,
            stop_at_train_accuracy: None,
            ..quick_hyper(9)
        };
        let a = fit_featmlp(&rows, &labels, &hyper).unwrap();
        let b = fit_featmlp(&rows, &labels, &hyper).unwrap();
        assert_eq!(a.model.params, b.model.params);
        for row in &rows {
            assert_eq!(
                a.model.predict_row(row).unwrap(),
                b.model.predict_row(row).unwrap()
            );
        }
    }

    #[test]
    fn probabilities_sum_to_one_and_match_label() {
        let (rows, labels) = four_blobs(40, 6, 5);
        let hyper = FeatMlpHyper {
            epochs: 3,
            stop_at_train_accuracy: None,
            ..quick_hyper(11)
        };
        let outcome = fit_featmlp(&rows, &labels, &hyper).unwrap();
        for row in &rows {
            let (label, probs) = outcome.model.predict_row(row).unwrap();
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let argmax = StanceLabel::ALL
                .iter()
                .copied()
                .max_by(|a, b| probs[a.index()].partial_cmp(&probs[b.index()]).unwrap())
                .unwrap();
            assert_eq!(label, argmax);
        }
    }

    #[test]
    fn rejects_non_finite_features() {
        let rows = vec![vec![1.0, f64::INFINITY]];
        let err = fit_featmlp(&rows, &[Agree], &quick_hyper(0)).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }
}
