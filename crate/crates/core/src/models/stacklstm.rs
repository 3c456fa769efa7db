//! The feature-rich stacked LSTM: embedded headline+body token sequence
//! through two LSTMs with dropout, the final hidden state concatenated with
//! the extracted feature vector, then a 3-layer relu block and a 4-way
//! softmax.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Instance, StanceLabel};
use crate::error::{Error, Result};
use crate::features::FittedPipeline;
use crate::neural::{
    embed_sequence, stable_softmax, Activation, DenseLayer, EmbeddingTable, Graph, GradStore,
    LstmParams, OptimAlgo, Optimizer, ParamSet, Tensor,
};
use crate::textproc::tokenize;

pub const N_CLASSES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackLstmHyper {
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
    pub hidden: usize,
    pub dense: usize,
    pub dropout: f64,
    pub max_len: usize,
    pub patience: Option<usize>,
    pub stop_at_train_accuracy: Option<f64>,
}

impl Default for StackLstmHyper {
    fn default() -> Self {
        StackLstmHyper {
            epochs: 30,
            batch: 32,
            lr: 1e-3,
            seed: 0,
            hidden: 100,
            dense: 600,
            dropout: 0.2,
            max_len: 100,
            patience: Some(5),
            stop_at_train_accuracy: None,
        }
    }
}

impl StackLstmHyper {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.dense == 0 || self.max_len == 0 || self.batch == 0 {
            return Err(Error::invalid("stacklstm dimensions must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid("stacklstm dropout must be in [0, 1)"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid("stacklstm learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackLstmModel {
    pub params: ParamSet,
    pub lstm1: LstmParams,
    pub lstm2: LstmParams,
    /// Three relu layers of `dense` units plus the 4-way output layer.
    pub dense_layers: Vec<DenseLayer>,
    pub embed_dim: usize,
    pub feature_width: usize,
    pub max_len: usize,
    pub dropout: f64,
}

pub struct TrainOutcome {
    pub model: StackLstmModel,
    pub epochs_run: usize,
    pub final_loss: f64,
}

fn token_forms(text: &str) -> Vec<String> {
    tokenize(text).forms().into_iter().map(str::to_string).collect()
}

impl StackLstmModel {
    pub fn init(embed_dim: usize, feature_width: usize, hyper: &StackLstmHyper) -> (ParamSet, Self) {
        let mut params = ParamSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        let lstm1 = LstmParams::init(&mut params, "lstm1", embed_dim, hyper.hidden, &mut rng);
        let lstm2 = LstmParams::init(&mut params, "lstm2", hyper.hidden, hyper.hidden, &mut rng);
        let mut dense_layers = Vec::with_capacity(4);
        let mut in_dim = hyper.hidden + feature_width;
        for i in 0..3 {
            dense_layers.push(DenseLayer::init(
                &mut params,
                &format!("dense{i}"),
                in_dim,
                hyper.dense,
                Activation::Relu,
                &mut rng,
            ));
            in_dim = hyper.dense;
        }
        dense_layers.push(DenseLayer::init(
            &mut params,
            "out",
            in_dim,
            N_CLASSES,
            Activation::Identity,
            &mut rng,
        ));
        let model = StackLstmModel {
            params: ParamSet::new(),
            lstm1,
            lstm2,
            dense_layers,
            embed_dim,
            feature_width,
            max_len: hyper.max_len,
            dropout: hyper.dropout,
        };
        (params, model)
    }

    /// Embed an instance's headline-then-body token sequence.
    pub fn embed_instance(&self, instance: &Instance, table: &EmbeddingTable) -> Vec<Vec<f64>> {
        let headline = token_forms(&instance.headline);
        let body = token_forms(&instance.body);
        let h_refs: Vec<&str> = headline.iter().map(String::as_str).collect();
        let b_refs: Vec<&str> = body.iter().map(String::as_str).collect();
        embed_sequence(&h_refs, &b_refs, table, self.max_len)
    }

    /// Build the forward graph; dropout masks apply to each LSTM's outputs
    /// during training and are skipped in eval mode.
    #[allow(clippy::too_many_arguments)]
    fn forward(
        &self,
        g: &mut Graph<'_>,
        params_snapshot: &ParamSet,
        sequence: &[Vec<f64>],
        features: &[f64],
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> Result<crate::neural::NodeId> {
        let _ = params_snapshot;
        let xs: Vec<_> = sequence
            .iter()
            .map(|v| g.input(Tensor::vector(v.clone())))
            .collect();
        let (h1_states, _) = self.lstm1.build_forward(g, &xs)?;

        let mut rng = dropout_rng;
        let mut dropped1 = Vec::with_capacity(h1_states.len());
        for &state in &h1_states {
            let node = match rng.as_deref_mut() {
                Some(rng) if self.dropout > 0.0 => {
                    let mask = crate::neural::dropout_mask(self.lstm1.hidden_dim, self.dropout, rng);
                    g.dropout(state, mask)
                }
                _ => state,
            };
            dropped1.push(node);
        }
        let (_, last2) = self.lstm2.build_forward(g, &dropped1)?;
        let last2 = match rng.as_deref_mut() {
            Some(rng) if self.dropout > 0.0 => {
                let mask = crate::neural::dropout_mask(self.lstm2.hidden_dim, self.dropout, rng);
                g.dropout(last2, mask)
            }
            _ => last2,
        };

        let feature_node = g.input(Tensor::vector(features.to_vec()));
        let mut current = g.concat(&[last2, feature_node]);
        for layer in &self.dense_layers {
            current = layer.build(g, current);
        }
        Ok(current)
    }

    pub fn predict_instance(
        &self,
        instance: &Instance,
        table: &EmbeddingTable,
        features: &[f64],
    ) -> Result<(StanceLabel, [f64; 4])> {
        if table.dim != self.embed_dim {
            return Err(Error::ShapeMismatch(format!(
                "embedding dim {} does not match model dim {}",
                table.dim, self.embed_dim
            )));
        }
        if features.len() != self.feature_width {
            return Err(Error::ShapeMismatch(format!(
                "feature width {} does not match model width {}",
                features.len(),
                self.feature_width
            )));
        }
        let sequence = self.embed_instance(instance, table);
        let mut g = Graph::new(&self.params);
        let logits = self.forward(&mut g, &self.params, &sequence, features, None)?;
        let probs = stable_softmax(g.data(logits));
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

/// Train on a corpus with a fitted pipeline (features) and an embedding
/// table (token sequence); deterministic given the seed.
pub fn fit_stacklstm(
    corpus: &Corpus,
    pipeline: &FittedPipeline,
    embeddings: &Arc<EmbeddingTable>,
    hyper: &StackLstmHyper,
) -> Result<TrainOutcome> {
    hyper.validate()?;
    if corpus.is_empty() {
        return Err(Error::invalid("cannot train on an empty corpus"));
    }
    let labels = corpus.labels()?;
    let gold: Vec<usize> = labels.iter().map(|l| l.index()).collect();

    let features: Vec<Vec<f64>> = corpus
        .instances
        .iter()
        .map(|inst| pipeline.extract_instance(inst, None))
        .collect::<Result<_>>()?;
    let feature_width = features.first().map(Vec::len).unwrap_or(0);

    let (mut params, mut model) = StackLstmModel::init(embeddings.dim, feature_width, hyper);
    let sequences: Vec<Vec<Vec<f64>>> = corpus
        .instances
        .iter()
        .map(|inst| {
            let m = StackLstmModel {
                params: ParamSet::new(),
                ..model.clone()
            };
            m.embed_instance(inst, embeddings)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed.wrapping_add(0x5eed));
    let mut indices: Vec<usize> = (0..corpus.len()).collect();
    indices.shuffle(&mut rng);
    let val_n = if hyper.patience.is_some() && corpus.len() >= 10 {
        ((corpus.len() as f64 * 0.1).round() as usize).clamp(1, corpus.len() - 1)
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

    let eval_loss = |params: &ParamSet, model: &StackLstmModel, idx: &[usize]| -> Result<f64> {
        let mut total = 0.0;
        for &i in idx {
            let mut g = Graph::new(params);
            let logits = model.forward(&mut g, params, &sequences[i], &features[i], None)?;
            let (loss, _) = crate::neural::softmax_xent(g.data(logits), gold[i]);
            total += loss;
        }
        Ok(total / idx.len().max(1) as f64)
    };
    let train_accuracy = |params: &ParamSet, model: &StackLstmModel| -> Result<f64> {
        let mut correct = 0usize;
        for i in 0..corpus.len() {
            let mut g = Graph::new(params);
            let logits = model.forward(&mut g, params, &sequences[i], &features[i], None)?;
            let probs = stable_softmax(g.data(logits));
            let arg = (0..N_CLASSES)
                .max_by(|&a, &b| probs[a].partial_cmp(&probs[b]).unwrap())
                .unwrap();
            if arg == gold[i] {
                correct += 1;
            }
        }
        Ok(correct as f64 / corpus.len() as f64)
    };

    for epoch in 0..hyper.epochs {
        epochs_run = epoch + 1;
        train_idx.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for batch in train_idx.chunks(hyper.batch) {
            let mut grads = GradStore::zeros_of(&params);
            let mut batch_loss = 0.0;
            for &i in batch {
                let mut g = Graph::new(&params);
                let logits =
                    model.forward(&mut g, &params, &sequences[i], &features[i], Some(&mut rng))?;
                let loss = g.softmax_xent(logits, gold[i]);
                batch_loss += g.data(loss)[0];
                g.backward(loss, &mut grads);
            }
            grads.scale(1.0 / batch.len() as f64);
            let loss = batch_loss / batch.len() as f64;
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!("stacklstm loss at epoch {epoch}")));
            }
            optimizer.step(&mut params, &grads)?;
            epoch_loss += loss;
            batches += 1;
        }
        final_loss = epoch_loss / batches.max(1) as f64;

        if let Some(target) = hyper.stop_at_train_accuracy {
            if train_accuracy(&params, &model)? >= target {
                break;
            }
        }
        if let (Some(patience), true) = (hyper.patience, val_n > 0) {
            let val_loss = eval_loss(&params, &model, &val_idx)?;
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

    model.params = params;
    Ok(TrainOutcome {
        model,
        epochs_run,
        final_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{ExtractorKind, PipelineConfig};
    use std::sync::Arc as StdArc;

    /// Tiny corpus whose classes are keyed by distinct tokens, plus a
    /// matching embedding table.
    pub(crate) fn synthetic_setup(n: usize) -> (Corpus, Arc<EmbeddingTable>) {
        let class_words = ["alpha", "bravo", "charlie", "delta"];
        let mut corpus = Corpus::new("synthetic");
        for i in 0..n {
            let class = i % 4;
            let word = class_words[class];
            let body = format!("{word} report number {i} mentions {word} twice");
            let id = i as i64;
            corpus.bodies.insert(id, StdArc::from(body.as_str()));
            corpus.instances.push(Instance {
                headline: format!("{word} headline {i}"),
                body_id: id,
                body: corpus.bodies[&id].clone(),
                stance: Some(StanceLabel::ALL[class]),
            });
        }
        let mut table = EmbeddingTable::new(8);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut vocab: Vec<String> = class_words.iter().map(|s| s.to_string()).collect();
        vocab.extend(["report", "number", "mentions", "twice", "headline"].map(String::from));
        for i in 0..n {
            vocab.push(i.to_string());
        }
        for token in vocab {
            let v: Vec<f64> = (0..8).map(|_| rng.gen_range(-0.5..0.5)).collect();
            table.insert(token, v);
        }
        (corpus, Arc::new(table))
    }

    fn tiny_pipeline(corpus: &Corpus) -> FittedPipeline {
        let config = PipelineConfig {
            extractors: vec![ExtractorKind::WordOverlap, ExtractorKind::Structural],
            ..PipelineConfig::default()
        };
        FittedPipeline::fit(config, corpus).unwrap()
    }

    fn quick_hyper(seed: u64) -> StackLstmHyper {
        StackLstmHyper {
            epochs: 300,
            batch: 8,
            lr: 5e-3,
            seed,
            hidden: 12,
            dense: 24,
            dropout: 0.2,
            max_len: 20,
            patience: None,
            stop_at_train_accuracy: Some(1.0),
        }
    }

    #[test]
    fn parameter_count_closed_form() {
        let hyper = StackLstmHyper::default();
        let (params, model) = StackLstmModel::init(50, 7, &hyper);
        let h = 100usize;
        let d = 50usize;
        let f = 7usize;
        let dense = 600usize;
        let lstm1 = 4 * (h * d + h * h + h);
        let lstm2 = 4 * (h * h + h * h + h);
        let dense1 = dense * (h + f) + dense;
        let dense23 = 2 * (dense * dense + dense);
        let out = 4 * dense + 4;
        assert_eq!(
            params.total_values(),
            lstm1 + lstm2 + dense1 + dense23 + out
        );
        assert_eq!(model.lstm1.param_count(), lstm1);
        assert_eq!(model.lstm2.param_count(), lstm2);
    }

    #[test]
    fn memorizes_32_instances() {
        let (corpus, table) = synthetic_setup(32);
        let pipeline = tiny_pipeline(&corpus);
        let outcome = fit_stacklstm(&corpus, &pipeline, &table, &quick_hyper(5)).unwrap();
        let mut correct = 0;
        for (i, instance) in corpus.instances.iter().enumerate() {
            let features = pipeline.extract_instance(instance, None).unwrap();
            let (label, _) = outcome
                .model
                .predict_instance(instance, &table, &features)
                .unwrap();
            if Some(label) == corpus.instances[i].stance {
                correct += 1;
            }
        }
        assert_eq!(correct, 32, "epochs run: {}", outcome.epochs_run);
        assert!(outcome.epochs_run <= 300);
    }

    #[test]
    fn eval_mode_is_deterministic() {
        let (corpus, table) = synthetic_setup(8);
        let pipeline = tiny_pipeline(&corpus);
        let hyper = StackLstmHyper {
            epochs: 3,
            stop_at_train_accuracy: None,
            ..quick_hyper(1)
        };
        let outcome = fit_stacklstm(&corpus, &pipeline, &table, &hyper).unwrap();
        let instance = &corpus.instances[0];
        let features = pipeline.extract_instance(instance, None).unwrap();
        let a = outcome.model.predict_instance(instance, &table, &features).unwrap();
        let b = outcome.model.predict_instance(instance, &table, &features).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn embedding_dim_mismatch_is_an_error() {
        let (corpus, table) = synthetic_setup(8);
        let pipeline = tiny_pipeline(&corpus);
        let hyper = StackLstmHyper {
            epochs: 1,
            stop_at_train_accuracy: None,
            ..quick_hyper(2)
        };
        let outcome = fit_stacklstm(&corpus, &pipeline, &table, &hyper).unwrap();
        let wrong = Arc::new(EmbeddingTable::new(5));
        let features = pipeline
            .extract_instance(&corpus.instances[0], None)
            .unwrap();
        assert!(outcome
            .model
            .predict_instance(&corpus.instances[0], &wrong, &features)
            .is_err());
    }

    #[test]
    fn training_is_seed_deterministic() {
        let (corpus, table) = synthetic_setup(8);
        let pipeline = tiny_pipeline(&corpus);
        let hyper = StackLstmHyper {
            epochs: 2,
            stop_at_train_accuracy: None,
            ..quick_hyper(42)
        };
        let a = fit_stacklstm(&corpus, &pipeline, &table, &hyper).unwrap();
        let b = fit_stacklstm(&corpus, &pipeline, &table, &hyper).unwrap();
        assert_eq!(a.model.params, b.model.params);
    }
}
