//! Dense layers and LSTM cells as parameter bundles plus graph builders.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::graph::{Graph, GradStore, NodeId, ParamId, ParamSet};
use super::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Relu,
}

/// Uniform Glorot-style init: +-sqrt(6 / (fan_in + fan_out)).
fn glorot(rng: &mut impl Rng, fan_in: usize, fan_out: usize) -> f64 {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    rng.gen_range(-limit..limit)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub w: ParamId,
    pub b: ParamId,
    pub activation: Activation,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl DenseLayer {
    pub fn init(
        params: &mut ParamSet,
        prefix: &str,
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Self {
        let w_data: Vec<f64> = (0..in_dim * out_dim).map(|_| glorot(rng, in_dim, out_dim)).collect();
        let w = params.add(format!("{prefix}.w"), Tensor::from_vec(&[out_dim, in_dim], w_data));
        let b = params.add(format!("{prefix}.b"), Tensor::zeros(&[out_dim]));
        DenseLayer {
            w,
            b,
            activation,
            in_dim,
            out_dim,
        }
    }

    pub fn build(&self, g: &mut Graph<'_>, x: NodeId) -> NodeId {
        let w = g.param(self.w);
        let b = g.param(self.b);
        let affine = g.matvec(w, x);
        let pre = g.add(affine, b);
        match self.activation {
            Activation::Identity => pre,
            Activation::Relu => g.relu(pre),
        }
    }

    pub fn param_count(&self) -> usize {
        self.in_dim * self.out_dim + self.out_dim
    }
}

/// Sequential affine-plus-activation stack; returns the logits node.
pub fn mlp_forward(g: &mut Graph<'_>, layers: &[DenseLayer], x: NodeId) -> Result<NodeId> {
    let mut current = x;
    for layer in layers {
        if g.data(current).len() != layer.in_dim {
            return Err(Error::ShapeMismatch(format!(
                "dense layer expects {} inputs, got {}",
                layer.in_dim,
                g.data(current).len()
            )));
        }
        current = layer.build(g, current);
    }
    Ok(current)
}

/// Run an MLP outside any training loop.
pub fn mlp_run(params: &ParamSet, layers: &[DenseLayer], x: &[f64]) -> Result<Vec<f64>> {
    let mut g = Graph::new(params);
    let input = g.input(Tensor::vector(x.to_vec()));
    let out = mlp_forward(&mut g, layers, input)?;
    Ok(g.data(out).to_vec())
}

/// Gate parameter bundle for one LSTM layer. Gate order: input, forget,
/// cell, output; the forget-gate bias starts at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// Input weights per gate, each `[hidden, input]`.
    pub w: [ParamId; 4],
    /// Recurrent weights per gate, each `[hidden, hidden]`.
    pub u: [ParamId; 4],
    /// Biases per gate, each `[hidden]`.
    pub b: [ParamId; 4],
}

const GATE_NAMES: [&str; 4] = ["i", "f", "g", "o"];

impl LstmParams {
    pub fn init(
        params: &mut ParamSet,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let mut w = Vec::with_capacity(4);
        let mut u = Vec::with_capacity(4);
        let mut b = Vec::with_capacity(4);
        for gate in GATE_NAMES {
            let wd: Vec<f64> = (0..hidden_dim * input_dim)
                .map(|_| glorot(rng, input_dim, hidden_dim))
                .collect();
            w.push(params.add(
                format!("{prefix}.w_{gate}"),
                Tensor::from_vec(&[hidden_dim, input_dim], wd),
            ));
            let ud: Vec<f64> = (0..hidden_dim * hidden_dim)
                .map(|_| glorot(rng, hidden_dim, hidden_dim))
                .collect();
            u.push(params.add(
                format!("{prefix}.u_{gate}"),
                Tensor::from_vec(&[hidden_dim, hidden_dim], ud),
            ));
            let bias = if gate == "f" {
                Tensor::vector(vec![1.0; hidden_dim])
            } else {
                Tensor::zeros(&[hidden_dim])
            };
            b.push(params.add(format!("{prefix}.b_{gate}"), bias));
        }
        LstmParams {
            input_dim,
            hidden_dim,
            w: [w[0], w[1], w[2], w[3]],
            u: [u[0], u[1], u[2], u[3]],
            b: [b[0], b[1], b[2], b[3]],
        }
    }

    pub fn param_count(&self) -> usize {
        4 * (self.hidden_dim * self.input_dim + self.hidden_dim * self.hidden_dim + self.hidden_dim)
    }

    fn gate(
        &self,
        g: &mut Graph<'_>,
        gate: usize,
        x: NodeId,
        h_prev: NodeId,
    ) -> NodeId {
        let w = g.param(self.w[gate]);
        let u = g.param(self.u[gate]);
        let b = g.param(self.b[gate]);
        let wx = g.matvec(w, x);
        let uh = g.matvec(u, h_prev);
        let sum = g.add(wx, uh);
        g.add(sum, b)
    }

    /// Unrolled recurrence over the sequence; returns all hidden-state
    /// nodes and the final one.
    pub fn build_forward(
        &self,
        g: &mut Graph<'_>,
        xs: &[NodeId],
    ) -> Result<(Vec<NodeId>, NodeId)> {
        if xs.is_empty() {
            return Err(Error::invalid("LSTM needs a non-empty sequence"));
        }
        for &x in xs {
            if g.data(x).len() != self.input_dim {
                return Err(Error::ShapeMismatch(format!(
                    "LSTM expects inputs of dim {}, got {}",
                    self.input_dim,
                    g.data(x).len()
                )));
            }
        }
        let mut h = g.input(Tensor::zeros(&[self.hidden_dim]));
        let mut c = g.input(Tensor::zeros(&[self.hidden_dim]));
        let mut hidden_states = Vec::with_capacity(xs.len());
        for &x in xs {
            let i = self.gate(g, 0, x, h);
            let i = g.sigmoid(i);
            let f = self.gate(g, 1, x, h);
            let f = g.sigmoid(f);
            let cell = self.gate(g, 2, x, h);
            let cell = g.tanh(cell);
            let o = self.gate(g, 3, x, h);
            let o = g.sigmoid(o);

            let keep = g.mul(f, c);
            let write = g.mul(i, cell);
            c = g.add(keep, write);
            let c_act = g.tanh(c);
            h = g.mul(o, c_act);
            hidden_states.push(h);
        }
        Ok((hidden_states, h))
    }

    /// Run the recurrence outside a training loop: all hidden states plus
    /// the final one.
    pub fn run(&self, params: &ParamSet, seq: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let mut g = Graph::new(params);
        let xs: Vec<NodeId> = seq
            .iter()
            .map(|x| g.input(Tensor::vector(x.clone())))
            .collect();
        let (states, last) = self.build_forward(&mut g, &xs)?;
        let all: Vec<Vec<f64>> = states.iter().map(|&s| g.data(s).to_vec()).collect();
        Ok((all, g.data(last).to_vec()))
    }
}

/// Standalone softmax cross-entropy: (loss, probabilities).
pub fn softmax_xent(logits: &[f64], gold: usize) -> (f64, Vec<f64>) {
    let probs = super::stable_softmax(logits);
    let loss = -(probs[gold].max(f64::MIN_POSITIVE)).ln();
    (loss, probs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutMode {
    Train,
    Eval,
}

/// Bernoulli dropout mask with survivor scaling 1/(1-rate).
pub fn dropout_mask(len: usize, rate: f64, rng: &mut impl Rng) -> Vec<f64> {
    assert!((0.0..1.0).contains(&rate), "dropout rate must be in [0, 1)");
    if rate == 0.0 {
        return vec![1.0; len];
    }
    let keep = 1.0 - rate;
    (0..len)
        .map(|_| if rng.gen_range(0.0..1.0) < keep { 1.0 / keep } else { 0.0 })
        .collect()
}

/// Standalone dropout: identity in eval mode, seeded mask during training.
pub fn dropout(x: &[f64], rate: f64, mode: DropoutMode, seed: u64) -> Vec<f64> {
    match mode {
        DropoutMode::Eval => x.to_vec(),
        DropoutMode::Train => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mask = dropout_mask(x.len(), rate, &mut rng);
            x.iter().zip(&mask).map(|(v, m)| v * m).collect()
        }
    }
}

/// Mean cross-entropy loss of a batch of (logits, gold) via the graph, with
/// gradients accumulated; used by tests and small training loops.
pub fn batch_loss_and_grads(
    params: &ParamSet,
    forward: impl Fn(&mut Graph<'_>) -> Result<Vec<(NodeId, usize)>>,
) -> Result<(f64, GradStore)> {
    let mut g = Graph::new(params);
    let pairs = forward(&mut g)?;
    let n = pairs.len().max(1) as f64;
    let mut grads = GradStore::zeros_of(params);
    let mut total = 0.0;
    let mut losses = Vec::with_capacity(pairs.len());
    for (logits, gold) in pairs {
        let loss = g.softmax_xent(logits, gold);
        total += g.data(loss)[0];
        losses.push(loss);
    }
    for loss in losses {
        let scaled = g.scale(loss, 1.0 / n);
        g.backward(scaled, &mut grads);
    }
    Ok((total / n, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_mlp_passes_through() {
        let mut params = ParamSet::new();
        let layer = DenseLayer {
            w: params.add("w", Tensor::from_vec(&[2, 2], vec![1.0, 0.0, 0.0, 1.0])),
            b: params.add("b", Tensor::zeros(&[2])),
            activation: Activation::Identity,
            in_dim: 2,
            out_dim: 2,
        };
        let out = mlp_run(&params, &[layer], &[3.0, -4.0]).unwrap();
        assert_eq!(out, vec![3.0, -4.0]);
    }

    #[test]
    fn zero_weights_yield_bias() {
        let mut params = ParamSet::new();
        let layer = DenseLayer {
            w: params.add("w", Tensor::zeros(&[2, 3])),
            b: params.add("b", Tensor::vector(vec![0.5, -0.5])),
            activation: Activation::Identity,
            in_dim: 3,
            out_dim: 2,
        };
        let out = mlp_run(&params, &[layer], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(out, vec![0.5, -0.5]);
    }

    #[test]
    fn relu_clamps_negative_preactivations() {
        let mut params = ParamSet::new();
        let layer = DenseLayer {
            w: params.add("w", Tensor::from_vec(&[2, 1], vec![1.0, -1.0])),
            b: params.add("b", Tensor::zeros(&[2])),
            activation: Activation::Relu,
            in_dim: 1,
            out_dim: 2,
        };
        let out = mlp_run(&params, &[layer], &[5.0]).unwrap();
        assert_eq!(out, vec![5.0, 0.0]);
    }

    #[test]
    fn mlp_shape_mismatch_is_an_error() {
        let mut params = ParamSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let layer = DenseLayer::init(&mut params, "l0", 3, 2, Activation::Relu, &mut rng);
        assert!(mlp_run(&params, &[layer], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_lstm_is_all_zero() {
        let mut params = ParamSet::new();
        let zeros2 = |p: &mut ParamSet, n: &str| p.add(n, Tensor::zeros(&[2, 2]));
        let lstm = LstmParams {
            input_dim: 2,
            hidden_dim: 2,
            w: [
                zeros2(&mut params, "w_i"),
                zeros2(&mut params, "w_f"),
                zeros2(&mut params, "w_g"),
                zeros2(&mut params, "w_o"),
            ],
            u: [
                zeros2(&mut params, "u_i"),
                zeros2(&mut params, "u_f"),
                zeros2(&mut params, "u_g"),
                zeros2(&mut params, "u_o"),
            ],
            b: [
                params.add("b_i", Tensor::zeros(&[2])),
                params.add("b_f", Tensor::zeros(&[2])),
                params.add("b_g", Tensor::zeros(&[2])),
                params.add("b_o", Tensor::zeros(&[2])),
            ],
        };
        let (all, last) = lstm
            .run(&params, &[vec![1.0, -1.0], vec![0.5, 0.5]])
            .unwrap();
        assert!(all.iter().flatten().all(|&x| x == 0.0));
        assert!(last.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn scalar_lstm_matches_hand_arithmetic() {
        // All weights and biases 1, scalar dims, input 1.0, one step.
        let mut params = ParamSet::new();
        let one_mat = |p: &mut ParamSet, n: &str| p.add(n, Tensor::from_vec(&[1, 1], vec![1.0]));
        let one_vec = |p: &mut ParamSet, n: &str| p.add(n, Tensor::vector(vec![1.0]));
        let lstm = LstmParams {
            input_dim: 1,
            hidden_dim: 1,
            w: [
                one_mat(&mut params, "w_i"),
                one_mat(&mut params, "w_f"),
                one_mat(&mut params, "w_g"),
                one_mat(&mut params, "w_o"),
            ],
            u: [
                one_mat(&mut params, "u_i"),
                one_mat(&mut params, "u_f"),
                one_mat(&mut params, "u_g"),
                one_mat(&mut params, "u_o"),
            ],
            b: [
                one_vec(&mut params, "b_i"),
                one_vec(&mut params, "b_f"),
                one_vec(&mut params, "b_g"),
                one_vec(&mut params, "b_o"),
            ],
        };
        let (all, last) = lstm.run(&params, &[vec![1.0]]).unwrap();
        let sig2 = 1.0 / (1.0 + (-2.0f64).exp());
        let c = sig2 * 2.0f64.tanh();
        let expected = sig2 * c.tanh();
        assert!((last[0] - expected).abs() < 1e-12);
        assert_eq!(all.len(), 1);
        assert_eq!(all[0][0], last[0]);
    }

    #[test]
    fn lstm_rejects_dim_mismatch() {
        let mut params = ParamSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lstm = LstmParams::init(&mut params, "l", 3, 2, &mut rng);
        assert!(lstm.run(&params, &[vec![1.0, 2.0]]).is_err());
        assert_eq!(lstm.param_count(), 4 * (2 * 3 + 2 * 2 + 2));
    }

    #[test]
    fn forget_bias_initialized_to_one() {
        let mut params = ParamSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lstm = LstmParams::init(&mut params, "l", 2, 3, &mut rng);
        assert!(params.get(lstm.b[1]).data.iter().all(|&x| x == 1.0));
        assert!(params.get(lstm.b[0]).data.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dropout_contract() {
        let x = vec![1.0, 2.0, 3.0];
        assert_eq!(dropout(&x, 0.5, DropoutMode::Eval, 1), x);
        assert_eq!(dropout(&x, 0.0, DropoutMode::Train, 1), x);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mask = dropout_mask(10_000, 0.5, &mut rng);
        let survivors = mask.iter().filter(|&&m| m > 0.0).count() as f64 / 10_000.0;
        assert!((survivors - 0.5).abs() < 0.02, "survivors = {survivors}");
        let big = vec![1.0; 10_000];
        let dropped = dropout(&big, 0.5, DropoutMode::Train, 4);
        let mean: f64 = dropped.iter().sum::<f64>() / 10_000.0;
        assert!((mean - 1.0).abs() < 0.05, "mean = {mean}");
    }

    #[test]
    fn standalone_softmax_xent() {
        let (loss, probs) = softmax_xent(&[0.0, 0.0, 0.0, 0.0], 1);
        assert!((loss - 4.0f64.ln()).abs() < 1e-12);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
