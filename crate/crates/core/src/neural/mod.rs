//! Minimal neural-network engine: tensors, a define-by-run graph with
//! reverse-mode gradients (dense, LSTM, embedding, dropout, concatenation,
//! softmax cross-entropy), SGD/Adam, and finite-difference gradient
//! checking. 64-bit throughout; gradient checks are only meaningful there.

pub mod embedding;
pub mod gradcheck;
pub mod graph;
pub mod layers;
pub mod optim;
pub mod tensor;

pub use embedding::{embed_sequence, load_embeddings, EmbeddingTable, DEFAULT_MAX_SEQ_LEN};
pub use gradcheck::{grad_check, GRAD_CHECK_EPS};
pub use graph::{Graph, GradStore, NodeId, ParamId, ParamSet};
pub use layers::{
    batch_loss_and_grads, dropout, dropout_mask, mlp_forward, mlp_run, softmax_xent, Activation,
    DenseLayer, DropoutMode, LstmParams,
};
pub use optim::{OptimAlgo, Optimizer};
pub use tensor::Tensor;

/// Max-subtraction softmax.
pub fn stable_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
