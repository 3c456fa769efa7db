//! Document-level stance classification toolkit.
//!
//! Given a (headline, document-body) pair, the task is to predict whether the
//! body agrees with, disagrees with, discusses, or is unrelated to the
//! headline. This crate bundles everything needed to run that task end to
//! end on FNC-style corpora:
//!
//! * [`corpus`] — data model, CSV ingestion, ARC-style corpus derivation,
//!   splits and resampling;
//! * [`textproc`] — deterministic tokenization, sentence splitting, syllable
//!   counting, negation tagging, n-grams;
//! * [`features`] — hand-crafted feature extractors and fitted pipelines;
//! * [`topics`] — from-scratch NMF, LSI, and LDA topic models;
//! * [`neural`] — a minimal reverse-mode autodiff engine (dense, LSTM,
//!   embeddings, dropout) with gradient checking;
//! * [`models`] — majority vote, gradient-boosted trees, feature MLP, a
//!   feature-rich stacked LSTM, and hard-voting ensembles;
//! * [`eval`] — the hierarchical FNC metric, class-wise/macro F1, Fleiss'
//!   kappa, and MACE-style label aggregation;
//! * [`harness`] — experiment configs, ablation/CV/cross-domain runners,
//!   and report emission. The `stancebench` binary exposes these as CLI
//!   subcommands.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod harness;
pub mod models;
pub mod neural;
pub mod textproc;
pub mod topics;

pub use corpus::{Corpus, Instance, StanceLabel};
pub use error::{Error, Result};
