//! Scoring and agreement: the hierarchical FNC metric, confusion matrices,
//! class-wise and macro F1, Fleiss' kappa over annotation matrices, and
//! MACE-style EM label aggregation for upper-bound estimation.

mod agreement;
mod mace;
mod metrics;

pub use agreement::{fleiss_kappa, load_annotation_csv, AgreementReport, AnnotationMatrix};
pub use mace::{mace_aggregate, MaceOptions, MaceResult};
pub use metrics::{
    confusion, evaluate, f1_scores, fnc_score, upper_bound_report, ConfusionMatrix,
    EvaluationReport,
};
