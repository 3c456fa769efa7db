//! The hierarchical FNC score, confusion matrices, and F1 metrics.

use serde::{Deserialize, Serialize};

use crate::corpus::StanceLabel;
use crate::error::{Error, Result};

/// 4x4 confusion counts, gold rows x predicted columns, class order
/// `[AGR, DSG, DSC, UNR]`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 4]; 4],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn get(&self, gold: StanceLabel, pred: StanceLabel) -> u64 {
        self.counts[gold.index()][pred.index()]
    }
}

/// A full evaluation: FNC points (raw, max, normalized), per-class F1, and
/// macro F1 with the underlying confusion matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub fnc_raw: f64,
    pub fnc_max: f64,
    pub fnc_norm: f64,
    pub f1_per_class: [f64; 4],
    pub f1_macro: f64,
    pub confusion: ConfusionMatrix,
}

fn check_lengths(gold: &[StanceLabel], pred: &[StanceLabel]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::invalid(format!(
            "gold/pred length mismatch: {} vs {}",
            gold.len(),
            pred.len()
        )));
    }
    Ok(())
}

/// Hierarchical FNC score: 0.25 points for a correct related/unrelated
/// decision, 0.75 more when a related pair's stance is exactly right.
/// Returns (raw points, maximum attainable points, raw/max).
pub fn fnc_score(gold: &[StanceLabel], pred: &[StanceLabel]) -> Result<(f64, f64, f64)> {
    check_lengths(gold, pred)?;
    if gold.is_empty() {
        return Err(Error::invalid("cannot score empty label lists"));
    }
    let mut raw = 0.0;
    let mut max = 0.0;
    for (&g, &p) in gold.iter().zip(pred) {
        max += if g.is_related() { 1.0 } else { 0.25 };
        if g.is_related() == p.is_related() {
            raw += 0.25;
            if g.is_related() && g == p {
                raw += 0.75;
            }
        }
    }
    Ok((raw, max, raw / max))
}

/// Count (gold, predicted) pairs into a confusion matrix.
pub fn confusion(gold: &[StanceLabel], pred: &[StanceLabel]) -> Result<ConfusionMatrix> {
    check_lengths(gold, pred)?;
    let mut matrix = ConfusionMatrix::default();
    for (&g, &p) in gold.iter().zip(pred) {
        matrix.counts[g.index()][p.index()] += 1;
    }
    Ok(matrix)
}

/// Class-wise F1 (0 when precision + recall is 0) and their unweighted mean
/// over all four classes.
pub fn f1_scores(matrix: &ConfusionMatrix) -> ([f64; 4], f64) {
    let mut per_class = [0.0f64; 4];
    for c in 0..4 {
        let tp = matrix.counts[c][c] as f64;
        let gold_total: f64 = (0..4).map(|p| matrix.counts[c][p] as f64).sum();
        let pred_total: f64 = (0..4).map(|g| matrix.counts[g][c] as f64).sum();
        // F1 = 2TP / (gold + pred) is 2PR/(P+R) without dividing by zero
        // on empty rows or columns.
        let denom = gold_total + pred_total;
        per_class[c] = if denom == 0.0 { 0.0 } else { 2.0 * tp / denom };
    }
    let macro_f1 = per_class.iter().sum::<f64>() / 4.0;
    (per_class, macro_f1)
}

/// Score predictions against gold labels, producing the full report.
pub fn evaluate(gold: &[StanceLabel], pred: &[StanceLabel]) -> Result<EvaluationReport> {
    let (fnc_raw, fnc_max, fnc_norm) = fnc_score(gold, pred)?;
    let confusion = confusion(gold, pred)?;
    let (f1_per_class, f1_macro) = f1_scores(&confusion);
    Ok(EvaluationReport {
        fnc_raw,
        fnc_max,
        fnc_norm,
        f1_per_class,
        f1_macro,
        confusion,
    })
}

/// Evaluate aggregated annotator labels against gold: the human upper bound.
pub fn upper_bound_report(aggregated: &[StanceLabel], gold: &[StanceLabel]) -> Result<EvaluationReport> {
    evaluate(gold, aggregated)
}
