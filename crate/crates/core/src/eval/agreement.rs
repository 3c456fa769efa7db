//! Inter-annotator agreement: annotation matrices and Fleiss' kappa,
//! generalized to unequal rater counts per item.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::StanceLabel;
use crate::error::{Error, Result};

use super::mace::{mace_aggregate, MaceOptions};

/// Items x raters stance annotations; missing entries allowed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationMatrix {
    pub item_ids: Vec<String>,
    pub rater_ids: Vec<String>,
    /// `grid[item][rater]`
    pub grid: Vec<Vec<Option<StanceLabel>>>,
}

impl AnnotationMatrix {
    pub fn n_items(&self) -> usize {
        self.grid.len()
    }

    pub fn n_raters(&self) -> usize {
        self.rater_ids.len()
    }

    /// Annotations of one item as (rater index, label) pairs.
    pub fn item_annotations(&self, item: usize) -> Vec<(usize, StanceLabel)> {
        self.grid[item]
            .iter()
            .enumerate()
            .filter_map(|(j, l)| l.map(|label| (j, label)))
            .collect()
    }

    /// Per-item label counts in the fixed class order.
    fn label_counts(&self, item: usize) -> [u64; 4] {
        let mut counts = [0u64; 4];
        for label in self.grid[item].iter().flatten() {
            counts[label.index()] += 1;
        }
        counts
    }

    /// Modal annotation label per item; ties break by fixed class order.
    pub fn modal_label(&self, item: usize) -> Option<StanceLabel> {
        let counts = self.label_counts(item);
        let best = *counts.iter().max()?;
        if best == 0 {
            return None;
        }
        let class = (0..4).find(|&c| counts[c] == best)?;
        StanceLabel::from_index(class)
    }
}

/// Load an annotation matrix from a CSV with header `item_id,rater_id,label`.
/// Item and rater order follow first appearance.
pub fn load_annotation_csv(path: &Path) -> Result<AnnotationMatrix> {
    let mut reader = csv::ReaderBuilder::new().from_path(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Csv {
            line: 1,
            msg: format!("missing column {name:?}"),
        })
    };
    let item_col = col("item_id")?;
    let rater_col = col("rater_id")?;
    let label_col = col("label")?;

    let mut matrix = AnnotationMatrix::default();
    let mut item_index: HashMap<String, usize> = HashMap::new();
    let mut rater_index: HashMap<String, usize> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            line: 0,
            msg: e.to_string(),
        })?;
        let label = StanceLabel::parse(&record[label_col])?;
        let item = *item_index
            .entry(record[item_col].to_string())
            .or_insert_with(|| {
                matrix.item_ids.push(record[item_col].to_string());
                matrix.grid.push(Vec::new());
                matrix.item_ids.len() - 1
            });
        let rater = *rater_index
            .entry(record[rater_col].to_string())
            .or_insert_with(|| {
                matrix.rater_ids.push(record[rater_col].to_string());
                matrix.rater_ids.len() - 1
            });
        for row in &mut matrix.grid {
            if row.len() < matrix.rater_ids.len() {
                row.resize(matrix.rater_ids.len(), None);
            }
        }
        matrix.grid[item][rater] = Some(label);
    }
    Ok(matrix)
}

/// Fleiss' kappa with per-item pairwise agreement, which handles unequal
/// rater counts. With a class subset, items whose modal label falls outside
/// the subset are dropped first (used for the "related classes only" view).
/// Exactly 1.0 when every included item is unanimous.
pub fn fleiss_kappa(
    annotations: &AnnotationMatrix,
    class_subset: Option<&[StanceLabel]>,
) -> Result<f64> {
    let included: Vec<usize> = (0..annotations.n_items())
        .filter(|&i| match class_subset {
            None => true,
            Some(subset) => annotations
                .modal_label(i)
                .map(|m| subset.contains(&m))
                .unwrap_or(false),
        })
        .collect();
    if included.is_empty() {
        return Err(Error::invalid("no items left after class filtering"));
    }

    let mut per_item_agreement = 0.0f64;
    let mut class_totals = [0u64; 4];
    let mut annotation_total = 0u64;
    for &i in &included {
        let counts = annotations.label_counts(i);
        let n: u64 = counts.iter().sum();
        if n < 2 {
            return Err(Error::invalid(format!(
                "item {} has fewer than 2 annotations",
                annotations.item_ids.get(i).cloned().unwrap_or_else(|| i.to_string())
            )));
        }
        let pairs: u64 = counts.iter().map(|&c| c * c.saturating_sub(1)).sum();
        per_item_agreement += pairs as f64 / (n * (n - 1)) as f64;
        for c in 0..4 {
            class_totals[c] += counts[c];
        }
        annotation_total += n;
    }
    let p_bar = per_item_agreement / included.len() as f64;
    if p_bar >= 1.0 {
        return Ok(1.0);
    }
    let p_e: f64 = class_totals
        .iter()
        .map(|&c| {
            let p = c as f64 / annotation_total as f64;
            p * p
        })
        .sum();
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Agreement summary: kappa over everything, kappa over items whose modal
/// label is related, and the MACE aggregation outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub kappa_all: f64,
    pub kappa_related_only: f64,
    pub aggregated_labels: Vec<StanceLabel>,
    pub rater_competences: Vec<f64>,
}

impl AgreementReport {
    pub fn compute(annotations: &AnnotationMatrix, options: &MaceOptions) -> Result<Self> {
        let related = [StanceLabel::Agree, StanceLabel::Disagree, StanceLabel::Discuss];
        let mace = mace_aggregate(annotations, options)?;
        Ok(AgreementReport {
            kappa_all: fleiss_kappa(annotations, None)?,
            kappa_related_only: fleiss_kappa(annotations, Some(&related))?,
            aggregated_labels: mace.labels,
            rater_competences: mace.competences,
        })
    }
}
