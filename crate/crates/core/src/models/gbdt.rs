//! Multiclass gradient-boosted regression trees: one tree per class per
//! round, fitted to softmax negative-gradient residuals with second-order
//! leaf values and exact greedy splits on sorted feature values.

use serde::{Deserialize, Serialize};

use crate::corpus::StanceLabel;
use crate::error::{Error, Result};
use crate::neural::stable_softmax;

use super::majority::frequency_tie_rank;

const LEAF_REGULARIZATION: f64 = 1e-6;
const MIN_SPLIT_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtHyper {
    pub trees: usize,
    pub depth: usize,
    pub lr: f64,
    /// Reserved for subsampling variants; training itself is deterministic.
    pub seed: u64,
}

impl Default for GbdtHyper {
    fn default() -> Self {
        GbdtHyper {
            trees: 200,
            depth: 3,
            lr: 0.1,
            seed: 0,
        }
    }
}

impl GbdtHyper {
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::invalid("gbdt depth must be at least 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid("gbdt learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegTree {
    pub nodes: Vec<TreeNode>,
}

impl RegTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    /// One tree per class per boosting round.
    pub rounds: Vec<[RegTree; 4]>,
    pub lr: f64,
    pub n_features: usize,
    pub class_counts: [u64; 4],
    /// Mean multiclass log-loss before boosting and after every round.
    pub loss_trace: Vec<f64>,
}

struct TreeBuilder<'a> {
    rows: &'a [Vec<f64>],
    grad: &'a [f64],
    hess: &'a [f64],
    max_depth: usize,
    nodes: Vec<TreeNode>,
}

impl<'a> TreeBuilder<'a> {
    fn leaf_value(&self, members: &[usize]) -> f64 {
        let g: f64 = members.iter().map(|&i| self.grad[i]).sum();
        let h: f64 = members.iter().map(|&i| self.hess[i]).sum();
        -g / (h + LEAF_REGULARIZATION)
    }

    fn gain_term(g: f64, h: f64) -> f64 {
        g * g / (h + LEAF_REGULARIZATION)
    }

    /// Exact greedy split search: every feature, thresholds at midpoints of
    /// consecutive distinct sorted values. Ties keep the first (lowest
    /// feature index, then lowest threshold).
    fn best_split(&self, members: &[usize]) -> Option<(usize, f64, f64)> {
        if members.len() < 2 {
            return None;
        }
        let total_g: f64 = members.iter().map(|&i| self.grad[i]).sum();
        let total_h: f64 = members.iter().map(|&i| self.hess[i]).sum();
        let base = Self::gain_term(total_g, total_h);

        let n_features = self.rows[members[0]].len();
        let mut best: Option<(usize, f64, f64)> = None;
        let mut sorted = members.to_vec();
        for feature in 0..n_features {
            sorted.sort_by(|&a, &b| {
                self.rows[a][feature]
                    .partial_cmp(&self.rows[b][feature])
                    .expect("finite features")
            });
            let mut left_g = 0.0;
            let mut left_h = 0.0;
            for w in 0..sorted.len() - 1 {
                let i = sorted[w];
                left_g += self.grad[i];
                left_h += self.hess[i];
                let here = self.rows[i][feature];
                let next = self.rows[sorted[w + 1]][feature];
                if here == next {
                    continue;
                }
                let threshold = here + (next - here) / 2.0;
                let right_g = total_g - left_g;
                let right_h = total_h - left_h;
                let gain = Self::gain_term(left_g, left_h) + Self::gain_term(right_g, right_h) - base;
                if gain > MIN_SPLIT_GAIN && best.map_or(true, |(_, _, g)| gain > g) {
                    best = Some((feature, threshold, gain));
                }
            }
        }
        best
    }

    fn grow(&mut self, members: Vec<usize>, depth: usize) -> usize {
        if depth < self.max_depth {
            if let Some((feature, threshold, _)) = self.best_split(&members) {
                let (left_members, right_members): (Vec<usize>, Vec<usize>) = members
                    .iter()
                    .partition(|&&i| self.rows[i][feature] <= threshold);
                let slot = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { value: 0.0 });
                let left = self.grow(left_members, depth + 1);
                let right = self.grow(right_members, depth + 1);
                self.nodes[slot] = TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                return slot;
            }
        }
        let value = self.leaf_value(&members);
        self.nodes.push(TreeNode::Leaf { value });
        self.nodes.len() - 1
    }
}

fn fit_tree(rows: &[Vec<f64>], grad: &[f64], hess: &[f64], max_depth: usize) -> RegTree {
    let mut builder = TreeBuilder {
        rows,
        grad,
        hess,
        max_depth,
        nodes: Vec::new(),
    };
    let all: Vec<usize> = (0..rows.len()).collect();
    builder.grow(all, 0);
    RegTree {
        nodes: builder.nodes,
    }
}

fn mean_log_loss(scores: &[[f64; 4]], gold: &[usize]) -> f64 {
    let mut total = 0.0;
    for (row, &g) in scores.iter().zip(gold) {
        let probs = stable_softmax(row);
        total -= probs[g].max(f64::MIN_POSITIVE).ln();
    }
    total / gold.len() as f64
}

impl GbdtModel {
    pub fn fit(rows: &[Vec<f64>], labels: &[StanceLabel], hyper: &GbdtHyper) -> Result<GbdtModel> {
        hyper.validate()?;
        if rows.is_empty() || rows.len() != labels.len() {
            return Err(Error::invalid("gbdt needs one label per feature row"));
        }
        let n_features = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::ShapeMismatch(format!("feature row {i} has odd width")));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("feature {j} of row {i}")));
            }
        }
        let mut class_counts = [0u64; 4];
        for label in labels {
            class_counts[label.index()] += 1;
        }
        if class_counts.iter().filter(|&&c| c > 0).count() < 2 {
            return Err(Error::invalid("gbdt needs at least 2 classes present"));
        }

        let gold: Vec<usize> = labels.iter().map(|l| l.index()).collect();
        let mut scores = vec![[0.0f64; 4]; rows.len()];
        let mut loss_trace = vec![mean_log_loss(&scores, &gold)];
        let mut rounds = Vec::with_capacity(hyper.trees);

        for _ in 0..hyper.trees {
            let mut round_trees = Vec::with_capacity(4);
            let probs: Vec<Vec<f64>> = scores.iter().map(|s| stable_softmax(s)).collect();
            for class in 0..4 {
                let grad: Vec<f64> = probs
                    .iter()
                    .zip(&gold)
                    .map(|(p, &g)| p[class] - if g == class { 1.0 } else { 0.0 })
                    .collect();
                let hess: Vec<f64> = probs.iter().map(|p| p[class] * (1.0 - p[class])).collect();
                let tree = fit_tree(rows, &grad, &hess, hyper.depth);
                for (row, score) in rows.iter().zip(scores.iter_mut()) {
                    score[class] += hyper.lr * tree.predict(row);
                }
                round_trees.push(tree);
            }
            let round: [RegTree; 4] = round_trees.try_into().expect("four trees");
            rounds.push(round);
            loss_trace.push(mean_log_loss(&scores, &gold));
        }

        Ok(GbdtModel {
            rounds,
            lr: hyper.lr,
            n_features,
            class_counts,
            loss_trace,
        })
    }

    pub fn scores(&self, row: &[f64]) -> [f64; 4] {
        let mut scores = [0.0f64; 4];
        for round in &self.rounds {
            for (class, tree) in round.iter().enumerate() {
                scores[class] += self.lr * tree.predict(row);
            }
        }
        scores
    }

    /// Class probabilities and the argmax label; exact probability ties go
    /// to the more frequent training class.
    pub fn predict_row(&self, row: &[f64]) -> (StanceLabel, [f64; 4]) {
        let scores = self.scores(row);
        let probs = stable_softmax(&scores);
        let label = StanceLabel::ALL
            .iter()
            .copied()
            .max_by(|&a, &b| {
                probs[a.index()]
                    .partial_cmp(&probs[b.index()])
                    .unwrap()
                    .then_with(|| {
                        (self.class_counts[a.index()], frequency_tie_rank(a))
                            .cmp(&(self.class_counts[b.index()], frequency_tie_rank(b)))
                    })
            })
            .expect("four classes");
        let mut out = [0.0; 4];
        out.copy_from_slice(&probs);
        (label, out)
    }
}
