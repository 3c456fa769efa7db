//! MACE-style EM label aggregation. Each annotation is explained either by
//! a faithful copy of the item's latent true label or by a rater-specific
//! spamming distribution; EM learns per-rater spamming probabilities and
//! yields posterior label estimates plus rater competences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::StanceLabel;
use crate::error::{Error, Result};

use super::agreement::AnnotationMatrix;

const N_CLASSES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaceOptions {
    pub iters: usize,
    pub restarts: usize,
    /// Additive smoothing applied to all fractional counts in the M-step.
    pub smoothing: f64,
    pub seed: u64,
}

impl Default for MaceOptions {
    fn default() -> Self {
        MaceOptions {
            iters: 50,
            restarts: 10,
            smoothing: 0.1 / N_CLASSES as f64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaceResult {
    /// Per-item argmax posterior label.
    pub labels: Vec<StanceLabel>,
    /// Per-rater competence = 1 - spamming probability.
    pub competences: Vec<f64>,
    /// Per-item posterior over the four classes.
    pub posteriors: Vec<[f64; N_CLASSES]>,
    /// Smoothed EM objective (marginal log-likelihood plus the smoothing
    /// prior) of the winning restart, one entry per EM iteration. MAP-EM
    /// makes this non-decreasing.
    pub objective_trace: Vec<f64>,
}

struct RestartOutcome {
    objective: f64,
    trace: Vec<f64>,
    spam_prob: Vec<f64>,
    posteriors: Vec<[f64; N_CLASSES]>,
}

/// Annotation lists per item: (rater, label index).
fn item_lists(annotations: &AnnotationMatrix) -> Result<Vec<Vec<(usize, usize)>>> {
    let mut items = Vec::with_capacity(annotations.n_items());
    for i in 0..annotations.n_items() {
        let list: Vec<(usize, usize)> = annotations
            .item_annotations(i)
            .into_iter()
            .map(|(j, l)| (j, l.index()))
            .collect();
        if list.is_empty() {
            return Err(Error::invalid(format!(
                "item {} has no annotations",
                annotations.item_ids.get(i).cloned().unwrap_or_else(|| i.to_string())
            )));
        }
        items.push(list);
    }
    Ok(items)
}

fn run_restart(
    items: &[Vec<(usize, usize)>],
    n_raters: usize,
    options: &MaceOptions,
    restart: usize,
) -> RestartOutcome {
    let delta = options.smoothing;
    let mut rng = ChaCha8Rng::seed_from_u64(
        options
            .seed
            .wrapping_add((restart as u64).wrapping_mul(0x9e3779b97f4a7c15)),
    );
    let mut spam_prob: Vec<f64> = (0..n_raters).map(|_| rng.gen_range(0.2..0.8)).collect();
    let mut spam_dist: Vec<[f64; N_CLASSES]> = (0..n_raters)
        .map(|_| {
            let mut row = [0.0; N_CLASSES];
            for v in row.iter_mut() {
                *v = rng.gen_range(0.5..1.5);
            }
            let total: f64 = row.iter().sum();
            for v in row.iter_mut() {
                *v /= total;
            }
            row
        })
        .collect();

    let prior_term = |spam_prob: &[f64], spam_dist: &[[f64; N_CLASSES]]| -> f64 {
        let mut term = 0.0;
        for j in 0..n_raters {
            term += delta * (spam_prob[j].ln() + (1.0 - spam_prob[j]).ln());
            for c in 0..N_CLASSES {
                term += delta * spam_dist[j][c].ln();
            }
        }
        term
    };

    let mut posteriors = vec![[0.0; N_CLASSES]; items.len()];
    let mut trace = Vec::with_capacity(options.iters + 1);
    let mut objective = f64::NEG_INFINITY;

    for step in 0..=options.iters {
        // E-step: label posteriors and expected spamming indicators.
        let mut loglik = 0.0;
        let mut spam_expect = vec![0.0f64; n_raters];
        let mut spam_count = vec![[0.0f64; N_CLASSES]; n_raters];
        let mut rater_n = vec![0.0f64; n_raters];
        for (i, list) in items.iter().enumerate() {
            let mut weights = [0.0f64; N_CLASSES];
            for (t, w) in weights.iter_mut().enumerate() {
                let mut prod = 1.0 / N_CLASSES as f64;
                for &(j, a) in list {
                    let faithful = if a == t { 1.0 - spam_prob[j] } else { 0.0 };
                    prod *= faithful + spam_prob[j] * spam_dist[j][a];
                }
                *w = prod;
            }
            let z: f64 = weights.iter().sum();
            loglik += z.ln();
            for (t, w) in weights.iter().enumerate() {
                posteriors[i][t] = w / z;
            }
            for &(j, a) in list {
                rater_n[j] += 1.0;
                let mut expected_spam = 0.0;
                for t in 0..N_CLASSES {
                    let faithful = if a == t { 1.0 - spam_prob[j] } else { 0.0 };
                    let spammed = spam_prob[j] * spam_dist[j][a];
                    expected_spam += posteriors[i][t] * spammed / (faithful + spammed);
                }
                spam_expect[j] += expected_spam;
                spam_count[j][a] += expected_spam;
            }
        }
        objective = loglik + prior_term(&spam_prob, &spam_dist);
        trace.push(objective);
        if step == options.iters {
            break;
        }

        // M-step with additive smoothing (MAP under Beta/Dirichlet priors).
        for j in 0..n_raters {
            if rater_n[j] == 0.0 {
                continue;
            }
            spam_prob[j] = (spam_expect[j] + delta) / (rater_n[j] + 2.0 * delta);
            let total = spam_expect[j] + N_CLASSES as f64 * delta;
            for c in 0..N_CLASSES {
                spam_dist[j][c] = (spam_count[j][c] + delta) / total;
            }
        }
    }

    RestartOutcome {
        objective,
        trace,
        spam_prob,
        posteriors,
    }
}

/// EM aggregation: best of `restarts` seeded runs by final objective
/// (ties favor the lowest restart index).
pub fn mace_aggregate(annotations: &AnnotationMatrix, options: &MaceOptions) -> Result<MaceResult> {
    if options.restarts == 0 {
        return Err(Error::invalid("mace needs at least one restart"));
    }
    let items = item_lists(annotations)?;
    let n_raters = annotations.n_raters();

    let mut best: Option<RestartOutcome> = None;
    for restart in 0..options.restarts {
        let outcome = run_restart(&items, n_raters, options, restart);
        let better = match &best {
            None => true,
            Some(current) => outcome.objective > current.objective,
        };
        if better {
            best = Some(outcome);
        }
    }
    let best = best.expect("at least one restart ran");

    let labels = best
        .posteriors
        .iter()
        .map(|post| {
            let mut arg = 0usize;
            for t in 1..N_CLASSES {
                if post[t] > post[arg] {
                    arg = t;
                }
            }
            StanceLabel::from_index(arg).expect("class index in range")
        })
        .collect();
    let competences = best.spam_prob.iter().map(|p| 1.0 - p).collect();
    Ok(MaceResult {
        labels,
        competences,
        posteriors: best.posteriors,
        objective_trace: best.trace,
    })
}
