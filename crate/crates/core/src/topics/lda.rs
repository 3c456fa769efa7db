//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling over
//! token-topic assignments; fold-in keeps the topic-term distributions
//! fixed and samples assignments for the new document only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::linalg::Mat;
use super::{TermDocMatrix, TermVectorizer, Weighting};

const FOLD_IN_SWEEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    /// Topic-term distributions (k x n_terms); every row sums to 1.
    pub phi: Mat,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub vectorizer: TermVectorizer,
}

/// Expand integer term counts into a token list per document.
fn expand_docs(m: &TermDocMatrix) -> Result<Vec<Vec<usize>>> {
    let mut docs = Vec::with_capacity(m.n_docs());
    for d in 0..m.n_docs() {
        let mut tokens = Vec::new();
        for (w, &count) in m.matrix.row(d).iter().enumerate() {
            if count < 0.0 || !count.is_finite() || (count - count.round()).abs() > 1e-9 {
                return Err(Error::invalid(
                    "LDA requires a non-negative integer (TF) term-document matrix",
                ));
            }
            for _ in 0..count.round() as usize {
                tokens.push(w);
            }
        }
        docs.push(tokens);
    }
    Ok(docs)
}

/// Collapsed Gibbs sampling. Defaults when `None`: alpha = 50/k, beta = 0.01.
pub fn fit_lda(
    m: &TermDocMatrix,
    k: usize,
    alpha: Option<f64>,
    beta: Option<f64>,
    iters: usize,
    seed: u64,
) -> Result<LdaModel> {
    if k < 2 {
        return Err(Error::invalid("LDA needs k >= 2"));
    }
    if m.vectorizer.weighting != Weighting::Tf {
        return Err(Error::invalid("LDA requires TF weighting"));
    }
    let alpha = alpha.unwrap_or(50.0 / k as f64);
    let beta = beta.unwrap_or(0.01);
    let n_terms = m.n_terms();
    let docs = expand_docs(m)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut doc_topic = vec![vec![0u32; k]; docs.len()];
    let mut topic_term = vec![vec![0u32; n_terms]; k];
    let mut topic_total = vec![0u32; k];
    let mut assignments: Vec<Vec<usize>> = docs
        .iter()
        .map(|tokens| tokens.iter().map(|_| rng.gen_range(0..k)).collect())
        .collect();
    for (d, tokens) in docs.iter().enumerate() {
        for (pos, &w) in tokens.iter().enumerate() {
            let t = assignments[d][pos];
            doc_topic[d][t] += 1;
            topic_term[t][w] += 1;
            topic_total[t] += 1;
        }
    }

    let vbeta = n_terms as f64 * beta;
    let mut weights = vec![0.0f64; k];
    for _ in 0..iters {
        for (d, tokens) in docs.iter().enumerate() {
            for (pos, &w) in tokens.iter().enumerate() {
                let old = assignments[d][pos];
                doc_topic[d][old] -= 1;
                topic_term[old][w] -= 1;
                topic_total[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    let p = (doc_topic[d][t] as f64 + alpha)
                        * (topic_term[t][w] as f64 + beta)
                        / (topic_total[t] as f64 + vbeta);
                    weights[t] = p;
                    total += p;
                }
                let mut draw = rng.gen_range(0.0..total);
                let mut new = k - 1;
                for (t, &p) in weights.iter().enumerate() {
                    if draw < p {
                        new = t;
                        break;
                    }
                    draw -= p;
                }

                assignments[d][pos] = new;
                doc_topic[d][new] += 1;
                topic_term[new][w] += 1;
                topic_total[new] += 1;
            }
        }
    }

    let mut phi = Mat::zeros(k, n_terms);
    for t in 0..k {
        let denom = topic_total[t] as f64 + vbeta;
        for w in 0..n_terms {
            *phi.at_mut(t, w) = (topic_term[t][w] as f64 + beta) / denom;
        }
    }

    Ok(LdaModel {
        phi,
        k,
        alpha,
        beta,
        seed,
        vectorizer: m.vectorizer.clone(),
    })
}

impl LdaModel {
    /// Indices of the `n` highest-probability terms of a topic.
    pub fn top_terms(&self, topic: usize, n: usize) -> Vec<usize> {
        let row = self.phi.row(topic);
        let mut order: Vec<usize> = (0..row.len()).collect();
        order.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
        order.truncate(n);
        order
    }

    /// Fold in a new text with phi fixed. The random stream is keyed by the
    /// model seed and the token content, so the result is a pure function of
    /// (model, text).
    pub fn fold_in(&self, text: &str) -> Vec<f64> {
        let counts = self.vectorizer.vectorize(text);
        let mut tokens = Vec::new();
        for (w, &c) in counts.iter().enumerate() {
            for _ in 0..c.round().max(0.0) as usize {
                tokens.push(w);
            }
        }
        if tokens.is_empty() {
            return vec![0.0; self.k];
        }

        let mut content_key: u64 = 0xcbf29ce484222325;
        for &w in &tokens {
            content_key ^= w as u64;
            content_key = content_key.wrapping_mul(0x100000001b3);
        }
        let mut rng =
            ChaCha8Rng::seed_from_u64(self.seed ^ content_key.wrapping_mul(0x9e3779b97f4a7c15));

        let mut doc_topic = vec![0u32; self.k];
        let mut assignments: Vec<usize> =
            tokens.iter().map(|_| rng.gen_range(0..self.k)).collect();
        for &t in &assignments {
            doc_topic[t] += 1;
        }
        let mut weights = vec![0.0f64; self.k];
        for _ in 0..FOLD_IN_SWEEPS {
            for (pos, &w) in tokens.iter().enumerate() {
                let old = assignments[pos];
                doc_topic[old] -= 1;
                let mut total = 0.0;
                for t in 0..self.k {
                    let p = (doc_topic[t] as f64 + self.alpha) * self.phi.at(t, w);
                    weights[t] = p;
                    total += p;
                }
                let mut draw = rng.gen_range(0.0..total);
                let mut new = self.k - 1;
                for (t, &p) in weights.iter().enumerate() {
                    if draw < p {
                        new = t;
                        break;
                    }
                    draw -= p;
                }
                assignments[pos] = new;
                doc_topic[new] += 1;
            }
        }

        let denom = tokens.len() as f64 + self.k as f64 * self.alpha;
        doc_topic
            .iter()
            .map(|&c| (c as f64 + self.alpha) / denom)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{fit_vocabulary, GramUnit};
    use crate::topics::build_term_doc;

    fn two_topic_corpus() -> TermDocMatrix {
        let mut texts: Vec<String> = Vec::new();
        for i in 0..12 {
            if i % 2 == 0 {
                texts.push("apple banana ".repeat(10).trim().to_string());
            } else {
                texts.push("carrot daikon ".repeat(10).trim().to_string());
            }
        }
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let vocab = fit_vocabulary(&refs, GramUnit::words(&[1]), 10).unwrap();
        build_term_doc(&refs, &vocab, Weighting::Tf)
    }

    #[test]
    fn phi_rows_are_distributions() {
        let td = two_topic_corpus();
        let model = fit_lda(&td, 2, None, None, 50, 1).unwrap();
        for t in 0..model.k {
            let sum: f64 = model.phi.row(t).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(model.phi.row(t).iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn disjoint_vocabularies_separate() {
        let td = two_topic_corpus();
        let fruit: Vec<usize> = ["apple", "banana"]
            .iter()
            .map(|w| td.vectorizer.vocab.index_of(w).unwrap())
            .collect();
        let veg: Vec<usize> = ["carrot", "daikon"]
            .iter()
            .map(|w| td.vectorizer.vocab.index_of(w).unwrap())
            .collect();
        let mut successes = 0;
        for seed in 0..10 {
            // A sparse document-topic prior makes the separation crisp on
            // short synthetic documents.
            let model = fit_lda(&td, 2, Some(0.1), None, 100, seed).unwrap();
            let top0 = model.top_terms(0, 2);
            let top1 = model.top_terms(1, 2);
            let sorted = |mut v: Vec<usize>| {
                v.sort_unstable();
                v
            };
            let (top0, top1) = (sorted(top0), sorted(top1));
            let fruit_sorted = sorted(fruit.clone());
            let veg_sorted = sorted(veg.clone());
            let separated = (top0 == fruit_sorted && top1 == veg_sorted)
                || (top0 == veg_sorted && top1 == fruit_sorted);
            if separated {
                successes += 1;
            }
        }
        assert!(successes >= 9, "separated in {successes}/10 seeds");
    }

    #[test]
    fn deterministic_given_seed() {
        let td = two_topic_corpus();
        let a = fit_lda(&td, 2, None, None, 30, 99).unwrap();
        let b = fit_lda(&td, 2, None, None, 30, 99).unwrap();
        assert_eq!(a.phi, b.phi);
    }

    #[test]
    fn rejects_non_integer_matrix() {
        let mut td = two_topic_corpus();
        td.matrix.data[0] = 0.5;
        assert!(fit_lda(&td, 2, None, None, 10, 0).is_err());
    }

    #[test]
    fn fold_in_is_content_keyed() {
        let td = two_topic_corpus();
        let model = fit_lda(&td, 2, None, None, 50, 3).unwrap();
        let a = model.fold_in("apple banana apple");
        let b = model.fold_in("apple banana apple");
        assert_eq!(a, b);
        assert_eq!(model.fold_in("zzz unseen words"), vec![0.0, 0.0]);
        let sum: f64 = a.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
}
