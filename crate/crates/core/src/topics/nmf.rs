//! Non-negative matrix factorization with Lee-Seung multiplicative updates
//! minimizing the Frobenius reconstruction error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::linalg::Mat;
use super::{TermDocMatrix, TermVectorizer};

const DIV_EPS: f64 = 1e-12;
const REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmfModel {
    /// Document-topic weights (n_docs x k).
    pub w: Mat,
    /// Topic-term weights (k x n_terms).
    pub h: Mat,
    pub k: usize,
    /// Frobenius reconstruction error before the first update and after
    /// every iteration; non-increasing by construction.
    pub objective_trace: Vec<f64>,
    pub vectorizer: TermVectorizer,
}

/// Factorize `V ~ W H` with W, H >= 0. Stops after `iters` iterations or
/// when the relative objective change drops below 1e-6.
pub fn fit_nmf(m: &TermDocMatrix, k: usize, iters: usize, seed: u64) -> Result<NmfModel> {
    let v = &m.matrix;
    if k == 0 || k > v.rows.min(v.cols) {
        return Err(Error::invalid(format!(
            "k = {k} out of range for a {}x{} matrix",
            v.rows, v.cols
        )));
    }
    if v.data.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::invalid("NMF input must be non-negative and finite"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Mat::zeros(v.rows, k);
    let mut h = Mat::zeros(k, v.cols);
    for x in w.data.iter_mut().chain(h.data.iter_mut()) {
        *x = rng.gen_range(1e-3..1.0);
    }

    let mut trace = Vec::with_capacity(iters + 1);
    trace.push(v.frobenius_distance(&w.matmul(&h)));
    for _ in 0..iters {
        // H <- H .* (W^T V) ./ (W^T W H)
        let numer = w.transpose_matmul(v);
        let denom = w.transpose_matmul(&w).matmul(&h);
        for i in 0..h.data.len() {
            h.data[i] *= numer.data[i] / (denom.data[i] + DIV_EPS);
        }
        // W <- W .* (V H^T) ./ (W H H^T)
        let numer = v.matmul_transpose(&h);
        let denom = w.matmul(&h.matmul_transpose(&h));
        for i in 0..w.data.len() {
            w.data[i] *= numer.data[i] / (denom.data[i] + DIV_EPS);
        }

        let objective = v.frobenius_distance(&w.matmul(&h));
        let previous = *trace.last().expect("trace seeded");
        trace.push(objective);
        if (previous - objective).abs() < REL_TOL * previous.max(DIV_EPS) {
            break;
        }
    }

    Ok(NmfModel {
        w,
        h,
        k,
        objective_trace: trace,
        vectorizer: m.vectorizer.clone(),
    })
}

impl NmfModel {
    /// Non-negative least-squares fold-in: multiplicative updates on the
    /// topic weights with H fixed. Deterministic (uniform start).
    pub fn fold_in(&self, text: &str) -> Vec<f64> {
        let v = self.vectorizer.vectorize(text);
        self.fold_in_vector(&v)
    }

    pub fn fold_in_vector(&self, v: &[f64]) -> Vec<f64> {
        if v.iter().all(|&x| x == 0.0) {
            return vec![0.0; self.k];
        }
        // Precompute H H^T (k x k) and v H^T (k).
        let hht = self.h.matmul_transpose(&self.h);
        let mut vht = vec![0.0; self.k];
        for (t, row) in (0..self.k).map(|t| (t, self.h.row(t))) {
            vht[t] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        let mut w = vec![1.0 / self.k as f64; self.k];
        for _ in 0..200 {
            let mut max_change = 0.0f64;
            for t in 0..self.k {
                let denom: f64 = (0..self.k).map(|u| hht.at(t, u) * w[u]).sum::<f64>() + DIV_EPS;
                let updated = w[t] * vht[t] / denom;
                max_change = max_change.max((updated - w[t]).abs());
                w[t] = updated;
            }
            if max_change < 1e-9 {
                break;
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{fit_vocabulary, GramUnit};
    use crate::topics::{build_term_doc, Weighting};

    fn matrix_from(rows: Vec<Vec<f64>>) -> TermDocMatrix {
        let vocab = fit_vocabulary(&["placeholder"], GramUnit::words(&[1]), 1).unwrap();
        let mat = Mat::from_rows(rows);
        TermDocMatrix {
            matrix: mat,
            vectorizer: TermVectorizer {
                vocab,
                weighting: Weighting::Tf,
                idf: None,
            },
        }
    }

    #[test]
    fn rank_one_recovered() {
        let x = [1.0, 2.0, 0.5, 3.0];
        let y = [2.0, 1.0, 4.0];
        let rows: Vec<Vec<f64>> = x.iter().map(|a| y.iter().map(|b| a * b).collect()).collect();
        let td = matrix_from(rows);
        let model = fit_nmf(&td, 1, 2000, 42).unwrap();
        let error = td.matrix.frobenius_distance(&model.w.matmul(&model.h));
        assert!(error < 1e-6 * td.matrix.frobenius(), "error = {error}");
    }

    #[test]
    fn objective_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..15).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let td = matrix_from(rows);
        let model = fit_nmf(&td, 4, 100, 3).unwrap();
        for pair in model.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-10, "{} -> {}", pair[0], pair[1]);
        }
        assert!(model.w.data.iter().all(|&x| x >= 0.0));
        assert!(model.h.data.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let rows = vec![vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 1.0], vec![2.0, 1.0, 0.0]];
        let td = matrix_from(rows);
        let a = fit_nmf(&td, 2, 50, 11).unwrap();
        let b = fit_nmf(&td, 2, 50, 11).unwrap();
        assert_eq!(a.w, b.w);
        assert_eq!(a.h, b.h);
    }

    #[test]
    fn k_out_of_range() {
        let td = matrix_from(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!(fit_nmf(&td, 3, 10, 0).is_err());
        assert!(fit_nmf(&td, 0, 10, 0).is_err());
    }

    #[test]
    fn fold_in_zero_vector() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let td = matrix_from(rows);
        let model = fit_nmf(&td, 2, 50, 5).unwrap();
        assert_eq!(model.fold_in_vector(&[0.0, 0.0]), vec![0.0, 0.0]);
        let w = model.fold_in_vector(&[1.0, 0.0]);
        assert!(w.iter().all(|&x| x >= 0.0 && x.is_finite()));
    }
}
