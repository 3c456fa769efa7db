//! Latent semantic indexing: truncated SVD of the term-document matrix by
//! deterministic subspace iteration on M^T M with Rayleigh-Ritz refinement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::linalg::{jacobi_eigh, orthonormalize_columns, Mat};
use super::{TermDocMatrix, TermVectorizer};

const EIG_TOL: f64 = 1e-10;
const MAX_ITERS: usize = 10_000;
const SIGMA_TOL: f64 = 1e-10;
const INIT_SEED: u64 = 0x5eed_1517;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsiModel {
    /// Top-k right singular vectors scaled by 1/sigma (n_terms x k); columns
    /// with sigma below tolerance are zeroed.
    pub projection: Mat,
    /// Singular values, descending.
    pub singular_values: Vec<f64>,
    pub vectorizer: TermVectorizer,
}

/// Truncated SVD via fixed-seed block subspace iteration.
pub fn fit_lsi(m: &TermDocMatrix, k: usize) -> Result<LsiModel> {
    let mat = &m.matrix;
    if k == 0 || k > mat.rows.min(mat.cols) {
        return Err(Error::invalid(format!(
            "k = {k} out of range for a {}x{} matrix",
            mat.rows, mat.cols
        )));
    }

    let n_terms = mat.cols;
    let mut rng = ChaCha8Rng::seed_from_u64(INIT_SEED);
    let mut v = Mat::zeros(n_terms, k);
    for x in v.data.iter_mut() {
        *x = rng.gen_range(-1.0..1.0);
    }
    orthonormalize_columns(&mut v);

    let mut previous = vec![f64::INFINITY; k];
    let mut ritz = Mat::zeros(k, k);
    for _ in 0..MAX_ITERS {
        // V <- orth(M^T (M V)); Ritz values from (MV)^T (MV).
        let y = mat.matmul(&v);
        let mut z = mat.transpose_matmul(&y);
        orthonormalize_columns(&mut z);
        v = z;

        let y = mat.matmul(&v);
        ritz = y.transpose_matmul(&y);
        let (values, _) = jacobi_eigh(&ritz);
        let scale = values.first().copied().unwrap_or(0.0).max(1.0);
        let converged = values
            .iter()
            .zip(&previous)
            .all(|(now, before)| (now - before).abs() <= EIG_TOL * scale);
        previous = values;
        if converged {
            break;
        }
    }

    // Rotate the subspace onto the Ritz vectors for accurate singular pairs.
    let (values, vectors) = jacobi_eigh(&ritz);
    let v = v.matmul(&vectors);
    let singular_values: Vec<f64> = values.iter().map(|&l| l.max(0.0).sqrt()).collect();

    let mut projection = v;
    for j in 0..k {
        let sigma = singular_values[j];
        for i in 0..n_terms {
            let cell = projection.at_mut(i, j);
            *cell = if sigma > SIGMA_TOL { *cell / sigma } else { 0.0 };
        }
    }

    Ok(LsiModel {
        projection,
        singular_values,
        vectorizer: m.vectorizer.clone(),
    })
}

impl LsiModel {
    pub fn k(&self) -> usize {
        self.singular_values.len()
    }

    /// Unscaled right singular vectors (projection columns times sigma).
    pub fn right_singular_vectors(&self) -> Mat {
        let mut v = self.projection.clone();
        for j in 0..self.k() {
            for i in 0..v.rows {
                *v.at_mut(i, j) *= self.singular_values[j];
            }
        }
        v
    }

    pub fn fold_in(&self, text: &str) -> Vec<f64> {
        self.fold_in_vector(&self.vectorizer.vectorize(text))
    }

    pub fn fold_in_vector(&self, v: &[f64]) -> Vec<f64> {
        (0..self.k())
            .map(|j| (0..self.projection.rows).map(|i| self.projection.at(i, j) * v[i]).sum())
            .collect()
    }
}
