//! Minimal dense row-major matrices and a cyclic Jacobi eigensolver for the
//! small symmetric systems the topic models need.

use serde::{Deserialize, Serialize};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        debug_assert!(rows.iter().all(|r| r.len() == cols));
        Mat {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `self * other`
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.at(i, l);
                if a == 0.0 {
                    continue;
                }
                let other_row = other.row(l);
                let out_row = out.row_mut(i);
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self^T * other`
    pub fn transpose_matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows, "transpose_matmul shape mismatch");
        let mut out = Mat::zeros(self.cols, other.cols);
        for l in 0..self.rows {
            for i in 0..self.cols {
                let a = self.at(l, i);
                if a == 0.0 {
                    continue;
                }
                let other_row = other.row(l);
                let out_row = out.row_mut(i);
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * other^T`
    pub fn matmul_transpose(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols, "matmul_transpose shape mismatch");
        let mut out = Mat::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            for j in 0..other.rows {
                let mut sum = 0.0;
                let a = self.row(i);
                let b = other.row(j);
                for l in 0..self.cols {
                    sum += a[l] * b[l];
                }
                *out.at_mut(i, j) = sum;
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = self.at(i, j);
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &Mat) -> f64 {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Orthonormalize the columns of `m` in place with modified Gram-Schmidt
/// (two passes for stability). Degenerate columns are replaced by unit
/// vectors so iteration never produces NaN.
pub fn orthonormalize_columns(m: &mut Mat) {
    let (rows, cols) = (m.rows, m.cols);
    for j in 0..cols {
        for _pass in 0..2 {
            for prev in 0..j {
                let mut dot = 0.0;
                for i in 0..rows {
                    dot += m.at(i, j) * m.at(i, prev);
                }
                for i in 0..rows {
                    *m.at_mut(i, j) -= dot * m.at(i, prev);
                }
            }
        }
        let mut norm = 0.0;
        for i in 0..rows {
            norm += m.at(i, j) * m.at(i, j);
        }
        norm = norm.sqrt();
        if norm < 1e-12 {
            for i in 0..rows {
                *m.at_mut(i, j) = if i == j % rows { 1.0 } else { 0.0 };
            }
            for prev in 0..j {
                let mut dot = 0.0;
                for i in 0..rows {
                    dot += m.at(i, j) * m.at(i, prev);
                }
                for i in 0..rows {
                    *m.at_mut(i, j) -= dot * m.at(i, prev);
                }
            }
            let mut renorm = 0.0;
            for i in 0..rows {
                renorm += m.at(i, j) * m.at(i, j);
            }
            renorm = renorm.sqrt().max(1e-12);
            for i in 0..rows {
                *m.at_mut(i, j) /= renorm;
            }
        } else {
            for i in 0..rows {
                *m.at_mut(i, j) /= norm;
            }
        }
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order and the matching eigenvector
/// columns.
pub fn jacobi_eigh(a: &Mat) -> (Vec<f64>, Mat) {
    assert_eq!(a.rows, a.cols, "jacobi_eigh needs a square matrix");
    let n = a.rows;
    let mut m = a.clone();
    let mut v = Mat::zeros(n, n);
    for i in 0..n {
        *v.at_mut(i, i) = 1.0;
    }

    let off = |m: &Mat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m.at(i, j) * m.at(i, j);
                }
            }
        }
        s.sqrt()
    };
    let scale = a.frobenius().max(1e-300);

    for _sweep in 0..100 {
        if off(&m) <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.at(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m.at(p, p);
                let aqq = m.at(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m.at(i, p);
                    let miq = m.at(i, q);
                    *m.at_mut(i, p) = c * mip - s * miq;
                    *m.at_mut(i, q) = s * mip + c * miq;
                }
                for j in 0..n {
                    let mpj = m.at(p, j);
                    let mqj = m.at(q, j);
                    *m.at_mut(p, j) = c * mpj - s * mqj;
                    *m.at_mut(q, j) = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let vip = v.at(i, p);
                    let viq = v.at(i, q);
                    *v.at_mut(i, p) = c * vip - s * viq;
                    *v.at_mut(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let eigenvalues: Vec<f64> = (0..n).map(|i| m.at(i, i)).collect();
    order.sort_by(|&i, &j| eigenvalues[j].partial_cmp(&eigenvalues[i]).unwrap());
    let sorted_values: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let mut sorted_vectors = Mat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            *sorted_vectors.at_mut(i, new_col) = v.at(i, old_col);
        }
    }
    (sorted_values, sorted_vectors)
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small() {
        let a = Mat::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = Mat::from_rows(vec![vec![5.0, 6.0], vec![7.0, 8.0]]);
        let c = a.matmul(&b);
        assert_eq!(c.data, vec![19.0, 22.0, 43.0, 50.0]);
        let ct = a.transpose_matmul(&b);
        assert_eq!(ct.data, a.transpose().matmul(&b).data);
        let cm = a.matmul_transpose(&b);
        assert_eq!(cm.data, a.matmul(&b.transpose()).data);
    }

    #[test]
    fn jacobi_diagonal() {
        let m = Mat::from_rows(vec![
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ]);
        let (values, _) = jacobi_eigh(&m);
        assert!((values[0] - 3.0).abs() < 1e-12);
        assert!((values[1] - 2.0).abs() < 1e-12);
        assert!((values[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_symmetric_2x2() {
        // Eigenvalues of [[2,1],[1,2]] are 3 and 1.
        let m = Mat::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        let (values, vectors) = jacobi_eigh(&m);
        assert!((values[0] - 3.0).abs() < 1e-12);
        assert!((values[1] - 1.0).abs() < 1e-12);
        // Check A v = lambda v for the top eigenvector.
        let v0: Vec<f64> = (0..2).map(|i| vectors.at(i, 0)).collect();
        let av0: Vec<f64> = (0..2)
            .map(|i| (0..2).map(|j| m.at(i, j) * v0[j]).sum())
            .collect();
        for i in 0..2 {
            assert!((av0[i] - 3.0 * v0[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn orthonormalize_produces_orthonormal_columns() {
        let mut m = Mat::from_rows(vec![
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![0.0, 1.0],
        ]);
        orthonormalize_columns(&mut m);
        for j in 0..2 {
            let norm: f64 = (0..3).map(|i| m.at(i, j) * m.at(i, j)).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        let dot: f64 = (0..3).map(|i| m.at(i, 0) * m.at(i, 1)).sum();
        assert!(dot.abs() < 1e-12);
    }

    #[test]
    fn cosine_edge_cases() {
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
        assert!((cosine(&[1.0, 1.0], &[1.0, 1.0]) - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
    }
}
