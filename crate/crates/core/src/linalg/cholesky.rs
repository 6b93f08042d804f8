use crate::error::{Error, Result};

use super::{SymmetricMatrix, RANK_TOLERANCE};

/// Lower-triangular factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factorizes a symmetric positive definite matrix. A pivot at or below
    /// `RANK_TOLERANCE · max_i a_ii` is reported as singular; its index is
    /// the first row/column that is linearly dependent on the earlier ones.
    pub fn new(a: &SymmetricMatrix) -> Result<Self> {
        let n = a.dim();
        let scale = (0..n).fold(0.0_f64, |m, i| m.max(a.get(i, i)));
        let tolerance = RANK_TOLERANCE * scale;
        let mut lower = vec![0.0; n * n];
        for j in 0..n {
            let row_j = &lower[j * n..j * n + j];
            let pivot = a.get(j, j) - row_j.iter().map(|v| v * v).sum::<f64>();
            if !(pivot > tolerance) {
                return Err(Error::Singular {
                    index: j,
                    pivot,
                    tolerance,
                });
            }
            let d = pivot.sqrt();
            lower[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= lower[i * n + k] * lower[j * n + k];
                }
                lower[i * n + j] = s / d;
            }
        }
        Ok(Self { dim: n, lower })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn l(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim);
        let mut y = b.to_vec();
        for i in 0..self.dim {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l(i, k) * y[k];
            }
            y[i] = s / self.l(i, i);
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn backward(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.dim);
        let mut x = y.to_vec();
        for i in (0..self.dim).rev() {
            let mut s = x[i];
            for k in (i + 1)..self.dim {
                s -= self.l(k, i) * x[k];
            }
            x[i] = s / self.l(i, i);
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }

    /// `A⁻¹ = L⁻ᵀ L⁻¹`, assembled as `Σ_k c_k c_kᵀ` over the columns of `L⁻¹`.
    pub fn inverse(&self) -> SymmetricMatrix {
        let n = self.dim;
        // rows of L⁻¹
        let mut linv = vec![0.0; n * n];
        for col in 0..n {
            let mut e = vec![0.0; n];
            e[col] = 1.0;
            let c = self.forward(&e);
            for (row, v) in c.into_iter().enumerate() {
                linv[row * n + col] = v;
            }
        }
        SymmetricMatrix::from_upper(n, |i, j| {
            (j.max(i)..n).map(|k| linv[k * n + i] * linv[k * n + j]).sum()
        })
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.l(i, i).ln()).sum::<f64>()
    }
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn invert_spd(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    Ok(Cholesky::new(a)?.inverse())
}
