use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::Matrix;

/// Largest asymmetry |a_ij − a_ji| accepted at construction, relative to the
/// largest entry. Anything within it is averaged away.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Dense real symmetric matrix. Symmetry is exact: `get(i, j) == get(j, i)`
/// bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Builds from a row-major `dim × dim` buffer, averaging `(A + Aᵀ)/2` when
    /// the input is symmetric up to rounding and rejecting it otherwise.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("symmetric matrix must have dim >= 1"));
        }
        if data.len() != dim * dim {
            return Err(Error::input(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite entry at ({}, {})",
                k / dim,
                k % dim
            )));
        }
        let scale = data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0_f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                worst = worst.max((data[i * dim + j] - data[j * dim + i]).abs());
            }
        }
        if worst > SYMMETRY_TOLERANCE * scale {
            return Err(Error::input(format!(
                "matrix is not symmetric (max asymmetry {worst:.3e}, scale {scale:.3e})"
            )));
        }
        Ok(Self::from_upper(dim, |i, j| {
            0.5 * (data[i * dim + j] + data[j * dim + i])
        }))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::input("symmetric matrix rows must all have length dim"));
        }
        Self::new(dim, rows.concat())
    }

    /// Builds from a function evaluated on the upper triangle only; the lower
    /// triangle is mirrored.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_upper(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_upper(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.to_matrix().mul_vec(v)
    }

    pub fn mul(&self, other: &SymmetricMatrix) -> Result<Matrix> {
        self.to_matrix().mul(&other.to_matrix())
    }

    pub fn scaled(&self, factor: f64) -> SymmetricMatrix {
        Self::from_upper(self.dim, |i, j| factor * self.get(i, j))
    }

    /// `P A Pᵀ` where row `i` of the result is row `perm[i]` of `A`.
    pub fn permuted(&self, perm: &[usize]) -> Result<SymmetricMatrix> {
        let mut seen = vec![false; self.dim];
        if perm.len() != self.dim
            || perm.iter().any(|&k| k >= self.dim || std::mem::replace(&mut seen[k], true))
        {
            return Err(Error::input("not a permutation of the matrix indices"));
        }
        Ok(Self::from_upper(self.dim, |i, j| self.get(perm[i], perm[j])))
    }
}
