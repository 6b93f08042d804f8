//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, IterationRecord, Result};

use super::{Matrix, SymmetricMatrix, RANK_TOLERANCE};

/// Sweeps stop once the off-diagonal Frobenius norm falls to this fraction
/// of the input's Frobenius norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix, sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    /// max |λ|; equals `eigenvalues[0]` for positive semi-definite input.
    pub spectral_radius: f64,
    pub min_eigenvalue: f64,
}

impl SpectralSummary {
    /// Sorts `eigenvalues` descending and derives the summary fields.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let largest = eigenvalues.first().copied().unwrap_or(0.0);
        let min_eigenvalue = eigenvalues.last().copied().unwrap_or(0.0);
        Self {
            spectral_radius: largest.abs().max(min_eigenvalue.abs()),
            min_eigenvalue,
            eigenvalues,
        }
    }

    /// λ₁, the largest eigenvalue.
    pub fn largest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// True when the smallest eigenvalue is at or below the rank tolerance.
    pub fn is_singular(&self) -> bool {
        self.min_eigenvalue <= RANK_TOLERANCE * self.spectral_radius
    }

    /// Spectrum of the inverse: reciprocals, re-sorted descending.
    pub fn inverted(&self) -> Result<SpectralSummary> {
        if self.is_singular() {
            return Err(Error::Singular {
                index: self.dim() - 1,
                pivot: self.min_eigenvalue,
                tolerance: RANK_TOLERANCE * self.spectral_radius,
            });
        }
        Ok(Self::from_eigenvalues(
            self.eigenvalues.iter().map(|l| 1.0 / l).collect(),
        ))
    }
}

/// Eigenvalues (descending) with eigenvectors stored as the columns of
/// `vectors`, so that `A = V diag(λ) Vᵀ`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn summary(&self) -> SpectralSummary {
        SpectralSummary::from_eigenvalues(self.values.clone())
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        SymmetricMatrix::from_upper(n, |i, j| {
            (0..n).map(|k| v.get(i, k) * self.values[k] * v.get(j, k)).sum()
        })
    }
}

pub fn jacobi_eigen(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    if let Some(k) = a.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::input(format!(
            "non-finite entry at ({}, {})",
            k / n,
            k % n
        )));
    }
    let mut m = a.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let initial = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = JACOBI_TOLERANCE * initial;
    let off_norm = |m: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut trace = Vec::new();
    loop {
        let off = off_norm(&m);
        if off <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Convergence {
                method: "jacobi eigensolver",
                iterations: sweeps,
                trace,
            });
        }
        trace.push(IterationRecord {
            iteration: sweeps,
            objective: off,
            step_norm: off,
        });
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = if tau.abs() > 1e150 {
                    0.5 / tau
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let kp = m[k * n + p];
                    let kq = m[k * n + q];
                    m[k * n + p] = c * kp - s * kq;
                    m[k * n + q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let pk = m[p * n + k];
                    let qk = m[q * n + k];
                    m[p * n + k] = c * pk - s * qk;
                    m[q * n + k] = s * pk + c * qk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let kp = v[k * n + p];
                    let kq = v[k * n + q];
                    v[k * n + p] = c * kp - s * kq;
                    v[k * n + q] = s * kp + c * kq;
                }
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = Matrix::from_fn(n, n, |row, col| v[row * n + order[col]]);
    Ok(EigenDecomposition {
        values,
        vectors,
        sweeps,
    })
}

/// All eigenvalues of `a`, sorted descending.
pub fn eigenvalues_symmetric(a: &SymmetricMatrix) -> Result<SpectralSummary> {
    Ok(jacobi_eigen(a)?.summary())
}

/// λ₁(A⁻¹) = 1/λ_min(A) for symmetric positive definite `A`.
pub fn spectral_radius_of_inverse(a: &SymmetricMatrix) -> Result<f64> {
    Ok(eigenvalues_symmetric(a)?.inverted()?.largest())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::invert_spd;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn two_by_two() {
        let a = SymmetricMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let s = eigenvalues_symmetric(&a).unwrap();
        assert!(close(&s.eigenvalues, &[3.0, 1.0], 1e-14));
        assert_eq!(s.spectral_radius, s.eigenvalues[0]);
    }

    #[test]
    fn identity() {
        let s = eigenvalues_symmetric(&SymmetricMatrix::identity(3)).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn zero_matrix() {
        let s = eigenvalues_symmetric(&SymmetricMatrix::diagonal(&[0.0, 0.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 0.0]);
        assert!(s.is_singular());
    }

    #[test]
    fn indefinite_radius_uses_magnitude() {
        let s = eigenvalues_symmetric(&SymmetricMatrix::diagonal(&[1.0, -3.0])).unwrap();
        assert_eq!(s.largest(), 1.0);
        assert_eq!(s.spectral_radius, 3.0);
    }

    #[test]
    fn non_finite_rejected() {
        let a = SymmetricMatrix::from_upper(2, |i, j| if i == j { f64::INFINITY } else { 0.0 });
        assert!(matches!(eigenvalues_symmetric(&a), Err(Error::Input(_))));
    }

    #[test]
    fn inverse_radius_examples() {
        assert_eq!(
            spectral_radius_of_inverse(&SymmetricMatrix::diagonal(&[4.0, 2.0])).unwrap(),
            0.5
        );
        assert_eq!(
            spectral_radius_of_inverse(&SymmetricMatrix::identity(5)).unwrap(),
            1.0
        );
        let a = SymmetricMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((spectral_radius_of_inverse(&a).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_radius_singular() {
        let a = SymmetricMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            spectral_radius_of_inverse(&a),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn inverse_radius_agrees_with_inverted_matrix() {
        let a = SymmetricMatrix::from_rows(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ])
        .unwrap();
        let direct = eigenvalues_symmetric(&invert_spd(&a).unwrap())
            .unwrap()
            .spectral_radius;
        let r = spectral_radius_of_inverse(&a).unwrap();
        assert!((r - direct).abs() <= 1e-8 * direct);
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let a = SymmetricMatrix::from_rows(&[
            vec![4.0, 1.0, 0.0],
            vec![1.0, 5.0, 2.0],
            vec![0.0, 2.0, 6.0],
        ])
        .unwrap();
        let e = jacobi_eigen(&a).unwrap();
        let vtv = e.vectors.transpose().mul(&e.vectors).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((vtv.get(i, j) - want).abs() < 1e-13);
            }
        }
    }
}
