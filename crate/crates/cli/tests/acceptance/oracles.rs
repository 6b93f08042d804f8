//! Reference implementations for the acceptance suite. None of these share
//! code with the library.

#![allow(dead_code)]

use nestspec::cox::SurvivalData;
use nestspec::rng::seeded;
use nestspec::{Matrix, SymmetricMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn dense(a: &SymmetricMatrix) -> Vec<Vec<f64>> {
    a.rows()
}

/// det(A) by LU with partial pivoting.
pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        if a[pivot][k] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            a.swap(pivot, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let factor = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= factor * a[k][j];
            }
        }
    }
    det
}

/// Number of eigenvalues of symmetric `a` below `x`, from the signs of the
/// LDLᵀ pivots of A − xI (Sylvester's law of inertia).
fn count_below(a: &[Vec<f64>], x: f64) -> usize {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= x;
    }
    let mut negatives = 0;
    for k in 0..n {
        let mut d = m[k][k];
        if d == 0.0 {
            d = -f64::EPSILON * (1.0 + x.abs());
        }
        if d < 0.0 {
            negatives += 1;
        }
        for i in k + 1..n {
            let f = m[i][k] / d;
            for j in k + 1..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    negatives
}

/// Eigenvalues of a symmetric matrix (descending) by bisection on the
/// characteristic polynomial, located with LU-based sign counts and refined
/// by bisection on det(A − λI).
pub fn bisection_eigenvalues(a: &SymmetricMatrix) -> Vec<f64> {
    let rows = dense(a);
    let n = rows.len();
    let bound = rows
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        // k-th smallest eigenvalue: smallest x with count_below(x) > k
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if count_below(&rows, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * bound {
                break;
            }
        }
        values.push(0.5 * (lo + hi));
    }
    values.reverse();
    values
}

/// Shifted characteristic polynomial det(A − λI).
pub fn characteristic(a: &SymmetricMatrix, lambda: f64) -> f64 {
    let mut rows = dense(a);
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    determinant(rows)
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(pivot, k);
        b.swap(pivot, k);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// OLS coefficients from explicitly formed normal equations.
pub fn normal_equations(x: &Matrix, y: &[f64]) -> Vec<f64> {
    let (n, p) = (x.rows(), x.cols());
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for i in 0..n {
        for a in 0..p {
            xty[a] += x.get(i, a) * y[i];
            for b in 0..p {
                xtx[a][b] += x.get(i, a) * x.get(i, b);
            }
        }
    }
    gauss_solve(xtx, xty)
}

/// AR coefficients and innovation variance by the Levinson-Durbin recursion.
pub fn levinson_durbin(gamma: &[f64], p: usize) -> (Vec<f64>, f64) {
    let mut phi: Vec<f64> = Vec::new();
    let mut err = gamma[0];
    for k in 1..=p {
        let acc: f64 = (1..k).map(|j| phi[j - 1] * gamma[k - j]).sum();
        let reflection = (gamma[k] - acc) / err;
        let mut next = vec![0.0; k];
        for j in 1..k {
            next[j - 1] = phi[j - 1] - reflection * phi[k - j - 1];
        }
        next[k - 1] = reflection;
        phi = next;
        err *= 1.0 - reflection * reflection;
    }
    (phi, err)
}

/// Central-difference gradient.
pub fn gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[i] += h;
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian.
pub fn hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let at = |di: usize, si: f64, dj: usize, sj: f64| {
        let mut z = x.to_vec();
        z[di] += si * h;
        z[dj] += sj * h;
        f(&z)
    };
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = (at(i, 1.0, j, 1.0) - at(i, 1.0, j, -1.0) - at(i, -1.0, j, 1.0)
                + at(i, -1.0, j, -1.0))
                / (4.0 * h * h);
        }
    }
    out
}

/// Cox log partial likelihood by rescanning the risk set for every event.
pub fn naive_partial_loglik(beta: &[f64], data: &SurvivalData) -> f64 {
    let eta: Vec<f64> = data
        .records()
        .iter()
        .map(|r| r.covariates.iter().zip(beta).map(|(x, b)| x * b).sum())
        .collect();
    let mut total = 0.0;
    for (i, ri) in data.records().iter().enumerate() {
        if !ri.event {
            continue;
        }
        let at_risk: Vec<f64> = data
            .records()
            .iter()
            .zip(&eta)
            .filter(|(rj, _)| rj.time >= ri.time)
            .map(|(_, &e)| e)
            .collect();
        let top = at_risk.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = at_risk.iter().map(|e| (e - top).exp()).sum();
        total += eta[i] - (top + sum.ln());
    }
    total
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = seeded(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_symmetric(dim: usize, seed: u64) -> SymmetricMatrix {
    let mut rng = seeded(seed);
    let mut vals = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let v: f64 = rng.sample(StandardNormal);
            vals[i * dim + j] = v;
            vals[j * dim + i] = v;
        }
    }
    SymmetricMatrix::new(dim, vals).unwrap()
}
