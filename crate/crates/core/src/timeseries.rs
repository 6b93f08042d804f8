//! Autoregressive models via Yule-Walker.
//!
//! Convention: `x_t = φ₁x_{t−1} + … + φ_p x_{t−p} + ε_t`, so in the
//! polynomial form `a₀x_t + a₁x_{t−1} + … = ε_t` we have `a₀ = 1` and
//! `a_k = −φ_k`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, ModelRole, Result};
use crate::linalg::{eigenvalues_symmetric, Cholesky, ColumnSubset, SpectralSummary, SymmetricMatrix};
use crate::report::{assemble, ComparisonMode, ModelFamily, NestedComparisonReport, Sides};
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeriesSample {
    values: Vec<f64>,
}

impl TimeSeriesSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("time series is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("observation {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Contiguous sub-series `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<TimeSeriesSample> {
        if start >= end || end > self.len() {
            return Err(Error::input(format!("invalid range {start}..{end}")));
        }
        Self::new(self.values[start..end].to_vec())
    }

    /// Errors unless the series has at least `3 · order` values.
    pub fn require_order(&self, order: usize) -> Result<()> {
        if self.len() < 3 * order {
            return Err(Error::input(format!(
                "series of length {} is too short for order {order} (needs at least {})",
                self.len(),
                3 * order
            )));
        }
        Ok(())
    }
}

/// γ̂₀ … γ̂_maxlag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutocovarianceEstimate {
    pub gamma: Vec<f64>,
}

impl AutocovarianceEstimate {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() || gamma.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("autocovariances must be finite and non-empty"));
        }
        if !(gamma[0] > 0.0) {
            return Err(Error::input("gamma_0 must be positive"));
        }
        Ok(Self { gamma })
    }

    pub fn maxlag(&self) -> usize {
        self.gamma.len() - 1
    }
}

/// γ̂_l = (1/n) Σ_{t=1}^{n−l} (x_t − x̄)(x_{t+l} − x̄). The 1/n divisor makes
/// every Toeplitz matrix built from the estimate positive semi-definite.
pub fn autocovariance(x: &TimeSeriesSample, maxlag: usize) -> Result<AutocovarianceEstimate> {
    let n = x.len();
    if maxlag >= n {
        return Err(Error::input(format!("maxlag {maxlag} must be below the series length {n}")));
    }
    let mean = x.mean();
    let centered: Vec<f64> = x.values.iter().map(|v| v - mean).collect();
    let gamma: Vec<f64> = (0..=maxlag)
        .map(|l| {
            centered[..n - l]
                .iter()
                .zip(&centered[l..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect();
    if !(gamma[0] > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    Ok(AutocovarianceEstimate { gamma })
}

/// `size × size` symmetric Toeplitz matrix with entries γ̂_{|i−j|}.
pub fn toeplitz_from(gamma: &AutocovarianceEstimate, size: usize) -> Result<SymmetricMatrix> {
    if size == 0 || size > gamma.gamma.len() {
        return Err(Error::input(format!(
            "Toeplitz size {size} needs lags up to {} but only {} are available",
            size.saturating_sub(1),
            gamma.maxlag()
        )));
    }
    Ok(SymmetricMatrix::from_upper(size, |i, j| gamma.gamma[j - i]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YuleWalkerSolution {
    pub phi: Vec<f64>,
    /// Innovation variance σ² = γ̂₀ − Σ φ_k γ̂_k.
    pub sigma2: f64,
    pub order: usize,
    pub toeplitz_spectrum: SpectralSummary,
}

impl YuleWalkerSolution {
    /// Polynomial coefficients (a₀, …, a_p) = (1, −φ₁, …, −φ_p).
    pub fn polynomial_coefficients(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.phi.iter().map(|v| -v)).collect()
    }
}

/// Solves Toeplitz(γ̂, p) φ = (γ̂₁ … γ̂_p)ᵀ by Cholesky and sets
/// σ² = γ̂₀ − φᵀ(γ̂₁ … γ̂_p)ᵀ.
pub fn solve_yule_walker(gamma: &AutocovarianceEstimate, p: usize) -> Result<YuleWalkerSolution> {
    if p == 0 {
        return Err(Error::input("AR order must be at least 1"));
    }
    if p > gamma.maxlag() {
        return Err(Error::input(format!(
            "order {p} needs autocovariances up to lag {p}, have {}",
            gamma.maxlag()
        )));
    }
    let toeplitz = toeplitz_from(gamma, p)?;
    let rhs = &gamma.gamma[1..=p];
    let phi = Cholesky::new(&toeplitz)?.solve(rhs);
    let sigma2 = gamma.gamma[0] - phi.iter().zip(rhs).map(|(a, b)| a * b).sum::<f64>();
    Ok(YuleWalkerSolution {
        phi,
        sigma2,
        order: p,
        toeplitz_spectrum: eigenvalues_symmetric(&toeplitz)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmaVarianceResult {
    pub sigma2_ma: f64,
    pub b: Vec<f64>,
    pub sigma2: f64,
}

/// σ²_MA = σ² (1 + b₁² + … + b_q²).
pub fn arma_ma_variance(sigma2: f64, b: &[f64]) -> Result<ArmaVarianceResult> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::input(format!("white-noise variance {sigma2} must be non-negative")));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("MA coefficients must be finite"));
    }
    let sigma2_ma = sigma2 * (1.0 + b.iter().map(|v| v * v).sum::<f64>());
    Ok(ArmaVarianceResult {
        sigma2_ma,
        b: b.to_vec(),
        sigma2,
    })
}

/// Saturated AR(p) vs nested AR(m), m < p.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArComparison {
    pub report: NestedComparisonReport,
    pub saturated: YuleWalkerSolution,
    pub nested: YuleWalkerSolution,
}

/// Builds Toeplitz(γ̂, p) and its leading block Toeplitz(γ̂, m), and compares
/// spectra and the two Yule-Walker innovation variances (the nested one is
/// the larger, the AR analogue of bias).
pub fn compare_nested_ar(x: &TimeSeriesSample, p: usize, m: usize) -> Result<ArComparison> {
    if m == 0 || m >= p {
        return Err(Error::input(format!("nested order {m} must be in 1..{p}")));
    }
    x.require_order(p)?;
    let gamma = autocovariance(x, p)?;
    let saturated = solve_yule_walker(&gamma, p).map_err(Error::in_model(ModelRole::Saturated))?;
    let nested = solve_yule_walker(&gamma, m).map_err(Error::in_model(ModelRole::Nested))?;
    let g0 = gamma.gamma[0];
    let report = assemble(
        ModelFamily::Ar,
        ComparisonMode::Exact,
        ColumnSubset::leading(m, p)?.indices().to_vec(),
        Sides {
            bias: (saturated.sigma2, nested.sigma2),
            bias_scale: g0,
            residual_norm: (saturated.sigma2.max(0.0).sqrt(), nested.sigma2.max(0.0).sqrt()),
            residual_scale: g0.sqrt(),
        },
        &toeplitz_from(&gamma, p)?,
        &toeplitz_from(&gamma, m)?,
    )?;
    Ok(ArComparison {
        report,
        saturated,
        nested,
    })
}

/// Roots of the AR polynomial 1 − φ₁z − … − φ_p z^p, by Durand–Kerner on the
/// reciprocal polynomial z^p − φ₁z^{p−1} − … − φ_p.
pub fn ar_polynomial_roots(phi: &[f64]) -> Vec<Complex64> {
    let p = phi.len();
    if p == 0 {
        return Vec::new();
    }
    // monic coefficients, highest degree first
    let coeffs: Vec<f64> = std::iter::once(1.0).chain(phi.iter().map(|v| -v)).collect();
    let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let radius = 1.0 + phi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..p).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..500 {
        let mut moved = 0.0_f64;
        for i in 0..p {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..p {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let dz = eval(z[i]) / denom;
            z[i] -= dz;
            moved = moved.max(dz.norm());
        }
        if moved < 1e-15 * radius {
            break;
        }
    }
    // λ is a root of the reciprocal polynomial ⇔ 1/λ is a root of the AR one
    z.into_iter().map(|l| l.inv()).collect()
}

/// Errors unless every AR root lies strictly outside the unit circle.
pub fn check_stationary(phi: &[f64]) -> Result<()> {
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("AR coefficients must be finite"));
    }
    if let Some(root) = ar_polynomial_roots(phi)
        .into_iter()
        .filter(|r| !(r.norm() > 1.0 + 1e-9))
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
    {
        return Err(Error::input(format!(
            "AR coefficients are not stationary: root {root:.6} has modulus {:.6} <= 1",
            root.norm()
        )));
    }
    Ok(())
}

/// Simulates `n` values of a stationary Gaussian AR process, discarding a
/// burn-in of 10·p values.
pub fn simulate_ar(phi: &[f64], sigma: f64, n: usize, seed: u64) -> Result<TimeSeriesSample> {
    check_stationary(phi)?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::input(format!("noise sd {sigma} must be positive")));
    }
    if n == 0 {
        return Err(Error::input("series length must be positive"));
    }
    let mut rng = seeded(seed);
    simulate_ar_with(phi, sigma, n, &mut rng)
}

pub(crate) fn simulate_ar_with<R: Rng>(phi: &[f64], sigma: f64, n: usize, rng: &mut R) -> Result<TimeSeriesSample> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::input(e.to_string()))?;
    let p = phi.len();
    let burn = 10 * p;
    let mut x = vec![0.0; burn + n];
    for t in 0..x.len() {
        let ar: f64 = (1..=p.min(t)).map(|k| phi[k - 1] * x[t - k]).sum();
        x[t] = ar + normal.sample(rng);
    }
    TimeSeriesSample::new(x.split_off(burn))
}
