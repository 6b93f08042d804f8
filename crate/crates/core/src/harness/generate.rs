use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Exp1, Poisson, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::cox::{SurvivalData, SurvivalRecord};
use crate::error::{Error, Result};
use crate::glm::GlmFamily;
use crate::linalg::Matrix;
use crate::rng::{seeded, StreamRng};
use crate::timeseries::{check_stationary, simulate_ar_with, TimeSeriesSample};

use super::polynomial_design;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorFamily {
    Linear,
    Binomial,
    Poisson,
    Survival,
    Ar,
}

/// A synthetic data-generating model.
///
/// `params` holds β for the regression and survival families (its length is
/// the covariate count) and φ for `ar`. `noise` is the noise sd for `linear`
/// and `ar`, the target censoring fraction in `[0, 1)` for `survival`, and
/// unused otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: GeneratorFamily,
    pub n: usize,
    pub params: Vec<f64>,
    pub noise: f64,
    pub seed: u64,
}

/// Data of one of the supported shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Regression { x: Matrix, y: Vec<f64> },
    Survival(SurvivalData),
    Series(TimeSeriesSample),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Regression { y, .. } => y.len(),
            Dataset::Survival(d) => d.n(),
            Dataset::Series(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Covariate count; 0 for a series.
    pub fn n_covariates(&self) -> usize {
        match self {
            Dataset::Regression { x, .. } => x.cols(),
            Dataset::Survival(d) => d.p(),
            Dataset::Series(_) => 0,
        }
    }

    /// The observations at `rows` (for a series, `rows` must be contiguous).
    pub fn select(&self, rows: &[usize]) -> Result<Dataset> {
        if rows.is_empty() {
            return Err(Error::input("cannot select zero observations"));
        }
        match self {
            Dataset::Regression { x, y } => Ok(Dataset::Regression {
                x: x.select_rows(rows),
                y: rows.iter().map(|&i| y[i]).collect(),
            }),
            Dataset::Survival(d) => Ok(Dataset::Survival(d.select_records(rows)?)),
            Dataset::Series(s) => {
                let start = rows[0];
                if rows.iter().enumerate().any(|(k, &r)| r != start + k) {
                    return Err(Error::input("series selections must be contiguous"));
                }
                Ok(Dataset::Series(s.slice(start, start + rows.len())?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub dataset: Dataset,
    pub spec: GeneratorSpec,
}

fn normal_matrix(rng: &mut StreamRng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Censoring rate λ_c with mean_i λ_c / (λ_c + θ_i) = target, for
/// exponential event times of rate θ_i and exponential censoring.
fn censoring_rate(hazards: &[f64], target: f64) -> f64 {
    let frac = |log_rate: f64| {
        let r = log_rate.exp();
        hazards.iter().map(|h| r / (r + h)).sum::<f64>() / hazards.len() as f64
    };
    let (mut lo, mut hi) = (-60.0_f64, 60.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if frac(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Draws a dataset from `spec`. Deterministic per `spec.seed`.
pub fn generate(spec: &GeneratorSpec) -> Result<GeneratedData> {
    if spec.n == 0 {
        return Err(Error::input("sample size must be positive"));
    }
    if spec.params.iter().any(|v| !v.is_finite()) || !spec.noise.is_finite() {
        return Err(Error::input("generator parameters must be finite"));
    }
    let p = spec.params.len();
    let needs_beta = !matches!(spec.family, GeneratorFamily::Ar);
    if needs_beta && p == 0 {
        return Err(Error::input("regression generators need at least one coefficient"));
    }
    let mut rng = seeded(spec.seed);
    let dataset = match spec.family {
        GeneratorFamily::Linear => {
            if !(spec.noise >= 0.0) {
                return Err(Error::input("noise sd must be non-negative"));
            }
            let x = normal_matrix(&mut rng, spec.n, p);
            let y = x
                .mul_vec(&spec.params)
                .into_iter()
                .map(|m| m + spec.noise * rng.sample::<f64, _>(StandardNormal))
                .collect();
            Dataset::Regression { x, y }
        }
        GeneratorFamily::Binomial => {
            let x = normal_matrix(&mut rng, spec.n, p);
            let y = x
                .mul_vec(&spec.params)
                .into_iter()
                .map(|eta| {
                    let pi = GlmFamily::Binomial.inverse_link(eta);
                    let coin = Bernoulli::new(pi).map_err(|e| Error::input(e.to_string()))?;
                    Ok(if coin.sample(&mut rng) { 1.0 } else { 0.0 })
                })
                .collect::<Result<Vec<_>>>()?;
            Dataset::Regression { x, y }
        }
        GeneratorFamily::Poisson => {
            let x = normal_matrix(&mut rng, spec.n, p);
            let y = x
                .mul_vec(&spec.params)
                .into_iter()
                .map(|eta| {
                    let dist = Poisson::new(eta.exp()).map_err(|e| Error::input(e.to_string()))?;
                    Ok(dist.sample(&mut rng))
                })
                .collect::<Result<Vec<f64>>>()?;
            Dataset::Regression { x, y }
        }
        GeneratorFamily::Survival => {
            if !(0.0..1.0).contains(&spec.noise) {
                return Err(Error::input("censoring fraction must lie in [0, 1)"));
            }
            let x = normal_matrix(&mut rng, spec.n, p);
            let hazards: Vec<f64> = x.mul_vec(&spec.params).into_iter().map(f64::exp).collect();
            let cens = (spec.noise > 0.0).then(|| censoring_rate(&hazards, spec.noise));
            let records = hazards
                .iter()
                .enumerate()
                .map(|(i, h)| {
                    let event_time = rng.sample::<f64, _>(Exp1) / h;
                    let censor_time = cens.map_or(f64::INFINITY, |c| rng.sample::<f64, _>(Exp1) / c);
                    SurvivalRecord {
                        time: event_time.min(censor_time),
                        event: event_time <= censor_time,
                        covariates: x.row(i).to_vec(),
                    }
                })
                .collect();
            Dataset::Survival(SurvivalData::new(records)?)
        }
        GeneratorFamily::Ar => {
            check_stationary(&spec.params)?;
            if !(spec.noise > 0.0) {
                return Err(Error::input("noise sd must be positive"));
            }
            Dataset::Series(simulate_ar_with(&spec.params, spec.noise, spec.n, &mut rng)?)
        }
    };
    Ok(GeneratedData {
        dataset,
        spec: spec.clone(),
    })
}

/// `y = c₀ + c₁x + c₂x² + c₃x³ + σε` at `x ~ U(−1, 1)`, with the design
/// holding the monomials `x⁰ … x^max_degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSpec {
    pub n: usize,
    pub coefficients: Vec<f64>,
    pub noise: f64,
    pub max_degree: usize,
    pub seed: u64,
}

impl PolynomialSpec {
    /// The noisy-cubic benchmark: 60 points, degrees 0–9.
    pub fn noisy_cubic(seed: u64) -> Self {
        Self {
            n: 60,
            coefficients: vec![0.5, -1.0, -2.0, 3.0],
            noise: 0.3,
            max_degree: 9,
            seed,
        }
    }

    pub fn generate(&self) -> Result<(Vec<f64>, Dataset)> {
        if self.coefficients.is_empty() || !(self.noise >= 0.0) {
            return Err(Error::input("polynomial spec needs coefficients and a non-negative noise sd"));
        }
        let mut rng = seeded(self.seed);
        let unit = Uniform::new_inclusive(-1.0, 1.0).map_err(|e| Error::input(e.to_string()))?;
        let x: Vec<f64> = (0..self.n).map(|_| unit.sample(&mut rng)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&xi| {
                let clean = self.coefficients.iter().rev().fold(0.0, |acc, c| acc * xi + c);
                clean + self.noise * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        let design = polynomial_design(&x, self.max_degree)?;
        Ok((
            x,
            Dataset::Regression {
                x: design.matrix().clone(),
                y,
            },
        ))
    }
}
