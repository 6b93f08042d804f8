//! Gaussian, binomial (logit) and Poisson (log) GLMs fitted by iteratively
//! reweighted least squares, with Fisher matrices `F = Xᵀ W X`.
//!
//! The working weight of observation `i` is `h′(η_i)² / Var(Y_i)`, where `h`
//! is the inverse link. For the three canonical links this reduces to
//! `1/σ²`, `π(1−π)` and `μ` respectively.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, IterationRecord, ModelRole, Result};
use crate::linalg::{invert_spd, norm2, principal_submatrix, Cholesky, ColumnSubset, SymmetricMatrix};
use crate::linear::{fit_ols, nest_design, DesignMatrix};
use crate::report::{assemble, refit_spectra, ComparisonMode, ModelFamily, NestedComparisonReport, Sides};

pub const MAX_ITERATIONS: usize = 100;
pub const STEP_TOLERANCE: f64 = 1e-10;
pub const MAX_STEP_HALVINGS: usize = 20;
/// Working weights below this are flagged as underflowed.
pub const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlmFamily {
    Gaussian,
    Binomial,
    Poisson,
}

fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + eᵗ) without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

impl GlmFamily {
    pub fn model_family(self) -> ModelFamily {
        match self {
            GlmFamily::Gaussian => ModelFamily::Gaussian,
            GlmFamily::Binomial => ModelFamily::Binomial,
            GlmFamily::Poisson => ModelFamily::Poisson,
        }
    }

    /// h(η): the mean as a function of the linear predictor.
    pub fn inverse_link(self, eta: f64) -> f64 {
        match self {
            GlmFamily::Gaussian => eta,
            GlmFamily::Binomial => logistic(eta),
            GlmFamily::Poisson => eta.exp(),
        }
    }

    /// g(μ) = h⁻¹(μ).
    pub fn link(self, mu: f64) -> f64 {
        match self {
            GlmFamily::Gaussian => mu,
            GlmFamily::Binomial => (mu / (1.0 - mu)).ln(),
            GlmFamily::Poisson => mu.ln(),
        }
    }

    /// h′(η).
    pub fn inverse_link_derivative(self, eta: f64) -> f64 {
        match self {
            GlmFamily::Gaussian => 1.0,
            GlmFamily::Binomial => {
                let e = (-eta.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            GlmFamily::Poisson => eta.exp(),
        }
    }

    /// Var(Y) at mean `mu`.
    pub fn variance(self, mu: f64, dispersion: f64) -> f64 {
        match self {
            GlmFamily::Gaussian => dispersion,
            GlmFamily::Binomial => mu * (1.0 - mu),
            GlmFamily::Poisson => mu,
        }
    }

    /// Rejects responses outside the family's support, naming the row.
    pub fn check_response(self, y: &[f64]) -> Result<()> {
        for (i, &v) in y.iter().enumerate() {
            let ok = match self {
                GlmFamily::Gaussian => v.is_finite(),
                GlmFamily::Binomial => v == 0.0 || v == 1.0,
                GlmFamily::Poisson => v >= 0.0 && v.fract() == 0.0 && v.is_finite(),
            };
            if !ok {
                let support = match self {
                    GlmFamily::Gaussian => "a finite real",
                    GlmFamily::Binomial => "0 or 1",
                    GlmFamily::Poisson => "a non-negative integer",
                };
                return Err(Error::input(format!(
                    "response {i} = {v} is not {support}"
                )));
            }
        }
        Ok(())
    }

    /// log p(y | η) for one observation.
    pub fn log_density(self, y: f64, eta: f64, dispersion: f64) -> f64 {
        match self {
            GlmFamily::Gaussian => {
                let r = y - eta;
                -0.5 * (r * r / dispersion + (2.0 * std::f64::consts::PI * dispersion).ln())
            }
            GlmFamily::Binomial => y * eta - softplus(eta),
            GlmFamily::Poisson => y * eta - eta.exp() - ln_gamma(y + 1.0),
        }
    }

    /// Deviance contribution of one observation (unscaled for the Gaussian,
    /// so the Gaussian deviance is the residual sum of squares).
    pub fn unit_deviance(self, y: f64, eta: f64) -> f64 {
        match self {
            GlmFamily::Gaussian => (y - eta) * (y - eta),
            GlmFamily::Binomial => 2.0 * (softplus(eta) - y * eta),
            GlmFamily::Poisson => {
                let mu = eta.exp();
                if y == 0.0 {
                    2.0 * mu
                } else {
                    2.0 * (y * (y.ln() - eta) - (y - mu))
                }
            }
        }
    }

    /// Scale for relative tolerances on the deviance of a response vector.
    pub fn deviance_scale(self, y: &[f64]) -> f64 {
        match self {
            GlmFamily::Gaussian => y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE),
            GlmFamily::Binomial => y.len() as f64,
            GlmFamily::Poisson => y.iter().sum::<f64>() + y.len() as f64,
        }
    }
}

/// Working weights plus the observations whose weight underflowed.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkingWeights {
    pub weights: Vec<f64>,
    pub flagged: Vec<usize>,
}

/// `W_ii = h′(η_i)² / σ_i²`.
pub fn glm_weights(eta: &[f64], family: GlmFamily, dispersion: f64) -> Result<WorkingWeights> {
    if let Some(i) = eta.iter().position(|v| !v.is_finite()) {
        return Err(Error::input(format!("linear predictor {i} is not finite")));
    }
    if !(dispersion > 0.0) {
        return Err(Error::input("dispersion must be positive"));
    }
    let mut flagged = Vec::new();
    let weights = eta
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let d = family.inverse_link_derivative(e);
            let var = family.variance(family.inverse_link(e), dispersion);
            let w = if var > 0.0 { d * d / var } else { 0.0 };
            if !(w >= WEIGHT_FLOOR) {
                flagged.push(i);
            }
            w
        })
        .collect();
    Ok(WorkingWeights { weights, flagged })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlmFit {
    pub family: GlmFamily,
    pub beta_hat: Vec<f64>,
    pub eta: Vec<f64>,
    pub mu: Vec<f64>,
    pub weights: Vec<f64>,
    pub fisher: SymmetricMatrix,
    pub fisher_inverse: SymmetricMatrix,
    /// σ² for the Gaussian family (rss / (N − p)), 1 otherwise.
    pub dispersion: f64,
    pub log_likelihood: f64,
    pub deviance: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_step_norm: f64,
}

impl GlmFit {
    pub fn standard_errors(&self) -> Vec<f64> {
        self.fisher_inverse
            .diagonal_entries()
            .into_iter()
            .map(f64::sqrt)
            .collect()
    }
}

pub fn log_likelihood(x: &DesignMatrix, y: &[f64], family: GlmFamily, beta: &[f64], dispersion: f64) -> f64 {
    let eta = x.matrix().mul_vec(beta);
    y.iter()
        .zip(&eta)
        .map(|(&yi, &e)| family.log_density(yi, e, dispersion))
        .sum()
}

/// ∂ℓ/∂β = Σ_i x_i (y_i − μ_i) h′(η_i) / Var(Y_i).
pub fn glm_score(x: &DesignMatrix, y: &[f64], family: GlmFamily, beta: &[f64], dispersion: f64) -> Vec<f64> {
    let eta = x.matrix().mul_vec(beta);
    let r: Vec<f64> = y
        .iter()
        .zip(&eta)
        .map(|(&yi, &e)| {
            let mu = family.inverse_link(e);
            (yi - mu) * family.inverse_link_derivative(e) / family.variance(mu, dispersion)
        })
        .collect();
    x.matrix().tr_mul_vec(&r)
}

fn check_inputs(x: &DesignMatrix, y: &[f64], family: GlmFamily) -> Result<()> {
    if y.len() != x.n_rows() {
        return Err(Error::input(format!(
            "response has {} values but the design has {} rows",
            y.len(),
            x.n_rows()
        )));
    }
    family.check_response(y)
}

fn finish(
    x: &DesignMatrix,
    y: &[f64],
    family: GlmFamily,
    beta_hat: Vec<f64>,
    dispersion: f64,
    iterations: usize,
    final_step_norm: f64,
) -> Result<GlmFit> {
    let eta = x.matrix().mul_vec(&beta_hat);
    let mu: Vec<f64> = eta.iter().map(|&e| family.inverse_link(e)).collect();
    let w = glm_weights(&eta, family, dispersion)?;
    if !w.flagged.is_empty() {
        return Err(Error::Separation {
            observations: w.flagged,
        });
    }
    let fisher = x.matrix().weighted_gram(Some(&w.weights));
    let fisher_inverse = invert_spd(&fisher)?;
    let log_likelihood = y
        .iter()
        .zip(&eta)
        .map(|(&yi, &e)| family.log_density(yi, e, dispersion))
        .sum();
    let deviance = y
        .iter()
        .zip(&eta)
        .map(|(&yi, &e)| family.unit_deviance(yi, e))
        .sum();
    Ok(GlmFit {
        family,
        beta_hat,
        eta,
        mu,
        weights: w.weights,
        fisher,
        fisher_inverse,
        dispersion,
        log_likelihood,
        deviance,
        converged: true,
        iterations,
        final_step_norm,
    })
}

/// Maximum-likelihood fit by IRLS from β = 0 with step halving.
///
/// The Gaussian family is solved in one least-squares step; its dispersion
/// is estimated as rss / (N − p) and folded into the weights.
pub fn fit_glm(x: &DesignMatrix, y: &[f64], family: GlmFamily) -> Result<GlmFit> {
    check_inputs(x, y, family)?;
    if family == GlmFamily::Gaussian {
        let ols = fit_ols(x, y)?;
        let dispersion = match ols.sigma2_hat {
            Some(s2) if s2 > 0.0 => s2,
            Some(_) => return Err(Error::input("gaussian fit has zero residual variance")),
            None => return Err(Error::input("gaussian fit needs more rows than columns")),
        };
        return finish(x, y, family, ols.beta_hat, dispersion, 1, 0.0);
    }

    let p = x.n_cols();
    let mut beta = vec![0.0; p];
    let mut ll = log_likelihood(x, y, family, &beta, 1.0);
    let mut trace = Vec::new();
    for iteration in 1..=MAX_ITERATIONS {
        let eta = x.matrix().mul_vec(&beta);
        let w = glm_weights(&eta, family, 1.0)?;
        if !w.flagged.is_empty() {
            return Err(Error::Separation {
                observations: w.flagged,
            });
        }
        let z: Vec<f64> = eta
            .iter()
            .zip(y)
            .zip(&w.weights)
            .map(|((&e, &yi), &wi)| {
                let d = family.inverse_link_derivative(e);
                wi * (e + (yi - family.inverse_link(e)) / d)
            })
            .collect();
        let lhs = x.matrix().weighted_gram(Some(&w.weights));
        let target = Cholesky::new(&lhs)?.solve(&x.matrix().tr_mul_vec(&z));
        let delta: Vec<f64> = target.iter().zip(&beta).map(|(t, b)| t - b).collect();

        let slack = 1e-13 * ll.abs().max(1.0);
        let mut t = 1.0;
        let mut candidate: Vec<f64> = beta.iter().zip(&delta).map(|(b, d)| b + d).collect();
        let mut ll_new = log_likelihood(x, y, family, &candidate, 1.0);
        let mut halvings = 0;
        while !(ll_new >= ll - slack) && halvings < MAX_STEP_HALVINGS {
            t *= 0.5;
            candidate = beta.iter().zip(&delta).map(|(b, d)| b + t * d).collect();
            ll_new = log_likelihood(x, y, family, &candidate, 1.0);
            halvings += 1;
        }
        let step = t * norm2(&delta);
        beta = candidate;
        ll = ll_new;
        trace.push(IterationRecord {
            iteration,
            objective: ll,
            step_norm: step,
        });
        if step <= STEP_TOLERANCE * norm2(&beta).max(1.0) {
            return finish(x, y, family, beta, 1.0, iteration, step);
        }
    }
    Err(Error::Convergence {
        method: "IRLS",
        iterations: MAX_ITERATIONS,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Nested Fisher uses the saturated model's W: an exact principal
    /// submatrix of the saturated Fisher.
    Shared,
    /// Nested Fisher uses the weights of the refitted nested model.
    Refit,
}

/// Compares saturated and nested GLMs. Bias is the deviance (the Gaussian
/// deviance is the residual sum of squares), the residual norm its square
/// root. Orderings are asserted only in [`WeightMode::Shared`].
pub fn compare_nested_glm(
    x: &DesignMatrix,
    y: &[f64],
    family: GlmFamily,
    subset: &ColumnSubset,
    mode: WeightMode,
) -> Result<NestedComparisonReport> {
    let x_nested = nest_design(x, subset).map_err(Error::in_model(ModelRole::Nested))?;
    let saturated = fit_glm(x, y, family).map_err(Error::in_model(ModelRole::Saturated))?;
    let nested = fit_glm(&x_nested, y, family).map_err(Error::in_model(ModelRole::Nested))?;

    let (info_nested, comparison_mode) = match mode {
        WeightMode::Shared => (
            principal_submatrix(&saturated.fisher, subset)?,
            ComparisonMode::SharedSaturatedWeights,
        ),
        WeightMode::Refit => (nested.fisher.clone(), ComparisonMode::RefitWeights),
    };
    let scale = family.deviance_scale(y);
    let mut report = assemble(
        family.model_family(),
        comparison_mode,
        subset.indices().to_vec(),
        Sides {
            bias: (saturated.deviance, nested.deviance),
            bias_scale: scale,
            residual_norm: (saturated.deviance.max(0.0).sqrt(), nested.deviance.max(0.0).sqrt()),
            residual_scale: scale.sqrt(),
        },
        &saturated.fisher,
        &info_nested,
    )?;
    if mode == WeightMode::Shared {
        report.refit = Some(refit_spectra(&nested.fisher, report.var_radius_saturated)?);
    }
    Ok(report)
}
