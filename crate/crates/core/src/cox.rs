//! Cox proportional hazards via the log partial likelihood
//!
//! ```text
//! l(β) = Σ_{i: event} { x_iᵀβ − log Σ_{j: t_j ≥ t_i} exp(x_jᵀβ) }
//! ```
//!
//! Tied event times share the full risk set (Breslow). Risk-set sums are
//! accumulated once per evaluation, walking subjects in descending time
//! order, with a running log-sum-exp shift.

use serde::Serialize;

use crate::error::{Error, ModelRole, Result};
use crate::linalg::{invert_spd, norm2, Cholesky, ColumnSubset, Matrix, SymmetricMatrix};
use crate::report::{assemble, refit_spectra, ComparisonMode, ModelFamily, NestedComparisonReport, Sides};

pub const MAX_ITERATIONS: usize = 50;
pub const STEP_TOLERANCE: f64 = 1e-9;
pub const MAX_STEP_HALVINGS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalRecord {
    pub time: f64,
    /// true when the event was observed (uncensored).
    pub event: bool,
    pub covariates: Vec<f64>,
}

/// Validated survival records sharing one covariate dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalData {
    records: Vec<SurvivalRecord>,
    p: usize,
    /// record indices by descending time
    order: Vec<usize>,
}

impl SurvivalData {
    pub fn new(records: Vec<SurvivalRecord>) -> Result<Self> {
        let p = records
            .first()
            .map(|r| r.covariates.len())
            .ok_or_else(|| Error::input("no survival records"))?;
        if p == 0 {
            return Err(Error::input("survival records need at least one covariate"));
        }
        for (i, r) in records.iter().enumerate() {
            if !(r.time > 0.0 && r.time.is_finite()) {
                return Err(Error::input(format!("record {i}: time {} is not positive", r.time)));
            }
            if r.covariates.len() != p {
                return Err(Error::input(format!(
                    "record {i}: expected {p} covariates, found {}",
                    r.covariates.len()
                )));
            }
            if r.covariates.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("record {i}: non-finite covariate")));
            }
        }
        let mut order: Vec<usize> = (0..records.len()).collect();
        order.sort_by(|&a, &b| records[b].time.total_cmp(&records[a].time));
        Ok(Self { records, p, order })
    }

    pub fn records(&self) -> &[SurvivalRecord] {
        &self.records
    }

    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_events(&self) -> usize {
        self.records.iter().filter(|r| r.event).count()
    }

    pub fn covariate_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n(), self.p, |i, j| self.records[i].covariates[j])
    }

    /// Linear predictor `x_iᵀβ` per record.
    pub fn linear_predictor(&self, beta: &[f64]) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| r.covariates.iter().zip(beta).map(|(x, b)| x * b).sum())
            .collect()
    }

    /// Same subjects, covariates restricted to `subset`.
    pub fn select_covariates(&self, subset: &ColumnSubset) -> Result<SurvivalData> {
        if subset.parent_dim() != self.p {
            return Err(Error::input(format!(
                "subset is defined for {} covariates but the data has {}",
                subset.parent_dim(),
                self.p
            )));
        }
        let records = self
            .records
            .iter()
            .map(|r| SurvivalRecord {
                time: r.time,
                event: r.event,
                covariates: subset.indices().iter().map(|&k| r.covariates[k]).collect(),
            })
            .collect();
        SurvivalData::new(records)
    }

    pub fn select_records(&self, rows: &[usize]) -> Result<SurvivalData> {
        SurvivalData::new(rows.iter().map(|&i| self.records[i].clone()).collect())
    }

    fn check_beta(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.p {
            return Err(Error::input(format!(
                "beta has {} entries for {} covariates",
                beta.len(),
                self.p
            )));
        }
        if self.n_events() == 0 {
            return Err(Error::input("partial likelihood needs at least one event"));
        }
        Ok(())
    }
}

/// Risk-set sums S0 = Σ w_j, S1 = Σ w_j x_j, S2 = Σ w_j x_j x_jᵀ with
/// w_j = exp(η_j − shift).
struct RiskAccumulator {
    q: usize,
    shift: f64,
    s0: f64,
    s1: Vec<f64>,
    s2: Vec<f64>,
}

impl RiskAccumulator {
    fn new(q: usize) -> Self {
        Self {
            q,
            shift: f64::NEG_INFINITY,
            s0: 0.0,
            s1: vec![0.0; q],
            s2: vec![0.0; q * q],
        }
    }

    fn add(&mut self, eta: f64, x: &[f64]) {
        if eta > self.shift {
            let r = (self.shift - eta).exp();
            self.s0 *= r;
            self.s1.iter_mut().for_each(|v| *v *= r);
            self.s2.iter_mut().for_each(|v| *v *= r);
            self.shift = eta;
        }
        let w = (eta - self.shift).exp();
        self.s0 += w;
        for a in 0..self.q {
            let wa = w * x[a];
            self.s1[a] += wa;
            for b in a..self.q {
                self.s2[a * self.q + b] += wa * x[b];
            }
        }
    }

    fn log_s0(&self) -> f64 {
        self.shift + self.s0.ln()
    }

    fn mean(&self) -> Vec<f64> {
        self.s1.iter().map(|v| v / self.s0).collect()
    }

    /// Covariance of x under the risk-set distribution w_j / S0.
    fn covariance(&self, mean: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::from_upper(self.q, |a, b| {
            self.s2[a * self.q + b] / self.s0 - mean[a] * mean[b]
        })
    }
}

struct Pass {
    loglik: f64,
    score: Vec<f64>,
    fisher: SymmetricMatrix,
    event_terms: Vec<SymmetricMatrix>,
}

/// One sweep over risk sets. `eta` drives the weights; `columns` selects the
/// covariates whose score/information is accumulated.
fn risk_set_pass(data: &SurvivalData, eta: &[f64], columns: &[usize], keep_terms: bool) -> Pass {
    let q = columns.len();
    let mut acc = RiskAccumulator::new(q);
    let mut loglik = 0.0;
    let mut score = vec![0.0; q];
    let mut fisher = vec![0.0; q * q];
    let mut event_terms = Vec::new();
    let mut x = vec![0.0; q];
    let order = &data.order;
    let mut i = 0;
    while i < order.len() {
        let t = data.records[order[i]].time;
        let mut j = i;
        while j < order.len() && data.records[order[j]].time == t {
            let k = order[j];
            for (slot, &c) in x.iter_mut().zip(columns) {
                *slot = data.records[k].covariates[c];
            }
            acc.add(eta[k], &x);
            j += 1;
        }
        let events: Vec<usize> = order[i..j]
            .iter()
            .copied()
            .filter(|&k| data.records[k].event)
            .collect();
        if !events.is_empty() {
            let log_s0 = acc.log_s0();
            let mean = acc.mean();
            let cov = acc.covariance(&mean);
            for &k in &events {
                loglik += eta[k] - log_s0;
                for (a, &c) in columns.iter().enumerate() {
                    score[a] += data.records[k].covariates[c] - mean[a];
                }
                for a in 0..q {
                    for b in a..q {
                        fisher[a * q + b] += cov.get(a, b);
                    }
                }
                if keep_terms {
                    event_terms.push(cov.clone());
                }
            }
        }
        i = j;
    }
    Pass {
        loglik,
        score,
        fisher: SymmetricMatrix::from_upper(q, |a, b| fisher[a * q + b]),
        event_terms,
    }
}

fn all_columns(data: &SurvivalData) -> Vec<usize> {
    (0..data.p).collect()
}

pub fn partial_loglik(beta: &[f64], data: &SurvivalData) -> Result<f64> {
    data.check_beta(beta)?;
    let eta = data.linear_predictor(beta);
    Ok(risk_set_pass(data, &eta, &[], false).loglik)
}

/// Score ∂l/∂β and information −∂²l/∂β∂βᵀ.
pub fn cox_score_and_fisher(beta: &[f64], data: &SurvivalData) -> Result<(Vec<f64>, SymmetricMatrix)> {
    data.check_beta(beta)?;
    let eta = data.linear_predictor(beta);
    let pass = risk_set_pass(data, &eta, &all_columns(data), false);
    Ok((pass.score, pass.fisher))
}

/// Per-event information terms (one risk-set covariance per event); they sum
/// to the Fisher information.
pub fn cox_event_information_terms(beta: &[f64], data: &SurvivalData) -> Result<Vec<SymmetricMatrix>> {
    data.check_beta(beta)?;
    let eta = data.linear_predictor(beta);
    Ok(risk_set_pass(data, &eta, &all_columns(data), true).event_terms)
}

/// Information for the covariates in `columns`, with risk-set weights from
/// the full linear predictor `eta`. With `eta` from the saturated β̂ this is
/// the principal submatrix of the saturated information.
pub fn cox_information_at(eta: &[f64], data: &SurvivalData, columns: &ColumnSubset) -> Result<SymmetricMatrix> {
    if eta.len() != data.n() || columns.parent_dim() != data.p {
        return Err(Error::input("linear predictor or column subset does not match the data"));
    }
    Ok(risk_set_pass(data, eta, columns.indices(), false).fisher)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoxFit {
    pub beta_hat: Vec<f64>,
    pub partial_loglik: f64,
    pub score: Vec<f64>,
    pub fisher: SymmetricMatrix,
    pub fisher_inverse: SymmetricMatrix,
    pub converged: bool,
    pub iterations: usize,
    pub n_events: usize,
}

impl CoxFit {
    pub fn standard_errors(&self) -> Vec<f64> {
        self.fisher_inverse
            .diagonal_entries()
            .into_iter()
            .map(f64::sqrt)
            .collect()
    }
}

/// Newton–Raphson from β = 0 with step halving.
pub fn fit_cox(data: &SurvivalData) -> Result<CoxFit> {
    let p = data.p;
    let mut beta = vec![0.0; p];
    let mut ll = partial_loglik(&beta, data)?;
    let mut steps: Vec<f64> = Vec::new();
    let mut trace = Vec::new();
    for iteration in 1..=MAX_ITERATIONS {
        let (score, fisher) = cox_score_and_fisher(&beta, data)?;
        let delta = Cholesky::new(&fisher)?.solve(&score);

        let slack = 1e-13 * ll.abs().max(1.0);
        let mut t = 1.0;
        let mut candidate: Vec<f64> = beta.iter().zip(&delta).map(|(b, d)| b + d).collect();
        let mut ll_new = partial_loglik(&candidate, data)?;
        let mut halvings = 0;
        while !(ll_new >= ll - slack) && halvings < MAX_STEP_HALVINGS {
            t *= 0.5;
            candidate = beta.iter().zip(&delta).map(|(b, d)| b + t * d).collect();
            ll_new = partial_loglik(&candidate, data)?;
            halvings += 1;
        }
        let step = t * norm2(&delta);
        let gain = ll_new - ll;
        beta = candidate;
        ll = ll_new;
        steps.push(step);
        trace.push(crate::error::IterationRecord {
            iteration,
            objective: ll,
            step_norm: step,
        });

        if step <= STEP_TOLERANCE * norm2(&beta).max(1.0) {
            let (score, fisher) = cox_score_and_fisher(&beta, data)?;
            let fisher_inverse = invert_spd(&fisher)?;
            return Ok(CoxFit {
                beta_hat: beta,
                partial_loglik: ll,
                score,
                fisher,
                fisher_inverse,
                converged: true,
                iterations: iteration,
                n_events: data.n_events(),
            });
        }
        // Newton steps contract near a finite maximum; steps that stay the
        // same size while the likelihood stops improving mean β̂ runs off to
        // infinity.
        let k = steps.len();
        if k >= 5
            && steps[k - 1] >= 0.5 * steps[k - 2]
            && steps[k - 2] >= 0.5 * steps[k - 3]
            && gain <= 1e-6 * (1.0 + ll.abs())
        {
            return Err(Error::Divergence {
                iterations: iteration,
                beta_norm: norm2(&beta),
            });
        }
    }
    Err(Error::Convergence {
        method: "Cox Newton-Raphson",
        iterations: MAX_ITERATIONS,
        trace,
    })
}

/// Saturated vs nested Cox models. The asserted comparison evaluates both
/// information matrices at the saturated linear predictor; the refitted
/// nested information is reported alongside.
pub fn compare_nested_cox(data: &SurvivalData, subset: &ColumnSubset) -> Result<NestedComparisonReport> {
    let nested_data = data.select_covariates(subset).map_err(Error::in_model(ModelRole::Nested))?;
    let saturated = fit_cox(data).map_err(Error::in_model(ModelRole::Saturated))?;
    let nested = fit_cox(&nested_data).map_err(Error::in_model(ModelRole::Nested))?;

    let eta = data.linear_predictor(&saturated.beta_hat);
    let fixed_nested = cox_information_at(&eta, data, subset)?;
    let bias = (-saturated.partial_loglik, -nested.partial_loglik);
    let scale = bias.0.abs().max(bias.1.abs()).max(f64::MIN_POSITIVE);
    let mut report = assemble(
        ModelFamily::Cox,
        ComparisonMode::FixedBeta,
        subset.indices().to_vec(),
        Sides {
            bias,
            bias_scale: scale,
            residual_norm: ((2.0 * bias.0).max(0.0).sqrt(), (2.0 * bias.1).max(0.0).sqrt()),
            residual_scale: (2.0 * scale).sqrt(),
        },
        &saturated.fisher,
        &fixed_nested,
    )?;
    report.refit = Some(refit_spectra(&nested.fisher, report.var_radius_saturated)?);
    Ok(report)
}
