use serde::Serialize;

use crate::cox::{fit_cox, partial_loglik};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::glm::{fit_glm, GlmFamily};
use crate::linalg::{eigenvalues_symmetric, ColumnSubset};
use crate::linear::{fit_ols, DesignMatrix};
use crate::rng::replicate_seed;
use crate::timeseries::{autocovariance, solve_yule_walker, TimeSeriesSample};

use super::generate::{generate, Dataset, GeneratorSpec, PolynomialSpec};
use super::{split, SplitSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepModel {
    Linear,
    Glm(GlmFamily),
    Cox,
    Ar,
}

/// Strictly nested model sequence. Column rungs may end with the full
/// column set; AR rungs are orders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Ladder {
    Columns(Vec<Vec<usize>>),
    ArOrders(Vec<usize>),
}

impl Ladder {
    /// `{0}, {0,1}, …, {0..p}`.
    pub fn prefixes(p: usize) -> Self {
        Ladder::Columns((1..=p).map(|k| (0..k).collect()).collect())
    }

    pub fn len(&self) -> usize {
        match self {
            Ladder::Columns(r) => r.len(),
            Ladder::ArOrders(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn complexities(&self) -> Vec<usize> {
        match self {
            Ladder::Columns(r) => r.iter().map(Vec::len).collect(),
            Ladder::ArOrders(r) => r.clone(),
        }
    }

    fn validate(&self, n_covariates: usize) -> Result<()> {
        if self.is_empty() {
            return Err(Error::input("ladder has no rungs"));
        }
        match self {
            Ladder::Columns(rungs) => {
                for rung in rungs {
                    if rung.len() == n_covariates {
                        if rung.iter().copied().ne(0..n_covariates) {
                            return Err(Error::input("full rung must list every column in order"));
                        }
                    } else {
                        ColumnSubset::new(rung.clone(), n_covariates)?;
                    }
                }
                for pair in rungs.windows(2) {
                    let nested = pair[0].len() < pair[1].len()
                        && pair[0].iter().all(|c| pair[1].binary_search(c).is_ok());
                    if !nested {
                        return Err(Error::input(format!(
                            "ladder is not strictly nested: {:?} is not a proper subset of {:?}",
                            pair[0], pair[1]
                        )));
                    }
                }
            }
            Ladder::ArOrders(orders) => {
                if orders[0] == 0 || orders.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::input("AR orders must be positive and strictly increasing"));
                }
            }
        }
        Ok(())
    }
}

/// Where each replicate's data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// The same data every replicate; only the split changes.
    Fixed(Dataset),
    /// Fresh data per replicate from seed `replicate_seed(spec.seed, r)`.
    Generated(GeneratorSpec),
    Polynomial(PolynomialSpec),
}

impl DataSource {
    fn dataset(&self, replicate: usize) -> Result<std::borrow::Cow<'_, Dataset>> {
        use std::borrow::Cow;
        let r = replicate as u64;
        Ok(match self {
            DataSource::Fixed(d) => Cow::Borrowed(d),
            DataSource::Generated(spec) => {
                let spec = GeneratorSpec {
                    seed: replicate_seed(spec.seed, r),
                    ..spec.clone()
                };
                Cow::Owned(generate(&spec)?.dataset)
            }
            DataSource::Polynomial(spec) => {
                let spec = PolynomialSpec {
                    seed: replicate_seed(spec.seed, r),
                    ..spec.clone()
                };
                Cow::Owned(spec.generate()?.1)
            }
        })
    }

    fn n_covariates(&self) -> usize {
        match self {
            DataSource::Fixed(d) => d.n_covariates(),
            DataSource::Generated(spec) => match spec.family {
                super::GeneratorFamily::Ar => 0,
                _ => spec.params.len(),
            },
            DataSource::Polynomial(spec) => spec.max_degree + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub model: SweepModel,
    pub ladder: Ladder,
    pub split: SplitSpec,
    pub replicates: usize,
}

/// Costs of one fitted rung.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RungOutcome {
    pub train_cost: f64,
    pub validation_cost: f64,
    pub var_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub complexity: usize,
    pub outcome: Option<RungOutcome>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub complexity: usize,
    pub train_cost_mean: Option<f64>,
    pub train_cost_se: Option<f64>,
    pub validation_cost_mean: Option<f64>,
    pub validation_cost_se: Option<f64>,
    pub var_radius_mean: Option<f64>,
    pub fitted: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffCurve {
    pub points: Vec<CurvePoint>,
    pub replicates: usize,
    pub raw: Vec<ReplicateRecord>,
}

impl TradeoffCurve {
    /// Index of the rung with the smallest mean validation cost.
    pub fn validation_argmin(&self) -> Option<usize> {
        self.points
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.validation_cost_mean.map(|v| (i, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    /// The validation minimum is at neither the first nor the last rung.
    pub fn has_interior_validation_minimum(&self) -> bool {
        matches!(self.validation_argmin(), Some(i) if i > 0 && i + 1 < self.points.len())
    }

    /// Mean train cost never increases along the ladder.
    pub fn train_cost_monotone(&self) -> bool {
        let means: Vec<f64> = self.points.iter().filter_map(|p| p.train_cost_mean).collect();
        means.len() == self.points.len() && means.windows(2).all(|w| w[1] <= w[0])
    }
}

fn mean_and_se(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let k = values.len();
    if k == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64;
    (Some(mean), Some((var / k as f64).sqrt()))
}

fn mean_squared(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

fn largest_eigenvalue(m: &crate::linalg::SymmetricMatrix) -> Result<f64> {
    Ok(eigenvalues_symmetric(m)?.largest())
}

fn fit_rung(model: SweepModel, columns: &[usize], order: usize, train: &Dataset, validation: &Dataset) -> Result<RungOutcome> {
    match (model, train, validation) {
        (SweepModel::Linear, Dataset::Regression { x, y }, Dataset::Regression { x: xv, y: yv }) => {
            let design = DesignMatrix::new(x.select_columns(columns))?;
            let fit = fit_ols(&design, y)?;
            let predicted = xv.select_columns(columns).mul_vec(&fit.beta_hat);
            Ok(RungOutcome {
                train_cost: fit.rss / y.len() as f64,
                validation_cost: mean_squared(yv, &predicted),
                var_radius: largest_eigenvalue(&fit.gram_inverse)?,
            })
        }
        (SweepModel::Glm(family), Dataset::Regression { x, y }, Dataset::Regression { x: xv, y: yv }) => {
            let design = DesignMatrix::new(x.select_columns(columns))?;
            let fit = fit_glm(&design, y, family)?;
            let eta_v = xv.select_columns(columns).mul_vec(&fit.beta_hat);
            let val_ll: f64 = yv
                .iter()
                .zip(&eta_v)
                .map(|(&yi, &e)| family.log_density(yi, e, fit.dispersion))
                .sum();
            Ok(RungOutcome {
                train_cost: -fit.log_likelihood / y.len() as f64,
                validation_cost: -val_ll / yv.len() as f64,
                var_radius: largest_eigenvalue(&fit.fisher_inverse)?,
            })
        }
        (SweepModel::Cox, Dataset::Survival(train), Dataset::Survival(val)) => {
            let select = |d: &crate::cox::SurvivalData| -> Result<crate::cox::SurvivalData> {
                if columns.len() == d.p() {
                    Ok(d.clone())
                } else {
                    d.select_covariates(&ColumnSubset::new(columns.to_vec(), d.p())?)
                }
            };
            let (train, val) = (select(train)?, select(val)?);
            let fit = fit_cox(&train)?;
            let val_ll = partial_loglik(&fit.beta_hat, &val)?;
            Ok(RungOutcome {
                train_cost: -fit.partial_loglik / fit.n_events as f64,
                validation_cost: -val_ll / val.n_events() as f64,
                var_radius: largest_eigenvalue(&fit.fisher_inverse)?,
            })
        }
        (SweepModel::Ar, Dataset::Series(train), Dataset::Series(val)) => fit_ar_rung(order, train, val),
        _ => Err(Error::input("model family does not match the data shape")),
    }
}

/// Train cost: Yule-Walker innovation variance. Validation cost: mean squared
/// one-step prediction error over the suffix, centred at the training mean.
fn fit_ar_rung(order: usize, train: &TimeSeriesSample, val: &TimeSeriesSample) -> Result<RungOutcome> {
    if train.len() < 3 * order {
        return Err(Error::input(format!(
            "training prefix of length {} is too short for order {order}",
            train.len()
        )));
    }
    let gamma = autocovariance(train, order)?;
    let yw = solve_yule_walker(&gamma, order)?;
    let mean = train.mean();
    let series: Vec<f64> = train.values().iter().chain(val.values()).map(|v| v - mean).collect();
    let start = train.len();
    let err: f64 = (start..series.len())
        .map(|t| {
            let pred: f64 = yw.phi.iter().enumerate().map(|(k, phi)| phi * series[t - k - 1]).sum();
            (series[t] - pred).powi(2)
        })
        .sum();
    Ok(RungOutcome {
        train_cost: yw.sigma2,
        validation_cost: err / val.len() as f64,
        var_radius: yw.toeplitz_spectrum.inverted()?.largest(),
    })
}

/// Fits every rung of the ladder on the training part of each replicate and
/// records train cost, validation cost and the variance radius; aggregates
/// means and standard errors per rung in replicate order.
pub fn sweep_complexity(source: &DataSource, config: &SweepConfig, exec: Execution) -> Result<TradeoffCurve> {
    if config.replicates == 0 {
        return Err(Error::input("replicates must be at least 1"));
    }
    match (&config.ladder, config.model) {
        (Ladder::ArOrders(_), SweepModel::Ar) => {}
        (Ladder::Columns(_), SweepModel::Ar) => {
            return Err(Error::input("AR sweeps take a ladder of orders"))
        }
        (Ladder::ArOrders(_), _) => return Err(Error::input("order ladders apply to AR models only")),
        _ => {}
    }
    config.ladder.validate(source.n_covariates())?;

    let complexities = config.ladder.complexities();
    let per_replicate: Vec<Result<Vec<std::result::Result<RungOutcome, String>>>> =
        exec.map(config.replicates, |r| {
            let data = source.dataset(r)?;
            let split_spec = config.split.with_seed(replicate_seed(config.split.seed(), r as u64));
            let (train, validation) = split(&data, &split_spec)?;
            let rungs = match &config.ladder {
                Ladder::Columns(rungs) => rungs
                    .iter()
                    .map(|cols| fit_rung(config.model, cols, 0, &train, &validation))
                    .collect::<Vec<_>>(),
                Ladder::ArOrders(orders) => orders
                    .iter()
                    .map(|&o| fit_rung(config.model, &[], o, &train, &validation))
                    .collect(),
            };
            Ok(rungs.into_iter().map(|o| o.map_err(|e| e.to_string())).collect())
        });

    let mut raw = Vec::with_capacity(config.replicates * complexities.len());
    for (r, outcome) in per_replicate.into_iter().enumerate() {
        for (rung, result) in outcome?.into_iter().enumerate() {
            let (outcome, error) = match result {
                Ok(o) => (Some(o), None),
                Err(e) => (None, Some(e)),
            };
            raw.push(ReplicateRecord {
                replicate: r,
                complexity: complexities[rung],
                outcome,
                error,
            });
        }
    }

    let rungs = complexities.len();
    let points = complexities
        .iter()
        .enumerate()
        .map(|(k, &complexity)| {
            let ok: Vec<RungOutcome> = raw.iter().skip(k).step_by(rungs).filter_map(|r| r.outcome).collect();
            let pick = |f: fn(&RungOutcome) -> f64| ok.iter().map(f).collect::<Vec<_>>();
            let (train_cost_mean, train_cost_se) = mean_and_se(&pick(|o| o.train_cost));
            let (validation_cost_mean, validation_cost_se) = mean_and_se(&pick(|o| o.validation_cost));
            let (var_radius_mean, _) = mean_and_se(&pick(|o| o.var_radius));
            CurvePoint {
                complexity,
                train_cost_mean,
                train_cost_se,
                validation_cost_mean,
                validation_cost_se,
                var_radius_mean,
                fitted: ok.len(),
                failed: config.replicates - ok.len(),
            }
        })
        .collect();
    Ok(TradeoffCurve {
        points,
        replicates: config.replicates,
        raw,
    })
}
