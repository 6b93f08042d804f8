//! Seeded random corpus checking the interlacing theorems and the linear
//! bias/variance orderings.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{
    check_interlacing, eigenvalues_symmetric, principal_submatrix, ColumnSubset, Matrix,
    SpectralSummary, SymmetricMatrix,
};
use crate::linear::{compare_nested, DesignMatrix};
use crate::linalg::dot;
use crate::report::ORDERING_TOLERANCE;
use crate::rng::{replicate_seed, seeded, StreamRng};

pub const PROPERTIES: [&str; 5] = [
    "interlacing",
    "spectral-radius",
    "inverse-interlacing",
    "permutation-similarity",
    "linear-orderings",
];

/// Slot of the linear-model property in [`PROPERTIES`].
const LINEAR: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub min_dim: usize,
    pub max_dim: usize,
    pub trials: usize,
    pub seed: u64,
    /// Test hook: shift the leading submatrix eigenvalue above the parent's
    /// by this multiple of the spectral radius before checking.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<f64>,
}

impl VerifyConfig {
    pub fn new(min_dim: usize, max_dim: usize, trials: usize, seed: u64) -> Result<Self> {
        if min_dim < 2 || max_dim < min_dim {
            return Err(Error::input(format!(
                "dimension range {min_dim}..{max_dim} must satisfy 2 ≤ min ≤ max"
            )));
        }
        if trials == 0 {
            return Err(Error::input("trials must be at least 1"));
        }
        Ok(Self {
            min_dim,
            max_dim,
            trials,
            seed,
            perturbation: None,
        })
    }
}

/// Where a property first failed, enough to rebuild the instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureWitness {
    pub trial: usize,
    pub seed: u64,
    pub dim: usize,
    pub kept: Vec<usize>,
    pub violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub property: &'static str,
    pub checked: usize,
    pub failures: usize,
    /// Largest violation relative to the instance's scale; 0 when none.
    pub max_violation: f64,
    pub first_failure: Option<FailureWitness>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub tolerance: f64,
    pub properties: Vec<PropertyOutcome>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.properties.iter().all(PropertyOutcome::passed)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyOutcome> {
        self.properties.iter().find(|p| p.property == name)
    }

    pub fn first_failure(&self) -> Option<(&'static str, &FailureWitness)> {
        self.properties
            .iter()
            .filter_map(|p| p.first_failure.as_ref().map(|w| (p.property, w)))
            .min_by_key(|(_, w)| w.trial)
    }
}

/// A random SPD instance: Gram matrix of a Gaussian matrix with more rows
/// than columns, plus a random proper principal subset.
#[derive(Debug, Clone)]
pub struct SpdInstance {
    pub matrix: SymmetricMatrix,
    pub keep: ColumnSubset,
}

pub fn random_spd_instance(rng: &mut StreamRng, min_dim: usize, max_dim: usize) -> SpdInstance {
    let dim = rng.random_range(min_dim..=max_dim);
    let rows = dim + 1 + rng.random_range(0..=dim);
    let b = Matrix::from_fn(rows, dim, |_, _| rng.sample(StandardNormal));
    let kept_len = rng.random_range(1..dim);
    let mut kept = sample(rng, dim, kept_len).into_vec();
    kept.sort_unstable();
    SpdInstance {
        matrix: b.gram(),
        keep: ColumnSubset::new(kept, dim).expect("sampled subset is valid"),
    }
}

type Violations = [Option<std::result::Result<f64, String>>; 5];

struct Trial {
    dim: usize,
    kept: Vec<usize>,
    violations: Violations,
}

fn relative_excess(smaller: f64, larger: f64, scale: f64) -> f64 {
    ((smaller - larger) / scale).max(0.0)
}

fn spectra_trial(rng: &mut StreamRng, config: &VerifyConfig) -> Trial {
    let inst = random_spd_instance(rng, config.min_dim, config.max_dim);
    let mut violations: Violations = Default::default();
    let mut checks = || -> Result<[f64; 4]> {
        let full = eigenvalues_symmetric(&inst.matrix)?;
        let mut sub = eigenvalues_symmetric(&principal_submatrix(&inst.matrix, &inst.keep)?)?;
        let rho = full.spectral_radius;
        if let Some(delta) = config.perturbation {
            let mut values = sub.eigenvalues.clone();
            values[0] = full.largest() + delta * rho;
            sub = SpectralSummary::from_eigenvalues(values);
        }
        let interlacing = check_interlacing(&full, &sub, ORDERING_TOLERANCE * rho)?;
        let radius = relative_excess(sub.largest(), full.largest(), rho);
        let full_inv = full.inverted()?;
        let inverse = check_interlacing(
            &full_inv,
            &sub.inverted()?,
            ORDERING_TOLERANCE * full_inv.spectral_radius,
        )?;

        let mut perm: Vec<usize> = (0..full.dim()).collect();
        perm.shuffle(rng);
        let permuted = eigenvalues_symmetric(&inst.matrix.permuted(&perm)?)?;
        let drift = full
            .eigenvalues
            .iter()
            .zip(&permuted.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok([
            interlacing.max_violation / rho,
            radius,
            inverse.max_violation / full_inv.spectral_radius,
            drift / rho,
        ])
    };
    match checks() {
        Ok(v) => {
            for (slot, value) in violations.iter_mut().zip(v) {
                *slot = Some(Ok(value));
            }
        }
        Err(e) => {
            for slot in violations.iter_mut().take(4) {
                *slot = Some(Err(e.to_string()));
            }
        }
    }
    Trial {
        dim: inst.matrix.dim(),
        kept: inst.keep.indices().to_vec(),
        violations,
    }
}

/// Random OLS instance with N ∈ [20, 200] and p ∈ [2, 10].
pub fn random_linear_instance(rng: &mut StreamRng) -> (DesignMatrix, Vec<f64>, ColumnSubset) {
    let n = rng.random_range(20..=200);
    let p = rng.random_range(2..=10);
    let x = Matrix::from_fn(n, p, |_, _| rng.sample(StandardNormal));
    let beta: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
    let mut y = x.mul_vec(&beta);
    for v in &mut y {
        *v += rng.sample::<f64, _>(StandardNormal);
    }
    let kept_len = rng.random_range(1..p);
    let mut kept = sample(rng, p, kept_len).into_vec();
    kept.sort_unstable();
    let design = DesignMatrix::new(x).expect("Gaussian design is finite");
    (design, y, ColumnSubset::new(kept, p).expect("sampled subset is valid"))
}

fn linear_trial(rng: &mut StreamRng) -> (usize, Vec<usize>, std::result::Result<f64, String>) {
    let (x, y, subset) = random_linear_instance(rng);
    let outcome = compare_nested(&x, &y, &subset).map(|r| {
        let y_sq = dot(&y, &y);
        let worst = relative_excess(r.bias_saturated, r.bias_nested, y_sq)
            .max(relative_excess(r.residual_norm_saturated, r.residual_norm_nested, y_sq.sqrt()))
            .max(relative_excess(r.var_radius_nested, r.var_radius_saturated, r.var_radius_saturated))
            .max(relative_excess(r.info_radius_nested, r.info_radius_saturated, r.info_radius_saturated));
        if r.violates_theorem() {
            worst.max(f64::MIN_POSITIVE).max(ORDERING_TOLERANCE * 2.0)
        } else {
            worst
        }
    });
    (x.n_cols(), subset.indices().to_vec(), outcome.map_err(|e| e.to_string()))
}

/// Runs `config.trials` matrix trials and as many linear-model trials. Trial
/// `t` draws from seed `replicate_seed(config.seed, t)`; results do not
/// depend on `exec`.
pub fn run_verify(config: &VerifyConfig, exec: Execution) -> VerifyReport {
    let trials = exec.map(config.trials, |t| {
        let seed = replicate_seed(config.seed, t as u64);
        let mut rng = seeded(seed);
        let mut trial = spectra_trial(&mut rng, config);
        let (p, kept, linear) = linear_trial(&mut rng);
        trial.violations[LINEAR] = Some(linear);
        (seed, trial, p, kept)
    });

    let mut properties: Vec<PropertyOutcome> = PROPERTIES
        .iter()
        .map(|&property| PropertyOutcome {
            property,
            checked: 0,
            failures: 0,
            max_violation: 0.0,
            first_failure: None,
        })
        .collect();
    for (t, (seed, trial, p, kept)) in trials.into_iter().enumerate() {
        for (k, outcome) in properties.iter_mut().enumerate() {
            let Some(result) = &trial.violations[k] else { continue };
            outcome.checked += 1;
            let (violation, error) = match result {
                Ok(v) => (*v, None),
                Err(e) => (f64::INFINITY, Some(e.clone())),
            };
            outcome.max_violation = outcome.max_violation.max(violation);
            if violation > ORDERING_TOLERANCE {
                outcome.failures += 1;
                if outcome.first_failure.is_none() {
                    let (dim, kept) = if k == LINEAR {
                        (p, kept.clone())
                    } else {
                        (trial.dim, trial.kept.clone())
                    };
                    outcome.first_failure = Some(FailureWitness {
                        trial: t,
                        seed,
                        dim,
                        kept,
                        violation,
                        error,
                    });
                }
            }
        }
    }
    VerifyReport {
        config: config.clone(),
        tolerance: ORDERING_TOLERANCE,
        properties,
    }
}
