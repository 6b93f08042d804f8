//! Synthetic data, train/validation splits and complexity sweeps.

mod generate;
mod sweep;

pub use generate::{generate, Dataset, GeneratedData, GeneratorFamily, GeneratorSpec, PolynomialSpec};
pub use sweep::{
    sweep_complexity, CurvePoint, DataSource, Ladder, ReplicateRecord, RungOutcome, SweepConfig,
    SweepModel, TradeoffCurve,
};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::linear::DesignMatrix;
use crate::rng::seeded;

pub const MIN_TRAIN_FRACTION: f64 = 0.2;
pub const MAX_TRAIN_FRACTION: f64 = 0.8;
pub const MIN_SPLIT_SIZE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    train_fraction: f64,
    seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(MIN_TRAIN_FRACTION..=MAX_TRAIN_FRACTION).contains(&train_fraction) {
            return Err(Error::input(format!(
                "train fraction {train_fraction} outside [{MIN_TRAIN_FRACTION}, {MAX_TRAIN_FRACTION}]"
            )));
        }
        Ok(Self {
            train_fraction,
            seed,
        })
    }

    pub fn train_fraction(&self) -> f64 {
        self.train_fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Disjoint, exhaustive, sorted index sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Partitions `0..n` with `round(fraction · n)` training indices: a uniform
/// random subset, or the leading prefix when `contiguous`.
pub fn split_indices(n: usize, spec: &SplitSpec, contiguous: bool) -> Result<Partition> {
    if n < MIN_SPLIT_SIZE {
        return Err(Error::input(format!(
            "need at least {MIN_SPLIT_SIZE} observations to split, have {n}"
        )));
    }
    let n_train = (spec.train_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    if !contiguous {
        order.shuffle(&mut seeded(spec.seed));
    }
    let (train, validation) = order.split_at(n_train);
    let mut train = train.to_vec();
    let mut validation = validation.to_vec();
    train.sort_unstable();
    validation.sort_unstable();
    Ok(Partition { train, validation })
}

/// Splits a dataset into (train, validation). Series are split into a
/// contiguous prefix and suffix, everything else at random.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let contiguous = matches!(dataset, Dataset::Series(_));
    let part = split_indices(dataset.len(), spec, contiguous)?;
    Ok((dataset.select(&part.train)?, dataset.select(&part.validation)?))
}

/// Vandermonde design with columns `x⁰, x¹, …, x^degree`.
pub fn polynomial_design(x: &[f64], degree: usize) -> Result<DesignMatrix> {
    if degree + 1 > x.len() {
        return Err(Error::input(format!(
            "degree {degree} needs at least {} points, have {}",
            degree + 1,
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("polynomial abscissae must be finite"));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() < degree + 1 {
        return Err(Error::Singular {
            index: sorted.len(),
            pivot: 0.0,
            tolerance: 0.0,
        });
    }
    DesignMatrix::new(Matrix::from_fn(x.len(), degree + 1, |i, j| x[i].powi(j as i32)))
}
