use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nestspec::glm::{GlmFamily, WeightMode};
use nestspec::harness::{GeneratorFamily, SweepModel};

use crate::input::Schema;
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "nestspec", version, about = "Fit saturated and nested models and compare their bias and variance spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model and report estimates, standard errors and the covariance spectrum.
    Fit(FitArgs),
    /// Fit a saturated and a nested model and check the bias/variance orderings.
    Compare(CompareArgs),
    /// Trace train/validation cost and variance radius along a ladder of nested models.
    Sweep(SweepArgs),
    /// Run the seeded interlacing and ordering corpus.
    Verify(VerifyArgs),
    /// Write a synthetic dataset in the input schema of its family.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Linear,
    Gaussian,
    Binomial,
    Poisson,
    #[value(alias = "survival")]
    Cox,
    Ar,
}

impl Family {
    pub fn glm(self) -> Option<GlmFamily> {
        match self {
            Family::Gaussian => Some(GlmFamily::Gaussian),
            Family::Binomial => Some(GlmFamily::Binomial),
            Family::Poisson => Some(GlmFamily::Poisson),
            _ => None,
        }
    }

    pub fn schema(self) -> Schema {
        match self {
            Family::Cox => Schema::Survival,
            Family::Ar => Schema::Series,
            _ => Schema::Regression(self.glm()),
        }
    }

    pub fn generator(self) -> GeneratorFamily {
        match self {
            Family::Linear | Family::Gaussian => GeneratorFamily::Linear,
            Family::Binomial => GeneratorFamily::Binomial,
            Family::Poisson => GeneratorFamily::Poisson,
            Family::Cox => GeneratorFamily::Survival,
            Family::Ar => GeneratorFamily::Ar,
        }
    }

    pub fn sweep_model(self) -> SweepModel {
        match (self, self.glm()) {
            (_, Some(g)) => SweepModel::Glm(g),
            (Family::Cox, _) => SweepModel::Cox,
            (Family::Ar, _) => SweepModel::Ar,
            _ => SweepModel::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weights {
    Shared,
    Refit,
}

impl From<Weights> for WeightMode {
    fn from(w: Weights) -> Self {
        match w {
            Weights::Shared => WeightMode::Shared,
            Weights::Refit => WeightMode::Refit,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report destination, written atomically.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV input: y,x1..xp (linear/GLM), time,event,x1..xp (cox) or value (ar).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub family: Family,
    /// AR order.
    #[arg(long)]
    pub order: Option<usize>,
    /// Accepted for uniformity; fitting uses no randomness.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub family: Family,
    /// Columns kept by the nested model, comma-separated 0-based indices.
    #[arg(long)]
    pub subset: Option<String>,
    /// How the nested GLM Fisher matrix is weighted.
    #[arg(long, value_enum, default_value_t = Weights::Shared)]
    pub weights: Weights,
    /// Saturated AR order.
    #[arg(long)]
    pub order: Option<usize>,
    /// Nested AR order.
    #[arg(long)]
    pub nested_order: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GeneratorArgs {
    /// True parameters (β, or φ for ar), comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<String>,
    /// Number of observations.
    #[arg(long)]
    pub n: Option<usize>,
    /// Noise sd (linear, ar) or target censoring fraction (cox). Defaults
    /// to 1 and 0.3 respectively.
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Fixed dataset; without it data are generated per replicate.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Family::Linear)]
    pub family: Family,
    /// `prefix`, rungs such as `0;0,1;0,1,2`, or AR orders such as `1,2,3`.
    #[arg(long)]
    pub ladder: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.5)]
    pub train_fraction: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Inclusive dimension range, e.g. `2..20`.
    #[arg(long, default_value = "2..20")]
    pub dims: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Test hook: push a submatrix eigenvalue past its bound.
    #[arg(long, hide = true)]
    pub inject_perturbation: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// Dataset destination (CSV); ground truth goes to `<output>.meta.json`.
    #[arg(long)]
    pub output: PathBuf,
}
