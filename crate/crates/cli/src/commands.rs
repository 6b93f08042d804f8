use std::path::{Path, PathBuf};

use log::{debug, info};
use nestspec::cox::{compare_nested_cox, fit_cox, SurvivalData};
use nestspec::glm::{compare_nested_glm, fit_glm, WeightMode};
use nestspec::harness::{
    generate, sweep_complexity, DataSource, Dataset, GeneratorSpec, Ladder, PolynomialSpec,
    SplitSpec, SweepConfig, TradeoffCurve,
};
use nestspec::linalg::{eigenvalues_symmetric, invert_spd};
use nestspec::linear::{compare_nested, fit_ols};
use nestspec::timeseries::{
    autocovariance, compare_nested_ar, solve_yule_walker, toeplitz_from, TimeSeriesSample,
};
use nestspec::verify::{run_verify, VerifyConfig, VerifyReport};
use nestspec::{ColumnSubset, DesignMatrix, Execution, Matrix, NestedComparisonReport, SymmetricMatrix};
use serde_json::{json, Value};

use crate::args::{CompareArgs, Family, FitArgs, GeneratorArgs, SimulateArgs, SweepArgs, VerifyArgs};
use crate::failure::CliError;
use crate::input::{read_dataset, Schema};
use crate::output::{float, optional, write_atomic, write_table, Report, Table, SCHEMA_VERSION};

fn require_seed(seed: Option<u64>, command: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::usage(format!("{command} draws random numbers and needs --seed")))
}

fn regression(data: Dataset) -> (Matrix, Vec<f64>) {
    match data {
        Dataset::Regression { x, y } => (x, y),
        _ => unreachable!("schema guarantees regression data"),
    }
}

fn survival(data: Dataset) -> SurvivalData {
    match data {
        Dataset::Survival(d) => d,
        _ => unreachable!("schema guarantees survival data"),
    }
}

fn series(data: Dataset) -> TimeSeriesSample {
    match data {
        Dataset::Series(s) => s,
        _ => unreachable!("schema guarantees a series"),
    }
}

fn ar_orders(order: Option<usize>, nested: Option<usize>) -> Result<(usize, Option<usize>), CliError> {
    let p = order.ok_or_else(|| CliError::usage("ar models need --order"))?;
    if p == 0 {
        return Err(CliError::usage("--order must be at least 1"));
    }
    Ok((p, nested))
}

// ---------------------------------------------------------------- fit

struct Estimates<'a> {
    family: Family,
    n: usize,
    names: Vec<String>,
    values: &'a [f64],
    covariance: Option<&'a SymmetricMatrix>,
    convergence: Value,
    statistics: Value,
}

fn standard_errors(cov: &SymmetricMatrix) -> Vec<f64> {
    cov.diagonal_entries().iter().map(|v| v.max(0.0).sqrt()).collect()
}

fn fit_report(e: Estimates<'_>) -> Result<Report, CliError> {
    let ses = e.covariance.map(standard_errors);
    let spectrum = e.covariance.map(eigenvalues_symmetric).transpose()?;
    let mut table = Table::new(["parameter", "estimate", "standard_error"]);
    for (k, name) in e.names.iter().enumerate() {
        table.push(vec![
            name.clone(),
            float(e.values[k]),
            optional(ses.as_ref().map(|s| s[k])),
        ]);
    }
    let json = json!({
        "family": e.family.to_possible_value_name(),
        "n_observations": e.n,
        "parameters": e.names,
        "estimates": e.values,
        "standard_errors": ses,
        "covariance_spectrum": spectrum,
        "convergence": e.convergence,
        "statistics": e.statistics,
    });
    Ok(Report::new("fit", json, table))
}

fn coefficient_names(prefix: &str, p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("{prefix}{j}")).collect()
}

pub fn fit(args: FitArgs) -> Result<(), CliError> {
    let family = args.family;
    if family != Family::Ar && args.order.is_some() {
        return Err(CliError::usage("--order applies to ar fits only"));
    }
    let data = read_dataset(&args.input, family.schema())?;
    let report = match family {
        Family::Linear => {
            let (x, y) = regression(data);
            let x = DesignMatrix::new(x)?;
            let fit = fit_ols(&x, &y)?;
            fit_report(Estimates {
                family,
                n: y.len(),
                names: coefficient_names("beta", x.n_cols()),
                values: &fit.beta_hat,
                covariance: fit.covariance.as_ref(),
                convergence: json!({"converged": true, "iterations": 1, "final_step_norm": null}),
                statistics: json!({
                    "rss": fit.rss,
                    "sigma2_hat": fit.sigma2_hat,
                    "dof": fit.dof,
                }),
            })?
        }
        Family::Gaussian | Family::Binomial | Family::Poisson => {
            let glm = family.glm().expect("GLM family");
            let (x, y) = regression(data);
            let x = DesignMatrix::new(x)?;
            let fit = fit_glm(&x, &y, glm)?;
            fit_report(Estimates {
                family,
                n: y.len(),
                names: coefficient_names("beta", x.n_cols()),
                values: &fit.beta_hat,
                covariance: Some(&fit.fisher_inverse),
                convergence: json!({
                    "converged": fit.converged,
                    "iterations": fit.iterations,
                    "final_step_norm": fit.final_step_norm,
                }),
                statistics: json!({
                    "log_likelihood": fit.log_likelihood,
                    "deviance": fit.deviance,
                    "dispersion": fit.dispersion,
                }),
            })?
        }
        Family::Cox => {
            let data = survival(data);
            let fit = fit_cox(&data)?;
            fit_report(Estimates {
                family,
                n: data.n(),
                names: coefficient_names("beta", data.p()),
                values: &fit.beta_hat,
                covariance: Some(&fit.fisher_inverse),
                convergence: json!({
                    "converged": fit.converged,
                    "iterations": fit.iterations,
                    "final_step_norm": null,
                }),
                statistics: json!({
                    "partial_loglik": fit.partial_loglik,
                    "n_events": fit.n_events,
                    "score": fit.score,
                }),
            })?
        }
        Family::Ar => {
            let (p, _) = ar_orders(args.order, None)?;
            let x = series(data);
            x.require_order(p)?;
            let gamma = autocovariance(&x, p)?;
            let sol = solve_yule_walker(&gamma, p)?;
            // asymptotic covariance of φ̂: σ² Γ⁻¹ / n
            let covariance = invert_spd(&toeplitz_from(&gamma, p)?)?.scaled(sol.sigma2 / x.len() as f64);
            fit_report(Estimates {
                family,
                n: x.len(),
                names: coefficient_names("phi", p),
                values: &sol.phi,
                covariance: Some(&covariance),
                convergence: json!({"converged": true, "iterations": 1, "final_step_norm": null}),
                statistics: json!({
                    "sigma2": sol.sigma2,
                    "autocovariance": gamma.gamma,
                    "toeplitz_spectrum": sol.toeplitz_spectrum,
                }),
            })?
        }
    };
    report.write(&args.out.output, args.out.format)
}

// ---------------------------------------------------------------- compare

fn comparison_table(r: &NestedComparisonReport) -> Table {
    let mut t = Table::new(["quantity", "saturated", "nested", "ordering_holds"]);
    let mut row = |name: &str, s: f64, n: f64, holds: bool| {
        t.push(vec![name.into(), float(s), float(n), holds.to_string()]);
    };
    row("bias", r.bias_saturated, r.bias_nested, r.checks.bias);
    row("residual_norm", r.residual_norm_saturated, r.residual_norm_nested, r.checks.residual_norm);
    row("var_radius", r.var_radius_saturated, r.var_radius_nested, r.checks.var_radius);
    row("info_radius", r.info_radius_saturated, r.info_radius_nested, r.checks.info_radius);
    if let (Some(s), Some(n)) = (r.scaled_var_radius_saturated, r.scaled_var_radius_nested) {
        t.push(vec!["scaled_var_radius".into(), float(s), float(n), String::new()]);
    }
    t
}

fn parse_subset(text: Option<&str>, p: usize) -> Result<ColumnSubset, CliError> {
    let text = text.ok_or_else(|| CliError::usage("compare needs --subset (comma-separated 0-based columns)"))?;
    ColumnSubset::parse(text, p).map_err(|e| CliError::usage(format!("--subset: {}", e.root())))
}

pub fn compare(args: CompareArgs) -> Result<(), CliError> {
    let family = args.family;
    if family != Family::Ar && (args.order.is_some() || args.nested_order.is_some()) {
        return Err(CliError::usage("--order/--nested-order apply to ar comparisons only"));
    }
    if family.glm().is_none() && args.weights == crate::args::Weights::Refit {
        return Err(CliError::usage("--weights applies to GLM families only"));
    }
    let data = read_dataset(&args.input, family.schema())?;
    let (report, extra) = match family {
        Family::Linear => {
            let p = data.n_covariates();
            let subset = parse_subset(args.subset.as_deref(), p)?;
            let (x, y) = regression(data);
            (compare_nested(&DesignMatrix::new(x)?, &y, &subset)?, None)
        }
        Family::Gaussian | Family::Binomial | Family::Poisson => {
            let subset = parse_subset(args.subset.as_deref(), data.n_covariates())?;
            let (x, y) = regression(data);
            let mode = WeightMode::from(args.weights);
            let r = compare_nested_glm(&DesignMatrix::new(x)?, &y, family.glm().expect("GLM family"), &subset, mode)?;
            if mode == WeightMode::Refit {
                info!(
                    "refit weights: variance-radius ordering {} (reported, not asserted)",
                    if r.checks.var_radius { "held" } else { "failed" }
                );
            }
            (r, None)
        }
        Family::Cox => {
            let subset = parse_subset(args.subset.as_deref(), data.n_covariates())?;
            let r = compare_nested_cox(&survival(data), &subset)?;
            if let Some(refit) = &r.refit {
                info!("refit nested Cox model: variance-radius ordering held = {}", refit.var_ordering_holds);
            }
            (r, None)
        }
        Family::Ar => {
            if args.subset.is_some() {
                return Err(CliError::usage("ar comparisons take --order and --nested-order, not --subset"));
            }
            let (p, m) = ar_orders(args.order, args.nested_order)?;
            let m = m.ok_or_else(|| CliError::usage("ar comparisons need --nested-order"))?;
            if m == 0 || m >= p {
                return Err(CliError::usage(format!("--nested-order must be in 1..{p}")));
            }
            let cmp = compare_nested_ar(&series(data), p, m)?;
            let extra = json!({
                "saturated_fit": {"order": p, "phi": cmp.saturated.phi, "sigma2": cmp.saturated.sigma2},
                "nested_fit": {"order": m, "phi": cmp.nested.phi, "sigma2": cmp.nested.sigma2},
            });
            (cmp.report, Some(extra))
        }
    };
    let mut json = serde_json::to_value(&report).expect("report serializes");
    if let (Value::Object(map), Some(Value::Object(extra))) = (&mut json, extra) {
        map.extend(extra);
    }
    Report::new("compare", json, comparison_table(&report)).write(&args.out.output, args.out.format)?;
    if report.violates_theorem() {
        return Err(CliError::Violation(format!(
            "{:?} comparison with subset {:?} broke a theorem-backed ordering: checks {:?}, interlacing {} / inverse {}",
            report.family, report.subset, report.checks, report.gram_interlacing.holds, report.inverse_interlacing.holds
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------- sweep

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::usage(format!("{what}: '{s}' is not valid"))))
        .collect()
}

fn parse_ladder(text: Option<&str>, family: Family, n_covariates: usize) -> Result<Ladder, CliError> {
    if family == Family::Ar {
        let text = text.ok_or_else(|| CliError::usage("ar sweeps need --ladder with orders, e.g. 1,2,3,4"))?;
        return Ok(Ladder::ArOrders(parse_list(text, "--ladder")?));
    }
    match text {
        None | Some("prefix") => Ok(Ladder::prefixes(n_covariates)),
        Some(text) => Ok(Ladder::Columns(
            text.split(';')
                .map(|rung| parse_list(rung, "--ladder"))
                .collect::<Result<_, _>>()?,
        )),
    }
}

fn generator_spec(family: Family, g: &GeneratorArgs, seed: u64) -> Result<GeneratorSpec, CliError> {
    let params = match &g.params {
        Some(text) => parse_list(text, "--params")?,
        None => return Err(CliError::usage("generated data need --params")),
    };
    let noise = g.noise.unwrap_or(if family == Family::Cox { 0.3 } else { 1.0 });
    Ok(GeneratorSpec {
        family: family.generator(),
        n: g.n.unwrap_or(200),
        params,
        noise,
        seed,
    })
}

fn curve_table(curve: &TradeoffCurve) -> Table {
    let mut t = Table::new([
        "complexity",
        "train_cost_mean",
        "train_cost_se",
        "validation_cost_mean",
        "validation_cost_se",
        "var_radius_mean",
    ]);
    for p in &curve.points {
        t.push(vec![
            p.complexity.to_string(),
            optional(p.train_cost_mean),
            optional(p.train_cost_se),
            optional(p.validation_cost_mean),
            optional(p.validation_cost_se),
            optional(p.var_radius_mean),
        ]);
    }
    t
}

pub fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let seed = require_seed(args.seed, "sweep")?;
    let split = SplitSpec::new(args.train_fraction, seed.wrapping_add(1))
        .map_err(|e| CliError::usage(format!("--train-fraction: {}", e.root())))?;
    let family = args.family;
    let (source, n_covariates) = match &args.input {
        Some(path) => {
            if args.generator.params.is_some() || args.generator.n.is_some() || args.generator.noise.is_some() {
                return Err(CliError::usage("--params/--n/--noise describe generated data; drop them with --input"));
            }
            let data = read_dataset(path, family.schema())?;
            let p = data.n_covariates();
            (DataSource::Fixed(data), p)
        }
        None if family == Family::Linear && args.generator.params.is_none() => {
            let mut spec = PolynomialSpec::noisy_cubic(seed);
            if let Some(n) = args.generator.n {
                spec.n = n;
            }
            if let Some(noise) = args.generator.noise {
                spec.noise = noise;
            }
            let p = spec.max_degree + 1;
            (DataSource::Polynomial(spec), p)
        }
        None => {
            let spec = generator_spec(family, &args.generator, seed)?;
            let p = if family == Family::Ar { 0 } else { spec.params.len() };
            (DataSource::Generated(spec), p)
        }
    };
    let config = SweepConfig {
        model: family.sweep_model(),
        ladder: parse_ladder(args.ladder.as_deref(), family, n_covariates)?,
        split,
        replicates: args.replicates,
    };
    let curve = sweep_complexity(&source, &config, Execution::default()).map_err(|e| match e {
        e if e.is_input() => CliError::usage(e.root().to_string()),
        e => CliError::Fit(e),
    })?;
    let failures: usize = curve.points.iter().map(|p| p.failed).sum();
    if failures > 0 {
        info!("{failures} rung fit(s) failed and were left out of the means");
    }
    let json = json!({
        "family": family.to_possible_value_name(),
        "seed": seed,
        "train_fraction": args.train_fraction,
        "replicates": curve.replicates,
        "ladder": config.ladder,
        "validation_argmin_complexity": curve.validation_argmin().map(|i| curve.points[i].complexity),
        "points": curve.points,
        "raw": curve.raw,
    });
    Report::new("sweep", json, curve_table(&curve)).write(&args.out.output, args.out.format)
}

// ---------------------------------------------------------------- verify

fn parse_dims(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::usage(format!("--dims '{text}' must look like 2..20"));
    let (lo, hi) = text
        .split_once("..=")
        .or_else(|| text.split_once(".."))
        .or_else(|| text.split_once('-'))
        .ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn verify_table(report: &VerifyReport) -> Table {
    let mut t = Table::new([
        "property",
        "checked",
        "failures",
        "max_violation",
        "first_failure_seed",
        "first_failure_dim",
    ]);
    for p in &report.properties {
        let w = p.first_failure.as_ref();
        t.push(vec![
            p.property.to_string(),
            p.checked.to_string(),
            p.failures.to_string(),
            float(p.max_violation),
            w.map(|w| w.seed.to_string()).unwrap_or_default(),
            w.map(|w| w.dim.to_string()).unwrap_or_default(),
        ]);
    }
    t
}

pub fn verify(args: VerifyArgs) -> Result<(), CliError> {
    let seed = require_seed(args.seed, "verify")?;
    let (lo, hi) = parse_dims(&args.dims)?;
    let mut config = VerifyConfig::new(lo, hi, args.trials, seed).map_err(|e| CliError::usage(e.root().to_string()))?;
    config.perturbation = args.inject_perturbation;
    let report = run_verify(&config, Execution::default());
    for p in &report.properties {
        debug!("{}: {} checked, {} failed, max violation {:e}", p.property, p.checked, p.failures, p.max_violation);
    }
    let json = serde_json::to_value(&report).expect("report serializes");
    Report::new("verify", json, verify_table(&report)).write(&args.out.output, args.out.format)?;
    match report.first_failure() {
        None => Ok(()),
        Some((property, w)) => Err(CliError::Violation(format!(
            "{property} failed at trial {} (seed {}, dim {}, kept {:?}, violation {:e})",
            w.trial, w.seed, w.dim, w.kept, w.violation
        ))),
    }
}

// ---------------------------------------------------------------- simulate

/// The dataset in its family's input schema.
pub fn dataset_table(data: &Dataset) -> Table {
    match data {
        Dataset::Regression { x, y } => {
            let mut t = Table::new(Schema::Regression(None).header(x.cols()));
            for (i, yi) in y.iter().enumerate() {
                t.push(std::iter::once(float(*yi)).chain(x.row(i).iter().map(|v| float(*v))).collect());
            }
            t
        }
        Dataset::Survival(d) => {
            let mut t = Table::new(Schema::Survival.header(d.p()));
            for r in d.records() {
                let head = [float(r.time), if r.event { "1" } else { "0" }.to_string()];
                t.push(head.into_iter().chain(r.covariates.iter().map(|v| float(*v))).collect());
            }
            t
        }
        Dataset::Series(s) => {
            let mut t = Table::new(Schema::Series.header(0));
            for v in s.values() {
                t.push(vec![float(*v)]);
            }
            t
        }
    }
}

pub fn metadata_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    output.with_file_name(name)
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let seed = require_seed(args.seed, "simulate")?;
    let spec = generator_spec(args.family, &args.generator, seed)?;
    let generated = generate(&spec).map_err(|e| CliError::usage(e.root().to_string()))?;
    let table = dataset_table(&generated.dataset);
    write_table(&args.output, &table)?;
    let meta = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "dataset": args.output.file_name().map(|n| n.to_string_lossy().into_owned()),
        "columns": table.header,
        "generator": spec,
    });
    let mut bytes = serde_json::to_vec_pretty(&meta).expect("metadata serializes");
    bytes.push(b'\n');
    write_atomic(&metadata_path(&args.output), &bytes)
}

trait ValueName {
    fn to_possible_value_name(&self) -> String;
}

impl ValueName for Family {
    fn to_possible_value_name(&self) -> String {
        use clap::ValueEnum;
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}
