//! Acceptance suite. Runs each criterion in turn, prints one PASS/FAIL line
//! per criterion and exits nonzero if any failed.

#[path = "../common/mod.rs"]
mod common;
mod oracles;

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nestspec::cox::{cox_score_and_fisher, compare_nested_cox, fit_cox, SurvivalData, SurvivalRecord};
use nestspec::glm::{compare_nested_glm, fit_glm, GlmFamily, WeightMode};
use nestspec::harness::{
    generate, sweep_complexity, DataSource, Dataset, GeneratorFamily, GeneratorSpec, Ladder, PolynomialSpec,
    SplitSpec, SweepConfig, SweepModel,
};
use nestspec::linalg::jacobi_eigen;
use nestspec::linear::compare_nested;
use nestspec::report::ORDERING_TOLERANCE;
use nestspec::rng::{replicate_seed, seeded};
use nestspec::timeseries::{autocovariance, compare_nested_ar, simulate_ar, solve_yule_walker, AutocovarianceEstimate};
use nestspec::verify::{random_linear_instance, run_verify, VerifyConfig};
use nestspec::{ColumnSubset, DesignMatrix, Execution};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use common::{bits, code, floats, nestspec, read_json, stderr, MALFORMED};

const SEED: u64 = 20_240_601;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn within(elapsed: Duration, limit: u64) -> bool {
    elapsed < Duration::from_secs(limit)
}

/// `a ≤ b` up to `tol · scale`.
fn leq(a: f64, b: f64, scale: f64) -> bool {
    a <= b + ORDERING_TOLERANCE * scale
}

fn random_subset<R: Rng>(rng: &mut R, p: usize) -> ColumnSubset {
    let k = rng.random_range(1..p);
    let mut kept = sample(rng, p, k).into_vec();
    kept.sort_unstable();
    ColumnSubset::new(kept, p).unwrap()
}

fn interlacing_fuzz() -> Verdict {
    let start = Instant::now();
    let config = VerifyConfig::new(2, 20, 1000, SEED).unwrap();
    let report = run_verify(&config, Execution::default());
    let elapsed = start.elapsed();
    let outcome = report.property("interlacing").unwrap();
    let pass = outcome.checked == 1000
        && outcome.failures == 0
        && outcome.max_violation <= report.tolerance
        && within(elapsed, 30);
    Verdict::new(
        pass,
        format!(
            "{} trials, {} failures, max violation {:.3e} (relative, limit {:.0e}), {:.2?}",
            outcome.checked, outcome.failures, outcome.max_violation, report.tolerance, elapsed
        ),
    )
}

fn spectral_radius_monotone() -> Verdict {
    let config = VerifyConfig::new(2, 20, 1000, SEED).unwrap();
    let report = run_verify(&config, Execution::default());
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["spectral-radius", "inverse-interlacing"] {
        let o = report.property(name).unwrap();
        pass &= o.checked == 1000 && o.failures == 0;
        parts.push(format!("{name}: {}/{} clean", o.checked - o.failures, o.checked));
    }
    Verdict::new(pass, parts.join(", "))
}

fn linear_orderings() -> Verdict {
    let start = Instant::now();
    let mut violations = 0;
    let mut errors = 0;
    for t in 0..1000 {
        let mut rng = seeded(replicate_seed(SEED + 3, t));
        let (x, y, subset) = random_linear_instance(&mut rng);
        let Ok(r) = compare_nested(&x, &y, &subset) else {
            errors += 1;
            continue;
        };
        let y_sq: f64 = y.iter().map(|v| v * v).sum();
        let ok = leq(r.bias_saturated, r.bias_nested, y_sq)
            && leq(r.residual_norm_saturated, r.residual_norm_nested, y_sq.sqrt())
            && leq(r.var_radius_nested, r.var_radius_saturated, r.var_radius_saturated);
        if !ok {
            violations += 1;
        }
    }
    let elapsed = start.elapsed();
    Verdict::new(
        violations == 0 && errors == 0 && within(elapsed, 60),
        format!("1000 instances, {violations} violations, {errors} fit errors, {elapsed:.2?}"),
    )
}

fn glm_orderings() -> Verdict {
    let mut detail = Vec::new();
    let mut pass = true;
    for (family, generator, offset) in [
        (GlmFamily::Poisson, GeneratorFamily::Poisson, 40),
        (GlmFamily::Binomial, GeneratorFamily::Binomial, 41),
    ] {
        let (mut violations, mut errors, mut refit_holds, mut refit_checked) = (0, 0, 0, 0);
        for t in 0..500 {
            let mut rng = seeded(replicate_seed(SEED + offset, t));
            let params: Vec<f64> = (0..4).map(|_| 0.3 * rng.sample::<f64, _>(StandardNormal)).collect();
            let subset = random_subset(&mut rng, 4);
            let spec = GeneratorSpec {
                family: generator,
                n: 200,
                params,
                noise: 1.0,
                seed: rng.random(),
            };
            let Dataset::Regression { x, y } = generate(&spec).unwrap().dataset else { unreachable!() };
            let x = DesignMatrix::new(x).unwrap();
            match compare_nested_glm(&x, &y, family, &subset, WeightMode::Shared) {
                Ok(r) if r.orderings_hold && !r.violates_theorem() => {}
                Ok(_) => violations += 1,
                Err(_) => errors += 1,
            }
            if let Ok(r) = compare_nested_glm(&x, &y, family, &subset, WeightMode::Refit) {
                refit_checked += 1;
                refit_holds += r.orderings_hold as usize;
            }
        }
        pass &= violations == 0 && errors == 0;
        detail.push(format!(
            "{family:?}: {violations} violations, {errors} errors (refit mode, not asserted: orderings held in {refit_holds}/{refit_checked})"
        ));
    }
    Verdict::new(pass, detail.join("; "))
}

fn random_records(rng: &mut impl Rng, n: usize, p: usize) -> SurvivalData {
    let records = (0..n)
        .map(|i| SurvivalRecord {
            time: 1.0 + rng.random_range(0..n / 2 + 1) as f64,
            event: i == 0 || rng.random_bool(0.7),
            covariates: (0..p).map(|_| rng.sample(StandardNormal)).collect(),
        })
        .collect();
    SurvivalData::new(records).unwrap()
}

fn simulated_survival(n: usize, params: Vec<f64>, censoring: f64, seed: u64) -> SurvivalData {
    let spec = GeneratorSpec {
        family: GeneratorFamily::Survival,
        n,
        params,
        noise: censoring,
        seed,
    };
    match generate(&spec).unwrap().dataset {
        Dataset::Survival(d) => d,
        _ => unreachable!(),
    }
}

fn cox_derivatives_and_nesting() -> Verdict {
    let mut worst: f64 = 0.0;
    for t in 0..20 {
        let mut rng = seeded(replicate_seed(SEED + 5, t));
        let n = rng.random_range(10..=50);
        let p = rng.random_range(1..=4);
        let data = random_records(&mut rng, n, p);
        let beta: Vec<f64> = (0..p).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
        let (score, fisher) = cox_score_and_fisher(&beta, &data).unwrap();
        let f = |b: &[f64]| oracles::naive_partial_loglik(b, &data);
        let g = oracles::gradient(&f, &beta, 1e-5);
        let h = oracles::hessian(&f, &beta, 1e-5);
        let gscale = score.iter().map(|v| v.abs()).fold(1e-3, f64::max);
        let hscale = fisher.max_abs();
        for i in 0..p {
            worst = worst.max((score[i] - g[i]).abs() / gscale);
            for j in 0..p {
                worst = worst.max((fisher.get(i, j) + h[i][j]).abs() / hscale);
            }
        }
    }
    let mut nested_fail = 0;
    for t in 0..200 {
        let mut rng = seeded(replicate_seed(SEED + 6, t));
        let p = rng.random_range(2..=4);
        let params: Vec<f64> = (0..p).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
        let subset = random_subset(&mut rng, p);
        let data = simulated_survival(200, params, 0.3, rng.random());
        match compare_nested_cox(&data, &subset) {
            Ok(r) if leq(r.var_radius_nested, r.var_radius_saturated, r.var_radius_saturated) => {}
            _ => nested_fail += 1,
        }
    }
    Verdict::new(
        worst <= 1e-4 && nested_fail == 0,
        format!("max relative derivative error {worst:.2e} over 20 instances; fixed-beta ordering failed {nested_fail}/200"),
    )
}

fn cox_recovery() -> Verdict {
    let truth = [0.5, -0.5];
    let mut covered = 0;
    let mut censored = 0.0;
    for r in 0..100 {
        let data = simulated_survival(500, truth.to_vec(), 0.3, replicate_seed(SEED + 7, r));
        censored += 1.0 - data.n_events() as f64 / data.n() as f64;
        let Ok(fit) = fit_cox(&data) else { continue };
        let se = fit.standard_errors();
        if (0..2).all(|k| (fit.beta_hat[k] - truth[k]).abs() <= 3.0 * se[k]) {
            covered += 1;
        }
    }
    Verdict::new(
        covered >= 95,
        format!("both coefficients within 3 SE in {covered}/100 replicates (mean censoring {:.3})", censored / 100.0),
    )
}

fn yule_walker() -> Verdict {
    let (phi, sigma2): (f64, f64) = (0.6, 1.5);
    let gamma: Vec<f64> = (0..=4).map(|k| sigma2 * phi.powi(k) / (1.0 - phi * phi)).collect();
    let exact = solve_yule_walker(&AutocovarianceEstimate::new(gamma).unwrap(), 1).unwrap();
    let exact_err = (exact.phi[0] - phi).abs().max((exact.sigma2 - sigma2).abs());

    let truth = [0.5, -0.3, 0.2];
    let series = simulate_ar(&truth, 1.0, 100_000, SEED + 8).unwrap();
    let fit = solve_yule_walker(&autocovariance(&series, 3).unwrap(), 3).unwrap();
    let ar3_err = fit.phi.iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut nested_ok = 0;
    let mut ld_err: f64 = 0.0;
    for r in 0..200 {
        let series = simulate_ar(&[0.5, -0.3], 1.0, 500, replicate_seed(SEED + 9, r)).unwrap();
        if let Ok(c) = compare_nested_ar(&series, 4, 2) {
            if c.report.orderings_hold && c.report.gram_interlacing.holds && !c.report.violates_theorem() {
                nested_ok += 1;
            }
        }
        let gamma = autocovariance(&series, 4).unwrap();
        let direct = solve_yule_walker(&gamma, 4).unwrap();
        let (phi_ld, err_ld) = oracles::levinson_durbin(&gamma.gamma, 4);
        for (a, b) in direct.phi.iter().zip(&phi_ld) {
            ld_err = ld_err.max((a - b).abs());
        }
        ld_err = ld_err.max((direct.sigma2 - err_ld).abs() / gamma.gamma[0]);
    }
    Verdict::new(
        exact_err <= 1e-12 && ar3_err <= 0.03 && nested_ok == 200 && ld_err <= 1e-8,
        format!(
            "exact AR(1) error {exact_err:.1e}, AR(3) max error {ar3_err:.4}, nested {nested_ok}/200, Levinson-Durbin gap {ld_err:.1e}"
        ),
    )
}

fn tradeoff_curve() -> Verdict {
    let start = Instant::now();
    let batches = 100;
    let (mut monotone, mut interior, mut errors) = (0, 0, 0);
    for b in 0..batches {
        let seed = replicate_seed(SEED + 10, b);
        let config = SweepConfig {
            model: SweepModel::Linear,
            ladder: Ladder::prefixes(10),
            split: SplitSpec::new(0.5, seed.wrapping_add(1)).unwrap(),
            replicates: 100,
        };
        match sweep_complexity(&DataSource::Polynomial(PolynomialSpec::noisy_cubic(seed)), &config, Execution::default()) {
            Ok(curve) => {
                monotone += curve.train_cost_monotone() as usize;
                interior += curve.has_interior_validation_minimum() as usize;
            }
            Err(_) => errors += 1,
        }
    }
    let elapsed = start.elapsed();
    Verdict::new(
        monotone == batches as usize && interior * 100 >= 95 * batches as usize && errors == 0 && within(elapsed, 120),
        format!(
            "{batches} batches of 100 replicates: train monotone in {monotone}, interior validation minimum in {interior}, {errors} errors, {elapsed:.2?}"
        ),
    )
}

fn eigensolver() -> Verdict {
    let (mut worst_recon, mut worst_oracle): (f64, f64) = (0.0, 0.0);
    let mut errors = 0;
    for t in 0..100 {
        let dim = 1 + (t as usize % 20);
        let a = oracles::random_symmetric(dim, replicate_seed(SEED + 11, t));
        let Ok(eig) = jacobi_eigen(&a) else {
            errors += 1;
            continue;
        };
        let radius = eig.summary().spectral_radius;
        let back = eig.reconstruct();
        let recon = a.as_slice().iter().zip(back.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst_recon = worst_recon.max(recon / (1.0 + radius));
        let mut ours = eig.values.clone();
        ours.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in ours.iter().zip(oracles::bisection_eigenvalues(&a)) {
            worst_oracle = worst_oracle.max((x - y).abs());
        }
    }
    Verdict::new(
        worst_recon <= 1e-9 && worst_oracle <= 1e-8 && errors == 0,
        format!("max reconstruction error {worst_recon:.1e} x (1+radius), max bisection gap {worst_oracle:.1e}, {errors} failures"),
    )
}

fn cli_contract() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let at = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let mut problems = Vec::new();

    let data = at("poisson.csv");
    let params = "0.3,0.5,-0.4,0.2";
    let out = nestspec(&["simulate", "--family", "poisson", "--params", params, "--n", "200", "--seed", "17", "--output", &data]);
    if code(&out) != 0 {
        problems.push(format!("simulate exited {}: {}", code(&out), stderr(&out)));
        return Verdict::new(false, problems.join("; "));
    }
    let spec = GeneratorSpec {
        family: GeneratorFamily::Poisson,
        n: 200,
        params: vec![0.3, 0.5, -0.4, 0.2],
        noise: 1.0,
        seed: 17,
    };
    let Dataset::Regression { x, y } = generate(&spec).unwrap().dataset else { unreachable!() };
    let x = DesignMatrix::new(x).unwrap();
    if let Dataset::Regression { x: x_back, y: y_back } =
        reread_regression(&data).expect("simulated file parses")
    {
        if bits(x_back.as_slice()) != bits(x.matrix().as_slice()) || bits(&y_back) != bits(&y) {
            problems.push("re-read dataset differs from generated data".into());
        }
    }

    let fit_json = at("fit.json");
    let out = nestspec(&["fit", "--input", &data, "--family", "poisson", "--output", &fit_json]);
    let fit = fit_glm(&x, &y, GlmFamily::Poisson).unwrap();
    if code(&out) != 0 {
        problems.push(format!("fit exited {}", code(&out)));
    } else {
        let r = read_json(Path::new(&fit_json));
        if bits(&floats(&r["estimates"])) != bits(&fit.beta_hat)
            || bits(&floats(&r["standard_errors"])) != bits(&fit.standard_errors())
        {
            problems.push("fit estimates differ from library".into());
        }
    }

    let cmp_json = at("compare.json");
    let out = nestspec(&["compare", "--input", &data, "--family", "poisson", "--subset", "0,2", "--output", &cmp_json]);
    let subset = ColumnSubset::new(vec![0, 2], 4).unwrap();
    let lib = compare_nested_glm(&x, &y, GlmFamily::Poisson, &subset, WeightMode::Shared).unwrap();
    if code(&out) != 0 {
        problems.push(format!("compare exited {}", code(&out)));
    } else {
        let r = read_json(Path::new(&cmp_json));
        let pairs = [
            ("bias_saturated", lib.bias_saturated),
            ("bias_nested", lib.bias_nested),
            ("residual_norm_saturated", lib.residual_norm_saturated),
            ("residual_norm_nested", lib.residual_norm_nested),
            ("var_radius_saturated", lib.var_radius_saturated),
            ("var_radius_nested", lib.var_radius_nested),
            ("info_radius_saturated", lib.info_radius_saturated),
            ("info_radius_nested", lib.info_radius_nested),
        ];
        for (key, value) in pairs {
            if r[key].as_f64().map(f64::to_bits) != Some(value.to_bits()) {
                problems.push(format!("compare {key} differs from library"));
            }
        }
        if bits(&floats(&r["info_spectrum_nested"])) != bits(&lib.info_spectrum_nested) {
            problems.push("compare nested spectrum differs from library".into());
        }
    }

    let dup = at("dup.csv");
    std::fs::write(&dup, "y,x1,x2\n1,1,1\n2,2,2\n3,3,3\n5,4,4\n").unwrap();
    let scratch = at("scratch.json");
    let expected_codes = [
        (2, vec!["fit", "--input", &data, "--family", "weibull", "--output", &scratch]),
        (2, vec!["sweep", "--output", &scratch]),
        (3, vec!["fit", "--input", &dup, "--family", "linear", "--output", &scratch]),
        (4, vec!["fit", "--input", "/nonexistent/input.csv", "--family", "linear", "--output", &scratch]),
        (5, vec!["verify", "--seed", "1", "--trials", "5", "--inject-perturbation", "0.25", "--output", &scratch]),
    ];
    let mut codes_ok = 0;
    for (expected, args) in &expected_codes {
        let got = code(&nestspec(args));
        if got == *expected {
            codes_ok += 1;
        } else {
            problems.push(format!("{} exited {got}, expected {expected}", args.join(" ")));
        }
    }

    let malformed: Vec<String> = MALFORMED
        .iter()
        .filter_map(|&case| common::check_malformed(dir.path(), case))
        .collect();
    let located = MALFORMED.len() - malformed.len();
    problems.extend(malformed);

    let summary = format!(
        "round trip bit-exact, {codes_ok}/{} exit codes, {located}/{} malformed fixtures located",
        expected_codes.len(),
        MALFORMED.len()
    );
    if problems.is_empty() {
        Verdict::new(true, summary)
    } else {
        Verdict::new(false, format!("{summary}; {}", problems.join("; ")))
    }
}

/// Parses a regression CSV written by `simulate` without going through the
/// CLI's reader.
fn reread_regression(path: &str) -> Option<Dataset> {
    let mut reader = csv::Reader::from_path(path).ok()?;
    let mut y = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.ok()?;
        let values: Vec<f64> = record.iter().map(|f| f.parse().ok()).collect::<Option<_>>()?;
        y.push(values[0]);
        rows.push(values[1..].to_vec());
    }
    Some(Dataset::Regression {
        x: nestspec::Matrix::from_rows(&rows).ok()?,
        y,
    })
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("interlacing fuzz", interlacing_fuzz),
        ("spectral radius and inverse interlacing", spectral_radius_monotone),
        ("linear model orderings", linear_orderings),
        ("GLM orderings, shared weights", glm_orderings),
        ("Cox derivatives and fixed-beta nesting", cox_derivatives_and_nesting),
        ("Cox parameter recovery", cox_recovery),
        ("Yule-Walker exactness and nesting", yule_walker),
        ("noisy-cubic tradeoff curve", tradeoff_curve),
        ("eigensolver accuracy", eigensolver),
        ("CLI contract", cli_contract),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let verdict = run();
        let status = if verdict.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2}: {status}: {name}: {}", i + 1, verdict.detail);
        failed += !verdict.pass as usize;
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
