//! One PASS/FAIL line per acceptance criterion.

mod common;

use std::cell::Cell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use sspert::catalog::{self, threshold_reference, REFERENCE_TOL, THRESHOLD_TABLE_TOL};
use sspert::integrator::{advection_demo, step_butcher, step_canonical, DemoConfig, LinearScalar, Norm};
use sspert::optimize::{bound_linear_order, bound_max_abs, bound_re, optimize_lp, optimize_splitting, DEFAULT_TOL};
use sspert::shu_osher::{
    construct_positive_perturbation, has_positive_radius, perturbed_canonical_form, radius_am, radius_am_perturbed,
};
use sspert::{linear, Rational, Scalar};

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: Vec<String>, ok_detail: impl Into<String>) -> Self {
        if failures.is_empty() {
            Self { pass: true, detail: ok_detail.into() }
        } else {
            Self { pass: false, detail: failures.join("; ") }
        }
    }
}

fn within_time(mut o: Outcome, elapsed: Duration, limit: Option<Duration>) -> Outcome {
    if let Some(limit) = limit {
        if elapsed > limit {
            o.pass = false;
            o.detail = format!("{} (took {elapsed:.2?}, limit {limit:.0?})", o.detail);
        }
    }
    o
}

fn deterministic_runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn table2_radii() -> Outcome {
    let expected = [1.0, 0.0, 0.5, 1.0, 0.784, 0.0, 1.0, 0.0, 0.0, 6.0, 0.0, 0.0, 0.0];
    let mut failures = Vec::new();
    for (name, want) in TABLE2.iter().zip(expected) {
        let entry = catalog::get(name).unwrap();
        let got = match &entry.exact {
            Some(q) => radius_am(q).to_f64_lossy(),
            None => radius_am(&entry.method),
        };
        let ok = if want == 0.0 { got == 0.0 } else { (got - want).abs() <= REFERENCE_TOL };
        if !ok {
            failures.push(format!("{name}: {got} vs {want}"));
        }
    }
    Outcome::new(failures, "13 radii match")
}

fn optimal_perturbations() -> Outcome {
    let expected = [
        ("midpoint", 0.732),
        ("minimal-trunc-2", 1.000),
        ("ssp22star", 1.215),
        ("heun33", 0.776),
        ("rk44", 0.685),
        ("merson45", 0.242),
        ("ssp104", 6.000),
        ("fehlberg45", 0.057),
        ("dormand-prince5", 0.040),
        ("bogacki5", 0.313),
    ];
    let mut failures = Vec::new();
    for (name, want) in expected {
        match optimize_lp(&method(name), DEFAULT_TOL) {
            Ok(r) if (r.r_opt - want).abs() <= REFERENCE_TOL => {}
            Ok(r) => failures.push(format!("{name}: {} vs {want}", r.r_opt)),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    Outcome::new(failures, "10 optimal radii match")
}

fn algorithm_agreement() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let entries = explicit_catalog();
    for e in &entries {
        let lp = optimize_lp(&e.method, DEFAULT_TOL).map(|r| r.r_opt);
        let sp = optimize_splitting(&e.method, DEFAULT_TOL).map(|r| r.r_opt);
        match (lp, sp) {
            (Ok(a), Ok(b)) => {
                worst = worst.max((a - b).abs());
                if (a - b).abs() > 1e-6 {
                    failures.push(format!("{}: lp {a} vs splitting {b}", e.name));
                }
            }
            (a, b) => failures.push(format!("{}: {a:?} / {b:?}", e.name)),
        }
    }
    Outcome::new(failures, format!("{} methods, max gap {worst:.1e}", entries.len()))
}

fn exact_roots() -> Outcome {
    let rk44 = method("rk44");
    let opt_root = root_in(|x| x.powi(3) + 2.0 * x * x + 4.0 * x - 4.0, 0.0, 1.0);
    let re_root = root_in(|x| x.powi(3) - 2.0 * x * x + 4.0 * x - 4.0, 1.0, 2.0);
    let mut failures = Vec::new();
    let r_opt = optimize_lp(&rk44, DEFAULT_TOL).unwrap().r_opt;
    if (r_opt - opt_root).abs() > 1e-6 {
        failures.push(format!("r_opt {r_opt} vs {opt_root}"));
    }
    let r_e = bound_re(&rk44).unwrap();
    if (r_e - re_root).abs() > 1e-6 {
        failures.push(format!("r_e {r_e} vs {re_root}"));
    }
    Outcome::new(failures, format!("r_opt {r_opt:.9}, r_e {r_e:.9}"))
}

fn threshold_table() -> Outcome {
    let mut failures = Vec::new();
    let mut count = 0;
    for s in 1..=10 {
        for p in 1..=s {
            let got = linear::threshold_bound(s, p, 1e-8).unwrap();
            let want = threshold_reference(s, p).unwrap();
            count += 1;
            if (got - want).abs() > THRESHOLD_TABLE_TOL {
                failures.push(format!("({s},{p}): {got} vs {want}"));
            }
            if p == 2 {
                let sharp = ((s * (s - 1)) as f64).sqrt();
                if (got - sharp).abs() > 1e-4 {
                    failures.push(format!("({s},2): {got} vs sqrt(s(s-1)) = {sharp}"));
                }
            }
        }
    }
    Outcome::new(failures, format!("{count} entries within {THRESHOLD_TABLE_TOL}, p = 2 column sharp"))
}

fn linear_radii() -> Outcome {
    let mut failures = Vec::new();
    let star = method("ssp22star");
    let got = linear::linear_radius(&star, &ssp22star_linear_perturbation()).unwrap();
    let want = (1.0 + sqrt7()) / 3.0;
    if (got - want).abs() > 1e-6 {
        failures.push(format!("ssp22star: {got} vs {want}"));
    }
    let rk44 = method("rk44");
    let got44 = linear::linear_radius(&rk44, &rk44_family_perturbation(0.0, 0.0)).unwrap();
    let want44 = rk44_linear_radius();
    if (got44 - want44).abs() > 1e-6 {
        failures.push(format!("rk44: {got44} vs {want44}"));
    }
    Outcome::new(failures, format!("{got:.9} and {got44:.9}"))
}

fn two_stage_sweep() -> Outcome {
    let mut runner = deterministic_runner(100);
    let strategy = (-3.0f64..3.0).prop_filter("alpha != 0", |a| *a != 0.0);
    let cases = Cell::new(0);
    let result = runner.run(&strategy, |alpha| {
        cases.set(cases.get() + 1);
        let exact = catalog::two_stage(Rational::from_f64_lossy(alpha));
        let r = radius_am(&exact).to_f64_lossy();
        let want = two_stage_radius(alpha);
        prop_assert!((r - want).abs() <= 1e-5, "alpha {alpha}: R(K) {r} vs {want}");
        let opt = optimize_lp(&catalog::two_stage(alpha), DEFAULT_TOL).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let want_opt = two_stage_optimal(alpha);
        prop_assert!((opt.r_opt - want_opt).abs() <= 1e-5, "alpha {alpha}: r_opt {} vs {want_opt}", opt.r_opt);
        Ok(())
    });
    match result {
        Ok(()) => Outcome { pass: true, detail: format!("{} sampled alphas", cases.get()) },
        Err(e) => Outcome { pass: false, detail: e.to_string() },
    }
}

fn bound_chains() -> Outcome {
    const SLACK: f64 = 1e-8;
    let mut failures = Vec::new();
    let mut checked = 0;
    for e in explicit_catalog() {
        let m = &e.method;
        let (s, p) = (m.stages(), m.order() as usize);
        let r_k = e.radius();
        let lin_bound = bound_linear_order(s, p).unwrap();
        let lp = optimize_lp(m, DEFAULT_TOL).unwrap();
        let sp = optimize_splitting(m, DEFAULT_TOL).unwrap();
        for report in [&lp, &sp] {
            let cap = bound_max_abs(m).min(bound_re(m).unwrap());
            if report.r_opt > cap + SLACK {
                failures.push(format!("{}: r_opt {} > {cap}", e.name, report.r_opt));
            }
            if r_k > report.r_opt + SLACK {
                failures.push(format!("{}: R(K) {r_k} > r_opt {}", e.name, report.r_opt));
            }
        }
        let mut perts = vec![(m.zero_perturbation(), true), (lp.perturbation.clone(), true), (sp.perturbation.clone(), true)];
        if let Ok(c) = construct_positive_perturbation(m) {
            perts.push((c, false));
        }
        match e.name {
            "ssp22star" => perts.push((ssp22star_linear_perturbation(), false)),
            "rk44" => perts.push((rk44_family_perturbation(0.0, 0.0), false)),
            _ => {}
        }
        for (pert, optimal) in &perts {
            checked += 1;
            let r_pert = radius_am_perturbed(m, pert);
            let r_lin = linear::linear_radius(m, pert).unwrap();
            if *optimal && r_k > r_pert + SLACK {
                failures.push(format!("{}: R(K) {r_k} > R(K,K~) {r_pert}", e.name));
            }
            if r_pert > r_lin + SLACK {
                failures.push(format!("{}: R(K,K~) {r_pert} > R_Lin {r_lin}", e.name));
            }
            if r_lin > lin_bound + SLACK {
                failures.push(format!("{}: R_Lin {r_lin} > bound {lin_bound}", e.name));
            }
        }
    }
    Outcome::new(failures, format!("{checked} method/perturbation pairs"))
}

fn representation_equivalence() -> Outcome {
    let mut failures = Vec::new();
    let worst = Cell::new(0.0f64);
    let entries = explicit_catalog();
    for e in &entries {
        let m = &e.method;
        let report = optimize_lp(m, DEFAULT_TOL).unwrap();
        let pert = report.perturbation.clone();
        let r = if report.r_opt > 0.0 { report.r_opt } else { 1.0 };
        let pcf = perturbed_canonical_form(m, &pert, &r).unwrap();
        let psi = linear::stability_function(m, &pert).unwrap();
        let mut runner = deterministic_runner(50);
        let params = (prop::array::uniform6(-1.0f64..1.0), -1.0f64..1.0, 0.01f64..0.5);
        let result = runner.run(&params, |(c, u0, h)| {
            let f = move |u: &[f64]| vec![c[0] * u[0] * u[0] + c[1] * (c[2] * u[0]).sin()];
            let ft = move |u: &[f64]| vec![c[3] * u[0].powi(3) + c[4] * (c[5] * u[0]).cos()];
            let rhs = Pair { f, ft };
            let a = step_butcher(m, &pert, &[u0], &h, &rhs).unwrap()[0];
            let b = step_canonical(&pcf, &[u0], &h, &rhs).unwrap()[0];
            worst.set(worst.get().max((a - b).abs()));
            prop_assert!((a - b).abs() <= 1e-12, "nonlinear: butcher {a} vs canonical {b}");
            let (lam, lamt) = (c[0] * 2.0, c[1] * 2.0);
            let lin = LinearScalar { lambda: lam, lambda_tilde: lamt };
            let want = psi.eval(&(h * lam), &(-h * lamt)) * u0;
            let a = step_butcher(m, &pert, &[u0], &h, &lin).unwrap()[0];
            let b = step_canonical(&pcf, &[u0], &h, &lin).unwrap()[0];
            prop_assert!((a - want).abs() <= 1e-12 && (b - want).abs() <= 1e-12, "linear: {a}, {b} vs psi {want}");
            Ok(())
        });
        if let Err(err) = result {
            failures.push(format!("{}: {err}", e.name));
        }
    }
    Outcome::new(failures, format!("{} methods x 50 problems, max gap {:.1e}", entries.len(), worst.get()))
}

struct Pair<F, G> {
    f: F,
    ft: G,
}

impl<F: Fn(&[f64]) -> Vec<f64>, G: Fn(&[f64]) -> Vec<f64>> sspert::integrator::RhsPair<f64> for Pair<F, G> {
    fn f(&self, u: &[f64]) -> Vec<f64> {
        (self.f)(u)
    }

    fn f_tilde(&self, u: &[f64]) -> Vec<f64> {
        (self.ft)(u)
    }

    fn h0(&self) -> f64 {
        1.0
    }

    fn norm(&self) -> Norm {
        Norm::Max
    }
}

fn monotonicity_demo() -> Outcome {
    let mut failures = Vec::new();
    for (name, perturbed) in [("ssp22", false), ("ssp33", false), ("ssp104", false), ("rk44", true)] {
        let config = DemoConfig { method: name.into(), perturbed, grid_points: 200, cfl: 0.9, steps: 200 };
        match advection_demo(&config) {
            Ok(r) if r.tv_monotone && r.max_monotone && r.radius_is_positive => {}
            Ok(r) => failures.push(format!("{name}: tv {} max {} r {}", r.tv_monotone, r.max_monotone, r.r)),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    Outcome::new(failures, "TV and max-norm non-increasing for 4 runs")
}

fn feasibility_theorem() -> Outcome {
    let mut failures = Vec::new();
    let mut radii = Vec::new();
    for name in ["rk44", "merson45", "fehlberg45", "trapezoid"] {
        let m = method(name);
        let pert = match construct_positive_perturbation(&m) {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("{name}: {e}"));
                continue;
            }
        };
        if !has_positive_radius(&m, &pert) {
            failures.push(format!("{name}: conditions not met"));
        }
        if m.is_explicit() {
            let r = radius_am_perturbed(&m, &pert);
            radii.push(format!("{name} {r:.3e}"));
            if r <= 1e-4 {
                failures.push(format!("{name}: R(K,K~) = {r}"));
            }
        }
    }
    Outcome::new(failures, radii.join(", "))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome, Option<u64>);
    let criteria: [Criterion; 11] = [
        ("reference radii", table2_radii, Some(1)),
        ("optimal perturbations", optimal_perturbations, Some(30)),
        ("LP and splitting agree", algorithm_agreement, None),
        ("exact roots for RK44", exact_roots, None),
        ("threshold table", threshold_table, Some(300)),
        ("linear radii", linear_radii, None),
        ("two-stage family sweep", two_stage_sweep, None),
        ("bound chains", bound_chains, None),
        ("representation equivalence", representation_equivalence, None),
        ("monotonicity demo", monotonicity_demo, Some(10)),
        ("positive radius construction", feasibility_theorem, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Outcome { pass: false, detail: "panicked".into() });
        let elapsed = start.elapsed();
        let outcome = within_time(outcome, elapsed, limit.map(Duration::from_secs));
        failed += usize::from(!outcome.pass);
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {} [{elapsed:.2?}]", i + 1, outcome.detail);
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
