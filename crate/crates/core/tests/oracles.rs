mod common;

use common::{method, root_in, sqrt7};
use num_traits::{One, Signed, Zero};
use sspert::integrator::{self, LinearScalar, Norm, Symmetric};
use sspert::linear;
use sspert::lp::{solve_feasibility, LpFeasibility};
use sspert::optimize::{self, SplittingOutcome};
use sspert::shu_osher::{self, PerturbedCanonicalForm};
use sspert::{catalog, has_property_c, Matrix, Perturbation, Rational, StructuralClass};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn two_stage_embeddings() {
    let k = catalog::two_stage(q(1, 1)).embed();
    let expected = Matrix::from_rows(vec![
        vec![q(0, 1), q(0, 1), q(0, 1)],
        vec![q(1, 1), q(0, 1), q(0, 1)],
        vec![q(1, 2), q(1, 2), q(0, 1)],
    ]);
    assert_eq!(k, expected);
    let k = catalog::two_stage(q(1, 2)).embed();
    assert_eq!(k[(1, 0)], q(1, 2));
    assert_eq!((k[(2, 0)].clone(), k[(2, 1)].clone()), (q(0, 1), q(1, 1)));
}

#[test]
fn classical_rk4_validates_and_lacks_property_c_when_perturbed() {
    let rk = method("rk44");
    rk.validate().unwrap();
    let report = optimize::optimize_lp(&rk, optimize::DEFAULT_TOL).unwrap();
    assert!(!has_property_c(&rk, &report.perturbation));
}

#[test]
fn lp_trivial_problems() {
    let mut lp = LpFeasibility::new(1);
    lp.add_eq(vec![1.0], 1.0);
    let x = solve_feasibility(&lp).into_certificate().unwrap();
    assert!(close(x[0], 1.0, 1e-12));

    let mut lp = LpFeasibility::new(2);
    lp.add_eq(vec![1.0, 1.0], 1.0).add_eq(vec![1.0, -1.0], 3.0);
    assert!(!solve_feasibility(&lp).is_feasible());
}

#[test]
fn threshold_lp_brackets_root_two() {
    assert!(linear::threshold_feasible(2, 2, 1.41).is_feasible());
    assert!(!linear::threshold_feasible(2, 2, 1.43).is_feasible());
}

#[test]
fn forward_euler_canonical_form() {
    let fe = catalog::get("forward-euler").unwrap().exact.unwrap();
    let cf = shu_osher::canonical_form(&fe, &q(1, 1)).unwrap();
    assert_eq!(cf.v, vec![q(1, 1), q(0, 1)]);
    assert_eq!(cf.alpha, Matrix::from_rows(vec![vec![q(0, 1), q(0, 1)], vec![q(1, 1), q(0, 1)]]));
}

#[test]
fn corrupted_form_is_not_a_perturbation() {
    let m = catalog::get("ssp33").unwrap().exact.unwrap();
    let r = q(1, 2);
    let cf = shu_osher::canonical_form(&m, &r).unwrap();
    let mut pcf = PerturbedCanonicalForm::from_canonical(m.class(), &cf);
    assert!(shu_osher::verify_perturbation_of(&pcf, &cf));
    pcf.alpha_up[(2, 1)] += q(1, 1000);
    assert!(!shu_osher::verify_perturbation_of(&pcf, &cf));
}

#[test]
fn two_stage_two_thirds_shift() {
    // b̃ = (1/4, 0) at r = 1
    let m = catalog::two_stage(q(2, 3));
    let pert = Perturbation::new(StructuralClass::Explicit, Matrix::zeros(2, 2), vec![q(1, 4), q(0, 1)]).unwrap();
    let pcf = shu_osher::perturbed_canonical_form(&m, &pert, &q(1, 1)).unwrap();
    assert_eq!(pcf.gamma, vec![q(1, 1), q(1, 3), q(0, 1)]);
    assert_eq!((pcf.alpha_up[(1, 0)].clone(), pcf.alpha_up[(2, 1)].clone()), (q(2, 3), q(3, 4)));
    assert_eq!(pcf.alpha_down[(2, 0)], q(1, 4));

    let shifted = shu_osher::shift_to_e1(&pcf).unwrap();
    assert_eq!(shifted.gamma, vec![q(1, 1), q(0, 1), q(0, 1)]);
    assert_eq!((shifted.alpha_up[(1, 0)].clone(), shifted.alpha_down[(1, 0)].clone()), (q(5, 6), q(1, 6)));
    assert_eq!((shifted.alpha_up[(2, 1)].clone(), shifted.alpha_down[(2, 0)].clone()), (q(3, 4), q(1, 4)));
    let pair = shu_osher::butcher_from_canonical(&shifted).unwrap();
    assert_eq!(pair.k, m.embed());
    let at = pair.perturbation().unwrap();
    assert_eq!(at.a_tilde()[(1, 0)], q(1, 6));
    assert_eq!(at.b_tilde(), &[q(3, 8), q(0, 1)]);

    let exact = shu_osher::radius_am_perturbed(&m, &pert);
    assert!((exact - q(1, 1)).abs() < q(1, 1_000_000_000));
    let (outcome, _) = optimize::splitting_run(&m, &q(1, 1)).unwrap();
    assert!(matches!(outcome, SplittingOutcome::Accepted(_)));
}

#[test]
fn ssp22_star_optimal_form() {
    let m = method("ssp22star");
    let pert = common::ssp22star_linear_perturbation();
    let r = (1.0 + sqrt7()) / 3.0;
    let pcf = shu_osher::perturbed_canonical_form(&m, &pert, &r).unwrap();
    let pcf = shu_osher::shift_to_e1(&pcf).unwrap();
    assert!(close(pcf.alpha_up[(1, 0)], 1.0, 1e-12));
    assert!(close(pcf.alpha_up[(2, 1)], (4.0 + sqrt7()) / 9.0, 1e-12));
    assert!(close(pcf.alpha_down[(2, 0)], (5.0 - sqrt7()) / 9.0, 1e-12));
    assert!(close(pcf.alpha_up[(2, 0)], 0.0, 1e-12) && close(pcf.alpha_down[(1, 0)], 0.0, 1e-12));
    assert!(pcf.gamma.iter().skip(1).all(|g| g.abs() < 1e-12));
    assert!(close(shu_osher::radius_am_perturbed(&m, &pert), r, 1e-9));
}

#[test]
fn rk44_non_unique_optimal_perturbation() {
    let rk = method("rk44");
    let r = root_in(|x| x * x * x + 2.0 * x * x + 4.0 * x - 4.0, 0.0, 1.0);
    let mut d = Matrix::zeros(5, 5);
    d[(2, 0)] = r * r / 4.0;
    d[(3, 1)] = r * r / 2.0;
    // the two listed entries alone leave α^up negative at (4,1); the first
    // column entry that cancels it is fixed by the row of α_r
    let alpha = shu_osher::canonical_form(&rk, &r).unwrap().alpha;
    d[(3, 0)] = 2.0 * d[(3, 1)] * alpha[(1, 0)] - alpha[(3, 0)];
    let pcf = optimize::canonical_from_down(&rk, r, &d).unwrap();
    let min = pcf.alpha_up.min_entry().unwrap().min(pcf.alpha_down.min_entry().unwrap());
    assert!(min > -1e-12 && pcf.gamma.iter().all(|&g| g > -1e-12));

    let report = optimize::optimize_lp(&rk, 1e-10).unwrap();
    assert!(close(report.canonical.alpha_down[(2, 0)], r * r / 4.0, 1e-6));
    assert!(close(report.canonical.alpha_down[(3, 1)], r * r / 2.0, 1e-6));
    let shifted = shu_osher::shift_to_e1(&pcf).unwrap();
    assert!(shifted.gamma[1..].iter().all(|&g| g == 0.0) && shifted.alpha_down.min_entry().unwrap() > -1e-12);
    let pair = shu_osher::butcher_from_canonical(&pcf).unwrap();
    assert!(pair.k.max_abs_diff(&rk.embed()) < 1e-12);
    let pert = pair.perturbation().unwrap();
    assert!(shu_osher::has_positive_radius(&rk, &pert));
    assert!(close(shu_osher::radius_am_perturbed(&rk, &pert), r, 1e-8));
}

#[test]
fn positive_radius_predicate() {
    let ssp22 = method("ssp22");
    assert!(shu_osher::has_positive_radius(&ssp22, &ssp22.zero_perturbation()));
    let rk = method("rk44");
    assert!(!shu_osher::has_positive_radius(&rk, &rk.zero_perturbation()));
    let fe = method("forward-euler");
    assert!(shu_osher::construct_positive_perturbation(&fe).unwrap().is_zero());
}

#[test]
fn simple_bounds() {
    for (name, inv) in [("rk44", 1.0), ("merson45", 0.5), ("fehlberg45", 0.125)] {
        assert!(close(optimize::bound_max_abs(&method(name)), inv, 1e-12), "{name}");
    }
    let re = optimize::bound_re(&method("rk44")).unwrap();
    assert!(close(re, root_in(|x| x * x * x - 2.0 * x * x + 4.0 * x - 4.0, 0.0, 2.0), 1e-8));
    for alpha in [1.0, 1.5, 2.0, 4.0] {
        assert!(close(optimize::bound_re(&catalog::two_stage(alpha)).unwrap(), 1.0 / alpha, 1e-8), "alpha = {alpha}");
    }
    // v_r = (1, 1 − r)
    assert!(close(optimize::bound_re(&method("forward-euler")).unwrap(), 1.0, 1e-8));
    assert!(close(optimize::bound_linear_order(2, 2).unwrap(), 2f64.sqrt(), 1e-12));
    assert!(close(optimize::bound_linear_order(4, 4).unwrap(), 24f64.powf(0.25), 1e-12));
}

#[test]
fn lp_feasibility_brackets() {
    for (name, lo, hi) in [("rk44", 0.68, 0.70), ("merson45", 0.24, 0.26)] {
        assert!(optimize::lp_feasible_at(&method(name), lo).unwrap().is_some(), "{name} at {lo}");
        assert!(optimize::lp_feasible_at(&method(name), hi).unwrap().is_none(), "{name} at {hi}");
    }
    let (outcome, _) = optimize::splitting_run(&method("rk44"), &0.70).unwrap();
    assert!(matches!(outcome, SplittingOutcome::Rejected { .. }));
}

#[test]
fn midpoint_optimum_is_root_three_minus_one() {
    let report = optimize::optimize_lp(&method("midpoint"), optimize::DEFAULT_TOL).unwrap();
    assert!(close(report.r_opt, 3f64.sqrt() - 1.0, 1e-6));
    let split = optimize::optimize_splitting(&method("midpoint"), optimize::DEFAULT_TOL).unwrap();
    assert!(close(split.r_opt, report.r_opt, 1e-6));
}

#[test]
fn two_stage_stability_function_coefficients() {
    // basis z, w = z + z̃: ψ = 1 + z + β₁w + ½z² + β₁₁zw + β₂w²
    let (alpha, at21, bt1, bt2) = (q(3, 5), q(-2, 7), q(1, 3), q(5, 4));
    let m = catalog::two_stage(alpha.clone());
    let b2 = m.b()[1].clone();
    let mut a_tilde = Matrix::zeros(2, 2);
    a_tilde[(1, 0)] = at21.clone();
    let pert = Perturbation::new(StructuralClass::Explicit, a_tilde, vec![bt1.clone(), bt2.clone()]).unwrap();
    let psi = linear::stability_function(&m, &pert).unwrap();
    let beta1 = bt1 + bt2.clone();
    let beta11 = bt2.clone() * alpha + b2 * at21.clone();
    let beta2 = bt2 * at21;
    for (z, zt) in [(q(1, 2), q(-3, 2)), (q(-7, 3), q(2, 5)), (q(4, 1), q(1, 9))] {
        let w = z.clone() + zt.clone();
        let expected = Rational::one() + z.clone() + beta1.clone() * w.clone()
            + q(1, 2) * z.clone() * z.clone()
            + beta11.clone() * z.clone() * w.clone()
            + beta2.clone() * w.clone() * w;
        assert_eq!(psi.eval(&z, &zt), expected);
    }
}

#[test]
fn ssp22_star_shifted_coefficients() {
    let m = method("ssp22star");
    let psi = linear::stability_function(&m, &common::ssp22star_linear_perturbation()).unwrap();
    let r = (1.0 + sqrt7()) / 3.0;
    let e = linear::shifted_expansion(&psi, &r);
    assert!(close(e.get(2, 0), (4.0 + sqrt7()) / 9.0, 1e-12));
    assert!(close(e.get(1, 1), (5.0 - sqrt7()) / 9.0, 1e-12));
    for (&key, &g) in &e.gamma {
        if key != (2, 0) && key != (1, 1) {
            assert!(g.abs() < 1e-12, "{key:?}: {g}");
        }
    }
}

#[test]
fn rk44_family_shifted_coefficients() {
    let rk = method("rk44");
    let r = common::rk44_linear_radius();
    for (a42, b2) in [(0.0, 0.0), (0.1, 0.05)] {
        let psi = linear::stability_function(&rk, &common::rk44_family_perturbation(a42, b2)).unwrap();
        let e = linear::shifted_expansion(&psi, &r);
        assert!(close(e.get(4, 0), r.powi(4) / 24.0, 1e-10));
        // keyed by total degree and the power of (1 + z̃/r)
        assert!(close(e.get(3, 1), r.powi(3) * (r - 1.0) / 6.0, 1e-10));
        assert!(close(e.get(2, 1), r * r * (r * r + 2.0 * r - 6.0) / 12.0, 1e-10));
        assert!(close(e.get(1, 1), r * (2.0 * r.powi(3) - r * r - 6.0) / 6.0, 1e-10));
        assert!(e.gamma.values().all(|&g| g > -1e-9));
    }
}

#[test]
fn unperturbed_ssp22_star_linear_radius() {
    // 1 + z + z²/2 in powers of (1 + z/r) has coefficients 1 − r + r²/2, r − r², r²/2
    let m = method("ssp22star");
    let r = linear::linear_radius(&m, &m.zero_perturbation()).unwrap();
    assert!(close(r, 1.0, 1e-7));
    let oracle = root_in(|x| x - x * x, 0.5, 1.5);
    assert!(close(r, oracle, 1e-7));
}

#[test]
fn threshold_values() {
    assert!(close(linear::threshold_bound(3, 2, 1e-8).unwrap(), 6f64.sqrt(), 1e-6));
    let (psi, r) = linear::optimal_second_order_poly(2).unwrap();
    assert!(close(r, 2f64.sqrt(), 1e-15));
    let w = 2.0 * (2.0 + 2f64.sqrt());
    assert!(close(linear::shifted_expansion(&psi, &r).get(2, 0), (w - 1.0) / w, 1e-12));
}

#[test]
fn rk44_reproduces_the_taylor_polynomial() {
    let rk = method("rk44");
    let rhs = Symmetric { f: |u: &[f64]| u.to_vec(), h0: 1.0, norm: Norm::Max };
    let next = integrator::step_butcher(&rk, &rk.zero_perturbation(), &[1.0], &0.1, &rhs).unwrap();
    let taylor: f64 = (0..=4).map(|k| 0.1f64.powi(k) / (1..=k).product::<i32>() as f64).sum();
    assert!(close(next[0], taylor, 1e-15));
}

#[test]
fn symmetric_rhs_ignores_the_perturbation() {
    let rk = method("rk44");
    let report = optimize::optimize_lp(&rk, optimize::DEFAULT_TOL).unwrap();
    let rhs = Symmetric { f: |u: &[f64]| u.iter().map(|x| x * x).collect(), h0: 1.0, norm: Norm::Max };
    let u = [0.7];
    let plain = integrator::step_butcher(&rk, &rk.zero_perturbation(), &u, &0.05, &rhs).unwrap();
    let perturbed = integrator::step_butcher(&rk, &report.perturbation, &u, &0.05, &rhs).unwrap();
    let canonical = integrator::step_canonical(&report.canonical, &u, &0.05, &rhs).unwrap();
    assert!(close(plain[0], perturbed[0], 1e-12));
    assert!(close(plain[0], canonical[0], 1e-12));
}

#[test]
fn linear_scalar_step_is_the_stability_function() {
    let rk = method("rk44");
    let pert = common::rk44_family_perturbation(0.2, -0.1);
    let psi = linear::stability_function(&rk, &pert).unwrap();
    let (lambda, lambda_tilde, h) = (-1.3, 0.4, 0.25);
    let rhs = LinearScalar { lambda, lambda_tilde };
    let next = integrator::step_butcher(&rk, &pert, &[2.0], &h, &rhs).unwrap();
    assert!(close(next[0], 2.0 * psi.eval(&(h * lambda), &(-h * lambda_tilde)), 1e-12));
}

#[test]
fn exact_zero_radii() {
    for name in ["midpoint", "heun33", "rk44", "merson45"] {
        let exact = catalog::get(name).unwrap().exact.unwrap();
        assert!(shu_osher::radius_am(&exact).is_zero(), "{name}");
    }
}
