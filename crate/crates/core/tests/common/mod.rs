#![allow(dead_code)]

use sspert::catalog;
use sspert::{Matrix, MethodF64, Perturbation, PerturbationF64, StructuralClass};

/// Methods with published reference values, in table order.
pub const TABLE2: [&str; 13] = [
    "forward-euler",
    "midpoint",
    "minimal-trunc-2",
    "ssp22",
    "ssp22star",
    "heun33",
    "ssp33",
    "rk44",
    "merson45",
    "ssp104",
    "fehlberg45",
    "dormand-prince5",
    "bogacki5",
];

pub fn method(name: &str) -> MethodF64 {
    catalog::get(name).unwrap().method
}

pub fn explicit_catalog() -> Vec<catalog::CatalogEntry> {
    catalog::all().iter().filter(|e| e.method.is_explicit()).cloned().collect()
}

/// Real root of `p` in `[lo, hi]` by bisection; `p(lo)` and `p(hi)` must
/// differ in sign.
pub fn root_in(p: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let neg_at_lo = p(lo) < 0.0;
    assert_ne!(neg_at_lo, p(hi) < 0.0, "no sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (p(mid) < 0.0) == neg_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn sqrt7() -> f64 {
    7f64.sqrt()
}

/// SSP22* with `b̃1 = (√7 − 2)/3`.
pub fn ssp22star_linear_perturbation() -> PerturbationF64 {
    Perturbation::new(StructuralClass::Explicit, Matrix::zeros(2, 2), vec![(sqrt7() - 2.0) / 3.0, 0.0]).unwrap()
}

/// Positive root of `15x⁴ − 4x³ − 12x² − 24x − 24`.
pub fn rk44_linear_radius() -> f64 {
    root_in(|x| 15.0 * x.powi(4) - 4.0 * x.powi(3) - 12.0 * x * x - 24.0 * x - 24.0, 1.0, 2.0)
}

/// Member of the RK44 linear perturbation family with free parameters
/// `ã42` and `b̃2`.
pub fn rk44_family_perturbation(a42: f64, b2: f64) -> PerturbationF64 {
    let r = rk44_linear_radius();
    let mut at = Matrix::zeros(4, 4);
    at[(2, 0)] = 0.5 * (2.0 * r - 2.0 - a42);
    at[(3, 0)] = 0.5 * (5.0 * r * r - 6.0 * r - 2.0 - 6.0 * b2);
    at[(3, 1)] = a42;
    let b1 = (7.0 * r.powi(3) - 2.0 * r * r - 6.0 * r - 12.0 - 12.0 * b2) / 12.0;
    Perturbation::new(StructuralClass::Explicit, at, vec![b1, b2, 0.0, 0.0]).unwrap()
}

/// `R(K)` of the two-stage second-order family.
pub fn two_stage_radius(alpha: f64) -> f64 {
    if alpha <= 0.5 {
        0.0
    } else if alpha <= 1.0 {
        (2.0 * alpha - 1.0) / alpha
    } else {
        1.0 / alpha
    }
}

/// Optimal perturbed radius of the two-stage second-order family.
pub fn two_stage_optimal(alpha: f64) -> f64 {
    let s7 = sqrt7();
    if alpha <= -(1.0 + s7) / 2.0 || alpha >= (s7 - 1.0) / 2.0 {
        1.0 / alpha.abs()
    } else {
        (-1.0 + alpha + (3.0 * alpha * alpha - 2.0 * alpha + 1.0).sqrt()) / alpha.abs()
    }
}
