//! Perturbed Runge–Kutta stepping and the advection monotonicity demo.

use std::fmt::Write as _;

use crate::catalog;
use crate::error::{Error, Result};
use crate::optimize;
use crate::scalar::Scalar;
use crate::shu_osher::{canonical_form, PerturbedCanonicalForm};
use crate::tableau::{Perturbation, RKMethod};

/// Absolute slack on norm comparisons in the demo.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    Max,
    /// Periodic total variation.
    TotalVariation,
    L1,
}

impl Norm {
    pub fn eval<T: Scalar>(self, u: &[T]) -> T {
        match self {
            Norm::Max => u.iter().fold(T::zero(), |m, x| T::max_of(m, x.abs())),
            Norm::L1 => u.iter().fold(T::zero(), |m, x| m + x.abs()),
            Norm::TotalVariation => {
                let n = u.len();
                (0..n).fold(T::zero(), |m, i| m + (u[(i + 1) % n].clone() - u[i].clone()).abs())
            }
        }
    }
}

/// A right-hand side `f` with its downwind-biased counterpart `f̃`.
pub trait RhsPair<T> {
    fn f(&self, u: &[T]) -> Vec<T>;
    fn f_tilde(&self, u: &[T]) -> Vec<T>;
    /// Forward Euler step bound, shared by `f` and `−f̃`.
    fn h0(&self) -> T;
    fn norm(&self) -> Norm;
}

/// Same function for both directions, e.g. a scalar ODE.
pub struct Symmetric<F> {
    pub f: F,
    pub h0: f64,
    pub norm: Norm,
}

impl<T: Scalar, F: Fn(&[T]) -> Vec<T>> RhsPair<T> for Symmetric<F> {
    fn f(&self, u: &[T]) -> Vec<T> {
        (self.f)(u)
    }

    fn f_tilde(&self, u: &[T]) -> Vec<T> {
        (self.f)(u)
    }

    fn h0(&self) -> T {
        T::from_f64_lossy(self.h0)
    }

    fn norm(&self) -> Norm {
        self.norm
    }
}

/// `f(u) = λu`, `f̃(u) = λ̃u`.
pub struct LinearScalar<T> {
    pub lambda: T,
    pub lambda_tilde: T,
}

impl<T: Scalar> RhsPair<T> for LinearScalar<T> {
    fn f(&self, u: &[T]) -> Vec<T> {
        u.iter().map(|x| self.lambda.clone() * x.clone()).collect()
    }

    fn f_tilde(&self, u: &[T]) -> Vec<T> {
        u.iter().map(|x| self.lambda_tilde.clone() * x.clone()).collect()
    }

    fn h0(&self) -> T {
        T::one() / self.lambda.abs()
    }

    fn norm(&self) -> Norm {
        Norm::Max
    }
}

/// `u_t + u_x = 0` on a periodic unit grid, first-order upwind and downwind
/// differences.
#[derive(Clone, Debug)]
pub struct Advection {
    pub n: usize,
    pub norm: Norm,
}

impl Advection {
    pub fn new(n: usize) -> Self {
        Self { n, norm: Norm::TotalVariation }
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Cell-centred indicator of `[0.25, 0.75)`.
    pub fn square_wave(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let x = (i as f64 + 0.5) * self.dx();
                if (0.25..0.75).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }
}

impl RhsPair<f64> for Advection {
    fn f(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        (0..n).map(|i| -(u[i] - u[(i + n - 1) % n]) / self.dx()).collect()
    }

    fn f_tilde(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        (0..n).map(|i| -(u[(i + 1) % n] - u[i]) / self.dx()).collect()
    }

    fn h0(&self) -> f64 {
        self.dx()
    }

    fn norm(&self) -> Norm {
        self.norm
    }
}

fn axpy<T: Scalar>(acc: &mut [T], a: &T, x: &[T]) {
    for (y, xi) in acc.iter_mut().zip(x) {
        *y = y.clone() + a.clone() * xi.clone();
    }
}

/// All `s + 1` stages of one step in canonical form; the last one is
/// `u_{n+1}`.
pub fn stages_canonical<T: Scalar>(
    pcf: &PerturbedCanonicalForm<T>,
    u: &[T],
    h: &T,
    rhs: &dyn RhsPair<T>,
) -> Result<Vec<Vec<T>>> {
    if !pcf.is_explicit() {
        return Err(Error::UnsupportedClass(pcf.class));
    }
    if pcf.r <= T::zero() {
        return Err(Error::PreconditionViolation("canonical stepping needs r > 0".into()));
    }
    let n = pcf.size();
    let hr = h.clone() / pcf.r.clone();
    let mut ys: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut fs: Vec<Option<Vec<T>>> = vec![None; n];
    let mut fts: Vec<Option<Vec<T>>> = vec![None; n];
    for i in 0..n {
        let mut y: Vec<T> = u.iter().map(|x| pcf.gamma[i].clone() * x.clone()).collect();
        for j in 0..i {
            let (up, dn) = (&pcf.alpha_up[(i, j)], &pcf.alpha_down[(i, j)]);
            if !up.is_zero() {
                let fj = fs[j].get_or_insert_with(|| rhs.f(&ys[j]));
                axpy(&mut y, up, &ys[j]);
                axpy(&mut y, &(up.clone() * hr.clone()), fj);
            }
            if !dn.is_zero() {
                let fj = fts[j].get_or_insert_with(|| rhs.f_tilde(&ys[j]));
                axpy(&mut y, dn, &ys[j]);
                axpy(&mut y, &(-(dn.clone() * hr.clone())), fj);
            }
        }
        ys.push(y);
    }
    Ok(ys)
}

/// One step `Y = γ u_n + α^up (Y + (h/r)F) + α^down (Y − (h/r)F̃)`.
pub fn step_canonical<T: Scalar>(pcf: &PerturbedCanonicalForm<T>, u: &[T], h: &T, rhs: &dyn RhsPair<T>) -> Result<Vec<T>> {
    Ok(stages_canonical(pcf, u, h, rhs)?.pop().expect("at least one stage"))
}

/// One step `Y = u_n e + hKF + hK̃(F − F̃)`.
pub fn step_butcher<T: Scalar>(
    method: &RKMethod<T>,
    pert: &Perturbation<T>,
    u: &[T],
    h: &T,
    rhs: &dyn RhsPair<T>,
) -> Result<Vec<T>> {
    if !method.is_explicit() {
        return Err(Error::UnsupportedClass(method.class()));
    }
    pert.check_compatible(method)?;
    let (k, kt) = (method.embed(), pert.embed());
    let n = k.rows();
    let mut fs: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut diffs: Vec<Option<Vec<T>>> = Vec::with_capacity(n);
    let mut stage = u.to_vec();
    for i in 0..n {
        let mut y = u.to_vec();
        for j in 0..i {
            if !k[(i, j)].is_zero() {
                axpy(&mut y, &(h.clone() * k[(i, j)].clone()), &fs[j]);
            }
            if !kt[(i, j)].is_zero() {
                let d = diffs[j].as_ref().expect("downwind evaluated for used columns");
                axpy(&mut y, &(h.clone() * kt[(i, j)].clone()), d);
            }
        }
        if i + 1 < n {
            let f = rhs.f(&y);
            let used = (i + 1..n).any(|row| !kt[(row, i)].is_zero());
            diffs.push(used.then(|| f.iter().zip(rhs.f_tilde(&y)).map(|(a, b)| a.clone() - b).collect()));
            fs.push(f);
        }
        stage = y;
    }
    Ok(stage)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub u: Vec<f64>,
    pub tv: f64,
    pub max: f64,
    /// Total variation or max-norm grew by more than the slack.
    pub increased: bool,
}

impl StepRecord {
    pub fn flag(&self) -> &'static str {
        if self.increased {
            "increase"
        } else {
            "ok"
        }
    }
}

#[derive(Clone, Debug)]
pub struct DemoConfig {
    pub method: String,
    pub perturbed: bool,
    pub grid_points: usize,
    pub cfl: f64,
    pub steps: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self { method: "ssp22".into(), perturbed: false, grid_points: 200, cfl: 0.9, steps: 200 }
    }
}

#[derive(Clone, Debug)]
pub struct DemoResult {
    pub method: String,
    pub perturbed: bool,
    /// Radius the step size is based on; 1 when the method has none.
    pub r: f64,
    pub radius_is_positive: bool,
    pub h: f64,
    pub records: Vec<StepRecord>,
    pub tv_monotone: bool,
    pub max_monotone: bool,
    /// Every stage stayed within the norms of the step's input.
    pub stages_bounded: bool,
}

impl DemoResult {
    pub fn monotone(&self) -> bool {
        self.tv_monotone && self.max_monotone
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,t,tv,max_norm,flag\n");
        for r in &self.records {
            writeln!(out, "{},{:.12},{:.15},{:.15},{}", r.step, r.t, r.tv, r.max, r.flag()).expect("write to string");
        }
        out
    }
}

/// Canonical form used by the demo: the optimal perturbation, or the
/// unperturbed method at its radius (or at 1 when that radius is zero).
fn demo_form(entry: &catalog::CatalogEntry, perturbed: bool) -> Result<(PerturbedCanonicalForm<f64>, bool)> {
    if perturbed {
        let report = optimize::optimize_lp(&entry.method, optimize::DEFAULT_TOL)?;
        let positive = report.r_opt > 0.0;
        if positive {
            return Ok((report.canonical, true));
        }
    }
    let r = entry.radius();
    let (r, positive) = if r > 0.0 { (r, true) } else { (1.0, false) };
    let cf = canonical_form(&entry.method, &r)?;
    Ok((PerturbedCanonicalForm::from_canonical(entry.method.class(), &cf), positive))
}

/// Square-wave advection with `h = cfl · r · Δx`.
pub fn advection_demo(config: &DemoConfig) -> Result<DemoResult> {
    let entry = catalog::get(&config.method)?;
    if !entry.method.is_explicit() {
        return Err(Error::UnsupportedClass(entry.method.class()));
    }
    if config.grid_points < 2 {
        return Err(Error::DomainError(format!("need at least 2 grid points, got {}", config.grid_points)));
    }
    let (pcf, positive) = demo_form(&entry, config.perturbed)?;
    let problem = Advection::new(config.grid_points);
    let h = config.cfl * pcf.r * problem.dx();
    let mut u = problem.square_wave();
    let (mut tv, mut max) = (Norm::TotalVariation.eval(&u), Norm::Max.eval(&u));
    let mut records = vec![StepRecord { step: 0, t: 0.0, u: u.clone(), tv, max, increased: false }];
    let (mut tv_monotone, mut max_monotone, mut stages_bounded) = (true, true, true);
    for step in 1..=config.steps {
        let stages = stages_canonical(&pcf, &u, &h, &problem)?;
        stages_bounded &= stages.iter().all(|y| {
            Norm::TotalVariation.eval(y) <= tv + MONOTONE_SLACK && Norm::Max.eval(y) <= max + MONOTONE_SLACK
        });
        u = stages.into_iter().last().expect("at least one stage");
        let (tv_new, max_new) = (Norm::TotalVariation.eval(&u), Norm::Max.eval(&u));
        let tv_up = tv_new > tv + MONOTONE_SLACK;
        let max_up = max_new > max + MONOTONE_SLACK;
        tv_monotone &= !tv_up;
        max_monotone &= !max_up;
        (tv, max) = (tv_new, max_new);
        records.push(StepRecord { step, t: step as f64 * h, u: u.clone(), tv, max, increased: tv_up || max_up });
    }
    Ok(DemoResult {
        method: entry.name.to_string(),
        perturbed: config.perturbed,
        r: pcf.r,
        radius_is_positive: positive,
        h,
        records,
        tv_monotone,
        max_monotone,
        stages_bounded,
    })
}
