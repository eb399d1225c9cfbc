//! Upper bounds on the optimal perturbed radius and two algorithms that
//! attain it for explicit methods: LP bisection and iterated splitting.

use log::debug;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{solve_feasibility, LpFeasibility, LpResult};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::shu_osher::{
    bisect_sup, butcher_from_canonical, canonical_form, radius_bracket, shift_to_e1, PerturbedCanonicalForm,
};
use crate::tableau::{Perturbation, RKMethod};

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lp,
    Splitting,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Lp => "lp",
            Self::Splitting => "splitting",
        })
    }
}

/// `+∞` marks an absent bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bounds {
    pub inv_max_abs: f64,
    pub r_e: f64,
    pub linear_order: f64,
}

impl Bounds {
    pub fn of<T: Scalar>(method: &RKMethod<T>) -> Result<Self> {
        Ok(Self {
            inv_max_abs: bound_max_abs(method),
            r_e: bound_re(method)?,
            linear_order: bound_linear_order(method.stages(), method.order() as usize).unwrap_or(f64::INFINITY),
        })
    }

    pub fn min(&self) -> f64 {
        self.inv_max_abs.min(self.r_e).min(self.linear_order)
    }
}

#[derive(Clone, Debug)]
pub struct OptimizationReport {
    pub r_opt: f64,
    pub perturbation: Perturbation<f64>,
    pub canonical: PerturbedCanonicalForm<f64>,
    pub algorithm: Algorithm,
    pub bounds: Bounds,
    /// Feasibility probes evaluated by the bisection.
    pub iterations: usize,
}

fn require_explicit<T: Scalar>(method: &RKMethod<T>) -> Result<()> {
    if method.is_explicit() {
        Ok(())
    } else {
        Err(Error::UnsupportedClass(method.class()))
    }
}

/// `1 / max |K_ij|`, or `+∞` when `K = 0`.
pub fn bound_max_abs<T: Scalar>(method: &RKMethod<T>) -> f64 {
    let m = method.embed().max_abs();
    if m.is_negligible() {
        f64::INFINITY
    } else {
        1.0 / m.to_f64_lossy()
    }
}

/// `(s(s−1)⋯(s−p+1))^{1/p}`.
pub fn bound_linear_order(s: usize, p: usize) -> Result<f64> {
    if p == 0 || p > s {
        return Err(Error::DomainError(format!("need 1 <= p <= s, got s = {s}, p = {p}")));
    }
    let product: f64 = (0..p).map(|k| (s - k) as f64).product();
    Ok(if p == 1 { product } else { product.powf(1.0 / p as f64) })
}

/// Largest `r_e` with `v_ρ ≥ 0` for every `ρ ∈ [0, r_e]`; `+∞` if `v` never
/// turns negative.
pub fn bound_re<T: Scalar>(method: &RKMethod<T>) -> Result<f64> {
    require_explicit(method)?;
    // (I + rK)⁻¹ e = Σ (−r)^k K^k e, exact because K is nilpotent.
    let k = method.embed();
    let n = k.rows();
    let mut term = vec![T::one(); n];
    let mut coeffs: Vec<Vec<f64>> = vec![Vec::new(); n];
    for deg in 0..=n {
        for (i, t) in term.iter().enumerate() {
            let c = t.to_f64_lossy();
            coeffs[i].push(if deg % 2 == 0 { c } else { -c });
        }
        term = k.mul_vec(&term);
        if deg > 0 && term.iter().all(Scalar::is_negligible) {
            break;
        }
    }
    let r_e = coeffs.iter().map(|p| first_sign_loss(p)).fold(f64::INFINITY, f64::min);
    Ok(r_e)
}

fn trim(p: &[f64]) -> &[f64] {
    let mut end = p.len();
    while end > 0 && p[end - 1] == 0.0 {
        end -= 1;
    }
    &p[..end]
}

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn derivative(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

fn bisect_root(p: &[f64], mut a: f64, mut b: f64) -> f64 {
    let fa = horner(p, a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (horner(p, m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sorted real roots of `p` in `[lo, hi]` where `p` changes sign, found by
/// isolating between critical points.
fn sign_changes(p: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let p = trim(p);
    if p.len() <= 1 {
        return Vec::new();
    }
    let mut pts = vec![lo];
    pts.extend(sign_changes(&derivative(p), lo, hi));
    pts.push(hi);
    pts.windows(2)
        .filter_map(|w| {
            let (fa, fb) = (horner(p, w[0]), horner(p, w[1]));
            (fa != 0.0 && fb != 0.0 && (fa > 0.0) != (fb > 0.0)).then(|| bisect_root(p, w[0], w[1]))
        })
        .collect()
}

/// First `x > 0` where `p` (with `p(0) > 0`) goes from positive to negative.
fn first_sign_loss(p: &[f64]) -> f64 {
    let p = trim(p);
    if p.len() <= 1 {
        return f64::INFINITY;
    }
    let lead = p[p.len() - 1].abs();
    let cauchy = 1.0 + p[..p.len() - 1].iter().map(|c| c.abs() / lead).fold(0.0, f64::max);
    sign_changes(p, 0.0, cauchy)
        .into_iter()
        .find(|&x| horner(p, x + 1e-9 * (1.0 + x)) < 0.0)
        .unwrap_or(f64::INFINITY)
}

/// `(M⁺, M⁻)` with `M = M⁺ − M⁻`, both nonnegative with disjoint support.
pub fn sign_split<T: Scalar>(m: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let plus = m.map(|x| if x.is_negative() { T::zero() } else { x.clone() });
    let minus = m.map(|x| if x.is_negative() { -x.clone() } else { T::zero() });
    (plus, minus)
}

/// Index map for the strictly-lower entries of an `n×n` matrix.
fn lower_index(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect()
}

/// Solve the feasibility LP over strictly-lower `D = α^down ≥ 0` at `r`:
/// `(I − 2D)α_r + D ≥ 0` and `(I − 2D)v_r ≥ 0`.
pub fn lp_feasible_at<T: Scalar>(method: &RKMethod<T>, r: f64) -> Result<Option<Matrix<f64>>> {
    require_explicit(method)?;
    let m = method.to_f64();
    let cf = canonical_form(&m, &r)?;
    let n = cf.v.len();
    let idx = lower_index(n);
    let pos = |i: usize, j: usize| idx.iter().position(|&p| p == (i, j));
    let mut lp = LpFeasibility::new(idx.len());
    for i in 0..n {
        for j in 0..i {
            let mut row = vec![0.0; idx.len()];
            row[pos(i, j).expect("lower entry")] += 1.0;
            for k in j + 1..i {
                row[pos(i, k).expect("lower entry")] -= 2.0 * cf.alpha[(k, j)];
            }
            lp.add_ge(row, -cf.alpha[(i, j)]);
        }
        let mut row = vec![0.0; idx.len()];
        for k in 0..i {
            row[pos(i, k).expect("lower entry")] -= 2.0 * cf.v[k];
        }
        lp.add_ge(row, -cf.v[i]);
    }
    match solve_feasibility(&lp) {
        LpResult::Feasible(x) => {
            let mut d = Matrix::zeros(n, n);
            for (&(i, j), v) in idx.iter().zip(x) {
                d[(i, j)] = v.max(0.0);
            }
            Ok(Some(d))
        }
        LpResult::Infeasible(_) => Ok(None),
        LpResult::NumericalFailure(msg) => Err(Error::NumericalFailure(msg)),
    }
}

/// Canonical form `(γ, α^up, α^down) = ((I−2D)v_r, (I−2D)α_r + D, D)`.
pub fn canonical_from_down(method: &RKMethod<f64>, r: f64, d: &Matrix<f64>) -> Result<PerturbedCanonicalForm<f64>> {
    let cf = canonical_form(method, &r)?;
    let n = cf.v.len();
    let m = &Matrix::identity(n) - &d.scale(&2.0);
    Ok(PerturbedCanonicalForm {
        class: method.class(),
        r,
        gamma: m.mul_vec(&cf.v),
        alpha_up: &(&m * &cf.alpha) + d,
        alpha_down: d.clone(),
    })
}

fn finish(
    method: &RKMethod<f64>,
    algorithm: Algorithm,
    r_opt: f64,
    canonical: Option<PerturbedCanonicalForm<f64>>,
    iterations: usize,
) -> Result<OptimizationReport> {
    let bounds = Bounds::of(method)?;
    let (perturbation, canonical) = match canonical {
        Some(pcf) if r_opt > 0.0 => {
            let pair = butcher_from_canonical(&pcf)?;
            let k_err = pair.k.max_abs_diff(&method.embed());
            if k_err > 1e-8 * (1.0 + method.embed().max_abs()) {
                return Err(Error::NumericalFailure(format!("recovered K differs from the method by {k_err:e}")));
            }
            (pair.perturbation()?, pcf)
        }
        _ => {
            let zero = method.zero_perturbation();
            let cf = canonical_form(method, &0.0)?;
            (zero, PerturbedCanonicalForm::from_canonical(method.class(), &cf))
        }
    };
    debug!("{algorithm}: r_opt = {r_opt} after {iterations} probes");
    Ok(OptimizationReport { r_opt, perturbation, canonical, algorithm, bounds, iterations })
}

/// Optimal perturbation by bisection over [`lp_feasible_at`] on
/// `[0, 1/max|a_ij|]`.
pub fn optimize_lp<T: Scalar>(method: &RKMethod<T>, tol: f64) -> Result<OptimizationReport> {
    require_explicit(method)?;
    let m = method.to_f64();
    let hi = radius_bracket(&m);
    let mut best: Option<(f64, Matrix<f64>)> = None;
    let mut probes = 0;
    let mut failure = None;
    let r = bisect_sup(0.0, hi, &tol, |&r| {
        probes += 1;
        if r <= 0.0 {
            return true;
        }
        match lp_feasible_at(&m, r) {
            Ok(Some(d)) => {
                if best.as_ref().is_none_or(|(b, _)| r > *b) {
                    best = Some((r, d));
                }
                true
            }
            Ok(None) => false,
            Err(Error::NumericalFailure(msg)) => {
                debug!("LP inconclusive at r = {r}: {msg}; treating as infeasible");
                false
            }
            Err(e) => {
                failure = Some(e);
                false
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let canonical = match &best {
        Some((rb, d)) if *rb == r => Some(canonical_from_down(&m, r, d)?),
        _ => None,
    };
    finish(&m, Algorithm::Lp, if canonical.is_some() { r } else { 0.0 }, canonical, probes)
}

/// Diagnostics from one run of the iterated splitting.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingTrace {
    /// First row (0-based) with a negative entry, before each update.
    pub first_negative_rows: Vec<usize>,
    /// Columns `≥ 1` (0-based) holding negatives in that row, before and
    /// after each update.
    pub negative_columns: Vec<(Vec<usize>, Vec<usize>)>,
    pub updates: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SplittingOutcome<T> {
    Accepted(PerturbedCanonicalForm<T>),
    Rejected { row: usize },
}

fn first_negative_row<T: Scalar>(pcf: &PerturbedCanonicalForm<T>) -> Option<usize> {
    let n = pcf.size();
    (0..n).find(|&i| (0..n).any(|j| !pcf.alpha_up[(i, j)].is_nonneg() || !pcf.alpha_down[(i, j)].is_nonneg()))
}

fn negative_columns<T: Scalar>(pcf: &PerturbedCanonicalForm<T>, row: usize) -> Vec<usize> {
    (1..pcf.size())
        .filter(|&j| !pcf.alpha_up[(row, j)].is_nonneg() || !pcf.alpha_down[(row, j)].is_nonneg())
        .collect()
}

/// Column-1 negative with every other entry of the same matrix in that row
/// nonnegative: the negative can never be removed.
fn stuck<T: Scalar>(m: &Matrix<T>, row: usize) -> bool {
    !m[(row, 0)].is_nonneg() && (1..row).all(|l| m[(row, l)].is_nonneg())
}

/// One update `α^± ← (I + 2N)⁻¹ α^±`, `γ ← (I + 2N)⁻¹ γ`.
fn resplit<T: Scalar>(pcf: &PerturbedCanonicalForm<T>) -> Result<PerturbedCanonicalForm<T>> {
    let (up_p, up_m) = sign_split(&pcf.alpha_up);
    let (dn_p, dn_m) = sign_split(&pcf.alpha_down);
    let n = pcf.size();
    let neg = &up_m + &dn_m;
    let m = &Matrix::identity(n) + &neg.scale(&T::two());
    let singular = || Error::SingularResolvent(pcf.r.to_f64_lossy());
    Ok(PerturbedCanonicalForm {
        class: pcf.class,
        r: pcf.r.clone(),
        gamma: m.solve_vec(&pcf.gamma).map_err(|_| singular())?,
        alpha_up: m.solve(&(&up_p + &dn_m)).map_err(|_| singular())?,
        alpha_down: m.solve(&(&up_m + &dn_p)).map_err(|_| singular())?,
    })
}

/// Iterated splitting at a fixed `r`, with a trace of its progress.
pub fn splitting_run<T: Scalar>(method: &RKMethod<T>, r: &T) -> Result<(SplittingOutcome<T>, SplittingTrace)> {
    require_explicit(method)?;
    let cf = canonical_form(method, r)?;
    let mut pcf = PerturbedCanonicalForm::from_canonical(method.class(), &cf);
    let s = method.stages();
    let cap = 10 * s * s;
    let mut trace = SplittingTrace { first_negative_rows: Vec::new(), negative_columns: Vec::new(), updates: 0 };
    loop {
        pcf = shift_to_e1(&pcf)?;
        let Some(row) = first_negative_row(&pcf) else {
            return Ok((SplittingOutcome::Accepted(pcf), trace));
        };
        if stuck(&pcf.alpha_up, row) || stuck(&pcf.alpha_down, row) {
            return Ok((SplittingOutcome::Rejected { row }, trace));
        }
        if trace.updates >= cap {
            return Err(Error::IterationCap(cap));
        }
        let before = negative_columns(&pcf, row);
        pcf = resplit(&pcf)?;
        trace.first_negative_rows.push(row);
        trace.negative_columns.push((before, negative_columns(&pcf, row)));
        trace.updates += 1;
    }
}

/// Whether a perturbation with radius at least `r` exists according to the
/// iterated splitting; returns its canonical form.
pub fn splitting_exists<T: Scalar>(method: &RKMethod<T>, r: &T) -> Result<Option<PerturbedCanonicalForm<T>>> {
    Ok(match splitting_run(method, r)?.0 {
        SplittingOutcome::Accepted(pcf) => Some(pcf),
        SplittingOutcome::Rejected { .. } => None,
    })
}

/// Optimal perturbation by bisection over [`splitting_exists`].
pub fn optimize_splitting<T: Scalar>(method: &RKMethod<T>, tol: f64) -> Result<OptimizationReport> {
    require_explicit(method)?;
    let m = method.to_f64();
    let hi = radius_bracket(&m);
    let mut best: Option<PerturbedCanonicalForm<f64>> = None;
    let mut probes = 0;
    let mut failure = None;
    let r = bisect_sup(0.0, hi, &tol, |&r| {
        probes += 1;
        if r <= 0.0 {
            return true;
        }
        match splitting_exists(&m, &r) {
            Ok(Some(pcf)) => {
                if best.as_ref().is_none_or(|b| r > b.r) {
                    best = Some(pcf);
                }
                true
            }
            Ok(None) => false,
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let canonical = best.filter(|b| b.r == r);
    finish(&m, Algorithm::Splitting, if canonical.is_some() { r } else { 0.0 }, canonical, probes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn sign_split_examples() {
        let m = Matrix::from_rows(vec![vec![1.0, -2.0], vec![0.0, 3.0]]);
        let (p, n) = sign_split(&m);
        assert_eq!(p, Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 3.0]]));
        assert_eq!(n, Matrix::from_rows(vec![vec![0.0, 2.0], vec![0.0, 0.0]]));
    }

    #[test]
    fn linear_order_bound() {
        assert!((bound_linear_order(2, 2).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!((bound_linear_order(4, 4).unwrap() - 24f64.powf(0.25)).abs() < 1e-14);
        assert_eq!(bound_linear_order(7, 1).unwrap(), 7.0);
        assert!(matches!(bound_linear_order(2, 3), Err(Error::DomainError(_))));
    }

    #[test]
    fn polynomial_sign_loss() {
        // 1 - r
        assert!((first_sign_loss(&[1.0, -1.0]) - 1.0).abs() < 1e-15);
        // (1 - r)^2 touches zero without crossing
        assert_eq!(first_sign_loss(&[1.0, -2.0, 1.0]), f64::INFINITY);
        // (1 - r)(2 - r)(3 - r) first crossing at 1
        assert!((first_sign_loss(&[6.0, -11.0, 6.0, -1.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fe_bounds() {
        let fe = catalog::get("forward-euler").unwrap().method;
        assert_eq!(bound_re(&fe).unwrap(), 1.0);
        assert_eq!(bound_max_abs(&fe), 1.0);
    }

    #[test]
    fn implicit_refused() {
        let trap = catalog::get("trapezoid").unwrap().method;
        assert!(matches!(optimize_lp(&trap, 1e-6), Err(Error::UnsupportedClass(_))));
        assert!(matches!(optimize_splitting(&trap, 1e-6), Err(Error::UnsupportedClass(_))));
    }
}
