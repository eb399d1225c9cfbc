//! Canonical Shu–Osher forms and radii of absolute monotonicity.
//!
//! For a parameter `r ≥ 0` the canonical form of `K` is
//!
//! ```text
//! v_r = (I + rK)⁻¹ e,        α_r = r (I + rK)⁻¹ K
//! ```
//!
//! and for a perturbed pair `(K, K̃)`, with `M = I + rK + 2rK̃`,
//!
//! ```text
//! γ_r = M⁻¹ e,   α^up_r = r M⁻¹ (K + K̃),   α^down_r = r M⁻¹ K̃.
//! ```
//!
//! The radius of absolute monotonicity is the largest `r` at which these
//! coefficients exist and are nonnegative.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::tableau::{Perturbation, RKMethod, StructuralClass};

/// Bisection tolerance for radii.
pub const RADIUS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalForm<T> {
    pub r: T,
    pub v: Vec<T>,
    pub alpha: Matrix<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedCanonicalForm<T> {
    pub class: StructuralClass,
    pub r: T,
    pub gamma: Vec<T>,
    pub alpha_up: Matrix<T>,
    pub alpha_down: Matrix<T>,
}

/// Embedded Butcher pair recovered from a canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherPair<T> {
    pub class: StructuralClass,
    pub k: Matrix<T>,
    pub k_tilde: Matrix<T>,
}

impl<T: Scalar> CanonicalForm<T> {
    pub fn is_nonneg(&self) -> bool {
        self.alpha.all_nonneg() && self.v.iter().all(Scalar::is_nonneg)
    }

    pub fn cast<U: Scalar>(&self) -> CanonicalForm<U> {
        CanonicalForm { r: crate::scalar::cast(&self.r), v: self.v.iter().map(crate::scalar::cast).collect(), alpha: self.alpha.cast() }
    }
}

impl<T: Scalar> PerturbedCanonicalForm<T> {
    /// Unperturbed form seen as a perturbed one (`α^down = 0`).
    pub fn from_canonical(class: StructuralClass, cf: &CanonicalForm<T>) -> Self {
        let n = cf.v.len();
        Self { class, r: cf.r.clone(), gamma: cf.v.clone(), alpha_up: cf.alpha.clone(), alpha_down: Matrix::zeros(n, n) }
    }

    pub fn size(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_nonneg(&self) -> bool {
        self.alpha_up.all_nonneg() && self.alpha_down.all_nonneg() && self.gamma.iter().all(Scalar::is_nonneg)
    }

    pub fn is_explicit(&self) -> bool {
        self.alpha_up.is_strictly_lower() && self.alpha_down.is_strictly_lower()
    }

    pub fn cast<U: Scalar>(&self) -> PerturbedCanonicalForm<U> {
        PerturbedCanonicalForm {
            class: self.class,
            r: crate::scalar::cast(&self.r),
            gamma: self.gamma.iter().map(crate::scalar::cast).collect(),
            alpha_up: self.alpha_up.cast(),
            alpha_down: self.alpha_down.cast(),
        }
    }

    pub fn to_f64(&self) -> PerturbedCanonicalForm<f64> {
        self.cast()
    }

    /// `γ − (I − α^up − α^down)e`, which vanishes for any valid form.
    pub fn consistency_defect(&self) -> T {
        let n = self.size();
        (0..n)
            .map(|i| {
                let row_sum = (0..n).fold(T::zero(), |acc, j| acc + self.alpha_up[(i, j)].clone() + self.alpha_down[(i, j)].clone());
                (self.gamma[i].clone() - (T::one() - row_sum)).abs()
            })
            .fold(T::zero(), T::max_of)
    }
}

#[derive(Serialize)]
struct PcfJson {
    r: f64,
    gamma: Vec<f64>,
    alpha_up: Vec<Vec<f64>>,
    alpha_down: Vec<Vec<f64>>,
}

impl<T: Scalar> PerturbedCanonicalForm<T> {
    pub fn to_json_value(&self) -> serde_json::Value {
        let f = self.to_f64();
        serde_json::to_value(PcfJson { r: f.r, gamma: f.gamma, alpha_up: f.alpha_up.to_rows(), alpha_down: f.alpha_down.to_rows() })
            .expect("serializable")
    }
}

impl<T: Scalar> ButcherPair<T> {
    pub fn method(&self, name: impl Into<String>, order: u32) -> Result<RKMethod<T>> {
        RKMethod::from_embedded(name, self.class, order, &clean(&self.k, self.class))
    }

    pub fn perturbation(&self) -> Result<Perturbation<T>> {
        Perturbation::from_embedded(self.class, &clean(&self.k_tilde, self.class))
    }
}

/// Zero out negligible entries that the structural class forbids, so
/// rounding noise above the diagonal does not fail validation.
fn clean<T: Scalar>(k: &Matrix<T>, class: StructuralClass) -> Matrix<T> {
    let s = k.rows().saturating_sub(1);
    Matrix::from_fn(k.rows(), k.cols(), |i, j| {
        let x = &k[(i, j)];
        let allowed = j < s && (i == s || class.allows(i, j));
        if !allowed && x.is_negligible() {
            T::zero()
        } else {
            x.clone()
        }
    })
}

fn residual_tol<T: Scalar>() -> T {
    if T::EXACT {
        T::zero()
    } else {
        T::eps_zero() * T::nat(100)
    }
}

/// Canonical Shu–Osher form of `method` at `r`.
pub fn canonical_form<T: Scalar>(method: &RKMethod<T>, r: &T) -> Result<CanonicalForm<T>> {
    let k = method.embed();
    let n = k.rows();
    let m = &Matrix::identity(n) + &k.scale(r);
    let singular = || Error::SingularResolvent(r.to_f64_lossy());
    let v = m.solve_vec(&vec![T::one(); n]).map_err(|_| singular())?;
    let alpha = m.solve(&k).map_err(|_| singular())?.scale(r);
    Ok(CanonicalForm { r: r.clone(), v, alpha })
}

/// Canonical Shu–Osher-like form of the pair `(method, pert)` at `r`.
pub fn perturbed_canonical_form<T: Scalar>(
    method: &RKMethod<T>,
    pert: &Perturbation<T>,
    r: &T,
) -> Result<PerturbedCanonicalForm<T>> {
    pert.check_compatible(method)?;
    let k = method.embed();
    let kt = pert.embed();
    let n = k.rows();
    let m = &(&Matrix::identity(n) + &k.scale(r)) + &kt.scale(&(T::two() * r.clone()));
    let singular = || Error::SingularResolvent(r.to_f64_lossy());
    let gamma = m.solve_vec(&vec![T::one(); n]).map_err(|_| singular())?;
    let alpha_up = m.solve(&(&k + &kt)).map_err(|_| singular())?.scale(r);
    let alpha_down = m.solve(&kt).map_err(|_| singular())?.scale(r);
    Ok(PerturbedCanonicalForm { class: method.class(), r: r.clone(), gamma, alpha_up, alpha_down })
}

/// Upper end of the radius search bracket.
pub fn radius_bracket<T: Scalar>(method: &RKMethod<T>) -> T {
    let s = T::nat(method.stages());
    if method.is_explicit() {
        let m = method.embed().max_abs();
        if m.is_negligible() {
            s
        } else {
            T::one() / m
        }
    } else {
        T::nat(10) * s
    }
}

/// Largest probe in `[lo, hi]` accepted by `feasible`, assuming the
/// feasible set is an interval containing `lo`. The endpoint `hi` is tried
/// first.
pub fn bisect_sup<T: Scalar>(lo: T, hi: T, tol: &T, mut feasible: impl FnMut(&T) -> bool) -> T {
    if feasible(&hi) {
        return hi;
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi.clone() - lo.clone() > *tol {
        let mid = (lo.clone() + hi.clone()).half();
        if feasible(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `R(K)`: the radius of absolute monotonicity.
pub fn radius_am<T: Scalar>(method: &RKMethod<T>) -> T {
    radius_am_perturbed(method, &method.zero_perturbation())
}

/// `R(K, K̃)`: largest `r` with `γ_r, α^up_r, α^down_r` existing and
/// nonnegative. Zero when no positive `r` qualifies.
pub fn radius_am_perturbed<T: Scalar>(method: &RKMethod<T>, pert: &Perturbation<T>) -> T {
    radius_am_perturbed_tol(method, pert, &T::from_f64_lossy(RADIUS_TOL))
}

pub fn radius_am_perturbed_tol<T: Scalar>(method: &RKMethod<T>, pert: &Perturbation<T>, tol: &T) -> T {
    if pert.check_compatible(method).is_err() {
        return T::zero();
    }
    let hi = radius_bracket(method);
    bisect_sup(T::zero(), hi, tol, |r| {
        perturbed_canonical_form(method, pert, r).map(|p| p.is_nonneg()).unwrap_or(false)
    })
}

/// `I − 2α^down` regular.
pub fn is_zero_well_defined<T: Scalar>(pcf: &PerturbedCanonicalForm<T>) -> bool {
    let n = pcf.size();
    let m = &Matrix::identity(n) - &pcf.alpha_down.scale(&T::two());
    !m.determinant().is_negligible()
}

/// Whether `pcf` and `cf` are related by `(I−2α^down)α_r = α^up − α^down`
/// and `(I−2α^down)v_r = γ_r`.
pub fn verify_perturbation_of<T: Scalar>(pcf: &PerturbedCanonicalForm<T>, cf: &CanonicalForm<T>) -> bool {
    let n = pcf.size();
    if cf.v.len() != n {
        return false;
    }
    let m = &Matrix::identity(n) - &pcf.alpha_down.scale(&T::two());
    let lhs = &m * &cf.alpha;
    let rhs = &pcf.alpha_up - &pcf.alpha_down;
    let lv = m.mul_vec(&cf.v);
    let tol = residual_tol::<T>();
    let vec_diff = lv.iter().zip(&pcf.gamma).fold(T::zero(), |acc, (a, b)| T::max_of(acc, (a.clone() - b.clone()).abs()));
    lhs.max_abs_diff(&rhs) <= tol && vec_diff <= tol
}

/// Move all weight of `γ` onto the first stage, splitting it evenly
/// between `α^up` and `α^down` in column 1. Requires a zero first row.
pub fn shift_to_e1<T: Scalar>(pcf: &PerturbedCanonicalForm<T>) -> Result<PerturbedCanonicalForm<T>> {
    let n = pcf.size();
    let first_row_zero = (0..n).all(|j| pcf.alpha_up[(0, j)].is_negligible() && pcf.alpha_down[(0, j)].is_negligible());
    if !first_row_zero || !(pcf.gamma[0].clone() - T::one()).is_negligible() {
        return Err(Error::PreconditionViolation("first stage must be u_n (zero first row of K)".into()));
    }
    let mut out = pcf.clone();
    for i in 1..n {
        let g = pcf.gamma[i].half();
        out.alpha_up[(i, 0)] = out.alpha_up[(i, 0)].clone() + g.clone();
        out.alpha_down[(i, 0)] = out.alpha_down[(i, 0)].clone() + g;
        out.gamma[i] = T::zero();
    }
    out.gamma[0] = T::one();
    Ok(out)
}

/// Recover `(K, K̃)` from a zero-well-defined canonical form.
pub fn butcher_from_canonical<T: Scalar>(pcf: &PerturbedCanonicalForm<T>) -> Result<ButcherPair<T>> {
    if pcf.r.is_negligible() {
        return Err(Error::ZeroRadius);
    }
    if !is_zero_well_defined(pcf) {
        return Err(Error::PreconditionViolation("I − 2α^down is singular".into()));
    }
    let n = pcf.size();
    let m = &(&Matrix::identity(n) - &pcf.alpha_up) - &pcf.alpha_down;
    let singular = || Error::SingularResolvent(pcf.r.to_f64_lossy());
    let inv_r = T::one() / pcf.r.clone();
    let k = m.solve(&(&pcf.alpha_up - &pcf.alpha_down)).map_err(|_| singular())?.scale(&inv_r);
    let k_tilde = m.solve(&pcf.alpha_down).map_err(|_| singular())?.scale(&inv_r);
    Ok(ButcherPair { class: pcf.class, k, k_tilde })
}

/// Sufficient and necessary conditions for `R(K, K̃) > 0`.
pub fn has_positive_radius<T: Scalar>(method: &RKMethod<T>, pert: &Perturbation<T>) -> bool {
    if pert.check_compatible(method).is_err() {
        return false;
    }
    let k = method.embed();
    let kt = pert.embed();
    let sum = &k + &kt;
    if !sum.all_nonneg() || !kt.all_nonneg() {
        return false;
    }
    let k2 = &sum + &kt;
    (&k2 * &sum).incidence().le(&sum.incidence()) && (&k2 * &kt).incidence().le(&kt.incidence())
}

const MAX_FILL: f64 = 1e12;

/// A perturbation with positive radius: the zero perturbation if it
/// already works, otherwise a constant fill of every entry the class
/// allows, grown until [`has_positive_radius`] holds.
pub fn construct_positive_perturbation<T: Scalar>(method: &RKMethod<T>) -> Result<Perturbation<T>> {
    let zero = method.zero_perturbation();
    if has_positive_radius(method, &zero) {
        return Ok(zero);
    }
    let s = method.stages();
    let class = method.class();
    let min = method.embed().min_entry().unwrap_or_else(T::zero);
    let mut c = T::one() + T::max_of(T::zero(), -min);
    let mut doublings = 0;
    while c.to_f64_lossy() <= MAX_FILL {
        let a_tilde = Matrix::from_fn(s, s, |i, j| if class.allows(i, j) { c.clone() } else { T::zero() });
        let pert = Perturbation::new(class, a_tilde, vec![c.clone(); s])?;
        if has_positive_radius(method, &pert) {
            return Ok(pert);
        }
        c = c * T::two();
        doublings += 1;
    }
    Err(Error::IterationCap(doublings))
}
