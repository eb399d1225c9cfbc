//! Bivariate stability functions and threshold factors.
//!
//! For `u' = λu` with downwind operator `λ̃`, one perturbed step multiplies
//! `u_n` by `ψ(z, z̃)` with `z = hλ`, `z̃ = −hλ̃`. Writing
//!
//! ```text
//! ψ(z, z̃) = Σ_j Σ_ℓ γ_jℓ (1 + z/r)^(j−ℓ) (1 + z̃/r)^ℓ
//! ```
//!
//! the threshold factor `R_Lin` is the largest `r` for which every `γ_jℓ`
//! is nonnegative.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lp::{solve_feasibility, LpFeasibility, LpResult};
use crate::poly::{binomial, factorial, scalar_of, BivariatePoly};
use crate::scalar::Scalar;
use crate::shu_osher::bisect_sup;
use crate::tableau::{Perturbation, RKMethod};

/// Bisection tolerance for [`linear_radius`].
pub const LINEAR_TOL: f64 = 1e-8;

/// `ψ` in the shifted basis at `r`: `gamma[(j, ℓ)]` multiplies
/// `(1 + z/r)^(j−ℓ) (1 + z̃/r)^ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedExpansion<T> {
    pub r: T,
    pub gamma: BTreeMap<(usize, usize), T>,
}

impl<T: Scalar> ShiftedExpansion<T> {
    pub fn get(&self, j: usize, l: usize) -> T {
        self.gamma.get(&(j, l)).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_nonneg(&self) -> bool {
        self.gamma.values().all(|g| *g >= -T::eps_zero())
    }

    /// Rebuild `ψ` in monomials.
    pub fn to_poly(&self) -> BivariatePoly<T> {
        let inv_r = T::one() / self.r.clone();
        let u = &BivariatePoly::one() + &BivariatePoly::linear(inv_r.clone(), T::zero());
        let v = &BivariatePoly::one() + &BivariatePoly::linear(T::zero(), inv_r);
        let mut acc = BivariatePoly::zero(0);
        for (&(j, l), g) in &self.gamma {
            let mut term = BivariatePoly::constant(g.clone());
            for _ in 0..j - l {
                term = &term * &u;
            }
            for _ in 0..l {
                term = &term * &v;
            }
            acc = &acc + &term;
        }
        acc
    }
}

/// `ψ(z, z̃) = 1 + (z bᵀ + (z+z̃) b̃ᵀ) g`, with stage factors from
/// `g = e + (zA + (z+z̃)Ã) g` solved by forward substitution.
pub fn stability_function<T: Scalar>(method: &RKMethod<T>, pert: &Perturbation<T>) -> Result<BivariatePoly<T>> {
    if !method.is_explicit() {
        return Err(Error::UnsupportedClass(method.class()));
    }
    pert.check_compatible(method)?;
    let s = method.stages();
    let (a, b) = (method.a(), method.b());
    let (at, bt) = (pert.a_tilde(), pert.b_tilde());
    let weight = |x: &T, xt: &T| BivariatePoly::linear(x.clone() + xt.clone(), xt.clone());
    let mut g: Vec<BivariatePoly<T>> = Vec::with_capacity(s);
    for i in 0..s {
        let mut gi = BivariatePoly::one();
        for (j, gj) in g.iter().enumerate() {
            if !a[(i, j)].is_zero() || !at[(i, j)].is_zero() {
                gi = &gi + &(&weight(&a[(i, j)], &at[(i, j)]) * gj);
            }
        }
        g.push(gi);
    }
    let mut psi = BivariatePoly::one();
    for (i, gi) in g.iter().enumerate() {
        if !b[i].is_zero() || !bt[i].is_zero() {
            psi = &psi + &(&weight(&b[i], &bt[i]) * gi);
        }
    }
    Ok(psi)
}

/// Change of basis `z = r(u − 1)`, `z̃ = r(v − 1)`.
pub fn shifted_expansion<T: Scalar>(psi: &BivariatePoly<T>, r: &T) -> ShiftedExpansion<T> {
    let d = psi.total_degree();
    let sign = |e: usize| if e.is_multiple_of(2) { T::one() } else { -T::one() };
    let powers: Vec<T> = (0..=2 * d + 1).map(|k| r.powi(k)).collect();
    let mut gamma = BTreeMap::new();
    for a in 0..=d {
        for b in 0..=d - a {
            let mut acc = T::zero();
            for (j, k, mu) in psi.terms() {
                if j >= a && k >= b {
                    let c = scalar_of::<T>(binomial(j, a) * binomial(k, b));
                    acc = acc + mu.clone() * powers[j + k].clone() * c * sign(j - a + k - b);
                }
            }
            gamma.insert((a + b, b), acc);
        }
    }
    ShiftedExpansion { r: r.clone(), gamma }
}

/// `R_Lin(K, K̃)`: the largest `r ∈ [0, s]` with a nonnegative shifted
/// expansion.
pub fn linear_radius<T: Scalar>(method: &RKMethod<T>, pert: &Perturbation<T>) -> Result<T> {
    linear_radius_tol(method, pert, &T::from_f64_lossy(LINEAR_TOL))
}

pub fn linear_radius_tol<T: Scalar>(method: &RKMethod<T>, pert: &Perturbation<T>, tol: &T) -> Result<T> {
    let psi = stability_function(method, pert)?;
    Ok(poly_radius(&psi, T::nat(method.stages()), tol))
}

/// Largest `r ∈ [0, hi]` at which `ψ` is absolutely monotonic.
pub fn poly_radius<T: Scalar>(psi: &BivariatePoly<T>, hi: T, tol: &T) -> T {
    bisect_sup(T::zero(), hi, tol, |r| r.is_zero() || shifted_expansion(psi, r).is_nonneg())
}

/// Variables `γ_jℓ` in the order used by [`taylor_constraint_coeffs`].
pub fn gamma_index(s: usize) -> Vec<(usize, usize)> {
    (0..=s).flat_map(|j| (0..=j).map(move |l| (j, l))).collect()
}

/// Coefficient of `z^i` in `ψ(z, −z)` as a linear functional of the
/// `γ_jℓ` (ordered by [`gamma_index`]).
pub fn taylor_constraint_coeffs<T: Scalar>(s: usize, r: &T, i: usize) -> Vec<T> {
    let scale = T::one() / r.powi(i);
    gamma_index(s)
        .into_iter()
        .map(|(j, l)| {
            if j < i {
                return T::zero();
            }
            let lo = i.saturating_sub(l);
            let hi = i.min(j - l);
            let mut acc: i128 = 0;
            for m in lo..=hi {
                let term = (binomial(j - l, m) * binomial(l, i - m)) as i128;
                acc += if (i - m).is_multiple_of(2) { term } else { -term };
            }
            T::from_i128(acc).expect("integer fits") * scale.clone()
        })
        .collect()
}

/// Whether some `γ ≥ 0` gives a degree-`s` polynomial of linear order `p`
/// with radius at least `r`.
pub fn threshold_feasible(s: usize, p: usize, r: f64) -> LpResult {
    let n = gamma_index(s).len();
    let mut lp = LpFeasibility::new(n);
    for i in 0..=p {
        let f = factorial(i) as f64;
        let row = taylor_constraint_coeffs::<f64>(s, &r, i).into_iter().map(|c| c * f).collect();
        lp.add_eq(row, 1.0);
    }
    solve_feasibility(&lp)
}

/// `R̃_{s,p}`: the optimal threshold factor over `s`-stage polynomials of
/// linear order `p`.
pub fn threshold_bound(s: usize, p: usize, tol: f64) -> Result<f64> {
    if p == 0 || p > s {
        return Err(Error::DomainError(format!("need 1 <= p <= s, got s = {s}, p = {p}")));
    }
    Ok(bisect_sup(0.0, s as f64, &tol, |&r| {
        if r <= 0.0 {
            return true;
        }
        match threshold_feasible(s, p, r) {
            LpResult::Feasible(_) => true,
            LpResult::Infeasible(_) => false,
            LpResult::NumericalFailure(msg) => {
                log::debug!("threshold LP inconclusive at s = {s}, p = {p}, r = {r}: {msg}");
                false
            }
        }
    }))
}

/// The optimal second-order polynomial of degree `s`, with its radius
/// `r = √(s(s−1))`.
pub fn optimal_second_order_poly(s: usize) -> Result<(BivariatePoly<f64>, f64)> {
    if s < 2 {
        return Err(Error::DomainError(format!("need s >= 2, got {s}")));
    }
    let sf = s as f64;
    let r = (sf * (sf - 1.0)).sqrt();
    let w = 2.0 * (sf + r);
    let mut gamma = BTreeMap::new();
    gamma.insert((s, 0), (w - 1.0) / w);
    gamma.insert((s, s), 1.0 / w);
    Ok((ShiftedExpansion { r, gamma }.to_poly(), r))
}
