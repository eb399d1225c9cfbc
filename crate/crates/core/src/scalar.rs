//! Numeric scalar abstraction.
//!
//! Every analysis in this crate is written once against [`Scalar`] and runs
//! either in exact rational arithmetic ([`Rational`](crate::Rational)) or in
//! floating point. Exact types report a zero tolerance, so every sign test in
//! rational mode is decided without rounding.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// True when ring operations are exact.
    const EXACT: bool;

    /// Magnitude below which a value is treated as zero (`eps_zero`).
    fn eps_zero() -> Self;

    /// Slack for "nonnegative" tests: `x >= -nonneg_slack()`.
    fn nonneg_slack() -> Self;

    fn from_rational(q: &BigRational) -> Self;

    /// Lossless for exact types (every finite `f64` is a dyadic rational).
    fn from_f64_lossy(x: f64) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn nat(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize fits every scalar type")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half(&self) -> Self {
        self.clone() / Self::two()
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::eps_zero()
    }

    fn is_nonneg(&self) -> bool {
        *self >= -Self::nonneg_slack()
    }

    fn powi(&self, n: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn eps_zero() -> Self {
        1e-12
    }

    fn nonneg_slack() -> Self {
        1e-11
    }

    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }

    fn from_f64_lossy(x: f64) -> Self {
        x
    }

    fn powi(&self, n: usize) -> Self {
        f64::powi(*self, n as i32)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn eps_zero() -> Self {
        1e-5
    }

    fn nonneg_slack() -> Self {
        1e-4
    }

    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q) as f32
    }

    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn eps_zero() -> Self {
        Self::zero()
    }

    fn nonneg_slack() -> Self {
        Self::zero()
    }

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn from_f64_lossy(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }

    fn to_f64_lossy(&self) -> f64 {
        rational_to_f64(self)
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn is_nonneg(&self) -> bool {
        !self.is_negative()
    }
}

/// `BigRational::to_f64` overflows to NaN for huge numerators and
/// denominators; shift both down first so only the ratio matters.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(x) = q.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    let (n, d) = (q.numer(), q.denom());
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n: BigInt = n >> shift;
    let d: BigInt = d >> shift;
    let (nf, df) = (n.to_f64().unwrap_or(0.0), d.to_f64().unwrap_or(1.0));
    if df == 0.0 {
        return if n.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    nf / df
}

/// Convert between scalar types. Rationals convert exactly into exact
/// targets; everything else goes through `f64`.
pub fn cast<S: Scalar, T: Scalar>(x: &S) -> T {
    let any: &dyn std::any::Any = x;
    match any.downcast_ref::<BigRational>() {
        Some(q) => T::from_rational(q),
        None => T::from_f64_lossy(x.to_f64_lossy()),
    }
}
