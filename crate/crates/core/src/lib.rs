//! Strong-stability-preserving analysis of Runge–Kutta methods with
//! downwind perturbations.
//!
//! The crate computes radii of absolute monotonicity, canonical Shu–Osher
//! forms, optimal downwind perturbations (by LP bisection and by iterated
//! splitting), bivariate stability functions and their threshold factors,
//! and runs a monotonicity demonstration on linear advection.
//!
//! Most routines are generic over [`Scalar`], so the same code runs in exact
//! rational arithmetic ([`Rational`]) or in floating point.
//!
//! ```
//! use sspert::{catalog, shu_osher};
//!
//! let rk = catalog::get("ssp33").unwrap().method;
//! let r = shu_osher::radius_am(&rk);
//! assert!((r - 1.0).abs() < 1e-9);
//! ```

pub mod catalog;
pub mod coef;
pub mod error;
pub mod integrator;
pub mod linear;
pub mod lp;
pub mod matrix;
pub mod method_file;
pub mod optimize;
pub mod poly;
pub mod scalar;
pub mod shu_osher;
pub mod tableau;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use method_file::{Arithmetic, MethodDoc, NumericPolicy};
pub use scalar::Scalar;
pub use tableau::{has_property_c, Perturbation, RKMethod, StructuralClass};

/// Exact arbitrary-precision rational.
pub type Rational = num_rational::BigRational;

pub type MethodF64 = RKMethod<f64>;
pub type MethodQ = RKMethod<Rational>;
pub type PerturbationF64 = Perturbation<f64>;
pub type PerturbationQ = Perturbation<Rational>;
pub type MatrixF64 = Matrix<f64>;
pub type MatrixQ = Matrix<Rational>;
