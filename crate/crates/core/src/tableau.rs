//! Runge–Kutta methods and their downwind perturbations.
//!
//! A method with `s` stages is stored as its Butcher coefficients `(A, b)`.
//! Most of the analysis works with the `(s+1)×(s+1)` embedded matrix
//!
//! ```text
//! K = [ A  0 ]
//!     [ bᵀ 0 ]
//! ```
//!
//! and a perturbation `(Ã, b̃)` embeds the same way into `K̃`.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructuralClass {
    /// `A` strictly lower triangular.
    Explicit,
    /// `A` lower triangular.
    DiagonallyImplicit,
    FullyImplicit,
}

impl StructuralClass {
    /// Whether position `(i, j)` of `A` may be nonzero.
    pub fn allows(self, i: usize, j: usize) -> bool {
        match self {
            Self::Explicit => j < i,
            Self::DiagonallyImplicit => j <= i,
            Self::FullyImplicit => true,
        }
    }

    /// Tightest class containing the sparsity pattern of `a`.
    pub fn infer<T: Scalar>(a: &Matrix<T>) -> Self {
        if a.is_strictly_lower() {
            Self::Explicit
        } else if a.is_lower() {
            Self::DiagonallyImplicit
        } else {
            Self::FullyImplicit
        }
    }

    pub fn is_explicit(self) -> bool {
        self == Self::Explicit
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Explicit => "explicit",
            Self::DiagonallyImplicit => "diagonally-implicit",
            Self::FullyImplicit => "fully-implicit",
        }
    }
}

impl fmt::Display for StructuralClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for StructuralClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Self::Explicit),
            "diagonally-implicit" | "dirk" => Ok(Self::DiagonallyImplicit),
            "fully-implicit" | "implicit" => Ok(Self::FullyImplicit),
            other => Err(Error::Parse(format!("unknown structural class `{other}`"))),
        }
    }
}

fn check_structure<T: Scalar>(a: &Matrix<T>, class: StructuralClass) -> Result<()> {
    match a.indexed().find(|&(i, j, x)| !class.allows(i, j) && !x.is_negligible()) {
        Some((row, col, x)) => Err(Error::StructureViolation { row, col, value: x.to_string(), class }),
        None => Ok(()),
    }
}

fn embed_pair<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Matrix<T> {
    let s = b.len();
    Matrix::from_fn(s + 1, s + 1, |i, j| {
        if j == s {
            T::zero()
        } else if i == s {
            b[j].clone()
        } else {
            a[(i, j)].clone()
        }
    })
}

/// Split an embedded `(s+1)×(s+1)` matrix back into `(A, b)`.
fn split_embedded<T: Scalar>(k: &Matrix<T>) -> Result<(Matrix<T>, Vec<T>)> {
    if !k.is_square() || k.rows() < 2 {
        return Err(Error::ShapeMismatch(format!("embedded matrix is {}×{}", k.rows(), k.cols())));
    }
    let s = k.rows() - 1;
    if let Some(i) = (0..=s).find(|&i| !k[(i, s)].is_negligible()) {
        return Err(Error::ShapeMismatch(format!("embedded matrix has nonzero last column at row {i}")));
    }
    let a = Matrix::from_fn(s, s, |i, j| k[(i, j)].clone());
    let b = (0..s).map(|j| k[(s, j)].clone()).collect();
    Ok((a, b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RKMethod<T> {
    name: String,
    class: StructuralClass,
    order: u32,
    a: Matrix<T>,
    b: Vec<T>,
}

impl<T: Scalar> RKMethod<T> {
    /// Build and validate.
    pub fn new(name: impl Into<String>, class: StructuralClass, order: u32, a: Matrix<T>, b: Vec<T>) -> Result<Self> {
        let m = Self { name: name.into(), class, order, a, b };
        m.validate()?;
        Ok(m)
    }

    /// Rebuild a method from its embedded matrix `K`.
    pub fn from_embedded(name: impl Into<String>, class: StructuralClass, order: u32, k: &Matrix<T>) -> Result<Self> {
        let (a, b) = split_embedded(k)?;
        Self::new(name, class, order, a, b)
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.b.len();
        if s == 0 {
            return Err(Error::ShapeMismatch("method has no stages".into()));
        }
        if self.a.rows() != s || self.a.cols() != s {
            return Err(Error::ShapeMismatch(format!(
                "A is {}×{} but b has {} entries",
                self.a.rows(),
                self.a.cols(),
                s
            )));
        }
        if self.order == 0 {
            return Err(Error::ShapeMismatch("declared order must be positive".into()));
        }
        check_structure(&self.a, self.class)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn class(&self) -> StructuralClass {
        self.class
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn is_explicit(&self) -> bool {
        self.class.is_explicit()
    }

    /// The `(s+1)×(s+1)` matrix `K = [[A, 0], [bᵀ, 0]]`.
    pub fn embed(&self) -> Matrix<T> {
        embed_pair(&self.a, &self.b)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn cast<U: Scalar>(&self) -> RKMethod<U> {
        RKMethod {
            name: self.name.clone(),
            class: self.class,
            order: self.order,
            a: self.a.cast(),
            b: self.b.iter().map(crate::scalar::cast).collect(),
        }
    }

    pub fn to_f64(&self) -> RKMethod<f64> {
        self.cast()
    }

    pub fn zero_perturbation(&self) -> Perturbation<T> {
        Perturbation::zero(self.stages(), self.class)
    }
}

/// Validate a method (shape and structural-class triangularity).
pub fn validate<T: Scalar>(method: &RKMethod<T>) -> Result<()> {
    method.validate()
}

/// Downwind coefficients `(Ã, b̃)`, with the same structure as the method.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation<T> {
    class: StructuralClass,
    a_tilde: Matrix<T>,
    b_tilde: Vec<T>,
}

impl<T: Scalar> Perturbation<T> {
    pub fn new(class: StructuralClass, a_tilde: Matrix<T>, b_tilde: Vec<T>) -> Result<Self> {
        let s = b_tilde.len();
        if a_tilde.rows() != s || a_tilde.cols() != s {
            return Err(Error::ShapeMismatch(format!(
                "Ã is {}×{} but b̃ has {} entries",
                a_tilde.rows(),
                a_tilde.cols(),
                s
            )));
        }
        check_structure(&a_tilde, class)?;
        Ok(Self { class, a_tilde, b_tilde })
    }

    pub fn zero(stages: usize, class: StructuralClass) -> Self {
        Self { class, a_tilde: Matrix::zeros(stages, stages), b_tilde: vec![T::zero(); stages] }
    }

    /// Rebuild from an embedded `K̃`.
    pub fn from_embedded(class: StructuralClass, k_tilde: &Matrix<T>) -> Result<Self> {
        let (a, b) = split_embedded(k_tilde)?;
        Self::new(class, a, b)
    }

    pub fn class(&self) -> StructuralClass {
        self.class
    }

    pub fn stages(&self) -> usize {
        self.b_tilde.len()
    }

    pub fn a_tilde(&self) -> &Matrix<T> {
        &self.a_tilde
    }

    pub fn b_tilde(&self) -> &[T] {
        &self.b_tilde
    }

    pub fn embed(&self) -> Matrix<T> {
        embed_pair(&self.a_tilde, &self.b_tilde)
    }

    pub fn is_zero(&self) -> bool {
        self.a_tilde.is_zero_matrix() && self.b_tilde.iter().all(Scalar::is_negligible)
    }

    pub fn cast<U: Scalar>(&self) -> Perturbation<U> {
        Perturbation {
            class: self.class,
            a_tilde: self.a_tilde.cast(),
            b_tilde: self.b_tilde.iter().map(crate::scalar::cast).collect(),
        }
    }

    /// Check that this perturbation fits `method` (same stage count, and
    /// no entries outside the method's class).
    pub fn check_compatible(&self, method: &RKMethod<T>) -> Result<()> {
        if self.stages() != method.stages() {
            return Err(Error::ShapeMismatch(format!(
                "perturbation has {} stages, method has {}",
                self.stages(),
                method.stages()
            )));
        }
        check_structure(&self.a_tilde, method.class())
    }
}

/// Property C: in every column `j` of the embedded pair, at most one of
/// `K`, `K̃` has nonzero entries.
pub fn has_property_c<T: Scalar>(method: &RKMethod<T>, pert: &Perturbation<T>) -> bool {
    let k = method.embed();
    let kt = pert.embed();
    let n = k.rows();
    (0..n).all(|j| {
        let tilde_used = (0..n).any(|i| !kt[(i, j)].is_negligible());
        let k_used = (0..n).any(|i| !k[(i, j)].is_negligible());
        !(tilde_used && k_used)
    })
}

/// Sum of a column of `K` for a given row; handy for abscissae.
pub fn abscissae<T: Scalar>(method: &RKMethod<T>) -> Vec<T> {
    (0..method.stages())
        .map(|i| method.a().row(i).iter().fold(T::zero(), |acc, x| acc + x.clone()))
        .collect()
}

impl<T: Scalar> fmt::Display for RKMethod<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} ({}, {} stages, order {})", self.name, self.class, self.stages(), self.order)?;
        let c = abscissae(self);
        for i in 0..self.stages() {
            let row: Vec<String> = self.a.row(i).iter().map(|x| format!("{x}")).collect();
            writeln!(f, "{:>12} | {}", c[i].to_string(), row.join("  "))?;
        }
        let b: Vec<String> = self.b.iter().map(|x| format!("{x}")).collect();
        write!(f, "{:>12} | {}", "", b.join("  "))
    }
}

/// Convenience: zero-padded matrix check used by tests and callers that
/// build perturbations entry by entry.
pub fn is_zero_vec<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(Zero::is_zero)
}
