use thiserror::Error;

use crate::tableau::StructuralClass;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("entry ({row}, {col}) = {value} violates {class} structure")]
    StructureViolation { row: usize, col: usize, value: String, class: StructuralClass },

    #[error("resolvent is singular at r = {0}")]
    SingularResolvent(f64),

    #[error("canonical form has r = 0; Butcher coefficients are undefined")]
    ZeroRadius,

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("iteration cap of {0} reached")]
    IterationCap(usize),

    #[error("{0} methods are not supported by this operation")]
    UnsupportedClass(StructuralClass),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("LP solver failed: {0}")]
    NumericalFailure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("coefficient `{0}` is irrational and cannot be represented exactly")]
    Irrational(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
