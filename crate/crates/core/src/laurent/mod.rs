//! Exact Laurent polynomials over the Gaussian rationals and matrices of them.

mod matrix;
mod poly;

pub use matrix::PolyMatrix;
pub use poly::{grlex_cmp, DegreeBox, Division, Exponent, LaurentPoly};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("zero polynomial where a nonzero one is required")]
    ZeroInput,
    #[error("constant polynomial where a nonconstant one is required")]
    ConstantInput,
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("negative exponents where a polynomial is required")]
    NotPolynomial,
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("incompatible shapes ({rows} rows, {cols} columns)")]
    Shape { rows: usize, cols: usize },
    #[error("evaluation at a point with a zero coordinate")]
    EvaluationAtZero,
}
