//! Exact algebra in one variable: rationals, Laurent polynomials, rational functions,
//! residues and circle integrals, plus a floating-point quadrature oracle.

mod contour;
mod laurent;
mod poly;
mod ratfunc;
mod roots;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

pub use contour::{
    contour_minus, contour_plus, laurent_constant_coeff, numeric_quadrature,
    numeric_quadrature_centered, trapezoid, TwoPiIMultiple,
};
pub use laurent::LaurentPoly;
pub use poly::Poly;
pub use ratfunc::{Pole, RatFunc, MAX_POLE_ORDER};
pub use roots::{numeric_roots, rational_factorization, RationalFactorization};

/// Exact rational number (always reduced, positive denominator).
pub type Rational = BigRational;

/// `n / d` as an exact rational. Panics when `d = 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `q^k` for any integer `k`.
pub fn qpow(q: u64, k: i64) -> Rational {
    let base = Rational::from_integer(BigInt::from(q));
    base.pow(k as i32)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("pole of order {order} exceeds the supported maximum {max}")]
    UnsupportedPoleOrder { order: usize, max: usize },
    #[error("denominator does not split over the rationals: {0}")]
    Factorization(String),
    #[error("pole on the unit circle away from z = 1: {0}")]
    PoleOnContour(String),
    #[error("ill-conditioned quadrature: {0}")]
    Conditioning(String),
}

#[cfg(test)]
mod tests;
