//! Circle integrals: exact residue sums as multiples of 2πi, and a trapezoid oracle.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::laurent::LaurentPoly;
use super::ratfunc::{Pole, RatFunc, MAX_POLE_ORDER};
use super::{AlgebraError, Rational};

/// The exact quantity `value · 2πi`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoPiIMultiple(pub Rational);

impl TwoPiIMultiple {
    pub fn zero() -> Self {
        TwoPiIMultiple(Rational::zero())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(0.0, 2.0 * std::f64::consts::PI * self.0.to_f64().unwrap_or(f64::NAN))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        TwoPiIMultiple(&self.0 * s)
    }
}

impl Add for TwoPiIMultiple {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        TwoPiIMultiple(self.0 + o.0)
    }
}

impl Sub for TwoPiIMultiple {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        TwoPiIMultiple(self.0 - o.0)
    }
}

impl Neg for TwoPiIMultiple {
    type Output = Self;
    fn neg(self) -> Self {
        TwoPiIMultiple(-self.0)
    }
}

impl Mul<&Rational> for TwoPiIMultiple {
    type Output = Self;
    fn mul(self, s: &Rational) -> Self {
        TwoPiIMultiple(self.0 * s)
    }
}

impl fmt::Display for TwoPiIMultiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2πi·{}", self.0)
    }
}

/// Sum of residues of `f` over poles of modulus < 1, as a multiple of 2πi.
///
/// The only pole allowed on the unit circle is `z = 1`, which is excluded here.
/// Poles away from the origin must be rational and of order at most [`MAX_POLE_ORDER`].
pub fn contour_minus(f: &RatFunc) -> Result<TwoPiIMultiple, AlgebraError> {
    let mut total = Rational::zero();
    for pole in f.poles() {
        match pole {
            Pole::Numeric { location } => {
                return Err(AlgebraError::Factorization(format!(
                    "irrational pole near {location}"
                )))
            }
            Pole::Rational { location, order } => {
                let m = location.abs();
                if m.is_one() {
                    if location.is_one() {
                        continue;
                    }
                    return Err(AlgebraError::PoleOnContour(location.to_string()));
                }
                if m < Rational::one() {
                    if !location.is_zero() && order > MAX_POLE_ORDER {
                        return Err(AlgebraError::UnsupportedPoleOrder {
                            order,
                            max: MAX_POLE_ORDER,
                        });
                    }
                    total += f.residue_unbounded(&location);
                }
            }
        }
    }
    Ok(TwoPiIMultiple(total))
}

/// `contour_minus(f) + 2πi·Res(f, 1)`: the integral over a circle of radius slightly above 1.
pub fn contour_plus(f: &RatFunc) -> Result<TwoPiIMultiple, AlgebraError> {
    let inner = contour_minus(f)?;
    Ok(inner + TwoPiIMultiple(f.residue(&Rational::one())?))
}

/// Coefficient of `z^0`, i.e. `(1/2πi)∮ f dz/z` over the unit circle.
pub fn laurent_constant_coeff(f: &LaurentPoly) -> Rational {
    f.coeff(0)
}

/// Trapezoid rule for `∮_{|z|=r} f(z) dz` with `n` nodes.
pub fn numeric_quadrature(f: &RatFunc, r: f64, n: usize) -> Result<Complex64, AlgebraError> {
    numeric_quadrature_centered(f, Complex64::new(0.0, 0.0), r, n)
}

/// Trapezoid rule for `∮_{|z-center|=r} f(z) dz` with `n` nodes.
pub fn numeric_quadrature_centered(
    f: &RatFunc,
    center: Complex64,
    r: f64,
    n: usize,
) -> Result<Complex64, AlgebraError> {
    if n == 0 || r <= 0.0 {
        return Err(AlgebraError::MalformedInput("quadrature needs r > 0 and n > 0".into()));
    }
    for pole in f.poles() {
        let z = match pole {
            Pole::Rational { location, .. } => {
                Complex64::new(location.to_f64().unwrap_or(f64::NAN), 0.0)
            }
            Pole::Numeric { location } => location,
        };
        if ((z - center).norm() - r).abs() < r * 1e-6 {
            return Err(AlgebraError::Conditioning(format!(
                "pole {z} within r·1e-6 of the contour"
            )));
        }
    }
    Ok(trapezoid(|z| f.eval_complex(z), center, r, n))
}

/// Trapezoid rule for an arbitrary closure on a circle.
pub fn trapezoid<F: Fn(Complex64) -> Complex64>(
    f: F,
    center: Complex64,
    r: f64,
    n: usize,
) -> Complex64 {
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let e = Complex64::from_polar(1.0, h * k as f64);
        acc += f(center + e * r) * (Complex64::i() * e * r);
    }
    acc * h
}
