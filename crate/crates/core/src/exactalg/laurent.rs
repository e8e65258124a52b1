//! Laurent polynomials with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use super::poly::Poly;
use super::Rational;

/// Finite sum `Σ c_k z^k` over integer exponents; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Rational>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, Rational::from_integer(1.into()))
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(k: i64, c: Rational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
        LaurentPoly { coeffs }
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, Rational)>>(terms: I) -> Self {
        let mut out = LaurentPoly::zero();
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    /// `Σ_{k=lo}^{hi} z^k` (empty when `lo > hi`).
    pub fn geometric(lo: i64, hi: i64) -> Self {
        Self::from_terms((lo..=hi).map(|k| (k, Rational::from_integer(1.into()))))
    }

    pub fn add_term(&mut self, k: i64, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(k).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn coeff(&self, k: i64) -> Rational {
        self.coeffs.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::from_terms(self.terms().map(|(k, c)| (k, c * s)))
    }

    /// Substitute `z ↦ 1/z`.
    pub fn tilde(&self) -> Self {
        Self::from_terms(self.terms().map(|(k, c)| (-k, c.clone())))
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self::from_terms(self.terms().map(|(e, c)| (e + k, c.clone())))
    }

    pub fn eval(&self, z: &Rational) -> Option<Rational> {
        if z.is_zero() && self.min_exp().is_some_and(|m| m < 0) {
            return None;
        }
        let mut acc = Rational::zero();
        for (k, c) in self.terms() {
            acc += c * z.pow(k as i32);
        }
        Some(acc)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.terms()
            .map(|(k, c)| z.powi(k as i32) * c.to_f64().unwrap_or(f64::NAN))
            .sum()
    }

    /// Split as `z^shift · poly` with `poly(0) ≠ 0`; the zero polynomial maps to `(0, 0)`.
    pub fn to_shifted_poly(&self) -> (i64, Poly) {
        let lo = match self.min_exp() {
            Some(lo) => lo,
            None => return (0, Poly::zero()),
        };
        let hi = self.max_exp().expect("nonempty");
        let mut v = vec![Rational::zero(); (hi - lo + 1) as usize];
        for (k, c) in self.terms() {
            v[(k - lo) as usize] = c.clone();
        }
        (lo, Poly::from_coeffs(v))
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, o: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (k, c) in o.terms() {
            out.add_term(k, c.clone());
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, o: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (k, c) in o.terms() {
            out.add_term(k, -c.clone());
        }
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, o: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (a, x) in self.terms() {
            for (b, y) in o.terms() {
                out.add_term(a + b, x * y);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(&Rational::from_integer((-1).into()))
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                _ => format!("({c})z^{k}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
