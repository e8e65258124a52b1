//! Rational functions in one variable, kept in reduced form `z^k · N / D`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::laurent::LaurentPoly;
use super::poly::Poly;
use super::roots::{numeric_roots, rational_factorization};
use super::{AlgebraError, Rational};

/// Largest pole order accepted by [`RatFunc::residue`] away from the origin.
pub const MAX_POLE_ORDER: usize = 4;

/// Reduced rational function `z^shift · num / den`.
///
/// Invariants: `num(0) ≠ 0` and `den(0) ≠ 0`, `den` is monic, `gcd(num, den) = 1`;
/// the zero function has `shift = 0` and `den = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    shift: i64,
    num: Poly,
    den: Poly,
}

/// A pole with its order; `location` is exact when rational.
#[derive(Clone, Debug, PartialEq)]
pub enum Pole {
    Rational { location: Rational, order: usize },
    Numeric { location: Complex64 },
}

impl Pole {
    pub fn modulus(&self) -> f64 {
        match self {
            Pole::Rational { location, .. } => {
                num_traits::ToPrimitive::to_f64(location).unwrap_or(f64::NAN).abs()
            }
            Pole::Numeric { location } => location.norm(),
        }
    }
}

fn series_div(a: &[Rational], b: &[Rational], m: usize) -> Vec<Rational> {
    // Power-series quotient a / b truncated to m terms; b[0] ≠ 0.
    let inv = b[0].recip();
    let mut out: Vec<Rational> = Vec::with_capacity(m);
    for k in 0..m {
        let mut s = a.get(k).cloned().unwrap_or_else(Rational::zero);
        for j in 1..=k {
            if let Some(bj) = b.get(j) {
                s -= bj * &out[k - j];
            }
        }
        out.push(s * &inv);
    }
    out
}

fn truncated_mul(a: &[Rational], b: &[Rational], m: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); m];
    for (i, x) in a.iter().enumerate().take(m) {
        for (j, y) in b.iter().enumerate() {
            if i + j >= m {
                break;
            }
            out[i + j] += x * y;
        }
    }
    out
}

impl RatFunc {
    fn from_parts(shift: i64, num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFunc::zero();
        }
        let zn = num.trailing_zeros();
        let zd = den.trailing_zeros();
        let mut num = num.shr(zn);
        let mut den = den.shr(zd);
        let shift = shift + zn as i64 - zd as i64;
        if den.degree().unwrap_or(0) > 0 && num.degree().unwrap_or(0) > 0 {
            let g = Poly::gcd(&num, &den);
            if !g.is_one() {
                num = num.div_exact(&g);
                den = den.div_exact(&g);
            }
        }
        let (lead, den) = den.monic();
        let num = num.scale(&lead.recip());
        RatFunc { shift, num, den }
    }

    /// `num / den`; errors on a zero denominator.
    pub fn new(num: Poly, den: Poly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::MalformedInput("zero denominator".into()));
        }
        Ok(Self::from_parts(0, num, den))
    }

    pub fn zero() -> Self {
        RatFunc { shift: 0, num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_parts(0, Poly::constant(c), Poly::one())
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(Rational::from_integer(c.into()))
    }

    /// The variable `z`.
    pub fn z() -> Self {
        Self::monomial(1, Rational::one())
    }

    /// `c · z^k` for any integer `k`.
    pub fn monomial(k: i64, c: Rational) -> Self {
        Self::from_parts(k, Poly::constant(c), Poly::one())
    }

    pub fn from_poly(p: &Poly) -> Self {
        Self::from_parts(0, p.clone(), Poly::one())
    }

    pub fn from_laurent(l: &LaurentPoly) -> Self {
        let (s, p) = l.to_shifted_poly();
        Self::from_parts(s, p, Poly::one())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Numerator with nonnegative exponents (absorbs a positive monomial factor).
    pub fn numerator(&self) -> Poly {
        self.num.shl(self.shift.max(0) as usize)
    }

    /// Monic denominator with nonnegative exponents.
    pub fn denominator(&self) -> Poly {
        self.den.shl((-self.shift).max(0) as usize)
    }

    /// The exponent `k` of the monomial factor `z^k`.
    pub fn monomial_shift(&self) -> i64 {
        self.shift
    }

    /// `Some` when the function is a Laurent polynomial.
    pub fn to_laurent(&self) -> Option<LaurentPoly> {
        if !self.den.is_one() {
            return None;
        }
        Some(LaurentPoly::from_terms(
            self.num
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| (i as i64 + self.shift, c.clone())),
        ))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return RatFunc::zero();
        }
        RatFunc { shift: self.shift, num: self.num.scale(s), den: self.den.clone() }
    }

    /// Multiply by `z^k`.
    pub fn shift_by(&self, k: i64) -> Self {
        if self.is_zero() {
            return RatFunc::zero();
        }
        RatFunc { shift: self.shift + k, num: self.num.clone(), den: self.den.clone() }
    }

    pub fn checked_div(&self, o: &RatFunc) -> Result<Self, AlgebraError> {
        if o.is_zero() {
            return Err(AlgebraError::MalformedInput("division by the zero function".into()));
        }
        Ok(Self::from_parts(self.shift - o.shift, &self.num * &o.den, &self.den * &o.num))
    }

    pub fn recip(&self) -> Result<Self, AlgebraError> {
        RatFunc::one().checked_div(self)
    }

    pub fn pow(&self, e: i32) -> Result<Self, AlgebraError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = RatFunc::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Value at a rational point, `None` at a pole.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if x.is_zero() {
            return match self.shift {
                s if s > 0 => Some(Rational::zero()),
                0 => Some(self.num.coeff(0) / self.den.coeff(0)),
                _ => None,
            };
        }
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x) / d * x.pow(self.shift as i32))
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.num.eval_complex(z) / self.den.eval_complex(z) * z.powi(self.shift as i32)
    }

    pub fn derivative(&self) -> Self {
        if self.is_zero() {
            return RatFunc::zero();
        }
        // (z^k N / D)' = z^(k-1) (k N D + z N' D - z N D') / D^2
        let k = Rational::from_integer(self.shift.into());
        let t1 = (&self.num * &self.den).scale(&k);
        let t2 = (&self.num.derivative() * &self.den).shl(1);
        let t3 = (&self.num * &self.den.derivative()).shl(1);
        let top = &(&t1 + &t2) - &t3;
        Self::from_parts(self.shift - 1, top, &self.den * &self.den)
    }

    /// Substitution `z ↦ 1/z`; on the unit circle this is complex conjugation for real coefficients.
    pub fn tilde(&self) -> Self {
        if self.is_zero() {
            return RatFunc::zero();
        }
        let dn = self.num.degree().unwrap_or(0) as i64;
        let dd = self.den.degree().unwrap_or(0) as i64;
        Self::from_parts(-self.shift - dn + dd, self.num.reversed(), self.den.reversed())
    }

    /// Order of zero (positive) or pole (negative) at `a`.
    pub fn order_at(&self, a: &Rational) -> i64 {
        if self.is_zero() {
            return i64::MAX;
        }
        if a.is_zero() {
            return self.shift;
        }
        let lin = Poly::linear(a);
        let mult = |p: &Poly| {
            let mut p = p.clone();
            let mut m = 0i64;
            while p.degree().unwrap_or(0) > 0 && p.eval(a).is_zero() {
                p = p.div_exact(&lin);
                m += 1;
            }
            m
        };
        mult(&self.num) - mult(&self.den)
    }

    pub fn pole_order(&self, a: &Rational) -> usize {
        (-self.order_at(a)).max(0) as usize
    }

    /// Residue at `a`; zero at regular points. Poles away from 0 are limited to order
    /// [`MAX_POLE_ORDER`].
    pub fn residue(&self, a: &Rational) -> Result<Rational, AlgebraError> {
        let m = self.pole_order(a);
        if m > MAX_POLE_ORDER {
            return Err(AlgebraError::UnsupportedPoleOrder { order: m, max: MAX_POLE_ORDER });
        }
        Ok(self.residue_unbounded(a))
    }

    /// Residue at `a` without the order cap.
    pub fn residue_unbounded(&self, a: &Rational) -> Rational {
        let m = self.pole_order(a);
        if m == 0 {
            return Rational::zero();
        }
        if a.is_zero() {
            // coefficient of z^(m-1) in N/D
            let s = series_div(self.num.coeffs(), self.den.coeffs(), m);
            return s[m - 1].clone();
        }
        let lin = Poly::linear(a);
        let mut d1 = self.den.clone();
        for _ in 0..m {
            d1 = d1.div_exact(&lin);
        }
        let mut top = self.num.taylor_shift(a).coeffs().to_vec();
        let mut bot = d1.taylor_shift(a).coeffs().to_vec();
        let zk = Poly::linear(&-a.clone()).pow(self.shift.unsigned_abs() as u32);
        if self.shift >= 0 {
            top = truncated_mul(&top, zk.coeffs(), m);
        } else {
            bot = truncated_mul(&bot, zk.coeffs(), m);
        }
        series_div(&top, &bot, m)[m - 1].clone()
    }

    /// All poles. Rational poles are exact; any irreducible remainder of the denominator
    /// is reported through numeric roots.
    pub fn poles(&self) -> Vec<Pole> {
        let mut out = Vec::new();
        if self.shift < 0 {
            out.push(Pole::Rational { location: Rational::zero(), order: (-self.shift) as usize });
        }
        if self.den.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = rational_factorization(&self.den);
        for (r, k) in f.roots {
            out.push(Pole::Rational { location: r, order: k });
        }
        for z in numeric_roots(&f.rest) {
            out.push(Pole::Numeric { location: z });
        }
        out
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, o: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let m = self.shift.min(o.shift);
        let a = self.num.shl((self.shift - m) as usize);
        let b = o.num.shl((o.shift - m) as usize);
        if self.den == o.den {
            return RatFunc::from_parts(m, &a + &b, self.den.clone());
        }
        let g = Poly::gcd(&self.den, &o.den);
        let d1 = self.den.div_exact(&g);
        let d2 = o.den.div_exact(&g);
        let num = &(&a * &d2) + &(&b * &d1);
        RatFunc::from_parts(m, num, &(&d1 * &d2) * &g)
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, o: &RatFunc) -> RatFunc {
        self + &(-o)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero();
        }
        // Cross-cancel before multiplying to keep the gcd step small.
        let g1 = Poly::gcd(&self.num, &o.den);
        let g2 = Poly::gcd(&o.num, &self.den);
        let n1 = self.num.div_exact(&g1);
        let d2 = o.den.div_exact(&g1);
        let n2 = o.num.div_exact(&g2);
        let d1 = self.den.div_exact(&g2);
        let (l, den) = (&d1 * &d2).monic();
        RatFunc { shift: self.shift + o.shift, num: (&n1 * &n2).scale(&l.recip()), den }
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { shift: self.shift, num: -&self.num, den: self.den.clone() }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for RatFunc {
            type Output = RatFunc;
            fn $m(self, o: RatFunc) -> RatFunc { (&self).$m(&o) }
        }
        impl $tr<&RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, o: &RatFunc) -> RatFunc { (&self).$m(o) }
        }
        impl $tr<RatFunc> for &RatFunc {
            type Output = RatFunc;
            fn $m(self, o: RatFunc) -> RatFunc { self.$m(&o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl From<Rational> for RatFunc {
    fn from(c: Rational) -> Self {
        RatFunc::constant(c)
    }
}

impl From<&LaurentPoly> for RatFunc {
    fn from(l: &LaurentPoly) -> Self {
        RatFunc::from_laurent(l)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z^{} ({}) / ({})", self.shift, self.num, self.den)
    }
}
