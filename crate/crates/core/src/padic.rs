//! The base field F (rationals with the q-adic valuation) and its unramified quadratic
//! extension E = F(√ε).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PadicError {
    #[error("q = {0} must be an odd prime")]
    BadPrime(i64),
    #[error("epsilon = {eps} is not a non-square unit modulo {q}")]
    BadEpsilon { q: u64, eps: i64 },
    #[error("{0}")]
    Domain(String),
}

/// The residue characteristic `q` and the non-square unit `ε` defining E.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldParams {
    q: u64,
    eps: i64,
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn mod_pow(b: u64, mut e: u64, m: u64) -> u64 {
    let (mut acc, mut b) = (1u128, (b % m) as u128);
    let m = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u64
}

/// Legendre-symbol test that `e` is a nonzero non-square modulo the odd prime `q`.
fn is_nonsquare_unit(e: i64, q: u64) -> bool {
    let r = e.rem_euclid(q as i64) as u64;
    r != 0 && mod_pow(r, (q - 1) / 2, q) == q - 1
}

impl FieldParams {
    /// Validate `q` and `ε`; when `eps` is `None` the default is −1 for q ≡ 3 (mod 4) and
    /// the smallest positive non-residue otherwise.
    pub fn new(q: i64, eps: Option<i64>) -> Result<Self, PadicError> {
        if q < 3 || q % 2 == 0 || !is_prime(q as u64) {
            return Err(PadicError::BadPrime(q));
        }
        let qu = q as u64;
        let eps = match eps {
            Some(e) => e,
            None if qu % 4 == 3 => -1,
            None => (2..).find(|&e| is_nonsquare_unit(e, qu)).expect("a non-residue exists"),
        };
        if !is_nonsquare_unit(eps, qu) {
            return Err(PadicError::BadEpsilon { q: qu, eps });
        }
        Ok(FieldParams { q: qu, eps })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn eps(&self) -> i64 {
        self.eps
    }

    pub fn q_rat(&self) -> Rational {
        Rational::from_integer(BigInt::from(self.q))
    }

    pub fn eps_rat(&self) -> Rational {
        Rational::from_integer(BigInt::from(self.eps))
    }

    /// `q^k` for any integer `k`.
    pub fn qpow(&self, k: i64) -> Rational {
        crate::exactalg::qpow(self.q, k)
    }
}

/// A valuation: an integer or +∞ (ordered with +∞ largest).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// The finite value; panics on +∞.
    pub fn unwrap(self) -> i64 {
        self.finite().expect("valuation of zero")
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

fn int_val(n: &BigInt, q: u64) -> i64 {
    let qb = BigInt::from(q);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (d, r) = n.div_rem(&qb);
        if !r.is_zero() {
            return v;
        }
        n = d;
        v += 1;
    }
}

/// q-adic valuation of a rational.
pub fn valuation(x: &Rational, q: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    Valuation::Finite(int_val(x.numer(), q) - int_val(x.denom(), q))
}

/// Canonical representative of `x` modulo `q^a Z_(q)`: the unique `y ≡ x` of the form
/// `m / q^s` with `0 ≤ m < q^(a+s)` and `s = max(0, −v(x))`.
pub fn reduce_mod_power(x: &Rational, q: u64, a: i64) -> Rational {
    let v = match valuation(x, q) {
        Valuation::Infinite => return Rational::zero(),
        Valuation::Finite(v) => v,
    };
    if v >= a {
        return Rational::zero();
    }
    let s = (-v).max(0);
    let qb = BigInt::from(q);
    let scaled = x * Rational::from_integer(num_traits::pow(qb.clone(), s as usize));
    let modulus = num_traits::pow(qb, (a + s) as usize);
    let n = scaled.numer().mod_floor(&modulus);
    let d = scaled.denom().mod_floor(&modulus);
    let dinv = mod_inverse(&d, &modulus);
    let r = (n * dinv).mod_floor(&modulus);
    Rational::new(r, num_traits::pow(BigInt::from(q), s as usize))
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one(), "non-invertible residue");
    e.x.mod_floor(m)
}

/// Residue class of a q-adic unit `x` modulo q, in `0..q`.
pub fn residue_mod_q(x: &Rational, q: u64) -> u64 {
    let qb = BigInt::from(q);
    let n = x.numer().mod_floor(&qb);
    let d = x.denom().mod_floor(&qb);
    let r = (n * mod_inverse(&d, &qb)).mod_floor(&qb);
    r.to_u64().expect("residue fits")
}

/// An element of F with its cached valuation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BaseScalar {
    value: Rational,
    val: Valuation,
}

impl BaseScalar {
    pub fn new(value: Rational, params: &FieldParams) -> Self {
        let val = valuation(&value, params.q);
        BaseScalar { value, val }
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn valuation(&self) -> Valuation {
        self.val
    }

    /// `|a|_F = q^(−v(a))`.
    pub fn abs_f(&self, params: &FieldParams) -> Rational {
        match self.val {
            Valuation::Infinite => Rational::zero(),
            Valuation::Finite(v) => params.qpow(-v),
        }
    }
}

/// `a + b√ε` in E.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtScalar {
    a: Rational,
    b: Rational,
    params: FieldParams,
}

impl ExtScalar {
    pub fn new(a: Rational, b: Rational, params: FieldParams) -> Self {
        ExtScalar { a, b, params }
    }

    pub fn from_base(a: Rational, params: FieldParams) -> Self {
        ExtScalar { a, b: Rational::zero(), params }
    }

    pub fn from_int(a: i64, params: FieldParams) -> Self {
        Self::from_base(Rational::from_integer(a.into()), params)
    }

    pub fn zero(params: FieldParams) -> Self {
        Self::from_int(0, params)
    }

    pub fn one(params: FieldParams) -> Self {
        Self::from_int(1, params)
    }

    /// `√ε`
    pub fn sqrt_eps(params: FieldParams) -> Self {
        ExtScalar { a: Rational::zero(), b: Rational::one(), params }
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn re(&self) -> &Rational {
        &self.a
    }

    pub fn im(&self) -> &Rational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_base(&self) -> bool {
        self.b.is_zero()
    }

    /// `min(v(a), v(b))`, which is the valuation since E/F is unramified.
    pub fn valuation(&self) -> Valuation {
        valuation(&self.a, self.params.q).min(valuation(&self.b, self.params.q))
    }

    /// Galois conjugate `a − b√ε`.
    pub fn conj(&self) -> Self {
        ExtScalar { a: self.a.clone(), b: -self.b.clone(), params: self.params }
    }

    /// `N(a + b√ε) = a² − ε b²`.
    pub fn norm(&self) -> BaseScalar {
        let n = &self.a * &self.a - self.params.eps_rat() * &self.b * &self.b;
        BaseScalar::new(n, &self.params)
    }

    /// `|x|_E = q^(−2 v(x))`.
    pub fn abs_e(&self) -> Rational {
        match self.valuation() {
            Valuation::Infinite => Rational::zero(),
            Valuation::Finite(v) => self.params.qpow(-2 * v),
        }
    }

    pub fn inv(&self) -> Result<Self, PadicError> {
        if self.is_zero() {
            return Err(PadicError::Domain("inverse of zero".into()));
        }
        let n = self.norm().value().clone();
        Ok(ExtScalar { a: &self.a / &n, b: -(&self.b / &n), params: self.params })
    }

    pub fn checked_div(&self, o: &ExtScalar) -> Result<Self, PadicError> {
        Ok(self * &o.inv()?)
    }

    pub fn is_norm_one(&self) -> Result<bool, PadicError> {
        if self.is_zero() {
            return Err(PadicError::Domain("norm-one test of zero".into()));
        }
        Ok(self.norm().value().is_one())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        ExtScalar { a: &self.a * s, b: &self.b * s, params: self.params }
    }

    /// Reduce both coordinates modulo `ω^k O_E`.
    pub fn reduce_mod(&self, k: i64) -> Self {
        ExtScalar {
            a: reduce_mod_power(&self.a, self.params.q, k),
            b: reduce_mod_power(&self.b, self.params.q, k),
            params: self.params,
        }
    }

    /// Total order used to sort vertices deterministically.
    pub fn cmp_key(&self, o: &Self) -> Ordering {
        self.a.cmp(&o.a).then_with(|| self.b.cmp(&o.b))
    }
}

impl Add for &ExtScalar {
    type Output = ExtScalar;
    fn add(self, o: &ExtScalar) -> ExtScalar {
        ExtScalar { a: &self.a + &o.a, b: &self.b + &o.b, params: self.params }
    }
}

impl Sub for &ExtScalar {
    type Output = ExtScalar;
    fn sub(self, o: &ExtScalar) -> ExtScalar {
        ExtScalar { a: &self.a - &o.a, b: &self.b - &o.b, params: self.params }
    }
}

impl Mul for &ExtScalar {
    type Output = ExtScalar;
    fn mul(self, o: &ExtScalar) -> ExtScalar {
        let e = self.params.eps_rat();
        ExtScalar {
            a: &self.a * &o.a + e * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
            params: self.params,
        }
    }
}

impl Neg for &ExtScalar {
    type Output = ExtScalar;
    fn neg(self) -> ExtScalar {
        ExtScalar { a: -self.a.clone(), b: -self.b.clone(), params: self.params }
    }
}

impl fmt::Display for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}+{}√{}", self.a, self.b, self.params.eps)
        }
    }
}
