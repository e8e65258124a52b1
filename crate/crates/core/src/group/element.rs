//! PGL(2) elements over F or E in canonical scaling.

use std::fmt;
use std::ops::Mul;

use num_traits::One;

use crate::exactalg::Rational;
use crate::padic::{ExtScalar, FieldParams, Valuation};

use super::GroupError;

/// A 2×2 matrix `(a b; c d)` modulo scalars.
///
/// Canonical scaling: the matrix is divided by its first entry (in the order a, b, c, d)
/// of minimal valuation, so that entry equals 1 and all entries are integral.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    m: [ExtScalar; 4],
}

fn min_val(xs: &[&ExtScalar]) -> Valuation {
    xs.iter().map(|x| x.valuation()).min().unwrap_or(Valuation::Infinite)
}

impl GroupElement {
    pub fn new(
        a: ExtScalar,
        b: ExtScalar,
        c: ExtScalar,
        d: ExtScalar,
    ) -> Result<Self, GroupError> {
        let det = &(&a * &d) - &(&b * &c);
        if det.is_zero() {
            return Err(GroupError::Singular);
        }
        Ok(Self::canonical([a, b, c, d]))
    }

    /// Matrix with entries in F.
    pub fn from_base(
        params: FieldParams,
        a: Rational,
        b: Rational,
        c: Rational,
        d: Rational,
    ) -> Result<Self, GroupError> {
        Self::new(
            ExtScalar::from_base(a, params),
            ExtScalar::from_base(b, params),
            ExtScalar::from_base(c, params),
            ExtScalar::from_base(d, params),
        )
    }

    /// Integer matrix, convenient in tests and examples.
    pub fn from_ints(params: FieldParams, a: i64, b: i64, c: i64, d: i64) -> Result<Self, GroupError> {
        Self::from_base(
            params,
            Rational::from_integer(a.into()),
            Rational::from_integer(b.into()),
            Rational::from_integer(c.into()),
            Rational::from_integer(d.into()),
        )
    }

    pub fn diag(x: ExtScalar, y: ExtScalar) -> Result<Self, GroupError> {
        let p = x.params();
        Self::new(x, ExtScalar::zero(p), ExtScalar::zero(p), y)
    }

    /// `diag(ω^k, 1)` with ω = q.
    pub fn diag_power(params: FieldParams, k: i64) -> Self {
        Self::diag(ExtScalar::from_base(params.qpow(k), params), ExtScalar::one(params))
            .expect("nonsingular")
    }

    pub fn identity(params: FieldParams) -> Self {
        Self::diag_power(params, 0)
    }

    fn canonical(mut m: [ExtScalar; 4]) -> Self {
        let v = min_val(&[&m[0], &m[1], &m[2], &m[3]]);
        let pivot = m
            .iter()
            .find(|x| x.valuation() == v)
            .cloned()
            .expect("nonzero matrix");
        if !(pivot.is_base() && pivot.re().is_one()) {
            let inv = pivot.inv().expect("pivot is nonzero");
            for x in m.iter_mut() {
                *x = &*x * &inv;
            }
        }
        GroupElement { m }
    }

    pub fn params(&self) -> FieldParams {
        self.m[0].params()
    }

    pub fn entries(&self) -> &[ExtScalar; 4] {
        &self.m
    }

    pub fn a(&self) -> &ExtScalar {
        &self.m[0]
    }
    pub fn b(&self) -> &ExtScalar {
        &self.m[1]
    }
    pub fn c(&self) -> &ExtScalar {
        &self.m[2]
    }
    pub fn d(&self) -> &ExtScalar {
        &self.m[3]
    }

    /// Determinant of the canonical representative.
    pub fn det(&self) -> ExtScalar {
        &(&self.m[0] * &self.m[3]) - &(&self.m[1] * &self.m[2])
    }

    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = &self.m;
        Self::canonical([d.clone(), -b, -c, a.clone()])
    }

    /// Entrywise Galois conjugation σ.
    pub fn sigma(&self) -> Self {
        let [a, b, c, d] = &self.m;
        Self::canonical([a.conj(), b.conj(), c.conj(), d.conj()])
    }

    /// True when every entry lies in F (the element lies in H).
    pub fn is_base(&self) -> bool {
        self.m.iter().all(|x| x.is_base())
    }

    fn det_val(&self) -> i64 {
        self.det().valuation().unwrap()
    }

    /// Tree distance between the base vertex and its image: `v(det g) − 2·min v(g_ij)`.
    pub fn cartan_height(&self) -> u32 {
        // canonical scaling makes the minimal entry valuation 0
        self.det_val() as u32
    }

    /// The G-height `h_M = 2·(tree distance)` used for elements over E.
    pub fn levi_height_e(&self) -> u32 {
        2 * self.cartan_height()
    }

    /// Matrix product on canonical representatives.
    pub fn mul_ref(&self, o: &GroupElement) -> GroupElement {
        let [a, b, c, d] = &self.m;
        let [e, f, g, h] = &o.m;
        Self::canonical([
            &(a * e) + &(b * g),
            &(a * f) + &(b * h),
            &(c * e) + &(d * g),
            &(c * f) + &(d * h),
        ])
    }

    /// Row-wise minimal valuations `(min v(x11), v(x12)) , min(v(x21), v(x22)))`.
    pub(crate) fn row_min_vals(&self) -> (i64, i64) {
        (
            min_val(&[&self.m[0], &self.m[1]]).unwrap(),
            min_val(&[&self.m[2], &self.m[3]]).unwrap(),
        )
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;
    fn mul(self, o: &GroupElement) -> GroupElement {
        self.mul_ref(o)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {}; {} {})", self.m[0], self.m[1], self.m[2], self.m[3])
    }
}

/// `max_ij (v(det g) − 2 v(g_ij))`, the Cartan cell of `g`.
pub fn cartan_height(g: &GroupElement) -> u32 {
    g.cartan_height()
}

/// Iwasawa heights `(h_P, h_P̄)` of an element of H.
///
/// `h_P = v(det x) − 2 min(v(x21), v(x22))`, `h_P̄ = 2 min(v(x11), v(x12)) − v(det x)`;
/// both equal the height of `m` for diagonal `m = diag(ω^h, 1)`.
pub fn iwasawa_heights(x: &GroupElement) -> Result<(i64, i64), GroupError> {
    if !x.is_base() {
        return Err(GroupError::NotBaseField);
    }
    let dv = x.det_val();
    let (r1, r2) = x.row_min_vals();
    Ok((dv - 2 * r2, 2 * r1 - dv))
}

/// `u(x, n)`: 1 when the Cartan height of `x` is at most `n`.
pub fn truncation_u(x: &GroupElement, n: u32) -> u8 {
    u8::from(x.cartan_height() <= n)
}

/// Threshold and offset with `height(diag(ω^r,1)·h) = r + x_h` for every `r ≥ n0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftConstant {
    pub n0: i64,
    pub x_h: i64,
}

/// `X_h = max_j (v(det h) − 2 v(h_2j))`, `Y_h = max_j (v(det h) − 2 v(h_1j))`,
/// `N0 = max(0, (Y_h − X_h)/2)`.
pub fn shift_constant(h: &GroupElement) -> ShiftConstant {
    let dv = h.det_val();
    let (r1, r2) = h.row_min_vals();
    let x_h = dv - 2 * r2;
    let y_h = dv - 2 * r1;
    ShiftConstant { n0: ((y_h - x_h) / 2).max(0), x_h }
}
