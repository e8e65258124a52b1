//! Vertices of the Bruhat–Tits trees of PGL(2, F) and PGL(2, E), ball enumeration,
//! sphere measures and intersection numbers.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exactalg::Rational;
use crate::padic::{valuation, ExtScalar, FieldParams, Valuation};

use super::element::GroupElement;
use super::GroupError;

/// Which tree: F-tree ((q+1)-regular) or E-tree ((q²+1)-regular).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    F,
    E,
}

impl FieldKind {
    /// Residue field size κ, so the tree is (κ+1)-regular.
    pub fn kappa(self, q: u64) -> u64 {
        match self {
            FieldKind::F => q,
            FieldKind::E => q * q,
        }
    }
}

/// Enumeration caps for [`tree_ball`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeCaps {
    pub max_radius_f: u32,
    pub max_radius_e: u32,
}

impl Default for TreeCaps {
    fn default() -> Self {
        TreeCaps { max_radius_f: 8, max_radius_e: 5 }
    }
}

impl TreeCaps {
    pub fn max_radius(&self, field: FieldKind) -> u32 {
        match field {
            FieldKind::F => self.max_radius_f,
            FieldKind::E => self.max_radius_e,
        }
    }
}

/// The vertex `(ω^level, offset; 0, 1)·K` with `offset` reduced modulo `ω^level O`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeVertex {
    level: i64,
    offset: ExtScalar,
}

impl TreeVertex {
    /// Build from raw data, reducing the offset.
    pub fn new(level: i64, offset: ExtScalar) -> Self {
        let offset = offset.reduce_mod(level);
        TreeVertex { level, offset }
    }

    pub fn origin(params: FieldParams) -> Self {
        TreeVertex { level: 0, offset: ExtScalar::zero(params) }
    }

    /// Vertex `g·o`.
    pub fn from_element(g: &GroupElement) -> Self {
        let [a, b, c, d] = g.entries().clone();
        // Right column operations by K until the lower-left entry vanishes.
        let (a, b, d) = if c.is_zero() {
            (a, b, d)
        } else if d.valuation() <= c.valuation() {
            let t = c.checked_div(&d).expect("d nonzero");
            (&a - &(&t * &b), b, d)
        } else {
            let t = d.checked_div(&c).expect("c nonzero");
            (&b - &(&t * &a), a, c)
        };
        let dinv = d.inv().expect("nonsingular");
        let top = &a * &dinv;
        let off = &b * &dinv;
        let level = top.valuation().unwrap();
        TreeVertex::new(level, off)
    }

    pub fn to_element(&self) -> GroupElement {
        let p = self.offset.params();
        GroupElement::new(
            ExtScalar::from_base(p.qpow(self.level), p),
            self.offset.clone(),
            ExtScalar::zero(p),
            ExtScalar::one(p),
        )
        .expect("nonsingular")
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn offset(&self) -> &ExtScalar {
        &self.offset
    }

    pub fn params(&self) -> FieldParams {
        self.offset.params()
    }

    /// `d(u, v) = a + c − 2·min(a, c, v(β − δ))` for `u = (ω^a, β)`, `v = (ω^c, δ)`.
    pub fn distance(&self, o: &TreeVertex) -> u32 {
        let m = match (&self.offset - &o.offset).valuation() {
            Valuation::Finite(v) => v.min(self.level).min(o.level),
            Valuation::Infinite => self.level.min(o.level),
        };
        (self.level + o.level - 2 * m) as u32
    }

    pub fn distance_to_origin(&self) -> u32 {
        self.distance(&TreeVertex::origin(self.params()))
    }

    /// Image under `g`.
    pub fn translate(&self, g: &GroupElement) -> TreeVertex {
        if g.c().is_zero() {
            // Upper triangular: (α β; 0 δ)(ω^a b; 0 1) = (αω^a, αb + β; 0, δ).
            let p = self.params();
            let dinv = g.d().inv().expect("nonsingular");
            let alpha = g.a() * &dinv;
            let beta = g.b() * &dinv;
            let scale = ExtScalar::from_base(p.qpow(self.level), p);
            let top = &alpha * &scale;
            let off = &(&alpha * &self.offset) + &beta;
            return TreeVertex::new(top.valuation().unwrap(), off);
        }
        TreeVertex::from_element(&g.mul_ref(&self.to_element()))
    }

    /// True when the vertex lies in the F-tree embedded in the E-tree.
    pub fn is_in_base_tree(&self) -> bool {
        self.offset.im().is_zero()
    }

    /// Nearest vertex of the F-tree and the distance to it.
    pub fn projection_to_base_tree(&self) -> (TreeVertex, u32) {
        if self.is_in_base_tree() {
            return (self.clone(), 0);
        }
        let p = self.params();
        let j = valuation(self.offset.im(), p.q()).unwrap();
        let proj = TreeVertex::new(j, ExtScalar::from_base(self.offset.re().clone(), p));
        (proj, (self.level - j) as u32)
    }

    /// Nearest vertex of the standard apartment `{(ω^k, 0)}` and the distance to it.
    pub fn projection_to_apartment(&self) -> (TreeVertex, u32) {
        let p = self.params();
        match self.offset.valuation() {
            Valuation::Infinite => (self.clone(), 0),
            Valuation::Finite(v) => {
                (TreeVertex::new(v, ExtScalar::zero(p)), (self.level - v) as u32)
            }
        }
    }

    fn sort_key(&self, o: &Self) -> Ordering {
        self.level.cmp(&o.level).then_with(|| self.offset.cmp_key(&o.offset))
    }
}

impl PartialOrd for TreeVertex {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for TreeVertex {
    fn cmp(&self, o: &Self) -> Ordering {
        self.sort_key(o)
    }
}

impl fmt::Display for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[ω^{}, {}]", self.level, self.offset)
    }
}

/// Residue digits: `0..q` for F, `x + y√ε` with `x, y ∈ 0..q` for E.
fn digits(params: FieldParams, field: FieldKind) -> Vec<ExtScalar> {
    let q = params.q() as i64;
    match field {
        FieldKind::F => (0..q).map(|x| ExtScalar::from_int(x, params)).collect(),
        FieldKind::E => (0..q)
            .flat_map(|x| {
                (0..q).map(move |y| {
                    ExtScalar::new(Rational::from_integer(x.into()), Rational::from_integer(y.into()), params)
                })
            })
            .collect(),
    }
}

/// Every vertex at distance at most `r` from the origin, sorted by normal form.
pub fn tree_ball(
    params: FieldParams,
    r: u32,
    field: FieldKind,
    caps: &TreeCaps,
) -> Result<Vec<TreeVertex>, GroupError> {
    if r > caps.max_radius(field) {
        return Err(GroupError::RadiusCap { radius: r, cap: caps.max_radius(field) });
    }
    let ds = digits(params, field);
    let r = r as i64;
    let mut out: Vec<TreeVertex> = (-r..=r)
        .into_par_iter()
        .flat_map_iter(|a| {
            // offsets in ω^m0 O / ω^a O with m0 = ceil((a − r)/2), clipped at a
            let m0 = (a - r).div_euclid(2) + (a - r).rem_euclid(2);
            let mut offs = vec![ExtScalar::zero(params)];
            for i in m0..a.max(m0) {
                let w = params.qpow(i);
                offs = offs
                    .iter()
                    .flat_map(|o| ds.iter().map(|d| o + &d.scale(&w)).collect::<Vec<_>>())
                    .collect();
            }
            offs.into_iter().map(move |o| TreeVertex::new(a, o)).collect::<Vec<_>>()
        })
        .filter(|v| v.distance_to_origin() as i64 <= r)
        .collect();
    out.sort();
    Ok(out)
}

/// Vertices at distance exactly `r`.
pub fn tree_sphere(
    params: FieldParams,
    r: u32,
    field: FieldKind,
    caps: &TreeCaps,
) -> Result<Vec<TreeVertex>, GroupError> {
    Ok(tree_ball(params, r, field, caps)?
        .into_iter()
        .filter(|v| v.distance_to_origin() == r)
        .collect())
}

/// Number of vertices (= Haar measure of the Cartan cell) at distance `r`:
/// 1 for r = 0, `(κ+1)κ^(r−1)` otherwise.
pub fn sphere_measure(params: FieldParams, r: u32, field: FieldKind) -> Rational {
    let k = field.kappa(params.q());
    if r == 0 {
        return Rational::one();
    }
    Rational::from_integer(BigInt::from(k + 1) * num_traits::pow(BigInt::from(k), r as usize - 1))
}

/// `#{a : d(o, a) = i, d(a, c) = t}` for a fixed `c` with `d(o, c) = r` in a
/// (κ+1)-regular tree.
pub fn intersection_number(kappa: u64, r: u32, i: u32, t: u32) -> BigInt {
    let (r, i, t) = (r as i64, i as i64, t as i64);
    let two_p = r + i - t;
    let two_m = i + t - r;
    if two_p < 0 || two_m < 0 || two_p % 2 != 0 || two_p / 2 > r {
        return BigInt::zero();
    }
    let p = two_p / 2;
    let m = two_m / 2;
    if m == 0 {
        return BigInt::one();
    }
    let k = BigInt::from(kappa);
    let first = if r == 0 {
        &k + 1
    } else if p == 0 || p == r {
        k.clone()
    } else {
        &k - 1
    };
    first * num_traits::pow(k, (m - 1) as usize)
}
