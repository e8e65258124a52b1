//! Geometric side: σ-discriminant, orbital and weighted orbital integrals as finite tree
//! sums, the weight `v⁰_M` and its limit identity, and the geometric asymptote of `K^n`.
//!
//! A pair `(h, l) ∈ H×H` acts through the F-tree vertices `x = h·o`, `y = l·o`, and
//! `f(h⁻¹γl)` only depends on the E-tree distance `d(x, γ·y)`.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::LinearAsymptote;
use crate::exactalg::Rational;
use crate::group::{
    iwasawa_heights, tree_ball, FieldKind, GroupElement, GroupError, HeckeFunction, TreeCaps,
    TreeVertex,
};
use crate::padic::{BaseScalar, ExtScalar, FieldParams, Valuation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometricError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("point is not σ-regular")]
    NotRegular,
    #[error("|Δ_σ|^(1/4) is not an integral power of q (v(Δ_σ) = {0})")]
    Normalization(i64),
    #[error("orbital sum not stable up to radius {0}")]
    Unstable(u32),
    #[error("configuration: {0}")]
    Config(String),
}

/// Which maximal torus of H the σ-torus comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TorusKind {
    /// The diagonal torus; `M_σ ≅ E¹` through `u ↦ diag(u, 1)`.
    SplitM,
    /// The norm torus `{(x, εy; y, x)}` of H, diagonalized over E by
    /// `c = (√ε, −√ε; 1, 1)`; its σ-part is `c·diag(t, 1)·c⁻¹`, `t ∈ F^×`.
    Anisotropic,
}

/// A σ-torus with its double-coset representatives, constants and quadrature data.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaTorusInstance {
    pub kind: TorusKind,
    pub reps: Vec<GroupElement>,
    pub c0: Vec<Rational>,
    /// Congruence level of the γ sampler.
    pub level: u32,
    /// Total mass of the sampled domain.
    pub volume: Rational,
}

impl SigmaTorusInstance {
    pub fn new(
        params: FieldParams,
        kind: TorusKind,
        c0: Rational,
        level: u32,
        volume: Rational,
    ) -> Self {
        SigmaTorusInstance { kind, reps: vec![GroupElement::identity(params)], c0: vec![c0], level, volume }
    }

    /// Points of `M_σ ≅ E¹` with equal quadrature weights summing to `volume`; all σ-regular.
    /// The anisotropic torus is integrated shell by shell instead, see [`anisotropic_profile`].
    pub fn sample(&self, params: FieldParams) -> Result<Vec<(GroupElement, Rational)>, GeometricError> {
        if self.kind != TorusKind::SplitM {
            return Err(GeometricError::Config("finite sampler exists only for the split torus".into()));
        }
        let pts: Vec<GroupElement> =
            e1_representatives(params, self.level).iter().map(split_gamma).collect();
        let w = &self.volume / Rational::from_integer((pts.len() as i64).into());
        Ok(pts.into_iter().map(|g| (g, w.clone())).collect())
    }

    pub fn conjugator(&self, params: FieldParams) -> Option<GroupElement> {
        match self.kind {
            TorusKind::SplitM => None,
            TorusKind::Anisotropic => Some(anisotropic_conjugator(params)),
        }
    }

    fn check(&self) -> Result<(), GeometricError> {
        if self.reps.len() != self.c0.len() {
            return Err(GeometricError::Config(format!(
                "{} representatives but {} constants",
                self.reps.len(),
                self.c0.len()
            )));
        }
        Ok(())
    }
}

/// `u = (1 + t√ε)/(1 − t√ε)`, a point of `E¹`.
pub fn cayley_e1(params: FieldParams, t: &Rational) -> ExtScalar {
    let ts = ExtScalar::new(Rational::zero(), t.clone(), params);
    let one = ExtScalar::one(params);
    (&one + &ts).checked_div(&(&one - &ts)).expect("1 − t√ε ≠ 0")
}

/// σ-regular representatives of `E¹/(E¹ ∩ (1 + ω^k O_E))`, one per class: Cayley images
/// of `P¹(O/ω^k)`, with the classes of `0` and `∞` represented by `q^k` and `q^(−k)`.
pub fn e1_representatives(params: FieldParams, k: u32) -> Vec<ExtScalar> {
    let q = params.q() as i64;
    let m = q.pow(k);
    let mut ts: Vec<Rational> = (1..=m).map(|t| Rational::from_integer(t.into())).collect();
    for j in 1..=m / q {
        ts.push(Rational::from_integer((j * q).into()).recip());
    }
    ts.iter().map(|t| cayley_e1(params, t)).collect()
}

pub fn split_gamma(u: &ExtScalar) -> GroupElement {
    GroupElement::diag(u.clone(), ExtScalar::one(u.params())).expect("u ≠ 0")
}

/// `c = (√ε, −√ε; 1, 1)`.
pub fn anisotropic_conjugator(params: FieldParams) -> GroupElement {
    let s = ExtScalar::sqrt_eps(params);
    let one = ExtScalar::one(params);
    GroupElement::new(s.clone(), -&s, one.clone(), one).expect("det 2√ε ≠ 0")
}

/// `c·diag(t, 1)·c⁻¹ = ((t+1)/2, √ε(t−1)/2; (t−1)/(2√ε), (t+1)/2)`.
pub fn anisotropic_gamma(params: FieldParams, t: &Rational) -> GroupElement {
    let c = anisotropic_conjugator(params);
    let d = GroupElement::diag(ExtScalar::from_base(t.clone(), params), ExtScalar::one(params))
        .expect("t ≠ 0");
    c.mul_ref(&d).mul_ref(&c.inverse())
}

type Mat = [ExtScalar; 4];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    [
        &(&a[0] * &b[0]) + &(&a[1] * &b[2]),
        &(&a[0] * &b[1]) + &(&a[1] * &b[3]),
        &(&a[2] * &b[0]) + &(&a[3] * &b[2]),
        &(&a[2] * &b[1]) + &(&a[3] * &b[3]),
    ]
}

fn mat_inv(m: &Mat) -> Mat {
    let det = &(&m[0] * &m[3]) - &(&m[1] * &m[2]);
    let di = det.inv().expect("invertible");
    [&m[3] * &di, &(-&m[1]) * &di, &(-&m[2]) * &di, &m[0] * &di]
}

fn det4(mut m: [[Rational; 4]; 4]) -> Rational {
    let mut det = Rational::one();
    for c in 0..4 {
        let Some(p) = (c..4).find(|&r| !m[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        for r in c + 1..4 {
            let f = &m[r][c] / &m[c][c];
            for j in c..4 {
                let t = &f * &m[c][j];
                m[r][j] -= t;
            }
        }
    }
    det
}

/// `det(1 − Ad(g⁻¹σ(g)))` on `g/s`, where `s` is the Lie algebra of the diagonal torus
/// transported by `conj` (the standard one when `None`). The quotient is spanned over F
/// by `e, √ε·e, f, √ε·f` with `e, f` the transported root vectors.
pub fn delta_sigma_for_torus(g: &GroupElement, conj: Option<&GroupElement>) -> BaseScalar {
    let p = g.params();
    let x = g.inverse().mul_ref(&g.sigma());
    let xe = x.entries().clone();
    let xi = mat_inv(&xe);
    let c = conj.unwrap_or(&GroupElement::identity(p)).entries().clone();
    let ci = mat_inv(&c);
    let zero = ExtScalar::zero(p);
    let s = ExtScalar::sqrt_eps(p);
    let one = ExtScalar::one(p);
    let basis: Vec<Mat> = [(1usize, &one), (1, &s), (2, &one), (2, &s)]
        .iter()
        .map(|(slot, scal)| {
            let mut m = [zero.clone(), zero.clone(), zero.clone(), zero.clone()];
            m[*slot] = (*scal).clone();
            mat_mul(&mat_mul(&c, &m), &ci)
        })
        .collect();
    let mut a: [[Rational; 4]; 4] = Default::default();
    for (j, b) in basis.iter().enumerate() {
        let y = mat_mul(&mat_mul(&xe, b), &xi);
        let back = mat_mul(&mat_mul(&ci, &y), &c);
        let coords = [back[1].re(), back[1].im(), back[2].re(), back[2].im()];
        for i in 0..4 {
            let id = if i == j { Rational::one() } else { Rational::zero() };
            a[i][j] = id - coords[i];
        }
    }
    BaseScalar::new(det4(a), &p)
}

/// `Δ_σ` relative to the diagonal torus.
pub fn delta_sigma(g: &GroupElement) -> BaseScalar {
    delta_sigma_for_torus(g, None)
}

/// Exponent `e` with `|Δ_σ|_F^(1/4) = q^(−e)`.
pub fn quarter_exponent(delta: &BaseScalar) -> Result<i64, GeometricError> {
    match delta.valuation() {
        Valuation::Infinite => Err(GeometricError::NotRegular),
        Valuation::Finite(v) if v % 4 == 0 => Ok(v / 4),
        Valuation::Finite(v) => Err(GeometricError::Normalization(v)),
    }
}

/// An orbital integral with its normalization and the certificate of support exhaustion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitalResult {
    pub value: Rational,
    /// `e` with normalization factor `q^(−e)`.
    pub normalization: i64,
    pub radius: u32,
    /// Value unchanged when the radius is lowered by one.
    pub stable: bool,
}

/// Pairs `(x, y)` of F-tree vertices within radius `r` with `f(d(x, γy)) ≠ 0`; `x` restricted
/// to vertices projecting to the origin of the standard apartment when `fold` is set.
/// `y` is found by projecting `γ⁻¹x` to the F-tree.
fn contributing_pairs(
    params: FieldParams,
    f: &HeckeFunction,
    gamma: &GroupElement,
    fold: bool,
    r: u32,
    caps: &TreeCaps,
) -> Result<Vec<(TreeVertex, TreeVertex, Rational)>, GeometricError> {
    let Some(top) = f.max_height() else {
        return Ok(Vec::new());
    };
    let ball = tree_ball(params, r, FieldKind::F, caps)?;
    let local = tree_ball(params, top.min(caps.max_radius_f), FieldKind::F, caps)?;
    let ginv = gamma.inverse();
    let out: Vec<Vec<(TreeVertex, TreeVertex, Rational)>> = ball
        .par_iter()
        .filter(|x| !fold || x.projection_to_apartment().0.level() == 0)
        .map(|x| {
            let w = x.translate(&ginv);
            let (p, delta) = w.projection_to_base_tree();
            if delta > top {
                return Vec::new();
            }
            let pe = p.to_element();
            local
                .iter()
                .filter(|b| b.distance_to_origin() + delta <= top)
                .filter_map(|b| {
                    let y = b.translate(&pe);
                    if y.distance_to_origin() > r {
                        return None;
                    }
                    let c = f.coeff(w.distance(&y));
                    (!c.is_zero()).then(|| (x.clone(), y, c))
                })
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

fn fold_for(kind: TorusKind) -> bool {
    kind == TorusKind::SplitM
}

fn sum_pairs(v: &[(TreeVertex, TreeVertex, Rational)]) -> Rational {
    v.iter().fold(Rational::zero(), |a, t| a + &t.2)
}

/// `M(f)(x_m γ) = |Δ_σ|^(1/4)·Σ f(d(x, x_mγ·y))` over vertex pairs within radius `r`,
/// folded by the apartment translations for the split torus. `conj` selects the torus
/// for `Δ_σ`.
pub fn orbital_integral(
    f: &HeckeFunction,
    x_m: &GroupElement,
    gamma: &GroupElement,
    kind: TorusKind,
    r: u32,
    caps: &TreeCaps,
) -> Result<OrbitalResult, GeometricError> {
    let params = gamma.params();
    let g = x_m.mul_ref(gamma);
    let conj = (kind == TorusKind::Anisotropic).then(|| anisotropic_conjugator(params));
    let e = quarter_exponent(&delta_sigma_for_torus(&g, conj.as_ref()))?;
    let norm = params.qpow(-e);
    let at = |rad: u32| -> Result<Rational, GeometricError> {
        Ok(sum_pairs(&contributing_pairs(params, f, &g, fold_for(kind), rad, caps)?) * &norm)
    };
    let value = at(r)?;
    let stable = r > 0 && at(r - 1)? == value;
    Ok(OrbitalResult { value, normalization: e, radius: r, stable })
}

/// Smallest radius from `start` at which the orbital integral is stable.
pub fn stable_orbital_integral(
    f: &HeckeFunction,
    x_m: &GroupElement,
    gamma: &GroupElement,
    kind: TorusKind,
    start: u32,
    caps: &TreeCaps,
) -> Result<OrbitalResult, GeometricError> {
    for r in start.max(1)..=caps.max_radius_f {
        let res = orbital_integral(f, x_m, gamma, kind, r, caps)?;
        if res.stable {
            return Ok(res);
        }
    }
    Err(GeometricError::Unstable(caps.max_radius_f))
}

/// `v⁰_M = z_P − z_P̄` with
/// `z_P = inf(h_P̄(x₁) − h_P(y₁), h_P̄(x₂) − h_P(y₂))` and
/// `z_P̄ = −inf(h_P̄(y₁) − h_P(x₁), h_P̄(y₂) − h_P(x₂))`.
pub fn weight_vm0(
    x1: &GroupElement,
    y1: &GroupElement,
    x2: &GroupElement,
    y2: &GroupElement,
) -> Result<i64, GeometricError> {
    let h = |g: &GroupElement| iwasawa_heights(g);
    let (x1p, x1b) = h(x1)?;
    let (y1p, y1b) = h(y1)?;
    let (x2p, x2b) = h(x2)?;
    let (y2p, y2b) = h(y2)?;
    Ok(vm0_from_heights([(x1p, x1b), (y1p, y1b), (x2p, x2b), (y2p, y2b)]))
}

/// `(z_P, z_P̄)` from `(h_P, h_P̄)` of `x₁, y₁, x₂, y₂`.
pub fn z_pair(h: [(i64, i64); 4]) -> (i64, i64) {
    let [(x1p, x1b), (y1p, y1b), (x2p, x2b), (y2p, y2b)] = h;
    let zp = (x1b - y1p).min(x2b - y2p);
    let zpb = -(y1b - x1p).min(y2b - x2p);
    (zp, zpb)
}

fn vm0_from_heights(h: [(i64, i64); 4]) -> i64 {
    let (zp, zpb) = z_pair(h);
    zp - zpb
}

/// `(q^(λ(n+z_P))/(1−q^(−2λ)))(1+q^(−λ)) + (q^(λ(−n+z_P̄))/(1−q^(2λ)))(1+q^λ)`.
pub fn vm_limit_expression(q: f64, z_p: i64, z_pbar: i64, n: u64, lambda: f64) -> f64 {
    let n = n as f64;
    let a = q.powf(lambda * (n + z_p as f64)) / (1.0 - q.powf(-2.0 * lambda)) * (1.0 + q.powf(-lambda));
    let b = q.powf(lambda * (-n + z_pbar as f64)) / (1.0 - q.powf(2.0 * lambda)) * (1.0 + q.powf(lambda));
    a + b
}

/// Outcome of [`vm_limit_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct VmLimit {
    pub samples: [f64; 3],
    pub extrapolated: f64,
    pub expected: i64,
    pub error: f64,
    pub ok: bool,
}

/// Evaluates the λ-expression at `λ = 10⁻³, 10⁻⁴, 10⁻⁵`, extrapolates to `λ = 0` by two
/// Richardson steps and compares with `2n + 1 + z_P − z_P̄`.
pub fn vm_limit_check(q: u64, z_p: i64, z_pbar: i64, n: u64) -> VmLimit {
    let q = q as f64;
    let l = [1e-3, 1e-4, 1e-5];
    let s = l.map(|x| vm_limit_expression(q, z_p, z_pbar, n, x));
    let r1 = (10.0 * s[1] - s[0]) / 9.0;
    let r2 = (10.0 * s[2] - s[1]) / 9.0;
    let extrapolated = (100.0 * r2 - r1) / 99.0;
    let expected = 2 * n as i64 + 1 + z_p - z_pbar;
    let error = (extrapolated - expected as f64).abs();
    VmLimit { samples: s, extrapolated, expected, error, ok: error < 1e-6 }
}

fn vertex_heights(v: &TreeVertex) -> (i64, i64) {
    iwasawa_heights(&v.to_element()).expect("F-tree vertex")
}

/// `WM(f)(x_mγ) = |Δ_σ|^(1/2)·Σ f₁(d(x₁, γx₂)) f₂(d(y₁, γy₂)) w(x₁, y₁, x₂, y₂)` with both
/// pairs folded by the diagonal of `M_H`.
pub fn weighted_orbital_integral_with<W>(
    f1: &HeckeFunction,
    f2: &HeckeFunction,
    x_m: &GroupElement,
    gamma: &GroupElement,
    r: u32,
    caps: &TreeCaps,
    weight: W,
) -> Result<OrbitalResult, GeometricError>
where
    W: Fn([(i64, i64); 4]) -> Rational + Sync,
{
    let params = gamma.params();
    let g = x_m.mul_ref(gamma);
    let e = quarter_exponent(&delta_sigma(&g))?;
    let norm = params.qpow(-2 * e);
    let at = |rad: u32| -> Result<Rational, GeometricError> {
        let p1 = contributing_pairs(params, f1, &g, true, rad, caps)?;
        let p2 = contributing_pairs(params, f2, &g, true, rad, caps)?;
        let mut cache: HashMap<TreeVertex, (i64, i64)> = HashMap::new();
        for (a, b, _) in p1.iter().chain(&p2) {
            for v in [a, b] {
                cache.entry(v.clone()).or_insert_with(|| vertex_heights(v));
            }
        }
        let total = p1
            .par_iter()
            .map(|(x1, x2, c1)| {
                let mut acc = Rational::zero();
                for (y1, y2, c2) in &p2 {
                    let w = weight([cache[x1], cache[y1], cache[x2], cache[y2]]);
                    if !w.is_zero() {
                        acc += c1 * c2 * w;
                    }
                }
                acc
            })
            .reduce(Rational::zero, |a, b| a + b);
        Ok(total * &norm)
    };
    let value = at(r)?;
    let stable = r > 0 && at(r - 1)? == value;
    Ok(OrbitalResult { value, normalization: 2 * e, radius: r, stable })
}

/// Weighted orbital integral with the weight `v⁰_M`.
pub fn weighted_orbital_integral(
    f1: &HeckeFunction,
    f2: &HeckeFunction,
    x_m: &GroupElement,
    gamma: &GroupElement,
    r: u32,
    caps: &TreeCaps,
) -> Result<OrbitalResult, GeometricError> {
    weighted_orbital_integral_with(f1, f2, x_m, gamma, r, caps, |h| {
        Rational::from_integer(vm0_from_heights(h).into())
    })
}

/// Starting radius covering the support of `f` and the fixed region of `γ`.
fn start_radius(f1: &HeckeFunction, f2: &HeckeFunction, gamma: &GroupElement, kind: TorusKind) -> u32 {
    let top = f1.max_height().unwrap_or(0).max(f2.max_height().unwrap_or(0));
    let conj = (kind == TorusKind::Anisotropic).then(|| anisotropic_conjugator(gamma.params()));
    let d = delta_sigma_for_torus(gamma, conj.as_ref());
    let depth = d.valuation().finite().unwrap_or(0).unsigned_abs() as u32 / 4;
    top + depth + 1
}

fn stable_value(
    f: &HeckeFunction,
    x_m: &GroupElement,
    gamma: &GroupElement,
    kind: TorusKind,
    caps: &TreeCaps,
) -> Result<Rational, GeometricError> {
    let s = start_radius(f, f, &x_m.mul_ref(gamma), kind);
    Ok(stable_orbital_integral(f, x_m, gamma, kind, s, caps)?.value)
}

/// `M(f)(x_mγ_t)` on the anisotropic torus, `γ_t = c·diag(t,1)·c⁻¹`, as a function of
/// `m = v(t)` and, for units, of `j = v(1 − t²)`. It vanishes once `|m|` exceeds the
/// support height, is constant on each shell `v(t) = m ≠ 0`, and on units takes the form
/// `A − B·q^(−j)` from level `onset` on (fitted on two levels, verified on two more).
#[derive(Clone, Debug, PartialEq)]
pub struct AnisotropicProfile {
    /// `(m, value)` for `m ≠ 0`, `|m| ≤` support height.
    pub off_unit: Vec<(i64, Rational)>,
    /// Value on `j = 0` (units with `t² ≢ 1`); absent for `q = 3`.
    pub generic_unit: Option<Rational>,
    /// Values for `1 ≤ j < onset`.
    pub head: Vec<Rational>,
    pub onset: u32,
    pub a: Rational,
    pub b: Rational,
}

pub fn anisotropic_profile(
    params: FieldParams,
    f: &HeckeFunction,
    x_m: &GroupElement,
    caps: &TreeCaps,
) -> Result<AnisotropicProfile, GeometricError> {
    let top = f.max_height().unwrap_or(0) as i64;
    let at = |t: Rational| stable_value(f, x_m, &anisotropic_gamma(params, &t), TorusKind::Anisotropic, caps);
    let mut off_unit = Vec::new();
    for m in (-top - 1..=top + 1).filter(|&m| m != 0) {
        let v = at(params.qpow(m))?;
        if m.abs() > top && !v.is_zero() {
            return Err(GeometricError::Config(format!("orbital integral nonzero at v(t) = {m}")));
        }
        if m.abs() <= top {
            off_unit.push((m, v));
        }
    }
    let generic_unit = if params.q() > 3 { Some(at(Rational::from_integer(2.into()))?) } else { None };
    let level = |j: u32| at(Rational::one() + params.qpow(j as i64));
    let mut vals = vec![level(1)?, level(2)?];
    for onset in 1u32.. {
        while vals.len() < onset as usize + 3 {
            let j = vals.len() as u32 + 1;
            let g = anisotropic_gamma(params, &(Rational::one() + params.qpow(j as i64)));
            let need = start_radius(f, f, &x_m.mul_ref(&g), TorusKind::Anisotropic);
            if need > caps.max_radius_f {
                return Err(GeometricError::Unstable(caps.max_radius_f));
            }
            vals.push(level(j)?);
        }
        let i = onset as usize - 1;
        let (x1, x2) = (params.qpow(-(onset as i64)), params.qpow(-(onset as i64) - 1));
        let b = (&vals[i + 1] - &vals[i]) / (&x1 - &x2);
        let a = &vals[i] + &b * &x1;
        let fits = (i..i + 4).all(|k| vals[k] == &a - &b * params.qpow(-(k as i64) - 1));
        if fits {
            return Ok(AnisotropicProfile { off_unit, generic_unit, head: vals[..i].to_vec(), onset, a, b });
        }
    }
    unreachable!()
}

/// `∫_{F^×} M(f₁)M(f₂) dt` with `vol(O_F^×) = 1`: the unit shells `j ≥ 1` have relative
/// mass `2q^(−j)`, the generic units `(q−3)/(q−1)`, and each shell `v(t) = m` mass 1.
pub fn anisotropic_pairing(
    params: FieldParams,
    p1: &AnisotropicProfile,
    p2: &AnisotropicProfile,
) -> Rational {
    let q = params.q_rat();
    let two = Rational::from_integer(2.into());
    let by_m = |p: &AnisotropicProfile, m: i64| {
        p.off_unit.iter().find(|(k, _)| *k == m).map(|(_, v)| v.clone()).unwrap_or_else(Rational::zero)
    };
    let top = p1.off_unit.iter().chain(&p2.off_unit).map(|(m, _)| m.abs()).max().unwrap_or(0);
    let mut acc = Rational::zero();
    for m in (-top..=top).filter(|&m| m != 0) {
        acc += by_m(p1, m) * by_m(p2, m);
    }
    if let (Some(a), Some(b)) = (&p1.generic_unit, &p2.generic_unit) {
        acc += (&q - Rational::from_integer(3.into())) / (&q - Rational::one()) * a * b;
    }
    let onset = p1.onset.max(p2.onset);
    let value = |p: &AnisotropicProfile, j: u32| {
        if j < p.onset {
            p.head[j as usize - 1].clone()
        } else {
            &p.a - &p.b * params.qpow(-(j as i64))
        }
    };
    for j in 1..onset {
        acc += &two * params.qpow(-(j as i64)) * value(p1, j) * value(p2, j);
    }
    // Σ_{j ≥ onset} q^(−kj) = q^(−k·onset)/(1 − q^(−k))
    let tail = |k: i64| params.qpow(-k * onset as i64) / (Rational::one() - params.qpow(-k));
    acc += &two
        * (&p1.a * &p2.a * tail(1) - (&p1.a * &p2.b + &p1.b * &p2.a) * tail(2) + &p1.b * &p2.b * tail(3));
    acc
}

/// `Σ_{x_m} c⁰_{x_m} ∫_{S_σ} M(f₁)(x_mγ)·M(f₂)(x_mγ) dγ`: quadrature over `E¹` for the
/// split torus, exact shell summation over `F^×` (scaled by `volume`) for the anisotropic one.
pub fn geometric_bilinear_form(
    params: FieldParams,
    f1: &HeckeFunction,
    f2: &HeckeFunction,
    inst: &SigmaTorusInstance,
    caps: &TreeCaps,
) -> Result<Rational, GeometricError> {
    inst.check()?;
    if f1.is_zero() || f2.is_zero() {
        return Ok(Rational::zero());
    }
    let mut acc = Rational::zero();
    for (xm, c0) in inst.reps.iter().zip(&inst.c0) {
        match inst.kind {
            TorusKind::SplitM => {
                for (gamma, w) in inst.sample(params)? {
                    let m1 = stable_value(f1, xm, &gamma, inst.kind, caps)?;
                    let m2 = stable_value(f2, xm, &gamma, inst.kind, caps)?;
                    acc += c0 * w * m1 * m2;
                }
            }
            TorusKind::Anisotropic => {
                let p1 = anisotropic_profile(params, f1, xm, caps)?;
                let p2 = anisotropic_profile(params, f2, xm, caps)?;
                acc += c0 * &inst.volume * anisotropic_pairing(params, &p1, &p2);
            }
        }
    }
    Ok(acc)
}

/// `Σ_{x_m} c⁰_{x_m} ∫_{M_σ} WM(f)(x_mγ) dγ`.
pub fn weighted_term(
    params: FieldParams,
    f1: &HeckeFunction,
    f2: &HeckeFunction,
    inst: &SigmaTorusInstance,
    caps: &TreeCaps,
) -> Result<Rational, GeometricError> {
    inst.check()?;
    if inst.kind != TorusKind::SplitM {
        return Err(GeometricError::Config("weighted term lives on the split torus".into()));
    }
    if f1.is_zero() || f2.is_zero() {
        return Ok(Rational::zero());
    }
    let pts = inst.sample(params)?;
    let mut acc = Rational::zero();
    for (xm, c0) in inst.reps.iter().zip(&inst.c0) {
        for (gamma, w) in &pts {
            let start = start_radius(f1, f2, &xm.mul_ref(gamma), TorusKind::SplitM);
            let mut found = None;
            for r in start..=caps.max_radius_f {
                let res = weighted_orbital_integral(f1, f2, xm, gamma, r, caps)?;
                if res.stable {
                    found = Some(res);
                    break;
                }
            }
            let res = found.ok_or(GeometricError::Unstable(caps.max_radius_f))?;
            acc += c0 * w * res.value;
        }
    }
    Ok(acc)
}

/// Slope `2·Σ c⁰_M ∫ M(f₁)M(f₂)` and intercept from the unweighted terms of every torus
/// plus the weighted term of the split one.
pub fn geometric_asymptote(
    params: FieldParams,
    f1: &HeckeFunction,
    f2: &HeckeFunction,
    tori: &[SigmaTorusInstance],
    caps: &TreeCaps,
) -> Result<LinearAsymptote, GeometricError> {
    let split: Vec<&SigmaTorusInstance> =
        tori.iter().filter(|t| t.kind == TorusKind::SplitM).collect();
    if split.is_empty() {
        return Err(GeometricError::Config("no split σ-torus configured".into()));
    }
    let mut slope = Rational::zero();
    let mut intercept = Rational::zero();
    for t in tori {
        let b = geometric_bilinear_form(params, f1, f2, t, caps)?;
        if t.kind == TorusKind::SplitM {
            slope += Rational::from_integer(2.into()) * &b;
            intercept += weighted_term(params, f1, f2, t, caps)?;
        }
        intercept += b;
    }
    Ok(LinearAsymptote { slope, intercept })
}

/// The split-torus constant making the geometric slope of the indicator pair equal
/// `kernel_slope`, assuming one representative.
pub fn calibrate_c0(
    params: FieldParams,
    inst: &SigmaTorusInstance,
    kernel_slope: &Rational,
    caps: &TreeCaps,
) -> Result<Rational, GeometricError> {
    let k = HeckeFunction::indicator_k();
    let mut unit = inst.clone();
    unit.c0 = vec![Rational::one(); unit.reps.len()];
    let b = geometric_bilinear_form(params, &k, &k, &unit, caps)?;
    if b.is_zero() {
        return Err(GeometricError::Config("indicator bilinear form vanishes".into()));
    }
    Ok(kernel_slope / (Rational::from_integer(2.into()) * b))
}

/// Closed form `N(1 − u²)·N(1 − u⁻²)` for `Δ_σ(diag(u, 1))`.
pub fn delta_sigma_diag_closed_form(u: &ExtScalar) -> Rational {
    let one = ExtScalar::one(u.params());
    let u2 = u * u;
    let a = (&one - &u2).norm();
    let b = (&one - &u2.inv().expect("u ≠ 0")).norm();
    a.value() * b.value()
}
