//! Unramified principal series of PGL(2, E): intertwining constant, μ-function, the
//! normalized C-scalar, Eisenstein values on Cartan cells, truncated and regularized
//! periods, spherical Fourier transforms, generalized matrix coefficients and the
//! spectral asymptote of the truncated kernel.
//!
//! All spectral quantities are rational functions of the parameter `z` (the value of
//! the unramified character at the uniformizer).

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::{
    lemma_expansion, AsymptoticDatum, AsymptoticExpansion, AsymptoticsError, LinearAsymptote,
};
use crate::exactalg::{contour_minus, AlgebraError, Poly, RatFunc, Rational};
use crate::group::{
    cartan_height, shift_constant, sphere_measure, tree_sphere, FieldKind, GroupElement,
    GroupError, HeckeFunction, TreeCaps,
};
use crate::padic::FieldParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("missing spectral data: {0}")]
    MissingData(String),
    #[error("plug-in rejected: {0}")]
    Plugin(String),
    #[error("height {0} beyond the computed range")]
    OutOfRange(u32),
}

/// Cell heights whose Eisenstein value is computed by direct sums over the E-tree sphere.
pub const DIRECT_CELL_LIMIT: u32 = 3;

fn zm(k: i64) -> RatFunc {
    RatFunc::monomial(k, Rational::one())
}

/// `Σ_{k≥0} first·ratio^k`, continued meromorphically: `first/(1 − ratio)`.
pub fn regularized_geometric_sum(first: &RatFunc, ratio: &RatFunc) -> RatFunc {
    first
        .checked_div(&(&RatFunc::one() - ratio))
        .expect("ratio is not identically 1")
}

/// `Σ_{r≥start} (α z^r + β z^(−r))`, regularized.
pub fn regularized_two_exponential_tail(alpha: &RatFunc, beta: &RatFunc, start: i64) -> RatFunc {
    let a = regularized_geometric_sum(&(alpha * &zm(start)), &RatFunc::z());
    let b = regularized_geometric_sum(&(beta * &zm(-start)), &zm(-1));
    &a + &b
}

/// Coefficients `(α, β)` with `g_r = α z^r + β z^(−r)` and `g_(r+1) = α z^(r+1) + β z^(−r−1)`.
pub fn fit_two_exponential(g_r: &RatFunc, g_next: &RatFunc, r: i64) -> (RatFunc, RatFunc) {
    let z = RatFunc::z();
    let alpha = (g_next - &g_r.checked_div(&z).expect("z ≠ 0"))
        .checked_div(&(&zm(r + 1) - &zm(r - 1)))
        .expect("nonzero");
    let beta = (g_next - &(&z * g_r))
        .checked_div(&(&zm(-r - 1) - &zm(-r + 1)))
        .expect("nonzero");
    (alpha, beta)
}

/// Haar measure of `{x ∈ E : v(x) = −k}` times the integrand on it, for `k ≥ 1`:
/// `q^(2k)(1 − q^(−2)) · (z/q)^(2k)`.
pub fn intertwining_shell_term(params: FieldParams, k: u32) -> RatFunc {
    let q2 = params.qpow(2);
    let measure = params.qpow(2 * k as i64) * (Rational::one() - q2.recip());
    let value = zm(2 * k as i64).scale(&params.qpow(-2 * k as i64));
    value.scale(&measure)
}

/// Scalar `c(z)` by which the standard intertwining operator acts on the spherical vector.
///
/// The integral over `N ≅ E` splits into the unit ball (value 1) and the shells
/// `v(x) = −k`, `k ≥ 1`, which form a geometric series of ratio `z²`; the Haar measure on
/// `N` gives `O_E` volume `1/(1 + q^(−2))`.
pub fn intertwining_constant(params: FieldParams) -> RatFunc {
    let tail = regularized_geometric_sum(&intertwining_shell_term(params, 1), &zm(2));
    let dn = (Rational::one() + params.qpow(-2)).recip();
    (&RatFunc::one() + &tail).scale(&dn)
}

/// `μ(z) = 1/(c(z)·c(1/z))`.
pub fn mu_function(params: FieldParams) -> RatFunc {
    let c = intertwining_constant(params);
    (&c * &c.tilde()).recip().expect("c is not zero")
}

/// `c⁰(w, z) = c(z)/c(1/z)`, the scalar of the normalized operator on spherical data.
pub fn normalized_c_scalar(params: FieldParams) -> RatFunc {
    let c = intertwining_constant(params);
    c.checked_div(&c.tilde()).expect("c is not zero")
}

/// `c⁰(1, z)`, identically 1.
pub fn normalized_c_identity() -> RatFunc {
    RatFunc::one()
}

/// Zonal spherical function of the E-tree at distance `r`, from
/// `κφ(r+1) = λφ(r) − φ(r−1)`, `λ = q(z + 1/z)`, `φ(0) = 1`, `φ(1) = λ/(κ+1)`.
pub fn spherical_values(params: FieldParams, max_r: u32) -> Vec<RatFunc> {
    let kappa = params.qpow(2);
    let lambda = (&RatFunc::z() + &zm(-1)).scale(&params.q_rat());
    let mut out = vec![RatFunc::one()];
    if max_r >= 1 {
        out.push(lambda.scale(&(&kappa + Rational::one()).recip()));
    }
    for r in 1..max_r as usize {
        let next = (&(&lambda * &out[r]) - &out[r - 1]).scale(&kappa.recip());
        out.push(next);
    }
    out
}

/// `Σ_{d(o,v)=r} (z/q)^level(v)`: the sphere sum of the horocycle character.
pub fn sphere_horocycle_sum(
    params: FieldParams,
    r: u32,
    caps: &TreeCaps,
) -> Result<RatFunc, SpectralError> {
    let sphere = tree_sphere(params, r, FieldKind::E, caps)?;
    let mut by_level: BTreeMap<i64, u64> = BTreeMap::new();
    for v in &sphere {
        *by_level.entry(v.level()).or_default() += 1;
    }
    let mut acc = RatFunc::zero();
    for (a, n) in by_level {
        let c = params.qpow(-a) * Rational::from_integer(n.into());
        acc = &acc + &RatFunc::monomial(a, c);
    }
    Ok(acc)
}

/// Unramified spherical data for a fixed prime.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalDatum {
    pub params: FieldParams,
    pub c: RatFunc,
    pub mu: RatFunc,
    pub c0w: RatFunc,
    /// Normalized Eisenstein values `E⁰` on the cells of height `r`.
    pub eis: BTreeMap<u32, RatFunc>,
    /// Height from which `E⁰(r) = q^(−r)(z^r + c⁰(w,z) z^(−r))` holds.
    pub n0: u32,
}

impl SphericalDatum {
    /// Computes cell values up to `max_r`. Heights up to [`DIRECT_CELL_LIMIT`] (and the
    /// E-tree cap) are computed by direct sphere sums and must agree with the recurrence.
    pub fn build(params: FieldParams, max_r: u32, caps: &TreeCaps) -> Result<Self, SpectralError> {
        let c = intertwining_constant(params);
        let mu = mu_function(params);
        let c0w = normalized_c_scalar(params);
        let phi = spherical_values(params, max_r + 1);
        let direct_max = max_r.min(DIRECT_CELL_LIMIT).min(caps.max_radius_e);
        let direct: Vec<Result<RatFunc, SpectralError>> = (0..=direct_max)
            .into_par_iter()
            .map(|r| {
                let s = sphere_horocycle_sum(params, r, caps)?;
                Ok(s.scale(&sphere_measure(params, r, FieldKind::E).recip()))
            })
            .collect();
        for (r, d) in direct.into_iter().enumerate() {
            if d? != phi[r] {
                return Err(SpectralError::Consistency(format!(
                    "sphere sum and recurrence disagree at height {r}"
                )));
            }
        }
        let norm = c.tilde().recip()?;
        let eis: BTreeMap<u32, RatFunc> =
            (0..=max_r + 1).map(|r| (r, &phi[r as usize] * &norm)).collect();
        if eis[&0] != &RatFunc::one() + &c0w {
            return Err(SpectralError::Consistency("E⁰(e) ≠ 1 + c⁰(w,z)".into()));
        }
        let (n0, a, b) = detect_expansion_threshold(params, &eis)?;
        if a != RatFunc::one() || b != c0w {
            return Err(SpectralError::Consistency(
                "fitted cell coefficients differ from (1, c⁰(w,z))".into(),
            ));
        }
        let mut eis = eis;
        eis.remove(&(max_r + 1));
        Ok(SphericalDatum { params, c, mu, c0w, eis, n0 })
    }

    pub fn max_r(&self) -> u32 {
        *self.eis.keys().next_back().expect("nonempty")
    }

    /// `E⁰` on the height-`r` cell: stored value, or the two-exponential form beyond.
    pub fn cell_value(&self, r: u32) -> RatFunc {
        match self.eis.get(&r) {
            Some(v) => v.clone(),
            None => self.asymptotic_cell_value(r),
        }
    }

    /// `q^(−r)(z^r + c⁰(w,z) z^(−r))`.
    pub fn asymptotic_cell_value(&self, r: u32) -> RatFunc {
        let r = r as i64;
        (&zm(r) + &(&self.c0w * &zm(-r))).scale(&self.params.qpow(-r))
    }
}

/// Smallest `r` from which `q^r E⁰(r)` is a fixed two-exponential `A z^r + B z^(−r)`
/// on the whole computed range, doubled; returns it with `(A, B)`.
fn detect_expansion_threshold(
    params: FieldParams,
    eis: &BTreeMap<u32, RatFunc>,
) -> Result<(u32, RatFunc, RatFunc), SpectralError> {
    let max_r = *eis.keys().next_back().expect("nonempty");
    let g = |r: u32| eis[&r].scale(&params.qpow(r as i64));
    for r0 in 0..max_r {
        let (a, b) = fit_two_exponential(&g(r0), &g(r0 + 1), r0 as i64);
        let fits = (r0 + 2..=max_r).all(|r| {
            let r = r as i64;
            &(&a * &zm(r)) + &(&b * &zm(-r)) == g(r as u32)
        });
        if fits {
            return Ok((2 * r0, a, b));
        }
    }
    Err(SpectralError::Consistency("no two-exponential range found".into()))
}

/// `P^n = Σ_{r≤n} m_F(r)·E⁰(r)`.
pub fn truncated_period(datum: &SphericalDatum, n: u32) -> RatFunc {
    let p = datum.params;
    (0..=n).fold(RatFunc::zero(), |acc, r| {
        &acc + &datum.cell_value(r).scale(&sphere_measure(p, r, FieldKind::F))
    })
}

/// Regularized period and C-functionals.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodFunctions {
    pub p: RatFunc,
    pub c1: RatFunc,
    pub cw: RatFunc,
    pub pn: BTreeMap<u32, RatFunc>,
}

/// `C1 = (1+q^(−1))·c⁰(1,z)`, `Cw = (1+q^(−1))·c⁰(w,z)`, and
/// `P = P^n + z^(n+1)/(1−z)·C1 + z^(−n−1)/(1−z^(−1))·Cw`, evaluated at `n = n₀` and
/// `n = n₀ + 3` and required to agree.
pub fn regularized_period_and_c(datum: &SphericalDatum) -> Result<PeriodFunctions, SpectralError> {
    let params = datum.params;
    let factor = Rational::one() + params.qpow(-1);
    let c1 = normalized_c_identity().scale(&factor);
    let cw = datum.c0w.scale(&factor);
    let at = |n: u32| {
        &truncated_period(datum, n) + &regularized_two_exponential_tail(&c1, &cw, n as i64 + 1)
    };
    let p = at(datum.n0);
    if at(datum.n0 + 3) != p {
        return Err(SpectralError::Consistency("regularized period depends on n".into()));
    }
    let pn = (0..=datum.max_r()).map(|n| (n, truncated_period(datum, n))).collect();
    Ok(PeriodFunctions { p, c1, cw, pn })
}

/// `P − P^n − z^(n+1)/(1−z)·C1 − z^(−n−1)/(1−z^(−1))·Cw`.
pub fn period_relation_residual(pf: &PeriodFunctions, datum: &SphericalDatum, n: u32) -> RatFunc {
    let pn = pf.pn.get(&n).cloned().unwrap_or_else(|| truncated_period(datum, n));
    &(&pf.p - &pn) - &regularized_two_exponential_tail(&pf.c1, &pf.cw, n as i64 + 1)
}

/// `∫*_H E⁰(h x) dh` by Cartan sums: `h = k₁ m_r k₂` and, for each vertex `v = k₂·x·o`
/// of the F-sphere of radius `height(x)`, `height(m_r g_v) = r + X_v` once `r ≥ N₀(g_v)`.
/// The tail is a two-exponential in `r` and is regularized in closed form.
pub fn translated_period(
    datum: &SphericalDatum,
    x: &GroupElement,
    caps: &TreeCaps,
) -> Result<RatFunc, SpectralError> {
    if !x.is_base() {
        return Err(GroupError::NotBaseField.into());
    }
    let params = datum.params;
    let ell = cartan_height(x);
    let sphere = tree_sphere(params, ell, FieldKind::F, caps)?;
    let reps: Vec<(GroupElement, i64, i64)> = sphere
        .iter()
        .map(|v| {
            let g = v.to_element();
            let sc = shift_constant(&g);
            (g, sc.n0, sc.x_h)
        })
        .collect();
    let count = Rational::from_integer((reps.len() as i64).into());
    let start = reps.iter().map(|r| r.1).max().unwrap_or(0).max(1);

    // head: r < start, heights computed directly
    let mut head = RatFunc::zero();
    for r in 0..start {
        let m = GroupElement::diag_power(params, r);
        let mut avg = RatFunc::zero();
        for (g, _, _) in &reps {
            avg = &avg + &datum.cell_value(cartan_height(&m.mul_ref(g)));
        }
        let w = sphere_measure(params, r as u32, FieldKind::F) / &count;
        head = &head + &avg.scale(&w);
    }

    // certify the shifted form on a window past the threshold
    for (g, n0, xh) in &reps {
        for r in (*n0).max(0)..(*n0).max(0) + 3 {
            let h = cartan_height(&GroupElement::diag_power(params, r).mul_ref(g)) as i64;
            if h != r + xh {
                return Err(SpectralError::Consistency(format!(
                    "height(m_{r}·g) = {h}, expected {}",
                    r + xh
                )));
            }
        }
    }

    // tail: m_F(r)·avg_v q^(−r−X)(z^(r+X) + c⁰ z^(−r−X)) = α z^r + β z^(−r)
    let factor = Rational::one() + params.qpow(-1);
    let mut a = RatFunc::zero();
    let mut b = RatFunc::zero();
    for (_, _, xh) in &reps {
        let s = params.qpow(-xh);
        a = &a + &RatFunc::monomial(*xh, s.clone());
        b = &b + &RatFunc::monomial(-xh, s);
    }
    let scale = factor / count;
    let alpha = a.scale(&scale);
    let beta = (&b * &datum.c0w).scale(&scale);
    Ok(&head + &regularized_two_exponential_tail(&alpha, &beta, start))
}

/// `f̂(z) = Σ_r f(r)·|S_r^E|·φ_z(r)`: the scalar by which `f` acts on the spherical vector.
pub fn spherical_fourier(params: FieldParams, f: &HeckeFunction) -> RatFunc {
    let Some(top) = f.max_height() else {
        return RatFunc::zero();
    };
    let phi = spherical_values(params, top);
    f.support().fold(RatFunc::zero(), |acc, (r, c)| {
        let w = c * sphere_measure(params, r, FieldKind::E);
        &acc + &phi[r as usize].scale(&w)
    })
}

/// `m_{ξ,ξ'}(f) = ξ·f̂₁·f̂₂(1/z)·conj(ξ')` on the spherical line, with conjugation on the
/// unit circle realized as `z ↦ 1/z` on rational coefficients.
pub fn generalized_matrix_coefficient(
    params: FieldParams,
    xi: &RatFunc,
    xi_prime: &RatFunc,
    f1: &HeckeFunction,
    f2: &HeckeFunction,
) -> RatFunc {
    let fourier = &spherical_fourier(params, f1) * &spherical_fourier(params, f2).tilde();
    &(xi * &fourier) * &xi_prime.tilde()
}

/// A finite orthonormal model of the representation space: the spherical vector `e₀` and
/// `extra` vectors without K-fixed component, on which bi-K-invariant `f` acts by zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpace {
    /// Functional values on the standard basis; index 0 is the spherical vector.
    pub xi: Vec<RatFunc>,
    pub xi_prime: Vec<RatFunc>,
}

impl ModelSpace {
    /// `Σ_{b∈B} ξ(π(f) b)·conj(ξ'(b))` for a real orthonormal basis `B` given in standard
    /// coordinates.
    pub fn matrix_coefficient_in_basis(
        &self,
        params: FieldParams,
        f1: &HeckeFunction,
        f2: &HeckeFunction,
        basis: &[Vec<Rational>],
    ) -> RatFunc {
        let fourier = &spherical_fourier(params, f1) * &spherical_fourier(params, f2).tilde();
        let mut acc = RatFunc::zero();
        for b in basis {
            // π(f) b = f̂·b₀·e₀
            let image = (&self.xi[0] * &fourier).scale(&b[0]);
            let conj = b
                .iter()
                .zip(&self.xi_prime)
                .fold(RatFunc::zero(), |s, (bj, x)| &s + &x.tilde().scale(bj));
            acc = &acc + &(&image * &conj);
        }
        acc
    }
}

/// Where a character of `E^×` (trivial on `ω`) sits in the four-case table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeltaLabel {
    pub trivial_on_f: bool,
    pub trivial_on_e1: bool,
}

impl DeltaLabel {
    pub fn case(&self) -> u8 {
        match (self.trivial_on_f, self.trivial_on_e1) {
            (false, false) => 1,
            (false, true) => 2,
            (true, false) => 3,
            (true, true) => 4,
        }
    }
}

/// Externally supplied period data `(P, C1, Cw)` for a character not covered by the
/// unramified closed forms.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDatumPlugin {
    pub label: DeltaLabel,
    pub p: Option<RatFunc>,
    pub c1: Option<RatFunc>,
    pub cw: Option<RatFunc>,
}

/// Coefficient-list form of a [`RatFunc`]: `num/den` in ascending powers, rationals as
/// `"n/d"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatFuncRecord {
    pub num: Vec<String>,
    pub den: Vec<String>,
}

impl RatFuncRecord {
    pub fn from_ratfunc(f: &RatFunc) -> Self {
        let s = |p: &Poly| p.coeffs().iter().map(|c| c.to_string()).collect();
        RatFuncRecord { num: s(&f.numerator()), den: s(&f.denominator()) }
    }

    pub fn to_ratfunc(&self) -> Result<RatFunc, SpectralError> {
        let parse = |v: &[String]| -> Result<Poly, SpectralError> {
            v.iter()
                .map(|s| {
                    s.parse::<Rational>()
                        .map_err(|_| SpectralError::Plugin(format!("bad coefficient {s:?}")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Poly::from_coeffs)
        };
        Ok(RatFunc::new(parse(&self.num)?, parse(&self.den)?)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PluginRecord {
    pub label: DeltaLabel,
    pub p: Option<RatFuncRecord>,
    pub c1: Option<RatFuncRecord>,
    pub cw: Option<RatFuncRecord>,
}

impl SpectralDatumPlugin {
    pub fn to_record(&self) -> PluginRecord {
        PluginRecord {
            label: self.label,
            p: self.p.as_ref().map(RatFuncRecord::from_ratfunc),
            c1: self.c1.as_ref().map(RatFuncRecord::from_ratfunc),
            cw: self.cw.as_ref().map(RatFuncRecord::from_ratfunc),
        }
    }

    pub fn from_record(r: &PluginRecord) -> Result<Self, SpectralError> {
        let conv = |x: &Option<RatFuncRecord>| x.as_ref().map(|y| y.to_ratfunc()).transpose();
        Ok(SpectralDatumPlugin { label: r.label, p: conv(&r.p)?, c1: conv(&r.c1)?, cw: conv(&r.cw)? })
    }

    fn take(&self, name: &str, f: &Option<RatFunc>) -> Result<RatFunc, SpectralError> {
        f.clone().ok_or_else(|| {
            SpectralError::MissingData(format!("case-{} plug-in lacks {name}", self.label.case()))
        })
    }

    /// Checks the case table and returns `(p, c1, cw)`.
    ///
    /// 1. everything vanishes, so truncated periods are identically zero;
    /// 2. `C1 = Cw = 0` and `P` is regular on the unit circle;
    /// 3. `P = 0` and `C1(1) = Cw(1)`;
    /// 4. `C1(1) = −Cw(1)` and `P` has at most a simple pole at 1 with residue
    ///    `−C1(1) + Cw(1)`, and no other pole on the circle.
    pub fn admit(&self) -> Result<(RatFunc, RatFunc, RatFunc), SpectralError> {
        let one = Rational::one();
        let at1 = |f: &RatFunc, name: &str| {
            f.eval(&one).ok_or_else(|| SpectralError::Plugin(format!("{name} has a pole at 1")))
        };
        let no_circle_poles = |f: &RatFunc, skip_one: bool| {
            f.poles().iter().all(|pl| {
                let on = (pl.modulus() - 1.0).abs() < 1e-12;
                !on || (skip_one && matches!(pl, crate::exactalg::Pole::Rational { location, .. } if location.is_one()))
            })
        };
        match self.label.case() {
            1 => {
                let p = self.p.clone().unwrap_or_else(RatFunc::zero);
                let c1 = self.c1.clone().unwrap_or_else(RatFunc::zero);
                let cw = self.cw.clone().unwrap_or_else(RatFunc::zero);
                if !(p.is_zero() && c1.is_zero() && cw.is_zero()) {
                    return Err(SpectralError::Plugin("case 1 forces vanishing periods".into()));
                }
                Ok((p, c1, cw))
            }
            2 => {
                let p = self.take("P", &self.p)?;
                let c1 = self.c1.clone().unwrap_or_else(RatFunc::zero);
                let cw = self.cw.clone().unwrap_or_else(RatFunc::zero);
                if !(c1.is_zero() && cw.is_zero()) {
                    return Err(SpectralError::Plugin("case 2 has no C-functionals".into()));
                }
                if !no_circle_poles(&p, false) {
                    return Err(SpectralError::Plugin("case 2 period has a pole on the circle".into()));
                }
                Ok((p, c1, cw))
            }
            3 => {
                let p = self.p.clone().unwrap_or_else(RatFunc::zero);
                let c1 = self.take("C1", &self.c1)?;
                let cw = self.take("Cw", &self.cw)?;
                if !p.is_zero() {
                    return Err(SpectralError::Plugin("case 3 forces P = 0".into()));
                }
                if at1(&c1, "C1")? != at1(&cw, "Cw")? {
                    return Err(SpectralError::Plugin("case 3 requires C1(1) = Cw(1)".into()));
                }
                Ok((p, c1, cw))
            }
            _ => {
                let p = self.take("P", &self.p)?;
                let c1 = self.take("C1", &self.c1)?;
                let cw = self.take("Cw", &self.cw)?;
                let (a, b) = (at1(&c1, "C1")?, at1(&cw, "Cw")?);
                if a != -b.clone() {
                    return Err(SpectralError::Plugin("case 4 requires C1(1) = −Cw(1)".into()));
                }
                if p.pole_order(&one) > 1 || !no_circle_poles(&p, true) {
                    return Err(SpectralError::Plugin("case 4 period must have only a simple pole at 1".into()));
                }
                if p.residue_unbounded(&one) != -a + b {
                    return Err(SpectralError::Plugin("residue of P at 1 is not −C1(1) + Cw(1)".into()));
                }
                Ok((p, c1, cw))
            }
        }
    }

    /// `P^n = P − z^(n+1)/(1−z)·C1 − z^(−n−1)/(1−z^(−1))·Cw`.
    pub fn truncated_period(&self, n: u32) -> Result<RatFunc, SpectralError> {
        let (p, c1, cw) = self.admit()?;
        Ok(&p - &regularized_two_exponential_tail(&c1, &cw, n as i64 + 1))
    }

    /// Contribution `lim_n ∫ P^n(f·S) conj(P^n(S)) dz/z` for `f` acting by `fourier`.
    pub fn expansion(&self, fourier: &RatFunc) -> Result<AsymptoticExpansion, SpectralError> {
        let (p, c1, cw) = self.admit()?;
        match self.label.case() {
            1 => Ok(AsymptoticExpansion::zero()),
            2 => {
                let f = (&(fourier * &p) * &p.tilde()).checked_div(&RatFunc::z())?;
                Ok(AsymptoticExpansion {
                    slope: crate::exactalg::TwoPiIMultiple::zero(),
                    intercept: contour_minus(&f)?,
                })
            }
            _ => {
                let d = AsymptoticDatum {
                    p: fourier * &p,
                    c1: fourier * &c1,
                    cw: fourier * &cw,
                    p_prime: p,
                    c1_prime: c1,
                    cw_prime: cw,
                };
                Ok(lemma_expansion(&d)?)
            }
        }
    }
}

/// Partial sums `Σ_{r≤n} a_r` of square-summable cell data.
pub fn discrete_series_partial_sums(cells: &[Rational]) -> Vec<Rational> {
    cells
        .iter()
        .scan(Rational::zero(), |s, a| {
            *s += a;
            Some(s.clone())
        })
        .collect()
}

/// Spectral prediction for `K^n(f₁ ⊗ f₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralAsymptote {
    /// In multiples of 2πi.
    pub expansion: AsymptoticExpansion,
    /// `d/(4πi)·expansion`, directly comparable with `K^n`.
    pub kernel_units: LinearAsymptote,
}

/// Datum of the trivial-character term: `p = m(f)·P`, primed side unscaled.
pub fn spherical_asymptotic_datum(
    params: FieldParams,
    pf: &PeriodFunctions,
    f1: &HeckeFunction,
    f2: &HeckeFunction,
) -> AsymptoticDatum {
    let m = |x: &RatFunc| generalized_matrix_coefficient(params, x, &RatFunc::one(), f1, f2);
    AsymptoticDatum {
        p: m(&pf.p),
        c1: m(&pf.c1),
        cw: m(&pf.cw),
        p_prime: pf.p.clone(),
        c1_prime: pf.c1.clone(),
        cw_prime: pf.cw.clone(),
    }
}

/// Slope and intercept of `K^n(f)` from the unramified term, plus any plug-in terms, all
/// weighted by the formal degree `d`.
pub fn spectral_asymptote(
    params: FieldParams,
    pf: &PeriodFunctions,
    f1: &HeckeFunction,
    f2: &HeckeFunction,
    plugins: &[SpectralDatumPlugin],
    formal_degree: &Rational,
) -> Result<SpectralAsymptote, SpectralError> {
    let mut expansion = if f1.is_zero() || f2.is_zero() {
        AsymptoticExpansion::zero()
    } else {
        lemma_expansion(&spherical_asymptotic_datum(params, pf, f1, f2))?
    };
    let fourier = &spherical_fourier(params, f1) * &spherical_fourier(params, f2).tilde();
    for pl in plugins {
        let e = pl.expansion(&fourier)?;
        expansion = AsymptoticExpansion {
            slope: expansion.slope + e.slope,
            intercept: expansion.intercept + e.intercept,
        };
    }
    let kernel_units = expansion.to_linear(formal_degree);
    Ok(SpectralAsymptote { expansion, kernel_units })
}

/// Individual terms of the trivial-character contribution, in kernel units
/// (already multiplied by `d/(4πi)` where applicable).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremTerms {
    /// Coefficient of `n`: `d·m_{C1,C1}(f)(1)`.
    pub slope: Rational,
    /// `R/(4πi)` with `R = 2πi·d(m_{C1,C1}(1) − [d/dz m_{Cw,C1}]_1)`.
    pub r: Rational,
    /// `R̃/(4πi)` with `R̃ = 2πi·d(2m_{C1,C1}(1) + [d/dz (z−1)(m_{P,C1} + m_{Cw,P})]_1)`.
    pub r_tilde: Rational,
    /// `d/(4πi)·∫_{O⁻} (m_{C1,C1} + m_{Cw,Cw})/((1−z)(1−1/z)) dz/z`.
    pub contour_c: Rational,
    /// `d/(4πi)·∫_{O⁻} m_{P,P} dz/z`.
    pub contour_p: Rational,
}

impl TheoremTerms {
    /// Intercept with the `R` term counted `r_count` times.
    pub fn intercept(&self, r_count: u32) -> Rational {
        &self.r * Rational::from_integer(r_count.into()) + &self.r_tilde + &self.contour_c
            + &self.contour_p
    }
}

fn value_at_one(f: &RatFunc) -> Result<Rational, SpectralError> {
    f.eval(&Rational::one())
        .ok_or_else(|| SpectralError::Consistency("unexpected pole at z = 1".into()))
}

/// Term-by-term assembly of the trivial-character contribution.
pub fn theorem_terms(
    params: FieldParams,
    pf: &PeriodFunctions,
    f1: &HeckeFunction,
    f2: &HeckeFunction,
    formal_degree: &Rational,
) -> Result<TheoremTerms, SpectralError> {
    let m = |a: &RatFunc, b: &RatFunc| generalized_matrix_coefficient(params, a, b, f1, f2);
    let half_d = formal_degree / Rational::from_integer(2.into());
    let z = RatFunc::z();
    let zm1 = &z - &RatFunc::one();
    let m11 = value_at_one(&m(&pf.c1, &pf.c1))?;
    let dw1 = value_at_one(&m(&pf.cw, &pf.c1).derivative())?;
    let mixed = &zm1 * &(&m(&pf.p, &pf.c1) + &m(&pf.cw, &pf.p));
    let dmixed = value_at_one(&mixed.derivative())?;
    let dd = &(&RatFunc::one() - &z) * &(&RatFunc::one() - &zm(-1));
    let cc = (&m(&pf.c1, &pf.c1) + &m(&pf.cw, &pf.cw)).checked_div(&dd)?.checked_div(&z)?;
    let pp = m(&pf.p, &pf.p).checked_div(&z)?;
    Ok(TheoremTerms {
        slope: formal_degree * &m11,
        r: &half_d * (&m11 - &dw1),
        r_tilde: &half_d * (Rational::from_integer(2.into()) * &m11 + dmixed),
        contour_c: &half_d * contour_minus(&cc)?.value(),
        contour_p: &half_d * contour_minus(&pp)?.value(),
    })
}

/// Formal degree `d` making the spectral slope of the indicator pair equal `kernel_slope`.
pub fn calibrate_formal_degree(
    params: FieldParams,
    pf: &PeriodFunctions,
    kernel_slope: &Rational,
) -> Result<Rational, SpectralError> {
    let k = HeckeFunction::indicator_k();
    let unit = spectral_asymptote(params, pf, &k, &k, &[], &Rational::one())?;
    if unit.kernel_units.slope.is_zero() {
        return Err(SpectralError::Consistency("indicator slope vanishes".into()));
    }
    Ok(kernel_slope / &unit.kernel_units.slope)
}

/// `q²/(q²+1)`: the Plancherel mass of the unramified family under the chosen measures.
pub fn plancherel_formal_degree(params: FieldParams) -> Rational {
    let q2 = params.qpow(2);
    &q2 / (&q2 + Rational::one())
}

#[cfg(test)]
mod tests;
