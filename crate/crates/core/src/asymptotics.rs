//! Asymptotics of `∫_O p_n(z) conj(p'_n(z)) dz/z` as `n → ∞`, where
//! `p_n = p − [z^(n+1)/(1−z)·c1 + z^(−n−1)/(1−z^(−1))·cw]`.
//!
//! [`lemma_expansion`] produces the exact slope and intercept; [`truncated_integral`]
//! evaluates the left side directly (exactly when both `p_n` are Laurent polynomials).

use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactalg::{
    contour_minus, laurent_constant_coeff, trapezoid, AlgebraError, Pole, RatFunc, Rational,
    TwoPiIMultiple,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("hypotheses violated: {}", .0.join("; "))]
    Hypothesis(Vec<String>),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("expected a regular point at z = 1: {0}")]
    NotRegular(String),
}

/// Input data `(p, p', c(1,·), c(w,·), c'(1,·), c'(w,·))`.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticDatum {
    pub p: RatFunc,
    pub p_prime: RatFunc,
    pub c1: RatFunc,
    pub cw: RatFunc,
    pub c1_prime: RatFunc,
    pub cw_prime: RatFunc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Unprimed,
    Primed,
}

/// `slope·n + intercept`, both exact multiples of 2πi.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsymptoticExpansion {
    pub slope: TwoPiIMultiple,
    pub intercept: TwoPiIMultiple,
}

impl AsymptoticExpansion {
    pub fn zero() -> Self {
        AsymptoticExpansion { slope: TwoPiIMultiple::zero(), intercept: TwoPiIMultiple::zero() }
    }

    pub fn at(&self, n: u64) -> TwoPiIMultiple {
        let nn = Rational::from_integer(n.into());
        self.slope.clone() * &nn + self.intercept.clone()
    }

    /// Real coefficients of `(scale/(4πi))·(slope·n + intercept)`.
    pub fn to_linear(&self, scale: &Rational) -> LinearAsymptote {
        let half = scale / Rational::from_integer(2.into());
        LinearAsymptote {
            slope: self.slope.value() * &half,
            intercept: self.intercept.value() * &half,
        }
    }
}

/// A real affine function `slope·n + intercept` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearAsymptote {
    pub slope: Rational,
    pub intercept: Rational,
}

impl LinearAsymptote {
    pub fn zero() -> Self {
        LinearAsymptote { slope: Rational::zero(), intercept: Rational::zero() }
    }

    pub fn at(&self, n: u64) -> Rational {
        &self.slope * Rational::from_integer(n.into()) + &self.intercept
    }

    pub fn scale(&self, s: &Rational) -> Self {
        LinearAsymptote { slope: &self.slope * s, intercept: &self.intercept * s }
    }

    pub fn add(&self, o: &Self) -> Self {
        LinearAsymptote { slope: &self.slope + &o.slope, intercept: &self.intercept + &o.intercept }
    }
}

/// Value of the truncated integral.
#[derive(Clone, Debug, PartialEq)]
pub enum TruncatedValue {
    Exact(TwoPiIMultiple),
    Numeric(Complex64),
}

impl TruncatedValue {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            TruncatedValue::Exact(v) => v.to_complex(),
            TruncatedValue::Numeric(z) => *z,
        }
    }
}

/// Outcome of [`check_hypotheses`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HypothesisReport {
    pub violations: Vec<String>,
    /// Set for the all-zero datum: admitted, but outside the range where the expansion is
    /// meaningful.
    pub degenerate: bool,
}

impl HypothesisReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn zm(k: i64) -> RatFunc {
    RatFunc::monomial(k, Rational::one())
}

/// `1 − z`
fn one_minus_z() -> RatFunc {
    &RatFunc::one() - &RatFunc::z()
}

/// `z^(n+1)/(1−z)` and `z^(−n−1)/(1−z^(−1))`.
fn edge_terms(n: u64) -> (RatFunc, RatFunc) {
    let k = n as i64 + 1;
    let a = zm(k).checked_div(&one_minus_z()).expect("nonzero");
    let b = zm(-k).checked_div(&(&RatFunc::one() - &zm(-1))).expect("nonzero");
    (a, b)
}

/// `p_n` for the chosen side, normalized.
pub fn build_pn(d: &AsymptoticDatum, side: Side, n: u64) -> RatFunc {
    let (p, c1, cw) = match side {
        Side::Unprimed => (&d.p, &d.c1, &d.cw),
        Side::Primed => (&d.p_prime, &d.c1_prime, &d.cw_prime),
    };
    let (a, b) = edge_terms(n);
    let bracket = &(&a * c1) + &(&b * cw);
    p - &bracket
}

fn eval_at_one(f: &RatFunc, what: &str) -> Result<Rational, String> {
    f.eval(&Rational::one()).ok_or_else(|| format!("{what} has a pole at z = 1"))
}

/// Checks the residue condition at `z = 1`, the vanishing condition, and holomorphy on the
/// annulus `1 − η ≤ |z| ≤ 1 + η`.
pub fn check_hypotheses(d: &AsymptoticDatum, eta: &Rational) -> HypothesisReport {
    let mut v = Vec::new();
    let eta_f = eta.to_f64().unwrap_or(0.0);
    let in_annulus = |pole: &Pole| (pole.modulus() - 1.0).abs() <= eta_f + 1e-12;
    for (name, c) in [("c1", &d.c1), ("cw", &d.cw), ("c1'", &d.c1_prime), ("cw'", &d.cw_prime)] {
        if c.poles().iter().any(in_annulus) {
            v.push(format!("{name} has a pole on the annulus"));
        }
    }
    for (name, p) in [("p", &d.p), ("p'", &d.p_prime)] {
        for pole in p.poles() {
            if !in_annulus(&pole) {
                continue;
            }
            match &pole {
                Pole::Rational { location, order } if location.is_one() => {
                    if *order > 1 {
                        v.push(format!("{name} has a pole of order {order} at z = 1"));
                    }
                }
                _ => v.push(format!("{name} has a pole on the annulus away from z = 1")),
            }
        }
    }
    if !v.is_empty() {
        return HypothesisReport { violations: v, degenerate: false };
    }
    let one = Rational::one();
    let sides = [
        ("unprimed", &d.p, &d.c1, &d.cw),
        ("primed", &d.p_prime, &d.c1_prime, &d.cw_prime),
    ];
    let mut vals = Vec::new();
    for (side, p, c1, cw) in sides {
        let (a, b) = match (eval_at_one(c1, "c1"), eval_at_one(cw, "cw")) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                v.push(e);
                continue;
            }
        };
        let res = p.residue(&one).unwrap_or_else(|_| Rational::zero());
        if res != -a.clone() + &b {
            v.push(format!(
                "{side}: residue of p at 1 is {res}, expected -c1(1) + cw(1) = {}",
                -a.clone() + &b
            ));
        }
        vals.push((a, b));
    }
    let p_zero = d.p.is_zero() && d.p_prime.is_zero();
    if vals.len() == 2 && !p_zero {
        for (side, (a, b)) in ["unprimed", "primed"].iter().zip(&vals) {
            if *a != -b.clone() {
                v.push(format!("{side}: p ≠ 0 requires c1(1) = -cw(1), got {a} and {b}"));
            }
        }
    }
    let degenerate = p_zero
        && [&d.c1, &d.cw, &d.c1_prime, &d.cw_prime].iter().all(|c| c.is_zero());
    HypothesisReport { violations: v, degenerate }
}

fn value_at_one(f: &RatFunc) -> Result<Rational, AsymptoticsError> {
    f.eval(&Rational::one()).ok_or_else(|| AsymptoticsError::NotRegular(f.to_string()))
}

/// Exact slope and intercept from the residue calculus.
pub fn lemma_expansion(d: &AsymptoticDatum) -> Result<AsymptoticExpansion, AsymptoticsError> {
    let report = check_hypotheses(d, &Rational::zero());
    if !report.is_ok() {
        return Err(AsymptoticsError::Hypothesis(report.violations));
    }
    let one = Rational::one();
    let z = RatFunc::z();
    let zm1 = &z - &RatFunc::one();
    // D = (1 − z)(1 − 1/z)
    let dd = &one_minus_z() * &(&RatFunc::one() - &zm(-1));

    let pt = d.p_prime.tilde();
    let c1t = d.c1_prime.tilde();
    let cwt = d.cw_prime.tilde();

    let contour_part = {
        let cc = (&(&d.c1 * &c1t) + &(&d.cw * &cwt)).checked_div(&dd)?;
        let f = (&(&d.p * &pt) + &cc).checked_div(&z)?;
        contour_minus(&f)?
    };
    let deriv1 = value_at_one(&(&d.cw * &c1t).derivative())?;
    let mixed = &(&(&d.cw * &zm1) * &pt) + &(&(&c1t * &zm1) * &d.p);
    let deriv2 = value_at_one(&mixed.derivative())?;

    let cw1 = value_at_one(&d.cw)?;
    let c1t1 = value_at_one(&c1t)?;
    let res_pt = pt.residue(&one)?;
    let res_p = d.p.residue(&one)?;
    let cross = &cw1 * &c1t1;
    let res_term = &cw1 * &res_pt + &c1t1 * &res_p;

    let slope = Rational::from_integer(2.into()) * &cross - &res_term;
    let intercept = contour_part.value() - deriv1 + deriv2 + (cross - res_term);
    Ok(AsymptoticExpansion {
        slope: TwoPiIMultiple(slope),
        intercept: TwoPiIMultiple(intercept),
    })
}

/// Quadrature nodes used on the numeric path.
pub const QUADRATURE_NODES: usize = 4096;

/// `∫_{|z|=1} p_n(z) conj(p'_n(z)) dz/z`.
pub fn truncated_integral(d: &AsymptoticDatum, n: u64) -> Result<TruncatedValue, AsymptoticsError> {
    let report = check_hypotheses(d, &Rational::zero());
    if !report.is_ok() {
        return Err(AsymptoticsError::Hypothesis(report.violations));
    }
    let pn = build_pn(d, Side::Unprimed, n);
    let pn2 = build_pn(d, Side::Primed, n);
    if let (Some(a), Some(b)) = (pn.to_laurent(), pn2.to_laurent()) {
        return Ok(TruncatedValue::Exact(TwoPiIMultiple(laurent_constant_coeff(&(&a * &b.tilde())))));
    }
    for f in [&pn, &pn2] {
        if f.poles().iter().any(|p| (p.modulus() - 1.0).abs() < 1e-9) {
            return Err(AsymptoticsError::NotRegular("p_n has a pole on the unit circle".into()));
        }
    }
    let v = trapezoid(
        |z| pn.eval_complex(z) * pn2.eval_complex(z).conj() / z,
        Complex64::new(0.0, 0.0),
        1.0,
        QUADRATURE_NODES,
    );
    Ok(TruncatedValue::Numeric(v))
}

/// Smallest `n1 ≤ n_max` such that the exact truncated integral equals the expansion for
/// every `n ∈ [n1, n_max]`; `None` when the numeric path is needed or no such `n1` exists.
pub fn exact_onset(
    d: &AsymptoticDatum,
    e: &AsymptoticExpansion,
    n_max: u64,
) -> Result<Option<u64>, AsymptoticsError> {
    let mut onset = None;
    for n in (0..=n_max).rev() {
        match truncated_integral(d, n)? {
            TruncatedValue::Exact(v) if v == e.at(n) => onset = Some(n),
            TruncatedValue::Exact(_) => break,
            TruncatedValue::Numeric(_) => return Ok(None),
        }
    }
    Ok(onset)
}

impl AsymptoticDatum {
    /// Exchange the primed and unprimed data.
    pub fn swapped(&self) -> Self {
        AsymptoticDatum {
            p: self.p_prime.clone(),
            p_prime: self.p.clone(),
            c1: self.c1_prime.clone(),
            cw: self.cw_prime.clone(),
            c1_prime: self.c1.clone(),
            cw_prime: self.cw.clone(),
        }
    }

    /// Same data on both sides.
    pub fn symmetric(p: RatFunc, c1: RatFunc, cw: RatFunc) -> Self {
        AsymptoticDatum {
            p_prime: p.clone(),
            c1_prime: c1.clone(),
            cw_prime: cw.clone(),
            p,
            c1,
            cw,
        }
    }
}

/// Three data with known exact expansions `(name, datum, slope/2πi, intercept/2πi)`:
/// constant `c ≡ 1` with `p = 0`; `c(w,·) = z` with `p = 0`; and `p = 2/(1−z)`, `c(w,·) = −1`.
pub fn worked_examples() -> Vec<(&'static str, AsymptoticDatum, i64, i64)> {
    let c = RatFunc::from_int;
    let p = c(2).checked_div(&one_minus_z()).expect("nonzero");
    vec![
        ("constant", AsymptoticDatum::symmetric(RatFunc::zero(), c(1), c(1)), 2, 1),
        ("cw = z", AsymptoticDatum::symmetric(RatFunc::zero(), c(1), RatFunc::z()), 2, 0),
        ("simple pole", AsymptoticDatum::symmetric(p, c(1), c(-1)), 2, 1),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{rat, LaurentPoly};

    fn c(n: i64) -> RatFunc {
        RatFunc::from_int(n)
    }

    fn two_over_one_minus_z() -> RatFunc {
        c(2).checked_div(&one_minus_z()).unwrap()
    }

    fn worked_examples() -> Vec<(AsymptoticDatum, i64, i64)> {
        super::worked_examples().into_iter().map(|(_, d, s, i)| (d, s, i)).collect()
    }

    #[test]
    fn build_pn_examples() {
        let d = AsymptoticDatum::symmetric(RatFunc::zero(), c(1), c(1));
        assert_eq!(build_pn(&d, Side::Unprimed, 2), RatFunc::from_laurent(&LaurentPoly::geometric(-2, 2)));
        let d = AsymptoticDatum::symmetric(two_over_one_minus_z(), c(1), c(-1));
        let expect = &RatFunc::from_laurent(&LaurentPoly::geometric(0, 1)) - &zm(-1);
        assert_eq!(build_pn(&d, Side::Unprimed, 1), expect);
        let z0 = AsymptoticDatum::symmetric(RatFunc::zero(), RatFunc::zero(), RatFunc::zero());
        for n in 0..5 {
            assert!(build_pn(&z0, Side::Primed, n).is_zero());
        }
    }

    #[test]
    fn hypothesis_examples() {
        let eta = rat(1, 6);
        assert!(check_hypotheses(&AsymptoticDatum::symmetric(RatFunc::zero(), c(1), c(1)), &eta).is_ok());
        assert!(check_hypotheses(&AsymptoticDatum::symmetric(two_over_one_minus_z(), c(1), c(-1)), &eta).is_ok());
        let bad = AsymptoticDatum::symmetric(RatFunc::zero(), c(1), c(2));
        assert!(!check_hypotheses(&bad, &eta).is_ok());
        let zero = AsymptoticDatum::symmetric(RatFunc::zero(), RatFunc::zero(), RatFunc::zero());
        let r = check_hypotheses(&zero, &eta);
        assert!(r.is_ok() && r.degenerate);
        // p nonzero with c1(1) = cw(1): residue condition forces p regular, vanishing fails.
        let not_vanishing = AsymptoticDatum::symmetric(c(1), c(1), c(1));
        assert!(!check_hypotheses(&not_vanishing, &eta).is_ok());
        // c with a pole inside the annulus
        let near = c(1).checked_div(&(&RatFunc::z() - &RatFunc::constant(rat(9, 10)))).unwrap();
        let d = AsymptoticDatum::symmetric(RatFunc::zero(), near.clone(), near);
        assert!(!check_hypotheses(&d, &eta).is_ok());
        assert!(lemma_expansion(&bad).is_err());
    }

    #[test]
    fn worked_examples_are_exact() {
        for (d, slope, intercept) in worked_examples() {
            let e = lemma_expansion(&d).unwrap();
            assert_eq!(e.slope, TwoPiIMultiple(rat(slope, 1)));
            assert_eq!(e.intercept, TwoPiIMultiple(rat(intercept, 1)));
            for n in 1..=25 {
                assert_eq!(truncated_integral(&d, n).unwrap(), TruncatedValue::Exact(e.at(n)));
            }
            assert_eq!(truncated_integral(&d, 5).unwrap(), TruncatedValue::Exact(e.at(5)));
        }
    }

    #[test]
    fn onset_is_reported() {
        for (d, _, _) in worked_examples() {
            let e = lemma_expansion(&d).unwrap();
            let onset = exact_onset(&d, &e, 25).unwrap();
            assert!(onset.is_some_and(|n| n <= 1));
        }
    }

    #[test]
    fn swap_gives_same_real_expansion() {
        let c1 = &RatFunc::z() + &c(2);
        let cw = c(-3);
        let p = c(6).checked_div(&one_minus_z()).unwrap();
        let extra = c(1).checked_div(&(&RatFunc::z() - &c(3))).unwrap();
        let d = AsymptoticDatum {
            p: p.clone(),
            p_prime: &p + &extra,
            c1: c1.clone(),
            cw: cw.clone(),
            c1_prime: &c1 * &RatFunc::z(),
            cw_prime: cw,
        };
        let e = lemma_expansion(&d).unwrap();
        assert_eq!(lemma_expansion(&d.swapped()).unwrap(), e);
    }
}
