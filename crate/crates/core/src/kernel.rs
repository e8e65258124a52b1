//! Exact truncated kernel `K^n(f) = ∫_{H×H} K_f(x,y) u(x,n) u(y,n) dx dy` for spherical
//! pairs, with `K_f(x,y) = ∫_G f₁(x⁻¹gy) f₂(g) dg`, and the comparison harness against
//! asymptotic predictions.

use std::io::Write;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::asymptotics::LinearAsymptote;
use crate::exactalg::Rational;
use crate::group::{
    intersection_number, sphere_measure, tree_ball, tree_sphere, FieldKind, GroupError,
    HeckeFunction, TreeCaps,
};
use crate::padic::FieldParams;

/// Largest `n` (and cell height) accepted by the cell path.
pub const CELL_PATH_CAP: u32 = 8;
/// Largest `n` accepted by the unfolded vertex enumeration.
pub const UNFOLDED_CAP: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("height {got} exceeds the cap {cap}")]
    Cap { got: u32, cap: u32 },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("report output failed: {0}")]
    Io(String),
    #[error("comparison failed: {0}")]
    Mismatch(String),
}

fn big(x: BigInt) -> Rational {
    Rational::from_integer(x)
}

/// `K_f(m_r, m_s)` with `m_t = diag(ω^t, 1)`.
///
/// Writing `a = g·o` in the E-tree, the inner K-integral averages `f₁` over the sphere of
/// radius `s` about `a`, so
/// `K_f = Σ_{i,j} f₂(i) f₁(j) Σ_t N(r; i, t)·N(t; s, j) / |S_s|`,
/// where `N(ρ; i, t)` counts vertices at distance `i` from one point and `t` from another
/// at distance `ρ`.
pub fn kernel_value(
    params: FieldParams,
    f1: &HeckeFunction,
    f2: &HeckeFunction,
    r: u32,
    s: u32,
) -> Result<Rational, KernelError> {
    for h in [r, s] {
        if h > CELL_PATH_CAP {
            return Err(KernelError::Cap { got: h, cap: CELL_PATH_CAP });
        }
    }
    let kappa = FieldKind::E.kappa(params.q());
    let mut acc = Rational::zero();
    for (i, a2) in f2.support() {
        for (j, a1) in f1.support() {
            let mut count = BigInt::zero();
            for t in r.abs_diff(i)..=r + i {
                let n1 = intersection_number(kappa, r, i, t);
                if n1.is_zero() {
                    continue;
                }
                count += n1 * intersection_number(kappa, t, s, j);
            }
            acc += a1 * a2 * big(count);
        }
    }
    Ok(acc / sphere_measure(params, s, FieldKind::E))
}

/// `Σ_{r,s≤n} m(r)·m(s)·K_f(m_r, m_s)` with `m` the F-sphere measure.
pub fn truncated_kernel(
    params: FieldParams,
    f1: &HeckeFunction,
    f2: &HeckeFunction,
    n: u32,
) -> Result<Rational, KernelError> {
    if n > CELL_PATH_CAP {
        return Err(KernelError::Cap { got: n, cap: CELL_PATH_CAP });
    }
    let cells: Vec<(u32, u32)> = (0..=n).flat_map(|r| (0..=n).map(move |s| (r, s))).collect();
    let terms: Result<Vec<Rational>, KernelError> = cells
        .par_iter()
        .map(|&(r, s)| {
            let w = sphere_measure(params, r, FieldKind::F) * sphere_measure(params, s, FieldKind::F);
            Ok(w * kernel_value(params, f1, f2, r, s)?)
        })
        .collect();
    Ok(terms?.into_iter().fold(Rational::zero(), |a, b| a + b))
}

/// `K^n(f)` by explicit enumeration: `x, y` over the F-ball of radius `n`, `a = g·o` over
/// the E-ball carrying `f₂`, and `g·k·y·o` over the translate of the E-sphere of radius
/// `height(y)` to `a`.
pub fn unfolded_truncated_kernel(
    params: FieldParams,
    f1: &HeckeFunction,
    f2: &HeckeFunction,
    n: u32,
    caps: &TreeCaps,
) -> Result<Rational, KernelError> {
    if n > UNFOLDED_CAP {
        return Err(KernelError::Cap { got: n, cap: UNFOLDED_CAP });
    }
    let Some(top2) = f2.max_height() else {
        return Ok(Rational::zero());
    };
    let h_ball = tree_ball(params, n, FieldKind::F, caps)?;
    let a_ball = tree_ball(params, top2, FieldKind::E, caps)?;
    let spheres: Vec<_> =
        (0..=n).map(|s| tree_sphere(params, s, FieldKind::E, caps)).collect::<Result<_, _>>()?;
    let a_elems: Vec<_> = a_ball
        .iter()
        .filter(|a| !f2.coeff(a.distance_to_origin()).is_zero())
        .map(|a| (f2.coeff(a.distance_to_origin()), a.to_element()))
        .collect();
    let total: Rational = h_ball
        .par_iter()
        .map(|x| {
            let xo = x.clone();
            let mut acc = Rational::zero();
            for y in &h_ball {
                let s = y.distance_to_origin() as usize;
                let sphere = &spheres[s];
                let mut sum = Rational::zero();
                for (c2, g) in &a_elems {
                    let mut inner = Rational::zero();
                    for b in sphere {
                        inner += f1.coeff(xo.distance(&b.translate(g)));
                    }
                    sum += c2 * inner;
                }
                acc += sum / Rational::from_integer(sphere.len().into());
            }
            acc
        })
        .reduce(Rational::zero, |a, b| a + b);
    Ok(total)
}

/// One row of a [`KernelReport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelRow {
    pub n: u32,
    pub k_n: Rational,
    pub spectral: Rational,
    pub geometric: Option<Rational>,
}

impl KernelRow {
    pub fn residual_spectral(&self) -> Rational {
        &self.k_n - &self.spectral
    }

    pub fn residual_geometric(&self) -> Option<Rational> {
        self.geometric.as_ref().map(|g| &self.k_n - g)
    }
}

/// Exact `K^n` next to spectral and geometric predictions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelReport {
    pub rows: Vec<KernelRow>,
    pub spectral: LinearAsymptote,
    pub geometric: Option<LinearAsymptote>,
}

#[derive(Serialize)]
struct RowRecord {
    n: u32,
    #[serde(rename = "K_n")]
    k_n: String,
    spectral_pred: String,
    geometric_pred: String,
    residual_spectral: String,
    residual_geometric: String,
}

#[derive(Serialize)]
struct ReportRecord<'a> {
    version: &'a str,
    config_hash: &'a str,
    spectral_slope: String,
    spectral_intercept: String,
    geometric_slope: Option<String>,
    geometric_intercept: Option<String>,
    first_differences: Vec<String>,
    spectral_onset: Option<u32>,
    rows: Vec<RowRecord>,
}

impl KernelReport {
    /// `K^(n+1) − K^n`.
    pub fn first_differences(&self) -> Vec<Rational> {
        self.rows.windows(2).map(|w| &w[1].k_n - &w[0].k_n).collect()
    }

    /// Smallest `n` from which the spectral residual vanishes on the rest of the table.
    pub fn spectral_onset(&self) -> Option<u32> {
        let mut onset = None;
        for row in self.rows.iter().rev() {
            if row.residual_spectral().is_zero() {
                onset = Some(row.n);
            } else {
                break;
            }
        }
        onset
    }

    /// Smallest `n` from which first differences equal `slope`.
    pub fn slope_onset(&self, slope: &Rational) -> Option<u32> {
        let d = self.first_differences();
        let mut onset = None;
        for (k, x) in d.iter().enumerate().rev() {
            if x == slope {
                onset = Some(self.rows[k].n);
            } else {
                break;
            }
        }
        onset
    }

    fn records(&self) -> Vec<RowRecord> {
        let s = |x: &Option<Rational>| x.as_ref().map(|v| v.to_string()).unwrap_or_default();
        self.rows
            .iter()
            .map(|r| RowRecord {
                n: r.n,
                k_n: r.k_n.to_string(),
                spectral_pred: r.spectral.to_string(),
                geometric_pred: s(&r.geometric),
                residual_spectral: r.residual_spectral().to_string(),
                residual_geometric: s(&r.residual_geometric()),
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), KernelError> {
        let io = |e: csv::Error| KernelError::Io(e.to_string());
        let mut wr = csv::Writer::from_writer(w);
        for rec in self.records() {
            wr.serialize(rec).map_err(io)?;
        }
        wr.flush().map_err(|e| KernelError::Io(e.to_string()))
    }

    pub fn to_json(&self, version: &str, config_hash: &str) -> String {
        let rec = ReportRecord {
            version,
            config_hash,
            spectral_slope: self.spectral.slope.to_string(),
            spectral_intercept: self.spectral.intercept.to_string(),
            geometric_slope: self.geometric.as_ref().map(|g| g.slope.to_string()),
            geometric_intercept: self.geometric.as_ref().map(|g| g.intercept.to_string()),
            first_differences: self.first_differences().iter().map(|d| d.to_string()).collect(),
            spectral_onset: self.spectral_onset(),
            rows: self.records(),
        };
        serde_json::to_string_pretty(&rec).expect("plain data serializes")
    }
}

/// Tabulates `K^n` for `n ≤ n_max` against the given predictions and checks that first
/// differences stabilize at the spectral slope (and at the geometric slope when given).
pub fn compare_report(
    params: FieldParams,
    f1: &HeckeFunction,
    f2: &HeckeFunction,
    n_max: u32,
    spectral: &LinearAsymptote,
    geometric: Option<&LinearAsymptote>,
) -> Result<KernelReport, KernelError> {
    let values: Vec<Result<Rational, KernelError>> =
        (0..=n_max).into_par_iter().map(|n| truncated_kernel(params, f1, f2, n)).collect();
    let mut rows = Vec::with_capacity(values.len());
    for (n, v) in values.into_iter().enumerate() {
        let n = n as u32;
        rows.push(KernelRow {
            n,
            k_n: v?,
            spectral: spectral.at(n as u64),
            geometric: geometric.map(|g| g.at(n as u64)),
        });
    }
    let report = KernelReport { rows, spectral: spectral.clone(), geometric: geometric.cloned() };
    if n_max >= 2 {
        let d = report.first_differences();
        let last = d.last().expect("at least two rows");
        if *last != spectral.slope {
            return Err(KernelError::Mismatch(format!(
                "first difference {last} differs from spectral slope {}",
                spectral.slope
            )));
        }
        if let Some(g) = geometric {
            if *last != g.slope {
                return Err(KernelError::Mismatch(format!(
                    "first difference {last} differs from geometric slope {}",
                    g.slope
                )));
            }
        }
    }
    Ok(report)
}

/// `(q+1)²/(q²+1)`: the per-height increment of `K^n` for the indicator pair.
pub fn indicator_increment(params: FieldParams) -> Rational {
    let q = params.q_rat();
    let one = Rational::one();
    (&q + &one).pow(2) / (&q * &q + one)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;
    use crate::group::{GroupElement, TreeVertex};
    use proptest::prelude::*;

    fn fp(q: i64) -> FieldParams {
        FieldParams::new(q, None).unwrap()
    }

    #[test]
    fn kernel_value_examples() {
        let p = fp(3);
        let k = HeckeFunction::indicator_k();
        assert_eq!(kernel_value(p, &k, &k, 0, 0).unwrap(), rat(1, 1));
        assert_eq!(kernel_value(p, &k, &k, 1, 1).unwrap(), rat(1, 10));
        assert_eq!(kernel_value(p, &k, &k, 0, 1).unwrap(), rat(0, 1));
        assert!(kernel_value(p, &k, &k, 9, 0).is_err());
    }

    #[test]
    fn truncated_kernel_indicator_pair() {
        for q in [3i64, 5] {
            let p = fp(q);
            let k = HeckeFunction::indicator_k();
            let inc = indicator_increment(p);
            for n in 0..=6 {
                let expect = Rational::one() + &inc * Rational::from_integer(n.into());
                assert_eq!(truncated_kernel(p, &k, &k, n).unwrap(), expect);
            }
        }
        let p = fp(3);
        let k = HeckeFunction::indicator_k();
        assert_eq!(truncated_kernel(p, &k, &k, 2).unwrap(), rat(21, 5));
    }

    /// `K_f(x, y)` with the sphere around `a` written as `g_a·k·y·o` for explicit `y`.
    fn unfolded_kernel_at(
        p: FieldParams,
        f1: &HeckeFunction,
        f2: &HeckeFunction,
        x: &GroupElement,
        y: &GroupElement,
    ) -> Rational {
        let caps = TreeCaps::default();
        let xo = TreeVertex::from_element(x);
        let s = crate::group::cartan_height(y);
        let sphere = tree_sphere(p, s, FieldKind::E, &caps).unwrap();
        let ball = tree_ball(p, f2.max_height().unwrap(), FieldKind::E, &caps).unwrap();
        let mut acc = Rational::zero();
        for a in &ball {
            let c2 = f2.coeff(a.distance_to_origin());
            if c2.is_zero() {
                continue;
            }
            let g = a.to_element();
            let inner: Rational = sphere.iter().map(|b| f1.coeff(xo.distance(&b.translate(&g)))).sum();
            acc += c2 * inner / Rational::from_integer(sphere.len().into());
        }
        acc
    }

    fn k_h(p: FieldParams, a: i64, b: i64, c: i64, d: i64) -> Option<GroupElement> {
        // integral entries with unit determinant lie in K_H
        let det = a * d - b * c;
        if det % p.q() as i64 == 0 {
            return None;
        }
        GroupElement::from_ints(p, a, b, c, d).ok()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn kernel_is_bi_invariant_in_each_variable(
            r in 0u32..=2, s in 0u32..=1,
            e in prop::array::uniform4(-4i64..5), e2 in prop::array::uniform4(-4i64..5),
        ) {
            let p = fp(3);
            let f1 = HeckeFunction::from_pairs([(0, rat(1, 1)), (1, rat(2, 3))]);
            let f2 = HeckeFunction::from_pairs([(0, rat(1, 2)), (1, rat(1, 1))]);
            let (Some(k1), Some(k2)) = (k_h(p, e[0], e[1], e[2], e[3]), k_h(p, e2[0], e2[1], e2[2], e2[3])) else {
                return Ok(());
            };
            let mr = GroupElement::diag_power(p, r as i64);
            let ms = GroupElement::diag_power(p, s as i64);
            let x = k1.mul_ref(&mr).mul_ref(&k2);
            let y = k2.mul_ref(&ms).mul_ref(&k1);
            let cell = kernel_value(p, &f1, &f2, r, s).unwrap();
            prop_assert_eq!(unfolded_kernel_at(p, &f1, &f2, &x, &y), cell);
        }
    }

    #[test]
    fn cell_path_matches_unfolded_enumeration() {
        let p = fp(3);
        let caps = TreeCaps::default();
        let pairs = [
            (HeckeFunction::indicator_k(), HeckeFunction::indicator_k()),
            (HeckeFunction::cell(1), HeckeFunction::indicator_k()),
            (HeckeFunction::from_pairs([(0, rat(1, 1)), (1, rat(-1, 2))]), HeckeFunction::cell(1)),
        ];
        for (f1, f2) in &pairs {
            for n in 0..=2 {
                assert_eq!(
                    unfolded_truncated_kernel(p, f1, f2, n, &caps).unwrap(),
                    truncated_kernel(p, f1, f2, n).unwrap()
                );
            }
        }
    }

    #[test]
    fn nonnegative_pairs_give_nondecreasing_positive_kernels() {
        let p = fp(3);
        let f = HeckeFunction::from_pairs([(0, rat(1, 1)), (1, rat(1, 3)), (2, rat(2, 1))]);
        let mut prev = Rational::zero();
        for n in 0..=5 {
            let k = truncated_kernel(p, &f, &f, n).unwrap();
            assert!(k >= prev && k > Rational::zero());
            prev = k;
        }
    }

    #[test]
    fn report_for_indicator_pair() {
        let p = fp(3);
        let k = HeckeFunction::indicator_k();
        let pred = LinearAsymptote { slope: rat(8, 5), intercept: rat(1, 1) };
        let rep = compare_report(p, &k, &k, 6, &pred, Some(&pred)).unwrap();
        assert!(rep.rows.iter().all(|r| r.residual_spectral().is_zero()));
        assert_eq!(rep.spectral_onset(), Some(0));
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let col: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
        assert_eq!(&col[..4], &["1", "13/5", "21/5", "29/5"]);
        assert!(rep.to_json("0", "h").contains("\"spectral_onset\": 0"));
        let bad = LinearAsymptote { slope: rat(2, 1), intercept: rat(1, 1) };
        assert!(compare_report(p, &k, &k, 3, &bad, None).is_err());
    }

    #[test]
    fn zero_function_report() {
        let p = fp(3);
        let z = HeckeFunction::zero();
        let rep = compare_report(p, &z, &z, 3, &LinearAsymptote::zero(), None).unwrap();
        assert!(rep.rows.iter().all(|r| r.k_n.is_zero()));
    }

    #[test]
    fn height_one_pair_stabilizes() {
        let p = fp(3);
        let f = HeckeFunction::from_pairs([(0, rat(1, 1)), (1, rat(1, 1))]);
        let vals: Vec<Rational> = (0..=6).map(|n| truncated_kernel(p, &f, &f, n).unwrap()).collect();
        let d: Vec<Rational> = vals.windows(2).map(|w| &w[1] - &w[0]).collect();
        // K^(n+1) − K^n is constant from n = 2 on
        assert_ne!(d[1], d[2]);
        for w in d[2..].windows(2) {
            assert_eq!(w[0], w[1]);
        }
        assert_eq!(d[5], rat(392, 5));
    }
}
