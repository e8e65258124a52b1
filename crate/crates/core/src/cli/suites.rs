//! Named verification suites. Each returns its checks and a JSON payload; nothing here
//! depends on wall-clock time or iteration order of hash maps, so reports are reproducible.

use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::asymptotics::{lemma_expansion, truncated_integral, worked_examples, TruncatedValue};
use crate::exactalg::{Pole, Rational, TwoPiIMultiple};
use crate::geometric::{
    delta_sigma, delta_sigma_diag_closed_form, e1_representatives, geometric_asymptote,
    geometric_bilinear_form, split_gamma, stable_orbital_integral, vm_limit_check, weight_vm0,
    TorusKind,
};
use crate::group::{GroupElement, HeckeFunction};
use crate::kernel::compare_report;
use crate::spectral::{
    generalized_matrix_coefficient, period_relation_residual, regularized_period_and_c,
    spectral_asymptote, spherical_fourier, theorem_terms, translated_period, PeriodFunctions,
    SphericalDatum,
};

use super::config::Resolved;
use super::{compute, rs, CliError, VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Asymptotics,
    Periods,
    Geometry,
    Kernel,
    TraceFormula,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::Asymptotics, Suite::Periods, Suite::Geometry, Suite::Kernel, Suite::TraceFormula];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Asymptotics => "asymptotics",
            Suite::Periods => "periods",
            Suite::Geometry => "geometry",
            Suite::Kernel => "kernel",
            Suite::TraceFormula => "trace-formula",
        }
    }

    pub fn file_stem(self) -> &'static str {
        match self {
            Suite::TraceFormula => "trace_formula",
            s => s.name(),
        }
    }

    pub fn parse(s: &str) -> Option<Vec<Suite>> {
        if s == "all" {
            return Some(Suite::ALL.to_vec());
        }
        Suite::ALL.iter().find(|x| x.name() == s).map(|x| vec![*x])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), ok, detail: detail.into() }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub data: Value,
    /// Extra files `(name, contents)` written next to the JSON report.
    pub attachments: Vec<(String, Vec<u8>)>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.ok)
    }
}

pub fn run_suite(suite: Suite, cfg: &Resolved) -> Result<SuiteReport, CliError> {
    let (checks, data, attachments) = match suite {
        Suite::Asymptotics => asymptotics(),
        Suite::Periods => periods(cfg)?,
        Suite::Geometry => geometry(cfg)?,
        Suite::Kernel => kernel(cfg)?,
        Suite::TraceFormula => trace_formula(cfg)?,
    };
    Ok(SuiteReport { suite, checks, data, attachments })
}

type Outcome = (Vec<Check>, Value, Vec<(String, Vec<u8>)>);

fn asymptotics() -> Outcome {
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for (name, d, slope, intercept) in worked_examples() {
        let e = match lemma_expansion(&d) {
            Ok(e) => e,
            Err(err) => {
                checks.push(check(format!("{name}: expansion"), false, err.to_string()));
                continue;
            }
        };
        let want = (TwoPiIMultiple(Rational::from_integer(slope.into())), TwoPiIMultiple(Rational::from_integer(intercept.into())));
        checks.push(check(
            format!("{name}: slope and intercept"),
            (e.slope.clone(), e.intercept.clone()) == want,
            format!("slope {}·2πi, intercept {}·2πi", e.slope.value(), e.intercept.value()),
        ));
        let mut bad = Vec::new();
        for n in 1..=25u64 {
            match truncated_integral(&d, n) {
                Ok(TruncatedValue::Exact(v)) if v == e.at(n) => {}
                other => bad.push(format!("n = {n}: {other:?}")),
            }
        }
        checks.push(check(
            format!("{name}: exact for n in 1..=25"),
            bad.is_empty(),
            bad.first().cloned().unwrap_or_else(|| "residual 0".into()),
        ));
        rows.push(json!({
            "name": name,
            "slope_over_2pi_i": rs(e.slope.value()),
            "intercept_over_2pi_i": rs(e.intercept.value()),
            "max_residual": if bad.is_empty() { "0" } else { "nonzero" },
        }));
    }
    (checks, json!({ "examples": rows }), Vec::new())
}

fn periods_setup(cfg: &Resolved) -> Result<(SphericalDatum, PeriodFunctions), CliError> {
    let datum = SphericalDatum::build(cfg.params, 8, &cfg.caps).map_err(compute)?;
    let pf = regularized_period_and_c(&datum).map_err(compute)?;
    Ok((datum, pf))
}

fn periods(cfg: &Resolved) -> Result<Outcome, CliError> {
    let (datum, pf) = periods_setup(cfg)?;
    let one = Rational::one();
    let mut checks = Vec::new();
    let bad: Vec<u32> = (datum.n0..=datum.n0 + 5)
        .filter(|&n| !period_relation_residual(&pf, &datum, n).is_zero())
        .collect();
    checks.push(check(
        "period relation exact on [n0, n0+5]",
        bad.is_empty(),
        format!("n0 = {}, failing n: {bad:?}", datum.n0),
    ));
    let c0w1 = datum.c0w.eval(&one);
    checks.push(check("c0(w,1) = -1", c0w1 == Some(-one.clone()), format!("{c0w1:?}")));
    let mu_order = datum.mu.order_at(&one);
    checks.push(check("mu has a double zero at 1", mu_order == 2, format!("order {mu_order}")));
    let stray: Vec<String> = pf
        .p
        .poles()
        .into_iter()
        .filter(|pl| !matches!(pl, Pole::Rational { location, .. } if *location == one))
        .filter(|pl| (pl.modulus() - 1.0).abs() <= 0.5)
        .map(|pl| format!("{pl:?}"))
        .collect();
    checks.push(check(
        "P has a simple pole at 1 and no other pole on the annulus",
        pf.p.pole_order(&one) == 1 && stray.is_empty(),
        format!("order {}, other poles {stray:?}", pf.p.pole_order(&one)),
    ));
    let x = GroupElement::diag_power(cfg.params, 1);
    let moved = translated_period(&datum, &x, &cfg.caps).map_err(compute)?;
    checks.push(check("translated period equals P", moved == pf.p, "x = diag(q, 1)"));
    let data = json!({
        "n0": datum.n0,
        "P": pf.p.to_string(),
        "C1": pf.c1.to_string(),
        "Cw": pf.cw.to_string(),
        "residue_at_1": pf.p.residue(&one).map(|r| rs(&r)).unwrap_or_default(),
    });
    Ok((checks, data, Vec::new()))
}

fn ratio_pairs(cfg: &Resolved) -> Vec<(HeckeFunction, HeckeFunction)> {
    let k = HeckeFunction::indicator_k();
    let mut out = vec![(cfg.f1.clone(), cfg.f2.clone())];
    for pair in [
        (k.clone(), k.clone()),
        (HeckeFunction::cell(1), k.clone()),
        (HeckeFunction::cell(1).add(&k), HeckeFunction::cell(1)),
    ] {
        if !out.contains(&pair) {
            out.push(pair);
        }
    }
    out
}

fn geometry(cfg: &Resolved) -> Result<Outcome, CliError> {
    let p = cfg.params;
    let mut checks = Vec::new();
    let reps = e1_representatives(p, 2);
    let bad = reps
        .iter()
        .filter(|u| delta_sigma(&split_gamma(u)).value() != &delta_sigma_diag_closed_form(u))
        .count();
    checks.push(check("Δσ(diag(u,1)) closed form", bad == 0, format!("{} points, {bad} mismatches", reps.len())));
    let id = GroupElement::identity(p);
    let mut orbit_rows = Vec::new();
    for (name, f) in [("f1", &cfg.f1), ("f2", &cfg.f2)] {
        if f.is_zero() {
            continue;
        }
        let want = spherical_fourier(p, f).eval(&Rational::one()).unwrap_or_else(Rational::zero);
        for u in e1_representatives(p, 1) {
            let g = split_gamma(&u);
            let start = f.max_height().unwrap_or(0) + 2;
            match stable_orbital_integral(f, &id, &g, TorusKind::SplitM, start, &cfg.caps) {
                Ok(res) => {
                    checks.push(check(
                        format!("M({name}) at u = {u} is stable and equals the Fourier value at 1"),
                        res.stable && res.value == want,
                        format!("value {}, radius {}", res.value, res.radius),
                    ));
                    orbit_rows.push(json!({"f": name, "u": u.to_string(), "value": rs(&res.value), "radius": res.radius}));
                }
                Err(e) => checks.push(check(format!("M({name}) at u = {u}"), false, e.to_string())),
            }
        }
    }
    let mut limit_bad = Vec::new();
    for zp in -2..=2 {
        for zpb in -2..=2 {
            for n in [0, 3, 10] {
                let r = vm_limit_check(p.q(), zp, zpb, n);
                if !r.ok {
                    limit_bad.push(format!("({zp}, {zpb}, {n}): error {:e}", r.error));
                }
            }
        }
    }
    checks.push(check("weight limit identity on a 5×5×3 grid", limit_bad.is_empty(), limit_bad.join("; ")));
    let m = GroupElement::diag_power(p, 1);
    let w = weight_vm0(&m, &id, &id, &id).map_err(compute)?;
    checks.push(check("v0_M(diag(q,1), 1, 1, 1) = -1", w == -1, format!("{w}")));
    let split: Vec<_> = cfg.tori.iter().filter(|t| t.kind == TorusKind::SplitM).cloned().collect();
    let mut ratios = Vec::new();
    let c1 = crate::exactalg::RatFunc::constant(Rational::one() + p.qpow(-1));
    for (f1, f2) in ratio_pairs(cfg) {
        let mut b = Rational::zero();
        for t in &split {
            b += geometric_bilinear_form(p, &f1, &f2, t, &cfg.caps).map_err(compute)?;
        }
        let m11 = generalized_matrix_coefficient(p, &c1, &c1, &f1, &f2).eval(&Rational::one());
        if let Some(m11) = m11.filter(|m| !m.is_zero()) {
            ratios.push(b / m11);
        }
    }
    checks.push(check(
        "geometric bilinear form / m11(f)(1) constant over pairs",
        ratios.len() >= 3 && ratios.windows(2).all(|w| w[0] == w[1]),
        ratios.iter().map(rs).collect::<Vec<_>>().join(", "),
    ));
    let asym = geometric_asymptote(p, &cfg.f1, &cfg.f2, &cfg.tori, &cfg.caps).map_err(compute)?;
    let data = json!({
        "orbital_integrals": orbit_rows,
        "ratio": ratios.first().map(rs),
        "geometric_slope": rs(&asym.slope),
        "geometric_intercept": rs(&asym.intercept),
    });
    Ok((checks, data, Vec::new()))
}

/// `c₀·δ₀ + c₁·δ₁ + …` over the support.
fn label(f: &HeckeFunction) -> String {
    if f.is_zero() {
        return "0".into();
    }
    f.support().map(|(h, c)| format!("{c}·δ{h}")).collect::<Vec<_>>().join(" + ")
}

fn formal_degree(cfg: &Resolved) -> Result<Rational, CliError> {
    cfg.formal_degree
        .clone()
        .ok_or_else(|| CliError::Usage("formal degree not set; run `relform calibrate`".into()))
}

fn kernel(cfg: &Resolved) -> Result<Outcome, CliError> {
    let d = formal_degree(cfg)?;
    let (_, pf) = periods_setup(cfg)?;
    let p = cfg.params;
    let predicted = spectral_asymptote(p, &pf, &cfg.f1, &cfg.f2, &[], &d).map_err(compute)?;
    let geo = geometric_asymptote(p, &cfg.f1, &cfg.f2, &cfg.tori, &cfg.caps).map_err(compute)?;
    let mut checks = Vec::new();
    let (report, data, attachments) = match compare_report(p, &cfg.f1, &cfg.f2, cfg.n_max, &predicted.kernel_units, Some(&geo)) {
        Ok(r) => {
            let mut csv = Vec::new();
            r.write_csv(&mut csv).map_err(compute)?;
            let json_text = r.to_json(VERSION, &cfg.hash);
            let data: Value = serde_json::from_str(&json_text).expect("own output parses");
            (Some(r), data, vec![("kernel.csv".to_string(), csv)])
        }
        Err(e) => {
            checks.push(check("first differences match the spectral and geometric slopes", false, e.to_string()));
            (None, Value::Null, Vec::new())
        }
    };
    if let Some(r) = &report {
        let d = r.first_differences();
        checks.push(check(
            "first differences match the spectral and geometric slopes",
            true,
            format!("slope {}, first differences {}", predicted.kernel_units.slope, d.iter().map(rs).collect::<Vec<_>>().join(", ")),
        ));
        let onset = r.slope_onset(&predicted.kernel_units.slope);
        checks.push(check(
            "first differences constant from the onset",
            onset.is_some(),
            format!("onset {onset:?}"),
        ));
        let onset = r.spectral_onset();
        checks.push(check(
            "spectral prediction exact from the onset",
            onset.is_some_and(|o| o + 2 <= cfg.n_max),
            format!("onset {onset:?}"),
        ));
        let k = HeckeFunction::indicator_k();
        if cfg.f1 == k && cfg.f2 == k {
            let nonzero = r.rows.iter().filter(|row| !row.residual_spectral().is_zero()).count();
            checks.push(check("indicator pair: spectral residual identically 0", nonzero == 0, format!("{nonzero} nonzero rows")));
        }
    }
    Ok((checks, data, attachments))
}

fn trace_formula(cfg: &Resolved) -> Result<Outcome, CliError> {
    let d = formal_degree(cfg)?;
    let (_, pf) = periods_setup(cfg)?;
    let p = cfg.params;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for (f1, f2) in ratio_pairs(cfg) {
        let predicted = spectral_asymptote(p, &pf, &f1, &f2, &[], &d).map_err(compute)?;
        let geo = geometric_asymptote(p, &f1, &f2, &cfg.tori, &cfg.caps).map_err(compute)?;
        let terms = theorem_terms(p, &pf, &f1, &f2, &d).map_err(compute)?;
        let name = format!("{} ⊗ {}", label(&f1), label(&f2));
        checks.push(check(
            format!("{name}: spectral slope = geometric slope"),
            predicted.kernel_units.slope == geo.slope,
            format!("{} vs {}", predicted.kernel_units.slope, geo.slope),
        ));
        checks.push(check(
            format!("{name}: term-by-term slope and single-R intercept match"),
            terms.slope == predicted.kernel_units.slope && terms.intercept(1) == predicted.kernel_units.intercept,
            format!("intercept {} (R counted twice: {})", terms.intercept(1), terms.intercept(2)),
        ));
        rows.push(json!({
            "pair": name,
            "spectral_slope": rs(&predicted.kernel_units.slope),
            "spectral_intercept": rs(&predicted.kernel_units.intercept),
            "geometric_slope": rs(&geo.slope),
            "geometric_intercept": rs(&geo.intercept),
            "intercept_with_r_twice": rs(&terms.intercept(2)),
        }));
    }
    Ok((checks, json!({ "formal_degree": rs(&d), "pairs": rows }), Vec::new()))
}
