use super::*;
use crate::exactalg::{rat, Pole};
use crate::group::tree_ball;
use num_complex::Complex64;

fn fp(q: i64) -> FieldParams {
    FieldParams::new(q, None).unwrap()
}

fn datum(q: i64) -> SphericalDatum {
    SphericalDatum::build(fp(q), 8, &TreeCaps::default()).unwrap()
}

#[test]
fn shell_sums_converge_to_closed_form() {
    let q = 3.0f64;
    let z = 0.5f64;
    let closed = intertwining_constant(fp(3)).eval(&rat(1, 2)).unwrap();
    let closed = closed.numer().to_string().parse::<f64>().unwrap()
        / closed.denom().to_string().parse::<f64>().unwrap();
    let vol_o = 1.0 / (1.0 + q.powi(-2));
    let mut s = 1.0;
    for k in 1..=20 {
        let measure = q.powi(2 * k) * (1.0 - q.powi(-2));
        let value = (z / q).powi(2 * k);
        s += measure * value;
    }
    assert!((s * vol_o - closed).abs() < 1e-10);
}

#[test]
fn intertwining_constant_finite_at_zero() {
    for q in [3, 5, 7] {
        let p = fp(q);
        let c0 = intertwining_constant(p).eval(&Rational::zero()).unwrap();
        assert_eq!(c0, (Rational::one() + p.qpow(-2)).recip());
    }
}

#[test]
fn mu_double_zero_and_positive_on_circle() {
    for q in [3, 5] {
        let mu = mu_function(fp(q));
        assert_eq!(mu.order_at(&Rational::one()), 2);
        for p in mu.poles() {
            assert!((p.modulus() - 1.0).abs() > 0.1);
        }
        for k in 0..64 {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 64.0;
            let v = mu.eval_complex(Complex64::from_polar(1.0, th));
            assert!(v.re >= -1e-12 && v.im.abs() < 1e-9, "{v}");
        }
    }
}

#[test]
fn normalized_scalar_identities() {
    for q in [3, 5, 7] {
        let c = normalized_c_scalar(fp(q));
        assert_eq!(&c * &c.tilde(), RatFunc::one());
        assert_eq!(c.eval(&Rational::one()), Some(-Rational::one()));
        for p in c.poles() {
            assert!((p.modulus() - 1.0).abs() > 0.1);
        }
    }
    assert_eq!(normalized_c_identity(), RatFunc::one());
}

/// Macdonald's formula with `c(z) = (1 − z²/q²)/((1 + 1/q²)(1 − z²))`.
fn macdonald(q: i64, r: i64) -> RatFunc {
    let k = rat(q * q, 1);
    let z2 = RatFunc::monomial(2, Rational::one());
    let c = (&RatFunc::one() - &z2.scale(&k.recip()))
        .checked_div(&(&RatFunc::one() - &z2).scale(&(Rational::one() + k.recip())))
        .unwrap();
    let zr = RatFunc::monomial(r, Rational::one());
    (&(&c.tilde() * &zr) + &(&c * &zr.tilde())).scale(&rat(q, 1).pow(-r as i32))
}

#[test]
fn spherical_values_match_macdonald() {
    for q in [3, 5] {
        let phi = spherical_values(fp(q), 6);
        for r in 0..=6 {
            assert_eq!(phi[r], macdonald(q, r as i64), "q={q} r={r}");
        }
    }
}

#[test]
fn cell_values_and_threshold() {
    for q in [3, 5] {
        let d = datum(q);
        assert_eq!(d.n0, 0);
        assert_eq!(d.cell_value(0), &RatFunc::one() + &d.c0w);
        for r in 0..=8u32 {
            assert_eq!(d.cell_value(r), d.asymptotic_cell_value(r));
            // functional equation: z ↦ 1/z multiplies by c⁰(w, 1/z)
            assert_eq!(d.cell_value(r).tilde(), &d.c0w.tilde() * &d.cell_value(r));
        }
    }
}

#[test]
fn cell_value_ratio_extracts_c0w() {
    let d = datum(3);
    let p = d.params;
    for r in [1u32, 2] {
        let g = |t: u32| d.cell_value(t).scale(&p.qpow(t as i64));
        let (a, b) = fit_two_exponential(&g(r), &g(r + 1), r as i64);
        assert_eq!(a, RatFunc::one());
        assert_eq!(b, normalized_c_scalar(p));
    }
}

#[test]
fn truncated_period_basics() {
    let d = datum(3);
    assert_eq!(truncated_period(&d, 0), d.cell_value(0));
    for n in 0..6 {
        let diff = &truncated_period(&d, n + 1) - &truncated_period(&d, n);
        assert_eq!(diff, d.cell_value(n + 1).scale(&sphere_measure(d.params, n + 1, FieldKind::F)));
    }
}

#[test]
fn period_relation_holds_exactly() {
    for q in [3, 5] {
        let d = datum(q);
        let pf = regularized_period_and_c(&d).unwrap();
        for n in d.n0..=d.n0 + 5 {
            assert!(period_relation_residual(&pf, &d, n).is_zero(), "q={q} n={n}");
        }
    }
}

#[test]
fn period_pole_structure() {
    for q in [3, 5] {
        let d = datum(q);
        let pf = regularized_period_and_c(&d).unwrap();
        let one = Rational::one();
        assert_eq!(pf.p.pole_order(&one), 1);
        for pl in pf.p.poles() {
            match pl {
                Pole::Rational { location, .. } if location == one => {}
                other => assert!((other.modulus() - 1.0).abs() > 0.5, "{other:?}"),
            }
        }
        let c1 = pf.c1.eval(&one).unwrap();
        let cw = pf.cw.eval(&one).unwrap();
        assert_eq!(c1, -cw.clone());
        assert_eq!(pf.p.residue(&one).unwrap(), -c1 + cw);
    }
}

#[test]
fn translated_period_equals_period() {
    let caps = TreeCaps::default();
    for q in [3, 5] {
        let d = datum(q);
        let p = d.params;
        let pf = regularized_period_and_c(&d).unwrap();
        let xs = [
            GroupElement::diag_power(p, 1),
            GroupElement::diag_power(p, 2),
            GroupElement::from_ints(p, 1, 1, 0, q).unwrap(),
            GroupElement::from_ints(p, q * q, 1, q, 2).unwrap(),
        ];
        for x in &xs {
            assert_eq!(translated_period(&d, x, &caps).unwrap(), pf.p, "x = {x:?}");
        }
    }
}

/// `Σ_{v ∈ ball} f(d(o,v))·(z/q)^level(v)`.
fn fourier_by_tree_sum(q: i64, f: &HeckeFunction) -> RatFunc {
    let p = fp(q);
    let r = f.max_height().unwrap();
    let ball = tree_ball(p, r, FieldKind::E, &TreeCaps::default()).unwrap();
    ball.iter().fold(RatFunc::zero(), |acc, v| {
        let c = f.coeff(v.distance_to_origin());
        &acc + &RatFunc::monomial(v.level(), c * p.qpow(-v.level()))
    })
}

#[test]
fn spherical_fourier_examples() {
    let p = fp(3);
    assert_eq!(spherical_fourier(p, &HeckeFunction::indicator_k()), RatFunc::one());
    let t1 = spherical_fourier(p, &HeckeFunction::cell(1));
    assert_eq!(t1, (&RatFunc::z() + &RatFunc::monomial(-1, Rational::one())).scale(&rat(3, 1)));
    assert_eq!(t1.tilde(), t1);
    for f in [
        HeckeFunction::cell(1),
        HeckeFunction::cell(2),
        HeckeFunction::from_pairs([(0, rat(2, 3)), (1, rat(-1, 2)), (2, rat(5, 1))]),
    ] {
        assert_eq!(spherical_fourier(p, &f), fourier_by_tree_sum(3, &f));
    }
    let f = HeckeFunction::cell(1);
    let g = HeckeFunction::from_pairs([(0, rat(1, 1)), (2, rat(3, 7))]);
    let lhs = spherical_fourier(p, &f.scale(&rat(2, 5)).add(&g));
    let rhs = &spherical_fourier(p, &f).scale(&rat(2, 5)) + &spherical_fourier(p, &g);
    assert_eq!(lhs, rhs);
    assert_eq!(spherical_fourier(p, &HeckeFunction::cell(2)).eval(&Rational::one()), Some(rat(26, 1)));
}

#[test]
fn matrix_coefficient_examples() {
    let d = datum(3);
    let pf = regularized_period_and_c(&d).unwrap();
    let k = HeckeFunction::indicator_k();
    let m = generalized_matrix_coefficient(d.params, &pf.c1, &pf.c1, &k, &k);
    assert_eq!(m, &pf.c1 * &pf.c1.tilde());
    let m0 = generalized_matrix_coefficient(d.params, &RatFunc::zero(), &pf.c1, &k, &k);
    assert!(m0.is_zero());
}

/// `(I − S)(I + S)^(−1)` for skew-symmetric `S`, via Gauss–Jordan over the rationals.
fn cayley(s: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = s.len();
    let id = |i: usize, j: usize| if i == j { Rational::one() } else { Rational::zero() };
    let mut a: Vec<Vec<Rational>> =
        (0..n).map(|i| (0..n).map(|j| id(i, j) + &s[i][j]).collect()).collect();
    let mut b: Vec<Vec<Rational>> =
        (0..n).map(|i| (0..n).map(|j| id(i, j) - &s[i][j]).collect()).collect();
    // solve X·A = B  ⇔  Aᵀ Xᵀ = Bᵀ
    let t = |m: &Vec<Vec<Rational>>| -> Vec<Vec<Rational>> {
        (0..n).map(|i| (0..n).map(|j| m[j][i].clone()).collect()).collect()
    };
    a = t(&a);
    b = t(&b);
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for j in 0..n {
            a[col][j] = &a[col][j] * &inv;
            b[col][j] = &b[col][j] * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    a[r][j] = &a[r][j] - &f * &a[col][j];
                    b[r][j] = &b[r][j] - &f * &b[col][j];
                }
            }
        }
    }
    t(&b)
}

#[test]
fn matrix_coefficient_is_basis_independent() {
    let d = datum(3);
    let p = d.params;
    let pf = regularized_period_and_c(&d).unwrap();
    let model = ModelSpace {
        xi: vec![pf.c1.clone(), RatFunc::from_int(3), RatFunc::z()],
        xi_prime: vec![pf.cw.clone(), RatFunc::monomial(-2, rat(1, 2)), RatFunc::from_int(-1)],
    };
    let f1 = HeckeFunction::cell(1);
    let f2 = HeckeFunction::from_pairs([(0, rat(1, 1)), (1, rat(2, 1))]);
    let std: Vec<Vec<Rational>> = (0..3)
        .map(|i| (0..3).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    let base = model.matrix_coefficient_in_basis(p, &f1, &f2, &std);
    assert_eq!(base, generalized_matrix_coefficient(p, &pf.c1, &pf.cw, &f1, &f2));
    let skews = [
        [rat(1, 2), rat(-2, 3), rat(3, 1)],
        [rat(0, 1), rat(1, 1), rat(-1, 4)],
        [rat(5, 7), rat(0, 1), rat(0, 1)],
    ];
    for [x, y, w] in skews {
        let s = vec![
            vec![Rational::zero(), x.clone(), y.clone()],
            vec![-x.clone(), Rational::zero(), w.clone()],
            vec![-y, -w, Rational::zero()],
        ];
        let o = cayley(&s);
        // rows of an orthogonal matrix form an orthonormal basis
        for i in 0..3 {
            for j in 0..3 {
                let dot: Rational = (0..3).map(|k| &o[i][k] * &o[j][k]).sum();
                assert_eq!(dot, if i == j { Rational::one() } else { Rational::zero() });
            }
        }
        assert_eq!(model.matrix_coefficient_in_basis(p, &f1, &f2, &o), base);
    }
}

fn case(f: bool, e: bool) -> DeltaLabel {
    DeltaLabel { trivial_on_f: f, trivial_on_e1: e }
}

#[test]
fn plugin_case_gates() {
    let z = RatFunc::z();
    let one_minus_z = &RatFunc::one() - &z;
    // case 1: everything vanishes
    let c1 = SpectralDatumPlugin { label: case(false, false), p: None, c1: None, cw: None };
    for n in 0..4 {
        assert!(c1.truncated_period(n).unwrap().is_zero());
    }
    let bad = SpectralDatumPlugin { p: Some(z.clone()), ..c1.clone() };
    assert!(matches!(bad.admit(), Err(SpectralError::Plugin(_))));

    // case 3: C1(1) = Cw(1)
    let ok3 = SpectralDatumPlugin {
        label: case(true, false),
        p: None,
        c1: Some(RatFunc::from_int(2)),
        cw: Some(&RatFunc::one() + &z),
    };
    assert!(ok3.admit().is_ok());
    let bad3 = SpectralDatumPlugin { cw: Some(RatFunc::from_int(-2)), ..ok3.clone() };
    assert!(bad3.admit().is_err());
    let missing = SpectralDatumPlugin { c1: None, ..ok3.clone() };
    assert!(matches!(missing.admit(), Err(SpectralError::MissingData(_))));

    // case 4: C1(1) = −Cw(1) and a simple pole at 1 with the matching residue
    let ok4 = SpectralDatumPlugin {
        label: case(true, true),
        p: Some(RatFunc::from_int(2).checked_div(&one_minus_z).unwrap()),
        c1: Some(RatFunc::one()),
        cw: Some(RatFunc::from_int(-1)),
    };
    assert!(ok4.admit().is_ok());
    let bad4 = SpectralDatumPlugin { cw: Some(RatFunc::from_int(1)), ..ok4.clone() };
    assert!(bad4.admit().is_err());
    let bad_res = SpectralDatumPlugin {
        p: Some(RatFunc::from_int(3).checked_div(&one_minus_z).unwrap()),
        ..ok4.clone()
    };
    assert!(bad_res.admit().is_err());
    let e = ok4.expansion(&RatFunc::one()).unwrap();
    assert_eq!(e.slope.value(), &rat(2, 1));
    assert_eq!(e.intercept.value(), &rat(1, 1));
}

#[test]
fn plugin_record_round_trip() {
    let pl = SpectralDatumPlugin {
        label: case(true, true),
        p: Some(RatFunc::from_int(2).checked_div(&(&RatFunc::one() - &RatFunc::z())).unwrap()),
        c1: Some(RatFunc::monomial(-1, rat(3, 4))),
        cw: None,
    };
    let s = serde_json::to_string(&pl.to_record()).unwrap();
    let back: PluginRecord = serde_json::from_str(&s).unwrap();
    assert_eq!(SpectralDatumPlugin::from_record(&back).unwrap(), pl);
}

#[test]
fn discrete_series_partial_sums_converge_monotonically() {
    // cells m(r)·ρ^r with ρ = 1/(2q): positive, geometrically decaying
    let p = fp(3);
    let cells: Vec<Rational> = (0..30)
        .map(|r| sphere_measure(p, r, FieldKind::F) * rat(1, 6).pow(r as i32))
        .collect();
    let sums = discrete_series_partial_sums(&cells);
    let limit = Rational::one() + rat(4, 3) * rat(1, 2) / (Rational::one() - rat(1, 2));
    let gaps: Vec<Rational> = sums.iter().map(|s| &limit - s).collect();
    for w in gaps.windows(2) {
        assert!(w[1] < w[0] && w[1] > Rational::zero());
    }
}

#[test]
fn indicator_pair_asymptote() {
    let d = datum(3);
    let p = d.params;
    let pf = regularized_period_and_c(&d).unwrap();
    let k = HeckeFunction::indicator_k();
    let dd = plancherel_formal_degree(p);
    let a = spectral_asymptote(p, &pf, &k, &k, &[], &dd).unwrap();
    assert_eq!(a.kernel_units.slope, rat(8, 5));
    assert_eq!(a.kernel_units.intercept, Rational::one());
    assert_eq!(a.expansion.slope.value(), &rat(32, 9));
    let lam = rat(-7, 3);
    let b = spectral_asymptote(p, &pf, &k.scale(&lam), &k, &[], &dd).unwrap();
    assert_eq!(b.kernel_units, a.kernel_units.scale(&lam));
    let z = spectral_asymptote(p, &pf, &HeckeFunction::zero(), &k, &[], &dd).unwrap();
    assert_eq!(z.kernel_units, LinearAsymptote::zero());
}

#[test]
fn calibration_recovers_plancherel_mass() {
    for q in [3, 5] {
        let d = datum(q);
        let p = d.params;
        let pf = regularized_period_and_c(&d).unwrap();
        let qq = rat(q, 1);
        let kernel_slope = (&qq + Rational::one()).pow(2) / (&qq * &qq + Rational::one());
        assert_eq!(calibrate_formal_degree(p, &pf, &kernel_slope).unwrap(), plancherel_formal_degree(p));
    }
}

#[test]
fn theorem_terms_with_single_r_match_lemma_route() {
    let d = datum(3);
    let p = d.params;
    let pf = regularized_period_and_c(&d).unwrap();
    let dd = plancherel_formal_degree(p);
    let pairs = [
        (HeckeFunction::indicator_k(), HeckeFunction::indicator_k()),
        (HeckeFunction::cell(1), HeckeFunction::cell(1)),
        (HeckeFunction::cell(1), HeckeFunction::from_pairs([(0, rat(1, 1)), (1, rat(1, 2))])),
    ];
    for (f1, f2) in &pairs {
        let a = spectral_asymptote(p, &pf, f1, f2, &[], &dd).unwrap();
        let t = theorem_terms(p, &pf, f1, f2, &dd).unwrap();
        assert_eq!(t.slope, a.kernel_units.slope);
        assert_eq!(t.intercept(1), a.kernel_units.intercept);
        assert!(!t.r.is_zero());
        assert_ne!(t.intercept(2), a.kernel_units.intercept);
    }
}
