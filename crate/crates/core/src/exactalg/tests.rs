use num_complex::Complex64;
use num_traits::{One, Zero};
use proptest::prelude::*;

use super::*;

fn z() -> RatFunc {
    RatFunc::z()
}

fn c(n: i64) -> RatFunc {
    RatFunc::from_int(n)
}

fn one_minus(f: &RatFunc) -> RatFunc {
    &c(1) - f
}

fn div(a: &RatFunc, b: &RatFunc) -> RatFunc {
    a.checked_div(b).unwrap()
}

#[test]
fn normalize_examples() {
    let zz = &z() * &z();
    let f = div(&one_minus(&zz), &one_minus(&z()));
    assert_eq!(f, &c(1) + &z());
    assert_eq!(div(&z(), &z()), c(1));
    let two = &(&c(2) * &z()) - &c(2);
    let four = &(&c(4) * &z()) - &c(4);
    assert_eq!(div(&two, &four), RatFunc::constant(rat(1, 2)));
    assert!(RatFunc::new(Poly::one(), Poly::zero()).is_err());
}

#[test]
fn tilde_examples() {
    assert_eq!(z().tilde(), RatFunc::monomial(-1, rat(1, 1)));
    let f = div(&c(2), &one_minus(&z()));
    let expect = div(&(&c(2) * &z()), &(&z() - &c(1)));
    assert_eq!(f.tilde(), expect);
    assert_eq!(c(1).tilde(), c(1));
}

#[test]
fn residue_examples() {
    let n = 3;
    let f = div(&RatFunc::monomial(n + 1, rat(1, 1)), &one_minus(&z()));
    assert_eq!(f.residue(&rat(1, 1)).unwrap(), rat(-1, 1));
    let zi = RatFunc::monomial(-1, rat(1, 1));
    let g = div(&RatFunc::monomial(-(n + 1), rat(1, 1)), &one_minus(&zi));
    assert_eq!(g.residue(&rat(1, 1)).unwrap(), rat(1, 1));
    assert_eq!(zi.residue(&rat(1, 1)).unwrap(), rat(0, 1));
}

#[test]
fn residue_order_cap() {
    let f = one_minus(&z()).pow(-5).unwrap();
    assert!(matches!(
        f.residue(&rat(1, 1)),
        Err(AlgebraError::UnsupportedPoleOrder { order: 5, .. })
    ));
    let g = one_minus(&z()).pow(-4).unwrap();
    assert_eq!(g.residue(&rat(1, 1)).unwrap(), rat(0, 1));
}

#[test]
fn contour_examples() {
    let f = div(&c(1), &(&z() * &one_minus(&z())));
    assert_eq!(contour_minus(&f).unwrap(), TwoPiIMultiple(rat(1, 1)));
    let g = div(&c(-2), &one_minus(&z()).pow(2).unwrap());
    assert_eq!(contour_minus(&g).unwrap(), TwoPiIMultiple::zero());
    let diff = contour_plus(&f).unwrap() - contour_minus(&f).unwrap();
    assert_eq!(diff, TwoPiIMultiple(rat(-1, 1)));
    assert_eq!(contour_plus(&f).unwrap(), TwoPiIMultiple::zero());

    let zi = RatFunc::monomial(-1, rat(1, 1));
    let h = div(&RatFunc::monomial(-2, rat(1, 1)), &one_minus(&zi).pow(2).unwrap());
    // z^-2 / (1 - 1/z)^2 = 1 / (z - 1)^2: no residue anywhere.
    assert_eq!(contour_plus(&h).unwrap(), TwoPiIMultiple::zero());
    assert_eq!(contour_plus(&zi).unwrap(), TwoPiIMultiple(rat(1, 1)));
}

#[test]
fn contour_errors() {
    let f = div(&c(1), &(&z() + &c(1)));
    assert!(matches!(contour_minus(&f), Err(AlgebraError::PoleOnContour(_))));
    let g = div(&c(1), &(&(&z() * &z()) - &RatFunc::constant(rat(1, 2))));
    assert!(matches!(contour_minus(&g), Err(AlgebraError::Factorization(_))));
}

#[test]
fn laurent_constant_examples() {
    assert_eq!(laurent_constant_coeff(&LaurentPoly::geometric(-4, 4)), rat(1, 1));
    assert_eq!(laurent_constant_coeff(&LaurentPoly::monomial(3, rat(1, 1))), rat(0, 1));
    let s = LaurentPoly::geometric(-2, 2);
    assert_eq!(laurent_constant_coeff(&(&s * &s.tilde())), rat(5, 1));
}

#[test]
fn quadrature_examples() {
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let f = div(&c(1), &(&z() * &one_minus(&z())));
    assert!((numeric_quadrature(&f, 0.5, 512).unwrap() - two_pi_i).norm() < 1e-10);
    let sq = &z() * &z();
    assert!(numeric_quadrature(&sq, 0.9, 256).unwrap().norm() < 1e-10);
    let g = div(&c(-2), &one_minus(&z()).pow(2).unwrap());
    let exact = contour_minus(&g).unwrap().to_complex();
    assert!((numeric_quadrature(&g, 0.99, 8192).unwrap() - exact).norm() < 1e-6);
    assert!(matches!(
        numeric_quadrature(&g, 1.0, 64),
        Err(AlgebraError::Conditioning(_))
    ));
}

#[test]
fn quadrature_converges_with_nodes() {
    // Poles at 1/3, 0, and 5/4; circle radius 0.8.
    let f = div(
        &(&(&z() * &z()) + &c(2)),
        &(&(&z() * &(&(&c(3) * &z()) - &c(1))) * &(&(&c(4) * &z()) - &c(5))),
    );
    let exact = contour_minus(&f).unwrap().to_complex();
    let errs: Vec<f64> = [1usize << 8, 1 << 10, 1 << 12]
        .iter()
        .map(|&n| (numeric_quadrature(&f, 0.8, n).unwrap() - exact).norm())
        .collect();
    assert!(errs[0] < 1e-8);
    assert!(errs[1] <= errs[0] / 2.0 || errs[1] < 1e-13);
    assert!(errs[2] <= errs[1] / 2.0 || errs[2] < 1e-13);
}

#[test]
fn minus_integral_decays_for_inner_poles() {
    let f = div(&c(1), &(&(&c(3) * &z()) - &c(1)).pow(2).unwrap());
    let mut prev = f64::INFINITY;
    for n in 1..=30 {
        let g = f.shift_by(n);
        let v = num_traits::ToPrimitive::to_f64(contour_minus(&g).unwrap().value())
            .unwrap()
            .abs();
        assert!(v < prev, "n = {n}");
        prev = v;
    }
}

#[test]
fn derivative_matches_quotient_rule() {
    let f = div(&(&z() + &c(2)), &(&z() - &RatFunc::constant(rat(1, 3))));
    let d = f.derivative();
    // f = (z + 2)/(z - 1/3): f' = (-1/3 - 2)/(z - 1/3)^2
    let expect = div(
        &RatFunc::constant(rat(-7, 3)),
        &(&z() - &RatFunc::constant(rat(1, 3))).pow(2).unwrap(),
    );
    assert_eq!(d, expect);
    let l = RatFunc::monomial(-2, rat(3, 1));
    assert_eq!(l.derivative(), RatFunc::monomial(-3, rat(-6, 1)));
}

fn small_rat() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=5).prop_map(|(n, d)| rat(n, d))
}

fn arb_poly(max_deg: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(small_rat(), 1..=max_deg + 1).prop_map(Poly::from_coeffs)
}

/// Rational functions whose denominators split over a fixed set of rational points.
fn arb_ratfunc() -> impl Strategy<Value = RatFunc> {
    let points = prop::collection::vec(
        prop::sample::select(vec![rat(1, 3), rat(-1, 2), rat(3, 1), rat(-5, 2), rat(1, 1)]),
        0..4,
    );
    (arb_poly(4), points, -3i64..=3).prop_map(|(n, pts, s)| {
        let mut den = Poly::one();
        for p in &pts {
            den = &den * &Poly::linear(p);
        }
        RatFunc::new(n, den).unwrap().shift_by(s)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tilde_is_involutive(f in arb_ratfunc()) {
        prop_assert_eq!(f.tilde().tilde(), f);
    }

    #[test]
    fn tilde_conjugates_on_circle(f in arb_ratfunc(), t in 0.1f64..6.0) {
        let zc = Complex64::from_polar(1.0, t);
        if f.poles().iter().all(|p| (p.modulus() - 1.0).abs() > 1e-9) {
            let a = f.tilde().eval_complex(zc);
            let b = f.eval_complex(zc).conj();
            prop_assert!((a - b).norm() <= 1e-8 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn arithmetic_matches_evaluation(f in arb_ratfunc(), g in arb_ratfunc(), x in small_rat()) {
        if let (Some(a), Some(b)) = (f.eval(&x), g.eval(&x)) {
            prop_assert_eq!((&f + &g).eval(&x), Some(&a + &b));
            prop_assert_eq!((&f * &g).eval(&x), Some(&a * &b));
            prop_assert_eq!((&f - &g).eval(&x), Some(&a - &b));
        }
    }

    #[test]
    fn plus_minus_gap_is_residue_at_one(f in arb_ratfunc()) {
        let p = contour_plus(&f);
        let m = contour_minus(&f);
        if let (Ok(p), Ok(m)) = (p, m) {
            prop_assert_eq!(p - m, TwoPiIMultiple(f.residue(&Rational::one()).unwrap()));
        }
    }

    #[test]
    fn residue_matches_small_circle(f in arb_ratfunc()) {
        for pole in f.poles() {
            if let Pole::Rational { location, order } = pole {
                if location.is_zero() && order > MAX_POLE_ORDER {
                    continue;
                }
                let res = f.residue(&location).unwrap();
                let cx = Complex64::new(num_traits::ToPrimitive::to_f64(&location).unwrap(), 0.0);
                let num = numeric_quadrature_centered(&f, cx, 0.05, 2048).unwrap();
                let exact = TwoPiIMultiple(res).to_complex();
                prop_assert!((num - exact).norm() < 1e-8 * (1.0 + exact.norm()), "{} vs {}", num, exact);
            }
        }
    }
}
