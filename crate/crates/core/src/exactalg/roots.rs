//! Rational root isolation and a numeric root fallback.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::Poly;
use super::Rational;

/// Trial-division bound used when enumerating divisors for the rational root test.
const TRIAL_LIMIT: u64 = 1 << 20;
/// Candidate cap for the rational root test.
const MAX_CANDIDATES: usize = 200_000;

/// Result of splitting off the rational linear factors of a polynomial.
#[derive(Clone, Debug)]
pub struct RationalFactorization {
    /// Distinct rational roots with multiplicities, sorted ascending.
    pub roots: Vec<(Rational, usize)>,
    /// Monic cofactor with no rational roots (constant 1 when fully split).
    pub rest: Poly,
}

/// Integer coefficients of a scalar multiple of `p`, made primitive.
fn primitive_integer(p: &Poly) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for c in p.coeffs() {
        l = l.lcm(c.denom());
    }
    let ints: Vec<BigInt> = p
        .coeffs()
        .iter()
        .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
        .collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Prime factorization by trial division; a leftover cofactor is kept as one factor.
fn factor(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut out = Vec::new();
    let mut n = n.clone();
    let mut d = 2u64;
    while d <= TRIAL_LIMIT {
        let bd = BigUint::from(d);
        if &bd * &bd > n {
            break;
        }
        let mut e = 0;
        while (&n % &bd).is_zero() {
            n /= &bd;
            e += 1;
        }
        if e > 0 {
            out.push((bd, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > BigUint::one() {
        out.push((n, 1));
    }
    out
}

fn divisors(n: &BigUint) -> Vec<BigUint> {
    let mut ds = vec![BigUint::one()];
    for (p, e) in factor(n) {
        let mut next = Vec::with_capacity(ds.len() * (e as usize + 1));
        for d in &ds {
            let mut pk = BigUint::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
            }
        }
        ds = next;
        if ds.len() > MAX_CANDIDATES {
            break;
        }
    }
    ds
}

fn is_root(ints: &[BigInt], num: &BigInt, den: &BigInt) -> bool {
    // Homogenized evaluation: sum a_i num^i den^(d-i).
    let d = ints.len() - 1;
    let mut acc = BigInt::zero();
    let mut np = BigInt::one();
    let mut dpows = vec![BigInt::one(); d + 1];
    for i in 1..=d {
        dpows[i] = &dpows[i - 1] * den;
    }
    for (i, a) in ints.iter().enumerate() {
        if !a.is_zero() {
            acc += a * &np * &dpows[d - i];
        }
        np *= num;
    }
    acc.is_zero()
}

/// Split off every rational root of `p` (which must be nonzero).
pub fn rational_factorization(p: &Poly) -> RationalFactorization {
    let mut rest = p.monic().1;
    let mut roots: Vec<(Rational, usize)> = Vec::new();
    let push = |roots: &mut Vec<(Rational, usize)>, r: Rational| {
        if let Some(e) = roots.iter_mut().find(|(x, _)| *x == r) {
            e.1 += 1;
        } else {
            roots.push((r, 1));
        }
    };
    let z0 = rest.trailing_zeros();
    for _ in 0..z0 {
        push(&mut roots, Rational::zero());
    }
    rest = rest.shr(z0);

    // Cheap candidates first: ±1.
    for cand in [Rational::one(), -Rational::one()] {
        while rest.degree().unwrap_or(0) > 0 && rest.eval(&cand).is_zero() {
            rest = rest.div_exact(&Poly::linear(&cand));
            push(&mut roots, cand.clone());
        }
    }

    loop {
        let deg = rest.degree().unwrap_or(0);
        if deg == 0 {
            break;
        }
        if deg == 1 {
            let r = -rest.coeff(0) / rest.coeff(1);
            rest = Poly::one();
            push(&mut roots, r);
            break;
        }
        let ints = primitive_integer(&rest);
        let a0 = ints[0].abs().to_biguint().expect("abs is nonnegative");
        let an = ints[deg].abs().to_biguint().expect("abs is nonnegative");
        let nums = divisors(&a0);
        let dens = divisors(&an);
        let mut found = None;
        'search: for dn in &dens {
            let dn = BigInt::from(dn.clone());
            for nm in &nums {
                let nm = BigInt::from(nm.clone());
                if !nm.gcd(&dn).is_one() {
                    continue;
                }
                for s in [nm.clone(), -nm.clone()] {
                    if is_root(&ints, &s, &dn) {
                        found = Some(Rational::new(s, dn.clone()));
                        break 'search;
                    }
                }
            }
        }
        match found {
            Some(r) => {
                while rest.degree().unwrap_or(0) > 0 && rest.eval(&r).is_zero() {
                    rest = rest.div_exact(&Poly::linear(&r));
                    push(&mut roots, r.clone());
                }
            }
            None => break,
        }
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    RationalFactorization { roots, rest }
}

/// All complex roots of a nonconstant polynomial by Aberth iteration in double precision.
pub fn numeric_roots(p: &Poly) -> Vec<Complex64> {
    let deg = match p.degree() {
        Some(d) if d > 0 => d,
        _ => return Vec::new(),
    };
    let (_, m) = p.monic();
    let c: Vec<Complex64> = m
        .coeffs()
        .iter()
        .map(|x| Complex64::new(x.to_f64().unwrap_or(f64::NAN), 0.0))
        .collect();
    let eval = |z: Complex64| {
        let mut v = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for a in c.iter().rev() {
            dv = dv * z + v;
            v = v * z + a;
        }
        (v, dv)
    };
    // Cauchy bound for the initial circle.
    let bound = 1.0 + c[..deg].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let radius = bound.min(1e6) * 0.5 + 0.1;
    let mut zs: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (v, dv) = eval(zs[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    s += 1.0 / (zs[i] - zs[j]);
                }
            }
            let w = ratio / (1.0 - ratio * s);
            zs[i] -= w;
            moved = moved.max(w.norm() / zs[i].norm().max(1.0));
        }
        if moved < 1e-15 {
            break;
        }
    }
    zs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    #[test]
    fn splits_structured_denominator() {
        // (z - 1)^2 (3z - 1)(z + 9) z
        let mut p = Poly::z();
        p = &p * &Poly::linear(&rat(1, 1)).pow(2);
        p = &p * &Poly::from_coeffs(vec![rat(-1, 1), rat(3, 1)]);
        p = &p * &Poly::linear(&rat(-9, 1));
        let f = rational_factorization(&p);
        assert!(f.rest.is_one());
        assert_eq!(
            f.roots,
            vec![(rat(-9, 1), 1), (rat(0, 1), 1), (rat(1, 3), 1), (rat(1, 1), 2)]
        );
    }

    #[test]
    fn keeps_irreducible_quadratic() {
        let p = &Poly::from_coeffs(vec![rat(2, 1), rat(0, 1), rat(1, 1)]) * &Poly::linear(&rat(4, 3));
        let f = rational_factorization(&p);
        assert_eq!(f.roots, vec![(rat(4, 3), 1)]);
        assert_eq!(f.rest.degree(), Some(2));
        let mut r = numeric_roots(&f.rest);
        r.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((r[0] - Complex64::new(0.0, -2f64.sqrt())).norm() < 1e-12);
    }
}
