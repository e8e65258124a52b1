//! Finitely supported bi-K-invariant functions, stored by Cartan height.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::exactalg::Rational;

use super::element::GroupElement;

/// `f(g) = support[height(g)]`, zero off the support.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct HeckeFunction {
    support: BTreeMap<u32, Rational>,
}

impl HeckeFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Characteristic function of the Cartan cell of height `h`.
    pub fn cell(h: u32) -> Self {
        Self::from_pairs([(h, Rational::from_integer(1.into()))])
    }

    /// Characteristic function of K.
    pub fn indicator_k() -> Self {
        Self::cell(0)
    }

    pub fn from_pairs<I: IntoIterator<Item = (u32, Rational)>>(pairs: I) -> Self {
        let mut support = BTreeMap::new();
        for (h, c) in pairs {
            let e = support.entry(h).or_insert_with(Rational::zero);
            *e += c;
        }
        support.retain(|_, c: &mut Rational| !c.is_zero());
        HeckeFunction { support }
    }

    pub fn coeff(&self, h: u32) -> Rational {
        self.support.get(&h).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.support.iter().map(|(h, c)| (*h, c))
    }

    pub fn max_height(&self) -> Option<u32> {
        self.support.keys().next_back().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.support.values().all(|c| !c.is_negative())
    }

    pub fn eval(&self, g: &GroupElement) -> Rational {
        self.coeff(g.cartan_height())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::from_pairs(self.support().map(|(h, c)| (h, c * s)))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_pairs(
            self.support()
                .chain(o.support())
                .map(|(h, c)| (h, c.clone())),
        )
    }
}

fn big_to_json(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(x.to_string()),
    }
}

fn json_to_big(v: &serde_json::Value) -> Option<BigInt> {
    match v {
        serde_json::Value::Number(n) => n.as_i64().map(BigInt::from),
        serde_json::Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

/// Serialized as a list of `[height, numerator, denominator]`.
impl Serialize for HeckeFunction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<serde_json::Value> = self
            .support()
            .map(|(h, c)| {
                serde_json::Value::Array(vec![
                    serde_json::Value::from(h),
                    big_to_json(c.numer()),
                    big_to_json(c.denom()),
                ])
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HeckeFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<serde_json::Value>> = Vec::deserialize(d)?;
        let mut pairs = Vec::new();
        for row in rows {
            if row.len() != 3 {
                return Err(D::Error::custom("expected [height, numerator, denominator]"));
            }
            let h = row[0]
                .as_u64()
                .and_then(|h| u32::try_from(h).ok())
                .ok_or_else(|| D::Error::custom("height must be a nonnegative integer"))?;
            let n = json_to_big(&row[1]).ok_or_else(|| D::Error::custom("bad numerator"))?;
            let den = json_to_big(&row[2]).ok_or_else(|| D::Error::custom("bad denominator"))?;
            if den.is_zero() {
                return Err(D::Error::custom("zero denominator"));
            }
            pairs.push((h, Rational::new(n, den)));
        }
        Ok(HeckeFunction::from_pairs(pairs))
    }
}
