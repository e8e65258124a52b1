//! Run configuration: JSON on disk, validated against field and tree caps before use.

use std::path::{Path, PathBuf};

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::exactalg::Rational;
use crate::geometric::{SigmaTorusInstance, TorusKind};
use crate::group::{GroupElement, HeckeFunction, TreeCaps};
use crate::kernel::CELL_PATH_CAP;
use crate::padic::FieldParams;

use super::CliError;

/// A σ-torus as written in the config; rationals are strings such as `"4/5"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusConfig {
    pub kind: TorusKind,
    /// Representatives `x_m` as rational 2×2 matrices `[a, b, c, d]`; identity when empty.
    #[serde(default)]
    pub reps: Vec<[String; 4]>,
    /// One constant per representative; `null` entries are filled by calibration.
    pub c0: Vec<Option<String>>,
    #[serde(default = "default_level")]
    pub level: u32,
    #[serde(default = "default_volume")]
    pub volume: String,
}

fn default_level() -> u32 {
    1
}

fn default_volume() -> String {
    "1".into()
}

fn default_n_max() -> u32 {
    6
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub prime_q: i64,
    #[serde(default)]
    pub epsilon: Option<i64>,
    /// Cell coefficients `(height, value)` of the two test functions.
    pub f1: Vec<(u32, String)>,
    pub f2: Vec<(u32, String)>,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    #[serde(default)]
    pub caps: TreeCaps,
    pub tori: Vec<TorusConfig>,
    /// Formal degree of the unramified family; `null` until calibrated.
    #[serde(default)]
    pub formal_degree: Option<String>,
    /// Where frozen constants live; `<out>/constants.json` when absent.
    #[serde(default)]
    pub constants_path: Option<PathBuf>,
}

/// Constants written by `calibrate` and read by every later run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrozenConstants {
    pub prime_q: u64,
    pub anchor_slope: String,
    pub formal_degree: String,
    /// Constant of the first split-torus representative.
    pub split_c0: String,
}

/// A validated configuration with parsed values.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub params: FieldParams,
    pub f1: HeckeFunction,
    pub f2: HeckeFunction,
    pub n_max: u32,
    pub caps: TreeCaps,
    pub tori: Vec<SigmaTorusInstance>,
    pub formal_degree: Option<Rational>,
    pub hash: String,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_rational(s: &str) -> Result<Rational, CliError> {
    s.trim().parse::<Rational>().map_err(|_| usage(format!("not a rational number: {s:?}")))
}

fn parse_function(v: &[(u32, String)], name: &str) -> Result<HeckeFunction, CliError> {
    let mut pairs = Vec::new();
    for (h, c) in v {
        if *h > CELL_PATH_CAP {
            return Err(usage(format!("{name}: height {h} exceeds the cap {CELL_PATH_CAP}")));
        }
        pairs.push((*h, parse_rational(c)?));
    }
    Ok(HeckeFunction::from_pairs(pairs))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("malformed config: {e}")))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("plain data serializes");
        hex::encode(Sha256::digest(canon.as_bytes()))
    }

    pub fn constants_file(&self, out: &Path) -> PathBuf {
        self.constants_path.clone().unwrap_or_else(|| out.join("constants.json"))
    }

    /// Validates and parses; frozen constants, when present, fill or override the inline ones.
    pub fn resolve(&self, frozen: Option<&FrozenConstants>) -> Result<Resolved, CliError> {
        let params = FieldParams::new(self.prime_q, self.epsilon).map_err(|e| usage(e.to_string()))?;
        if self.n_max > CELL_PATH_CAP {
            return Err(usage(format!("n_max {} exceeds the cap {CELL_PATH_CAP}", self.n_max)));
        }
        let defaults = TreeCaps::default();
        if self.caps.max_radius_f > defaults.max_radius_f || self.caps.max_radius_e > defaults.max_radius_e {
            return Err(usage("tree caps exceed the supported radii"));
        }
        if let Some(fc) = frozen {
            if fc.prime_q != params.q() {
                return Err(usage("frozen constants were calibrated for a different q"));
            }
        }
        let mut tori = Vec::new();
        let mut first_split = true;
        for t in &self.tori {
            let reps = if t.reps.is_empty() {
                vec![GroupElement::identity(params)]
            } else {
                t.reps
                    .iter()
                    .map(|r| {
                        let [a, b, c, d] = [&r[0], &r[1], &r[2], &r[3]].map(|s| parse_rational(s));
                        GroupElement::from_base(params, a?, b?, c?, d?).map_err(|e| usage(e.to_string()))
                    })
                    .collect::<Result<Vec<_>, _>>()?
            };
            if t.c0.len() != reps.len() {
                return Err(usage("each torus needs one c0 per representative"));
            }
            let mut c0 = Vec::new();
            for (i, c) in t.c0.iter().enumerate() {
                let frozen_here = (t.kind == TorusKind::SplitM && first_split && i == 0)
                    .then(|| frozen.map(|f| f.split_c0.clone()))
                    .flatten();
                match frozen_here.as_ref().or(c.as_ref()) {
                    Some(s) => c0.push(parse_rational(s)?),
                    None => return Err(usage("missing c0 constant; run `relform calibrate`")),
                }
            }
            if t.kind == TorusKind::SplitM {
                first_split = false;
            }
            let volume = parse_rational(&t.volume)?;
            if volume <= Rational::zero() {
                return Err(usage("torus volume must be positive"));
            }
            tori.push(SigmaTorusInstance { kind: t.kind, reps, c0, level: t.level.max(1), volume });
        }
        let formal_degree = match (frozen, &self.formal_degree) {
            (Some(f), _) => Some(parse_rational(&f.formal_degree)?),
            (None, Some(s)) => Some(parse_rational(s)?),
            (None, None) => None,
        };
        Ok(Resolved {
            params,
            f1: parse_function(&self.f1, "f1")?,
            f2: parse_function(&self.f2, "f2")?,
            n_max: self.n_max,
            caps: self.caps,
            tori,
            formal_degree,
            hash: self.hash(),
        })
    }

    /// Same config with every calibrated constant cleared, as used by `calibrate`.
    pub fn uncalibrated(&self) -> Self {
        let mut c = self.clone();
        c.formal_degree = None;
        for t in &mut c.tori {
            for x in &mut t.c0 {
                if t.kind == TorusKind::SplitM {
                    *x = Some("1".into());
                }
            }
        }
        c
    }
}

impl FrozenConstants {
    pub fn load(path: &Path) -> Result<Option<Self>, CliError> {
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(path).map_err(|e| usage(e.to_string()))?;
        serde_json::from_str(&text).map(Some).map_err(|e| usage(format!("malformed constants: {e}")))
    }
}
