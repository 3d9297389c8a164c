use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A computable map φ: ℕ → ℕ used to probe envelopes.
///
/// Every supported map is nondecreasing, which is what makes envelopes of
/// geometric regulators attain their supremum at the first row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum IndexMap {
    Constant(u64),
    Identity,
    Affine {
        slope: u64,
        offset: u64,
    },
    /// i ↦ 2^i
    Exponential,
    /// i ↦ inner(i + by)
    Shifted {
        inner: Box<IndexMap>,
        by: u64,
    },
}

impl IndexMap {
    pub fn constant(c: u64) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidIndexMap(
                "constant must be a positive integer".into(),
            ));
        }
        Ok(IndexMap::Constant(c))
    }

    pub fn affine(slope: u64, offset: u64) -> Result<Self> {
        if slope == 0 {
            return Err(Error::InvalidIndexMap(
                "affine slope must be at least 1".into(),
            ));
        }
        Ok(IndexMap::Affine { slope, offset })
    }

    /// i ↦ self(i + k).
    pub fn shifted(&self, k: u64) -> IndexMap {
        match self {
            IndexMap::Constant(_) => self.clone(),
            IndexMap::Identity => IndexMap::Affine {
                slope: 1,
                offset: k,
            },
            IndexMap::Affine { slope, offset } => IndexMap::Affine {
                slope: *slope,
                offset: offset.saturating_add(slope.saturating_mul(k)),
            },
            IndexMap::Shifted { inner, by } => IndexMap::Shifted {
                inner: inner.clone(),
                by: by.saturating_add(k),
            },
            IndexMap::Exponential => IndexMap::Shifted {
                inner: Box::new(IndexMap::Exponential),
                by: k,
            },
        }
    }

    /// φ(i) for i ≥ 1, saturating at `u64::MAX`.
    pub fn eval(&self, i: u64) -> u64 {
        debug_assert!(i >= 1);
        match self {
            IndexMap::Constant(c) => *c,
            IndexMap::Identity => i,
            IndexMap::Affine { slope, offset } => slope.saturating_mul(i).saturating_add(*offset),
            IndexMap::Exponential => {
                if i >= 64 {
                    u64::MAX
                } else {
                    1u64 << i
                }
            }
            IndexMap::Shifted { inner, by } => inner.eval(i.saturating_add(*by)),
        }
        .max(1)
    }

    /// `self(i) ≤ other(i)` for every i up to `horizon`.
    pub fn pointwise_leq(&self, other: &IndexMap, horizon: u64) -> bool {
        (1..=horizon).all(|i| self.eval(i) <= other.eval(i))
    }
}

/// The default probe family: `Constant(1..8)`, `Identity`, `Affine(2,0)`,
/// `Affine(1,4)` and `Exponential`.
pub fn standard_probes() -> Vec<IndexMap> {
    let mut probes: Vec<IndexMap> = (1..=8).map(IndexMap::Constant).collect();
    probes.push(IndexMap::Identity);
    probes.push(IndexMap::Affine {
        slope: 2,
        offset: 0,
    });
    probes.push(IndexMap::Affine {
        slope: 1,
        offset: 4,
    });
    probes.push(IndexMap::Exponential);
    probes
}

impl fmt::Display for IndexMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexMap::Constant(c) => write!(f, "const:{c}"),
            IndexMap::Identity => write!(f, "id"),
            IndexMap::Affine { slope, offset } => write!(f, "affine:{slope}:{offset}"),
            IndexMap::Exponential => write!(f, "exp"),
            IndexMap::Shifted { inner, by } => write!(f, "shift:{by}:{inner}"),
        }
    }
}

impl FromStr for IndexMap {
    type Err = Error;

    /// Parses `const:c`, `id`, `affine:a:b`, `exp` or `shift:k:<map>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidIndexMap(format!("cannot parse {s:?}"));
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        match s {
            "id" | "identity" => return Ok(IndexMap::Identity),
            "exp" | "exponential" => return Ok(IndexMap::Exponential),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("const:") {
            return IndexMap::constant(num(rest)?);
        }
        if let Some(rest) = s.strip_prefix("affine:") {
            let (a, b) = rest.split_once(':').ok_or_else(bad)?;
            return IndexMap::affine(num(a)?, num(b)?);
        }
        if let Some(rest) = s.strip_prefix("shift:") {
            let (k, inner) = rest.split_once(':').ok_or_else(bad)?;
            return Ok(inner.parse::<IndexMap>()?.shifted(num(k)?));
        }
        Err(bad())
    }
}

/// Parses a comma-separated probe list. `const:a..b` expands to a range.
pub fn parse_probe_list(s: &str) -> Result<Vec<IndexMap>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some(range) = item.strip_prefix("const:").and_then(|r| r.split_once("..")) {
            let lo: u64 = range
                .0
                .trim()
                .parse()
                .map_err(|_| Error::InvalidIndexMap(item.into()))?;
            let hi: u64 = range
                .1
                .trim()
                .parse()
                .map_err(|_| Error::InvalidIndexMap(item.into()))?;
            for c in lo..=hi {
                out.push(IndexMap::constant(c)?);
            }
        } else {
            out.push(item.parse()?);
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyProbeSet);
    }
    Ok(out)
}
