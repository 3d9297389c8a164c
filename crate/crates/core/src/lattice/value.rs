use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of one of the concrete value lattices.
///
/// All three spaces are ordered coordinatewise, so joins, meets and absolute
/// values act coordinate by coordinate. Multiplication is also coordinatewise,
/// which makes each space an algebra; a `Scalar` multiplies any value by
/// scaling it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RieszValue {
    #[serde(rename = "scalar")]
    Scalar(f64),
    #[serde(rename = "vector")]
    Vector(Vec<f64>),
    /// Finitely supported sequence, indexed from 1. Never stores zeros.
    #[serde(rename = "c00")]
    SparseSeq(BTreeMap<u64, f64>),
}

impl RieszValue {
    pub fn scalar(x: f64) -> Self {
        RieszValue::Scalar(x)
    }

    pub fn vector(xs: impl Into<Vec<f64>>) -> Self {
        RieszValue::Vector(xs.into())
    }

    /// Builds a c00 value, dropping explicit zeros.
    pub fn sparse(entries: impl IntoIterator<Item = (u64, f64)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, v) in entries {
            if v != 0.0 {
                map.insert(k, v);
            }
        }
        RieszValue::SparseSeq(map)
    }

    /// The unit sequence with a single 1 at coordinate `n`.
    pub fn unit(n: u64) -> Self {
        RieszValue::sparse([(n, 1.0)])
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            RieszValue::Scalar(_) => "scalar",
            RieszValue::Vector(_) => "vector",
            RieszValue::SparseSeq(_) => "c00",
        }
    }

    /// The zero element of the same space (and dimension).
    pub fn zero_like(&self) -> Self {
        match self {
            RieszValue::Scalar(_) => RieszValue::Scalar(0.0),
            RieszValue::Vector(v) => RieszValue::Vector(vec![0.0; v.len()]),
            RieszValue::SparseSeq(_) => RieszValue::SparseSeq(BTreeMap::new()),
        }
    }

    /// A value equal to `x` in every coordinate that can be nonzero in `self`.
    ///
    /// For c00 the coordinates are the support of `self`.
    pub fn splat_like(&self, x: f64) -> Self {
        match self {
            RieszValue::Scalar(_) => RieszValue::Scalar(x),
            RieszValue::Vector(v) => RieszValue::Vector(vec![x; v.len()]),
            RieszValue::SparseSeq(m) => RieszValue::sparse(m.keys().map(|&k| (k, x))),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RieszValue::Scalar(x) => *x == 0.0,
            RieszValue::Vector(v) => v.iter().all(|x| *x == 0.0),
            RieszValue::SparseSeq(m) => m.is_empty(),
        }
    }

    pub fn is_nonneg(&self) -> bool {
        self.coordinates().into_iter().all(|x| x >= 0.0)
    }

    /// Nonzero-capable coordinates, in index order.
    pub fn coordinates(&self) -> Vec<f64> {
        match self {
            RieszValue::Scalar(x) => vec![*x],
            RieszValue::Vector(v) => v.clone(),
            RieszValue::SparseSeq(m) => m.values().copied().collect(),
        }
    }

    /// Support of a c00 value; `None` for the other spaces.
    pub fn support(&self) -> Option<Vec<u64>> {
        match self {
            RieszValue::SparseSeq(m) => Some(m.keys().copied().collect()),
            _ => None,
        }
    }

    /// Largest absolute coordinate.
    pub fn max_abs(&self) -> f64 {
        self.coordinates()
            .into_iter()
            .fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    /// Smallest coordinate. The implicit zeros of a c00 value count.
    pub fn min_coord(&self) -> f64 {
        match self {
            RieszValue::SparseSeq(m) => m.values().fold(0.0_f64, |acc, x| acc.min(*x)),
            _ => self.coordinates().into_iter().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn check_compatible(&self, other: &RieszValue) -> Result<()> {
        match (self, other) {
            (RieszValue::Scalar(_), RieszValue::Scalar(_)) => Ok(()),
            (RieszValue::SparseSeq(_), RieszValue::SparseSeq(_)) => Ok(()),
            (RieszValue::Vector(a), RieszValue::Vector(b)) => {
                if a.len() == b.len() {
                    Ok(())
                } else {
                    Err(Error::DimensionMismatch {
                        left: a.len(),
                        right: b.len(),
                    })
                }
            }
            _ => Err(Error::MixedVariant {
                left: self.variant_name(),
                right: other.variant_name(),
            }),
        }
    }

    /// Applies `op` coordinatewise. For c00 the union of supports is visited,
    /// so `op(0, 0)` must be 0.
    pub fn zip_with(&self, other: &RieszValue, op: impl Fn(f64, f64) -> f64) -> Result<RieszValue> {
        self.check_compatible(other)?;
        Ok(match (self, other) {
            (RieszValue::Scalar(a), RieszValue::Scalar(b)) => RieszValue::Scalar(op(*a, *b)),
            (RieszValue::Vector(a), RieszValue::Vector(b)) => {
                RieszValue::Vector(a.iter().zip(b).map(|(x, y)| op(*x, *y)).collect())
            }
            (RieszValue::SparseSeq(a), RieszValue::SparseSeq(b)) => {
                let mut out = BTreeMap::new();
                for (&k, &x) in a {
                    let y = b.get(&k).copied().unwrap_or(0.0);
                    let r = op(x, y);
                    if r != 0.0 {
                        out.insert(k, r);
                    }
                }
                for (&k, &y) in b {
                    if !a.contains_key(&k) {
                        let r = op(0.0, y);
                        if r != 0.0 {
                            out.insert(k, r);
                        }
                    }
                }
                RieszValue::SparseSeq(out)
            }
            _ => unreachable!("compatibility checked above"),
        })
    }

    /// Coordinate pairs over the union of supports.
    pub fn coordinate_pairs(&self, other: &RieszValue) -> Result<Vec<(f64, f64)>> {
        self.check_compatible(other)?;
        Ok(match (self, other) {
            (RieszValue::Scalar(a), RieszValue::Scalar(b)) => vec![(*a, *b)],
            (RieszValue::Vector(a), RieszValue::Vector(b)) => {
                a.iter().copied().zip(b.iter().copied()).collect()
            }
            (RieszValue::SparseSeq(a), RieszValue::SparseSeq(b)) => {
                let keys: std::collections::BTreeSet<u64> =
                    a.keys().chain(b.keys()).copied().collect();
                keys.into_iter()
                    .map(|k| {
                        (
                            a.get(&k).copied().unwrap_or(0.0),
                            b.get(&k).copied().unwrap_or(0.0),
                        )
                    })
                    .collect()
            }
            _ => unreachable!("compatibility checked above"),
        })
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> RieszValue {
        match self {
            RieszValue::Scalar(x) => RieszValue::Scalar(op(*x)),
            RieszValue::Vector(v) => RieszValue::Vector(v.iter().map(|x| op(*x)).collect()),
            RieszValue::SparseSeq(m) => RieszValue::sparse(m.iter().map(|(&k, &x)| (k, op(x)))),
        }
    }

    pub fn join(&self, other: &RieszValue) -> Result<RieszValue> {
        self.zip_with(other, f64::max)
    }

    pub fn meet(&self, other: &RieszValue) -> Result<RieszValue> {
        self.zip_with(other, f64::min)
    }

    pub fn add(&self, other: &RieszValue) -> Result<RieszValue> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RieszValue) -> Result<RieszValue> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn abs(&self) -> RieszValue {
        self.map(f64::abs)
    }

    pub fn neg(&self) -> RieszValue {
        self.map(|x| -x)
    }

    pub fn scale(&self, s: f64) -> RieszValue {
        self.map(|x| x * s)
    }

    /// Positive part `a ∨ 0`.
    pub fn positive_part(&self) -> RieszValue {
        self.map(|x| x.max(0.0))
    }

    /// Coordinatewise product. A scalar on either side acts by scaling.
    pub fn mul(&self, other: &RieszValue) -> Result<RieszValue> {
        match (self, other) {
            (RieszValue::Scalar(s), v) | (v, RieszValue::Scalar(s)) => Ok(v.scale(*s)),
            _ => self.zip_with(other, |a, b| a * b),
        }
    }

    /// `self ≤ other` in every coordinate.
    pub fn leq(&self, other: &RieszValue) -> Result<bool> {
        self.leq_within(other, 0.0)
    }

    /// `self ≤ other + slack` in every coordinate.
    pub fn leq_within(&self, other: &RieszValue, slack: f64) -> Result<bool> {
        Ok(self
            .coordinate_pairs(other)?
            .into_iter()
            .all(|(a, b)| a <= b + slack))
    }

    /// Largest coordinate gap `|self − other|`.
    pub fn distance(&self, other: &RieszValue) -> Result<f64> {
        Ok(self
            .coordinate_pairs(other)?
            .into_iter()
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs())))
    }

    /// Coordinatewise clamp into `[lo, hi]`.
    pub fn clamp(&self, lo: &RieszValue, hi: &RieszValue) -> Result<RieszValue> {
        self.join(lo)?.meet(hi)
    }

    /// Sum of a nonempty list.
    pub fn sum<'a>(values: impl IntoIterator<Item = &'a RieszValue>) -> Result<Option<RieszValue>> {
        let mut acc: Option<RieszValue> = None;
        for v in values {
            acc = Some(match acc {
                None => v.clone(),
                Some(a) => a.add(v)?,
            });
        }
        Ok(acc)
    }

    /// The largest `x ≥ 0` with `x·den ≤ num` coordinatewise, taken over the
    /// coordinates where `den > 0`. `None` when `den` vanishes everywhere.
    pub fn min_ratio(num: &RieszValue, den: &RieszValue) -> Result<Option<f64>> {
        let mut best: Option<f64> = None;
        for (n, d) in num.coordinate_pairs(den)? {
            if d > 0.0 {
                let r = (n / d).max(0.0);
                best = Some(best.map_or(r, |b: f64| b.min(r)));
            }
        }
        Ok(best)
    }
}

impl fmt::Display for RieszValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RieszValue::Scalar(x) => write!(f, "{x}"),
            RieszValue::Vector(v) => {
                write!(f, "[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            RieszValue::SparseSeq(m) => {
                write!(f, "{{")?;
                for (i, (k, x)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k}: {x}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Binary lattice and linear operations, selectable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatticeOp {
    Join,
    Meet,
    Add,
    Sub,
    Abs,
    Scale(f64),
}

/// Applies `kind` to `a` (and `b` for the binary operations).
pub fn lattice_op(kind: LatticeOp, a: &RieszValue, b: Option<&RieszValue>) -> Result<RieszValue> {
    let rhs = || {
        b.ok_or_else(|| {
            Error::InvalidIntegrand("binary lattice operation needs two operands".into())
        })
    };
    match kind {
        LatticeOp::Join => a.join(rhs()?),
        LatticeOp::Meet => a.meet(rhs()?),
        LatticeOp::Add => a.add(rhs()?),
        LatticeOp::Sub => a.sub(rhs()?),
        LatticeOp::Abs => Ok(a.abs()),
        LatticeOp::Scale(s) => Ok(a.scale(s)),
    }
}
