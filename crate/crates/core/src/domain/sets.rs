use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` inside the domain `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 2]", try_from = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Largest distance from `t` to a point of the interval.
    pub fn radius_from(&self, t: f64) -> f64 {
        (t - self.lo).abs().max((self.hi - t).abs())
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A finite union of intervals in `[0, 1]`, kept sorted and merged.
///
/// Closed sets merge components that touch; open sets (the outer witnesses of
/// regularity) merge only overlapping ones. Openness is relative to `[0, 1]`,
/// so an open component may include the endpoints 0 and 1.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "Vec<Interval>", from = "Vec<Interval>")]
pub struct BorelSet {
    components: Vec<Interval>,
    open: bool,
}

impl BorelSet {
    pub fn empty() -> Self {
        BorelSet::default()
    }

    pub fn unit() -> Self {
        BorelSet::from_interval(Interval::unit())
    }

    pub fn from_interval(i: Interval) -> Self {
        BorelSet {
            components: vec![i],
            open: false,
        }
    }

    pub fn from_intervals(parts: impl IntoIterator<Item = Interval>) -> Self {
        Self::normalized(parts.into_iter().collect(), false)
    }

    /// Convenience constructor from `(lo, hi)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let parts = pairs
            .iter()
            .map(|&(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_intervals(parts))
    }

    /// An open set made of the given intervals (read as open intervals).
    pub fn open_from_intervals(parts: impl IntoIterator<Item = Interval>) -> Self {
        Self::normalized(parts.into_iter().collect(), true)
    }

    fn normalized(mut parts: Vec<Interval>, open: bool) -> Self {
        if open {
            parts.retain(|p| p.length() > 0.0);
        }
        parts.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut out: Vec<Interval> = Vec::with_capacity(parts.len());
        for p in parts {
            match out.last_mut() {
                Some(last) if p.lo < last.hi || (!open && p.lo <= last.hi) => {
                    last.hi = last.hi.max(p.hi);
                }
                _ => out.push(p),
            }
        }
        BorelSet {
            components: out,
            open,
        }
    }

    pub fn components(&self) -> &[Interval] {
        &self.components
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.components.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.components.iter().any(|c| {
            if self.open {
                let left = c.lo < t || (c.lo == 0.0 && t == 0.0);
                let right = t < c.hi || (c.hi == 1.0 && t == 1.0);
                left && right
            } else {
                c.contains(t)
            }
        })
    }

    /// Every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &BorelSet) -> bool {
        self.components.iter().all(|c| {
            other.components.iter().any(|o| {
                if other.open && !self.open {
                    let left = o.lo < c.lo || (o.lo == 0.0 && c.lo == 0.0);
                    let right = c.hi < o.hi || (o.hi == 1.0 && c.hi == 1.0);
                    left && right
                } else {
                    o.contains_interval(c)
                }
            })
        })
    }

    pub fn union(&self, other: &BorelSet) -> BorelSet {
        let mut parts = self.components.clone();
        parts.extend_from_slice(&other.components);
        Self::normalized(parts, self.open && other.open)
    }

    /// Closed intersection; touching components contribute a point.
    pub fn intersection(&self, other: &BorelSet) -> BorelSet {
        let mut parts = Vec::new();
        for a in &self.components {
            for b in &other.components {
                if let Some(i) = a.intersect(b) {
                    parts.push(i);
                }
            }
        }
        Self::normalized(parts, false)
    }

    /// Length of `self ∩ other`.
    pub fn overlap_length(&self, other: &BorelSet) -> f64 {
        let mut total = 0.0;
        for a in &self.components {
            for b in &other.components {
                if let Some(i) = a.intersect(b) {
                    total += i.length();
                }
            }
        }
        total
    }

    /// Endpoints of all components, sorted and deduplicated.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.components.iter().flat_map(|c| [c.lo, c.hi]).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

impl From<BorelSet> for Vec<Interval> {
    fn from(s: BorelSet) -> Self {
        s.components
    }
}

impl From<Vec<Interval>> for BorelSet {
    fn from(v: Vec<Interval>) -> Self {
        BorelSet::from_intervals(v)
    }
}

impl fmt::Display for BorelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "empty");
        }
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, " u ")?;
            }
            if self.open {
                write!(f, "({}, {})", c.lo, c.hi)?;
            } else {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for BorelSet {
    type Err = Error;

    /// Parses unions such as `[0,0.25] u [0.5,1]`. Bracket shapes are
    /// accepted but every component is stored closed, since endpoints are
    /// null sets. `empty` and `{}` denote the empty set.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "empty" || s == "{}" {
            return Ok(BorelSet::empty());
        }
        let bad = || Error::InvalidInterval {
            lo: f64::NAN,
            hi: f64::NAN,
        };
        let mut parts = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            rest = rest.trim_start();
            rest = rest
                .strip_prefix('u')
                .or_else(|| rest.strip_prefix('∪'))
                .or_else(|| rest.strip_prefix('|'))
                .unwrap_or(rest)
                .trim_start();
            if rest.is_empty() {
                break;
            }
            let open = rest.chars().next().ok_or_else(bad)?;
            if open != '[' && open != '(' {
                return Err(bad());
            }
            let close = rest.find([']', ')']).ok_or_else(bad)?;
            let body = &rest[1..close];
            let (a, b) = body.split_once(',').ok_or_else(bad)?;
            let lo: f64 = a.trim().parse().map_err(|_| bad())?;
            let hi: f64 = b.trim().parse().map_err(|_| bad())?;
            parts.push(Interval::new(lo, hi)?);
            rest = &rest[close + 1..];
        }
        Ok(BorelSet::from_intervals(parts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_merges_adjacent() {
        let s = BorelSet::from_pairs(&[(0.25, 0.5), (0.0, 0.25), (0.7, 0.8)]).unwrap();
        assert_eq!(s.components().len(), 2);
        assert_eq!(s.components()[0], Interval::new(0.0, 0.5).unwrap());
        assert!((s.length() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn open_sets_keep_touching_components_apart() {
        let a = Interval::new(0.1, 0.2).unwrap();
        let b = Interval::new(0.2, 0.3).unwrap();
        let u = BorelSet::open_from_intervals([a, b]);
        assert_eq!(u.components().len(), 2);
        assert!(!u.contains(0.2));
        let k = BorelSet::from_intervals([a, b]);
        assert_eq!(k.components().len(), 1);
    }

    #[test]
    fn relative_openness_at_domain_ends() {
        let u = BorelSet::open_from_intervals([Interval::unit()]);
        assert!(u.contains(0.0) && u.contains(1.0));
        assert!(BorelSet::unit().is_subset_of(&u));
    }

    #[test]
    fn parse_and_display() {
        let s: BorelSet = "[0,0.25] u (0.5,1]".parse().unwrap();
        assert_eq!(s.components().len(), 2);
        assert_eq!(s.to_string(), "[0, 0.25] u [0.5, 1]");
        assert!("empty".parse::<BorelSet>().unwrap().is_empty());
        assert!("[0.5,0.2]".parse::<BorelSet>().is_err());
        assert!("[0,2]".parse::<BorelSet>().is_err());
    }

    #[test]
    fn overlap_and_subset() {
        let a = BorelSet::from_pairs(&[(0.0, 0.6)]).unwrap();
        let b = BorelSet::from_pairs(&[(0.5, 1.0)]).unwrap();
        assert!((a.overlap_length(&b) - 0.1).abs() < 1e-15);
        let c = BorelSet::from_pairs(&[(0.1, 0.2)]).unwrap();
        assert!(c.is_subset_of(&a));
        assert!(!a.is_subset_of(&c));
    }

    #[test]
    fn json_shape() {
        let s = BorelSet::from_pairs(&[(0.0, 0.5), (0.75, 1.0)]).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[[0.0,0.5],[0.75,1.0]]");
        let back: BorelSet = serde_json::from_str("[[0.75,1.0],[0.0,0.5]]").unwrap();
        assert_eq!(back, s);
    }
}
