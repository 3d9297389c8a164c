use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::RieszValue;
use crate::sampling::Additive;
use crate::ORDER_SLACK;

/// A closed order interval `[lo, hi] = {z : lo ≤ z ≤ hi}`.
///
/// Nonempty, convex, bounded and closed; the only set shape used for values
/// of multifunctions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct OrderInterval {
    lo: RieszValue,
    hi: RieszValue,
}

#[derive(Deserialize)]
struct RawInterval {
    lo: RieszValue,
    hi: RieszValue,
}

impl TryFrom<RawInterval> for OrderInterval {
    type Error = Error;

    fn try_from(r: RawInterval) -> Result<Self> {
        OrderInterval::new(r.lo, r.hi)
    }
}

impl OrderInterval {
    pub fn new(lo: RieszValue, hi: RieszValue) -> Result<Self> {
        if !lo.leq(&hi)? {
            return Err(Error::InvalidOrderInterval);
        }
        Ok(OrderInterval { lo, hi })
    }

    pub fn singleton(v: RieszValue) -> Self {
        OrderInterval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn scalar(lo: f64, hi: f64) -> Result<Self> {
        OrderInterval::new(RieszValue::scalar(lo), RieszValue::scalar(hi))
    }

    pub fn lo(&self) -> &RieszValue {
        &self.lo
    }

    pub fn hi(&self) -> &RieszValue {
        &self.hi
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, z: &RieszValue) -> Result<bool> {
        Ok(self.lo.leq(z)? && z.leq(&self.hi)?)
    }

    /// Containment up to [`ORDER_SLACK`].
    pub fn contains_within(&self, z: &RieszValue, slack: f64) -> Result<bool> {
        Ok(self.lo.leq_within(z, slack)? && z.leq_within(&self.hi, slack)?)
    }

    pub fn is_subset_of(&self, other: &OrderInterval, slack: f64) -> Result<bool> {
        Ok(other.lo.leq_within(&self.lo, slack)? && self.hi.leq_within(&other.hi, slack)?)
    }

    /// `lo + θ (hi − lo)`.
    pub fn lerp(&self, theta: f64) -> Result<RieszValue> {
        self.lo.zip_with(&self.hi, |a, b| a + theta * (b - a))
    }

    /// Largest `|z|` over the interval, coordinatewise.
    pub fn abs_bound(&self) -> RieszValue {
        self.lo
            .abs()
            .join(&self.hi.abs())
            .expect("endpoints share a space")
    }

    /// Distance from `z` to the interval, coordinatewise.
    pub fn distance_to(&self, z: &RieszValue) -> Result<RieszValue> {
        Ok(z.sub(&z.clamp(&self.lo, &self.hi)?)?.abs())
    }
}

impl fmt::Display for OrderInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Additive for OrderInterval {
    fn plus(&self, other: &Self) -> Result<Self> {
        Ok(OrderInterval {
            lo: self.lo.add(&other.lo)?,
            hi: self.hi.add(&other.hi)?,
        })
    }

    fn minus(&self, other: &Self) -> Result<Self> {
        Ok(OrderInterval {
            lo: self.lo.sub(&other.lo)?,
            hi: self.hi.sub(&other.hi)?,
        })
    }
}

/// Whether some `x ∈ c` has `|x − z| ≤ r`. Clamping `z` into `c` gives the
/// nearest point coordinatewise, so the test is exact.
pub fn neighborhood_contains(c: &OrderInterval, r: &RieszValue, z: &RieszValue) -> Result<bool> {
    c.distance_to(z)?.leq_within(r, ORDER_SLACK)
}

/// Closure of the Minkowski sum; for order intervals that is `[Σ lo, Σ hi]`.
pub fn dot_sum(sets: &[OrderInterval]) -> Result<OrderInterval> {
    let (first, rest) = sets.split_first().ok_or(Error::EmptyFamily)?;
    rest.iter().try_fold(first.clone(), |acc, c| acc.plus(c))
}

/// `[lo·m, hi·m]` for `m ≥ 0`.
pub fn set_scale(c: &OrderInterval, m: &RieszValue) -> Result<OrderInterval> {
    if !m.is_nonneg() {
        return Err(Error::NegativeScaleUnsupported);
    }
    Ok(OrderInterval {
        lo: c.lo.mul(m)?,
        hi: c.hi.mul(m)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> OrderInterval {
        OrderInterval::scalar(a, b).unwrap()
    }

    fn s(x: f64) -> RieszValue {
        RieszValue::scalar(x)
    }

    #[test]
    fn neighborhood_examples() {
        assert!(neighborhood_contains(&iv(0.0, 1.0), &s(0.5), &s(1.4)).unwrap());
        assert!(!neighborhood_contains(&iv(0.0, 1.0), &s(0.5), &s(1.6)).unwrap());
        assert!(neighborhood_contains(&iv(0.0, 0.0), &s(0.0), &s(0.0)).unwrap());
        let v = OrderInterval::new(
            RieszValue::vector([0.0, 0.0]),
            RieszValue::vector([1.0, 1.0]),
        )
        .unwrap();
        assert!(!neighborhood_contains(
            &v,
            &RieszValue::vector([0.5, 0.1]),
            &RieszValue::vector([1.2, 1.2])
        )
        .unwrap());
        assert!(matches!(
            neighborhood_contains(&v, &s(1.0), &s(0.0)),
            Err(Error::MixedVariant { .. })
        ));
    }

    #[test]
    fn dot_sum_examples() {
        assert_eq!(
            dot_sum(&[iv(0.0, 1.0), iv(2.0, 3.0)]).unwrap(),
            iv(2.0, 4.0)
        );
        assert_eq!(
            dot_sum(&[iv(-1.0, 2.0), iv(0.0, 0.0)]).unwrap(),
            iv(-1.0, 2.0)
        );
        assert_eq!(dot_sum(&vec![iv(0.0, 1.0); 3]).unwrap(), iv(0.0, 3.0));
        assert_eq!(dot_sum(&[]), Err(Error::EmptyFamily));
    }

    #[test]
    fn scale_examples() {
        assert_eq!(set_scale(&iv(1.0, 2.0), &s(0.5)).unwrap(), iv(0.5, 1.0));
        assert_eq!(set_scale(&iv(1.0, 2.0), &s(0.0)).unwrap(), iv(0.0, 0.0));
        assert_eq!(set_scale(&iv(3.0, 3.0), &s(2.0)).unwrap(), iv(6.0, 6.0));
        assert_eq!(
            set_scale(&iv(1.0, 2.0), &s(-1.0)),
            Err(Error::NegativeScaleUnsupported)
        );
    }

    #[test]
    fn reversed_endpoints_rejected() {
        assert_eq!(
            OrderInterval::scalar(2.0, 1.0),
            Err(Error::InvalidOrderInterval)
        );
        let r: std::result::Result<OrderInterval, _> =
            serde_json::from_str(r#"{"lo":{"scalar":2.0},"hi":{"scalar":1.0}}"#);
        assert!(r.is_err());
    }
}
