use serde::{Deserialize, Serialize};

use super::sets::{BorelSet, Interval};
use crate::error::{Error, Result};
use crate::lattice::RieszValue;

/// The positive measure `μ(E) = length(E) · m0` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    generator: RieszValue,
}

impl MeasureSpec {
    pub fn new(generator: RieszValue) -> Result<Self> {
        if !generator.is_nonneg() || generator.is_zero() {
            return Err(Error::InvalidRegulator(
                "measure generator must be positive and nonzero".into(),
            ));
        }
        Ok(MeasureSpec { generator })
    }

    /// Lebesgue measure with scalar values.
    pub fn lebesgue() -> Self {
        MeasureSpec {
            generator: RieszValue::scalar(1.0),
        }
    }

    pub fn generator(&self) -> &RieszValue {
        &self.generator
    }

    pub fn measure(&self, e: &BorelSet) -> RieszValue {
        self.generator.scale(e.length())
    }

    pub fn measure_interval(&self, i: &Interval) -> RieszValue {
        self.generator.scale(i.length())
    }

    /// `μ(T)` for `T = [0, 1]`.
    pub fn total(&self) -> RieszValue {
        self.generator.clone()
    }
}

/// `μ(E)`.
pub fn measure(spec: &MeasureSpec, e: &BorelSet) -> RieszValue {
    spec.measure(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let half = BorelSet::from_pairs(&[(0.0, 0.5)]).unwrap();
        assert_eq!(
            measure(&MeasureSpec::lebesgue(), &half),
            RieszValue::scalar(0.5)
        );
        assert_eq!(
            measure(&MeasureSpec::lebesgue(), &BorelSet::empty()),
            RieszValue::scalar(0.0)
        );
        let spec = MeasureSpec::new(RieszValue::vector([1.0, 2.0])).unwrap();
        let e = BorelSet::from_pairs(&[(0.0, 0.25), (0.25, 0.5)]).unwrap();
        assert_eq!(measure(&spec, &e), RieszValue::vector([0.5, 1.0]));
    }

    #[test]
    fn generator_must_be_positive() {
        assert!(MeasureSpec::new(RieszValue::scalar(0.0)).is_err());
        assert!(MeasureSpec::new(RieszValue::vector([1.0, -1.0])).is_err());
    }

    #[test]
    fn finite_additivity_on_touching_sets() {
        let spec = MeasureSpec::new(RieszValue::vector([1.0, 3.0])).unwrap();
        let a = BorelSet::from_pairs(&[(0.0, 0.3)]).unwrap();
        let b = BorelSet::from_pairs(&[(0.3, 0.9)]).unwrap();
        let lhs = spec.measure(&a.union(&b));
        let rhs = spec.measure(&a).add(&spec.measure(&b)).unwrap();
        assert!(lhs.distance(&rhs).unwrap() < 1e-15);
    }
}
