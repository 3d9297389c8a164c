use serde::Serialize;

use super::measure::MeasureSpec;
use super::sets::{BorelSet, Interval};
use crate::error::{Error, Result};
use crate::lattice::{standard_probes, IndexMap, Regulator, RieszValue};
use crate::ORDER_SLACK;

/// A compact inner set and an open outer set around some `E`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityWitness {
    pub compact: BorelSet,
    pub open: BorelSet,
    /// Boundary margin used on each side of every component.
    pub margin: f64,
}

impl RegularityWitness {
    /// `μ(U \ K)`; valid because `K ⊆ U`.
    pub fn gap(&self, spec: &MeasureSpec) -> Result<RieszValue> {
        spec.measure(&self.open).sub(&spec.measure(&self.compact))
    }
}

/// Compact `K ⊆ E ⊆ U` open with `μ(U \ K) ≤ envelope(reg, φ)`.
///
/// Every component of `E` is shrunk and grown by the same margin `ε`, chosen
/// as `L / (4n + 1)` where `n` counts components and `L·m0 ≤ envelope`.
pub fn regularity_witness(
    spec: &MeasureSpec,
    e: &BorelSet,
    reg: &Regulator,
    phi: &IndexMap,
) -> Result<RegularityWitness> {
    if e.is_empty() {
        return Ok(RegularityWitness {
            compact: BorelSet::empty(),
            open: BorelSet::open_from_intervals([]),
            margin: 0.0,
        });
    }
    let env = reg.envelope(phi)?;
    // Largest length whose measure fits under the envelope.
    let budget = RieszValue::min_ratio(&env, spec.generator())?.unwrap_or(f64::INFINITY);
    let n = e.components().len() as f64;
    let eps = (budget / (4.0 * n + 1.0)).min(1.0);

    if eps <= 0.0 {
        let whole = e.components() == [Interval::unit()];
        if whole {
            return Ok(RegularityWitness {
                compact: e.clone(),
                open: BorelSet::open_from_intervals([Interval::unit()]),
                margin: 0.0,
            });
        }
        return Err(Error::EnvelopeTooSmall);
    }

    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for c in e.components() {
        let (lo, hi) = (c.lo(), c.hi());
        let (klo, khi) = (lo + eps, hi - eps);
        if klo <= khi {
            inner.push(Interval::new(klo, khi)?);
        }
        // Clipping at the ends of T keeps U relatively open.
        outer.push(Interval::new((lo - eps).max(0.0), (hi + eps).min(1.0))?);
    }
    Ok(RegularityWitness {
        compact: BorelSet::from_intervals(inner),
        open: BorelSet::open_from_intervals(outer),
        margin: eps,
    })
}

/// Outcome of [`sigma_additivity_report`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SigmaAdditivityReport {
    pub measure_of_union: RieszValue,
    pub sum_of_measures: RieszValue,
    pub union_below_sum: bool,
    pub sum_below_union: bool,
    /// For each standard probe, `μ(∪) − μ(K)` of the inner witness.
    pub exhaustion_gaps: Vec<RieszValue>,
    pub exhaustion_ok: bool,
}

impl SigmaAdditivityReport {
    pub fn passed(&self) -> bool {
        self.union_below_sum && self.sum_below_union && self.exhaustion_ok
    }
}

/// Checks both inequalities between `μ(∪ A_k)` and `Σ μ(A_k)` up to
/// `tail_bound`, and that inner compact witnesses exhaust the union.
pub fn sigma_additivity_report(
    spec: &MeasureSpec,
    family: &[BorelSet],
    tail_bound: &RieszValue,
) -> Result<SigmaAdditivityReport> {
    for (i, a) in family.iter().enumerate() {
        for b in &family[i + 1..] {
            if a.overlap_length(b) > 0.0 {
                return Err(Error::NotDisjoint);
            }
        }
    }
    let union = family.iter().fold(BorelSet::empty(), |acc, a| acc.union(a));
    let measure_of_union = spec.measure(&union);
    let mut sum_of_measures = spec.generator().zero_like();
    for a in family {
        sum_of_measures = sum_of_measures.add(&spec.measure(a))?;
    }
    let union_below_sum =
        measure_of_union.leq_within(&sum_of_measures.add(tail_bound)?, ORDER_SLACK)?;
    let sum_below_union =
        sum_of_measures.leq_within(&measure_of_union.add(tail_bound)?, ORDER_SLACK)?;

    // Inner regularity: μ(K_φ) → μ(∪) as the probe envelope shrinks.
    let reg = Regulator::geometric(spec.generator().clone(), 1.0, 0.5)?;
    let mut exhaustion_gaps = Vec::new();
    let mut exhaustion_ok = true;
    for phi in standard_probes() {
        let w = regularity_witness(spec, &union, &reg, &phi)?;
        let gap = measure_of_union.sub(&spec.measure(&w.compact))?;
        exhaustion_ok &= gap.is_nonneg() || gap.max_abs() <= ORDER_SLACK;
        exhaustion_ok &= gap.leq_within(&reg.envelope(&phi)?, ORDER_SLACK)?;
        exhaustion_gaps.push(gap);
    }
    Ok(SigmaAdditivityReport {
        measure_of_union,
        sum_of_measures,
        union_below_sum,
        sum_below_union,
        exhaustion_gaps,
        exhaustion_ok,
    })
}

/// Boolean form of [`sigma_additivity_report`].
pub fn sigma_additivity_check(
    spec: &MeasureSpec,
    family: &[BorelSet],
    tail_bound: &RieszValue,
) -> Result<bool> {
    Ok(sigma_additivity_report(spec, family, tail_bound)?.passed())
}
