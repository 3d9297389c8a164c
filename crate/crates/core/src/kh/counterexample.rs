//! The spike function `f(1/n) = u_n` (zero elsewhere) valued in `c00`.
//!
//! It vanishes almost everywhere, yet for every gauge δ and every `n` there
//! is a δ-fine partition whose Riemann sum dominates `λ u_n` with `λ > 0`.
//! No element of `c00` bounds all those sums, so `f` is not integrable.

use serde::Serialize;

use super::integrand::{riemann_sum, Integrand};
use crate::domain::{
    cousin_partition, Gauge, Interval, MeasureSpec, Radius, TagRadius, TaggedCell, TaggedPartition,
    DEFAULT_MAX_DEPTH,
};
use crate::error::{Error, Result};
use crate::lattice::RieszValue;
use crate::ORDER_SLACK;

/// `ξ_i = 1/(n + 1 − i)` for `i = 1..n−1`, increasing.
pub fn spike_points(n: usize) -> Vec<f64> {
    (1..n).map(|i| 1.0 / (n + 1 - i) as f64).collect()
}

/// A constant gauge of radius `r` that also tags every spike point.
pub fn counterexample_gauge(n: usize, r: f64) -> Result<Gauge> {
    Gauge::new(
        Radius::Constant(r),
        spike_points(n)
            .into_iter()
            .map(|point| TagRadius { point, radius: r })
            .collect(),
    )
}

/// A δ-fine partition of `[0, 1]` that holds a forced cell `[y_i, x_i]`
/// tagged at each spike point `ξ_i`, with `0 < y_1 < x_1 < … < x_{n−1} < 1`.
///
/// Each forced cell has half-width `min(δ(ξ_i), gap)/4`, where `gap` is the
/// distance to the nearest other spike point (or to 0 and 1).
pub fn counterexample_partition(n: usize, delta: &Gauge) -> Result<TaggedPartition> {
    if n < 2 {
        return Err(Error::InvalidIntegrand(format!("need n ≥ 2, got {n}")));
    }
    let xi = spike_points(n);
    for p in &xi {
        if !delta.mandatory_tags().iter().any(|t| t.point == *p) {
            return Err(Error::InvalidGauge(format!(
                "spike point {p} is not a mandatory tag"
            )));
        }
    }
    let mut forced = Vec::with_capacity(xi.len());
    for (i, &p) in xi.iter().enumerate() {
        let below = if i == 0 { p } else { p - xi[i - 1] };
        let above = if i + 1 == xi.len() {
            1.0 - p
        } else {
            xi[i + 1] - p
        };
        let h = delta.eval(p).min(below).min(above) / 4.0;
        forced.push(TaggedCell {
            cell: Interval::new(p - h, p + h)?,
            tag: p,
        });
    }
    let mut items = Vec::new();
    let mut cursor = 0.0;
    for c in forced {
        items.extend_from_slice(
            cousin_partition(
                delta,
                &Interval::new(cursor, c.cell.lo())?,
                DEFAULT_MAX_DEPTH,
            )?
            .items(),
        );
        items.push(c);
        cursor = c.cell.hi();
    }
    items.extend_from_slice(
        cousin_partition(delta, &Interval::new(cursor, 1.0)?, DEFAULT_MAX_DEPTH)?.items(),
    );
    TaggedPartition::new(items)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CounterexampleRow {
    pub n: usize,
    /// Width of the forced cell around `1/n`.
    pub lambda: f64,
    pub riemann_sum: RieszValue,
    pub max_support_index: u64,
    /// `λ u_n ≤ S_n`
    pub lower_bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UnboundednessReport {
    pub rows: Vec<CounterexampleRow>,
    /// Every `S_n` has `n` in its support, so no finitely supported element
    /// dominates the family.
    pub unbounded: bool,
    pub verdict: &'static str,
}

/// Builds the forced partitions for `n = 2..=n_max` with the default gauge
/// and checks that their Riemann sums have no common bound.
pub fn counterexample_unboundedness(n_max: usize) -> Result<UnboundednessReport> {
    counterexample_unboundedness_with(n_max, |n| counterexample_gauge(n, 0.1))
}

/// As [`counterexample_unboundedness`], with a caller-chosen gauge per `n`.
pub fn counterexample_unboundedness_with(
    n_max: usize,
    gauge_for: impl Fn(usize) -> Result<Gauge>,
) -> Result<UnboundednessReport> {
    let spec = MeasureSpec::lebesgue();
    let f = Integrand::CounterexampleC00;
    let mut rows = Vec::new();
    for n in 2..=n_max {
        let delta = gauge_for(n)?;
        let p = counterexample_partition(n, &delta)?;
        let xi1 = 1.0 / n as f64;
        let lambda = p
            .items()
            .iter()
            .find(|c| c.tag == xi1)
            .map(|c| c.cell.length())
            .ok_or_else(|| Error::InvalidGauge(format!("no cell tagged at {xi1}")))?;
        let sum = riemann_sum(&f, &p, &spec)?;
        let lower = RieszValue::unit(n as u64).scale(lambda);
        let lower_bound_holds = lambda > 0.0 && lower.leq_within(&sum, ORDER_SLACK)?;
        let max_support_index = sum.support().and_then(|s| s.last().copied()).unwrap_or(0);
        rows.push(CounterexampleRow {
            n,
            lambda,
            riemann_sum: sum,
            max_support_index,
            lower_bound_holds,
        });
    }
    let unbounded = !rows.is_empty() && rows.iter().all(|r| r.lower_bound_holds);
    Ok(UnboundednessReport {
        rows,
        unbounded,
        verdict: if unbounded {
            "UNBOUNDED"
        } else {
            "INCONCLUSIVE"
        },
    })
}
