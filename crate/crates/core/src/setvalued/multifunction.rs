use serde::{Deserialize, Serialize};

use super::interval::{set_scale, OrderInterval};
use crate::domain::{BorelSet, MeasureSpec, TaggedPartition};
use crate::error::{Error, Result};
use crate::kh::Integrand;
use crate::lattice::RieszValue;
use crate::sampling::Additive;

/// One piece `C_k 1_{E_k}` of a simple multifunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetPiece {
    pub set: BorelSet,
    pub value: OrderInterval,
}

/// A map from `[0, 1]` to order intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Multifunction {
    ConstantSet(OrderInterval),
    /// `Σ C_k 1_{E_k}`: `{0}` off the pieces, first listed piece at shared
    /// endpoints.
    SimpleSet(Vec<SetPiece>),
    /// `t ↦ [lower(t), upper(t)]`.
    IntervalValued {
        lower: Integrand,
        upper: Integrand,
    },
}

/// Grid used to verify pointwise claims about integrands.
const CHECK_GRID: usize = 4096;

impl Multifunction {
    pub fn simple(pieces: Vec<(BorelSet, OrderInterval)>) -> Result<Self> {
        let f = Multifunction::SimpleSet(
            pieces
                .into_iter()
                .map(|(set, value)| SetPiece { set, value })
                .collect(),
        );
        f.validate()?;
        Ok(f)
    }

    pub fn interval_valued(lower: Integrand, upper: Integrand) -> Result<Self> {
        let f = Multifunction::IntervalValued { lower, upper };
        f.validate()?;
        Ok(f)
    }

    /// `t ↦ {f(t)}`.
    pub fn singleton(f: Integrand) -> Self {
        Multifunction::IntervalValued {
            lower: f.clone(),
            upper: f,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Multifunction::ConstantSet(_) => Ok(()),
            Multifunction::SimpleSet(pieces) => {
                let first = pieces
                    .first()
                    .ok_or_else(|| Error::InvalidMultifunction("no pieces".into()))?;
                for (i, p) in pieces.iter().enumerate() {
                    p.value.lo().check_compatible(first.value.lo())?;
                    for q in &pieces[i + 1..] {
                        if p.set.overlap_length(&q.set) > 0.0 {
                            return Err(Error::PiecesOverlap);
                        }
                    }
                }
                Ok(())
            }
            Multifunction::IntervalValued { lower, upper } => {
                lower.validate()?;
                upper.validate()?;
                lower.template()?.check_compatible(&upper.template()?)?;
                if lower == upper {
                    return Ok(());
                }
                for t in self.check_points()? {
                    if !lower.eval(t)?.leq(&upper.eval(t)?)? {
                        return Err(Error::InvalidMultifunction(format!(
                            "lower bound exceeds upper bound at t = {t}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Grid points plus every breakpoint, for pointwise verification.
    fn check_points(&self) -> Result<Vec<f64>> {
        let mut pts: Vec<f64> = (0..=CHECK_GRID)
            .map(|k| k as f64 / CHECK_GRID as f64)
            .collect();
        pts.extend(self.breakpoints()?);
        Ok(pts)
    }

    pub fn template(&self) -> Result<RieszValue> {
        match self {
            Multifunction::ConstantSet(c) => Ok(c.lo().zero_like()),
            Multifunction::SimpleSet(pieces) => pieces
                .first()
                .map(|p| p.value.lo().zero_like())
                .ok_or_else(|| Error::InvalidMultifunction("no pieces".into())),
            Multifunction::IntervalValued { lower, .. } => lower.template(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<OrderInterval> {
        match self {
            Multifunction::ConstantSet(c) => Ok(c.clone()),
            Multifunction::SimpleSet(pieces) => match pieces.iter().find(|p| p.set.contains(t)) {
                Some(p) => Ok(p.value.clone()),
                None => Ok(OrderInterval::singleton(self.template()?)),
            },
            Multifunction::IntervalValued { lower, upper } => {
                let lo = lower.eval(t)?;
                let hi = if lower == upper {
                    lo.clone()
                } else {
                    upper.eval(t)?
                };
                OrderInterval::new(lo, hi)
            }
        }
    }

    /// Integrands `(lower, upper)` with `F(t) = [lower(t), upper(t)]`.
    pub fn bounds(&self) -> Result<(Integrand, Integrand)> {
        match self {
            Multifunction::ConstantSet(c) => Ok((
                Integrand::Constant(c.lo().clone()),
                Integrand::Constant(c.hi().clone()),
            )),
            Multifunction::SimpleSet(pieces) => {
                let side = |hi: bool| {
                    Integrand::simple(
                        pieces
                            .iter()
                            .map(|p| {
                                (
                                    p.set.clone(),
                                    if hi { p.value.hi() } else { p.value.lo() }.clone(),
                                )
                            })
                            .collect(),
                    )
                };
                Ok((side(false)?, side(true)?))
            }
            Multifunction::IntervalValued { lower, upper } => Ok((lower.clone(), upper.clone())),
        }
    }

    /// Points inside `(0, 1)` where the multifunction may jump.
    pub fn breakpoints(&self) -> Result<Vec<f64>> {
        let mut pts = match self {
            Multifunction::ConstantSet(_) => Vec::new(),
            Multifunction::SimpleSet(pieces) => {
                pieces.iter().flat_map(|p| p.set.endpoints()).collect()
            }
            Multifunction::IntervalValued { lower, upper } => {
                let mut pts = Vec::new();
                for f in [lower, upper] {
                    pts.extend(f.modulus()?.map(|m| m.breakpoints).unwrap_or_default());
                }
                pts
            }
        };
        pts.retain(|t| *t > 0.0 && *t < 1.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Ok(pts)
    }

    /// An element `u ≥ 0` with `F(t) ⊆ [−u, u]` for every `t`.
    pub fn bound(&self) -> Result<RieszValue> {
        match self {
            Multifunction::ConstantSet(c) => Ok(c.abs_bound()),
            Multifunction::SimpleSet(pieces) => {
                let mut u = self.template()?;
                for p in pieces {
                    u = u.join(&p.value.abs_bound())?;
                }
                Ok(u)
            }
            Multifunction::IntervalValued { lower, upper } => {
                let (Some(l), Some(h)) = (lower.modulus()?, upper.modulus()?) else {
                    return Err(Error::UnboundedMultifunction);
                };
                l.bound.join(&h.bound)
            }
        }
    }

    /// Whether `0 ∈ F(t)` for every `t` (on the verification grid for
    /// interval-valued maps).
    pub fn values_contain_zero(&self) -> Result<bool> {
        let zero = self.template()?;
        match self {
            Multifunction::ConstantSet(c) => c.contains(&zero),
            Multifunction::SimpleSet(pieces) => {
                for p in pieces {
                    if !p.value.contains(&zero)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Multifunction::IntervalValued { .. } => {
                for t in self.check_points()? {
                    if !self.eval(t)?.contains(&zero)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

/// `F(t) μ(cell)`.
pub(crate) fn cell_set(
    f: &Multifunction,
    tag: f64,
    length: f64,
    spec: &MeasureSpec,
) -> Result<OrderInterval> {
    set_scale(&f.eval(tag)?, &spec.generator().scale(length))
}

/// `Σ F(t_i) μ(E_i)`, the closed dot-sum over the cells of `partition`.
pub fn riemann_set_sum(
    f: &Multifunction,
    partition: &TaggedPartition,
    spec: &MeasureSpec,
) -> Result<OrderInterval> {
    let zero = f.template()?.mul(spec.generator())?;
    let mut acc = OrderInterval::singleton(zero);
    for c in partition.items() {
        acc = acc.plus(&cell_set(f, c.tag, c.cell.length(), spec)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{cousin_partition, cousin_partition_set, Gauge, Interval};
    use crate::kh::riemann_sum;

    fn iv(a: f64, b: f64) -> OrderInterval {
        OrderInterval::scalar(a, b).unwrap()
    }

    fn two_piece() -> Multifunction {
        Multifunction::simple(vec![
            ("[0,0.5]".parse().unwrap(), iv(0.0, 1.0)),
            ("(0.5,1]".parse().unwrap(), iv(2.0, 3.0)),
        ])
        .unwrap()
    }

    #[test]
    fn constant_set_sums_to_itself() {
        let f = Multifunction::ConstantSet(iv(0.0, 1.0));
        for r in [0.3, 0.07, 0.01] {
            let p = cousin_partition(&Gauge::constant(r).unwrap(), &Interval::unit(), 40).unwrap();
            let s = riemann_set_sum(&f, &p, &MeasureSpec::lebesgue()).unwrap();
            assert!(s.lo().distance(&RieszValue::scalar(0.0)).unwrap() < 1e-15);
            assert!(s.hi().distance(&RieszValue::scalar(1.0)).unwrap() < 1e-12);
        }
    }

    #[test]
    fn singleton_reduces_to_riemann_sum() {
        let g = Integrand::identity(RieszValue::scalar(1.0));
        let f = Multifunction::singleton(g.clone());
        let p = cousin_partition(&Gauge::constant(0.05).unwrap(), &Interval::unit(), 40).unwrap();
        let spec = MeasureSpec::lebesgue();
        let s = riemann_set_sum(&f, &p, &spec).unwrap();
        assert!(s.is_singleton());
        assert_eq!(s.lo(), &riemann_sum(&g, &p, &spec).unwrap());
    }

    #[test]
    fn grouping_by_pieces_matches_cellwise_sum() {
        let f = two_piece();
        let spec = MeasureSpec::lebesgue();
        let g = Gauge::constant(0.04).unwrap();
        let a: BorelSet = "[0,0.5]".parse().unwrap();
        let b: BorelSet = "[0.5,1]".parse().unwrap();
        let pa = cousin_partition_set(&g, &a, 40).unwrap();
        let pb = cousin_partition_set(&g, &b, 40).unwrap();
        // Tags at the shared endpoint 0.5 would belong to the first piece.
        assert!(pb.items().iter().all(|c| c.tag > 0.5));
        let whole = TaggedPartition::concat([pa.clone(), pb.clone()]).unwrap();
        let direct = riemann_set_sum(&f, &whole, &spec).unwrap();
        let grouped = riemann_set_sum(&f, &pa, &spec)
            .unwrap()
            .plus(&riemann_set_sum(&f, &pb, &spec).unwrap())
            .unwrap();
        assert_eq!(direct, grouped);
        assert!(direct
            .contains_within(&RieszValue::scalar(1.0), 1e-12)
            .unwrap());
    }

    #[test]
    fn interval_valued_requires_ordered_bounds() {
        let lo = Integrand::identity(RieszValue::scalar(1.0));
        let hi = Integrand::Constant(RieszValue::scalar(0.5));
        assert!(matches!(
            Multifunction::interval_valued(lo, hi),
            Err(Error::InvalidMultifunction(_))
        ));
    }

    #[test]
    fn spike_singleton_is_unbounded() {
        let f = Multifunction::singleton(Integrand::CounterexampleC00);
        assert_eq!(f.bound(), Err(Error::UnboundedMultifunction));
        assert_eq!(two_piece().bound().unwrap(), RieszValue::scalar(3.0));
    }
}
