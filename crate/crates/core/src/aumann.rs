//! Selections of interval-valued multifunctions and the Aumann integral
//! `{∫ f : f a KH-integrable selection of F}`.
//!
//! Selections are parametrized by a simple mix `λ: [0, 1] → [0, 1]`, giving
//! `f_λ = (1 − λ)·lower + λ·upper`. These are certifiable whenever the bounds
//! are, and `λ ≡ 0`, `λ ≡ 1` already reach the ends of the hull.

use serde::Serialize;

use crate::domain::{BorelSet, Interval, MeasureSpec};
use crate::error::{Error, Result};
use crate::kh::{kh_integrate, CertifyOptions, Integrand, ModulusGauge, Part};
use crate::lattice::{IndexMap, Regulator, RieszValue};
use crate::par;
use crate::setvalued::{
    dot_sum, phi_interval_oracle, set_scale, Multifunction, OrderInterval, PhiEvaluator, PhiOptions,
};
use crate::ORDER_SLACK;

/// Mix levels used by [`default_mixes`].
pub const MIX_LEVELS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Cells of the uniform grid used by [`default_mixes`].
pub const MIX_GRID_CELLS: usize = 16;

/// A simple function `λ` with values in `[0, 1]`: `λ_k` on `E_k`, zero
/// elsewhere, first listed piece at shared endpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mix(Vec<(BorelSet, f64)>);

impl Mix {
    pub fn new(pieces: Vec<(BorelSet, f64)>) -> Result<Self> {
        for (i, (set, lambda)) in pieces.iter().enumerate() {
            if !(0.0..=1.0).contains(lambda) {
                return Err(Error::InvalidMix(*lambda));
            }
            if pieces[i + 1..]
                .iter()
                .any(|(s, _)| s.overlap_length(set) > 0.0)
            {
                return Err(Error::PiecesOverlap);
            }
        }
        Ok(Mix(pieces))
    }

    /// `λ ≡ c`.
    pub fn constant(c: f64) -> Result<Self> {
        Mix::new(vec![(BorelSet::unit(), c)])
    }

    pub fn pieces(&self) -> &[(BorelSet, f64)] {
        &self.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0
            .iter()
            .find(|(s, _)| s.contains(t))
            .map_or(0.0, |(_, l)| *l)
    }
}

/// The selection `f_λ` of `base`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub base: Multifunction,
    pub mix: Mix,
}

impl Selection {
    pub fn new(base: Multifunction, mix: Mix) -> Result<Self> {
        base.validate()?;
        Ok(Selection { base, mix })
    }

    /// `f_λ` as an integrand: a piecewise blend of the two bounds.
    pub fn integrand(&self) -> Result<Integrand> {
        let (lower, upper) = self.base.bounds()?;
        let parts = self
            .mix
            .pieces()
            .iter()
            .map(|(set, lambda)| Part {
                set: set.clone(),
                integrand: blend(&lower, &upper, *lambda),
            })
            .collect();
        Ok(Integrand::Piecewise {
            parts,
            otherwise: Box::new(lower),
        })
    }
}

fn blend(lower: &Integrand, upper: &Integrand, lambda: f64) -> Integrand {
    if lambda == 0.0 || lower == upper {
        lower.clone()
    } else if lambda == 1.0 {
        upper.clone()
    } else {
        Integrand::Combination(vec![(1.0 - lambda, lower.clone()), (lambda, upper.clone())])
    }
}

/// Whether `lower ≤ f_λ ≤ upper` at every grid point, every breakpoint of
/// the base and every endpoint of the mix.
pub fn selection_is_valid(s: &Selection, grid: &[f64]) -> bool {
    let check = || -> Result<bool> {
        let f = s.integrand()?;
        let mut pts = grid.to_vec();
        pts.extend(s.base.breakpoints()?);
        pts.extend(s.mix.pieces().iter().flat_map(|(set, _)| set.endpoints()));
        for t in pts {
            let value = s.base.eval(t)?;
            if !value.contains_within(&f.eval(t)?, ORDER_SLACK)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    check().unwrap_or(false)
}

/// The cells between consecutive breakpoints of `f`.
fn own_pieces(f: &Multifunction) -> Result<Vec<BorelSet>> {
    let mut cuts = vec![0.0];
    cuts.extend(f.breakpoints()?);
    cuts.push(1.0);
    cuts.windows(2)
        .map(|w| Interval::new(w[0], w[1]).map(BorelSet::from_interval))
        .collect()
}

fn rotations(cells: &[BorelSet]) -> Result<Vec<Mix>> {
    (0..MIX_LEVELS.len())
        .map(|r| {
            Mix::new(
                cells
                    .iter()
                    .enumerate()
                    .map(|(k, c)| (c.clone(), MIX_LEVELS[(k + r) % MIX_LEVELS.len()]))
                    .collect(),
            )
        })
        .collect()
}

/// Constant mixes at every level, then rotated level patterns on a uniform
/// grid and on the pieces of `f`.
pub fn default_mixes(f: &Multifunction) -> Result<Vec<Mix>> {
    let mut mixes: Vec<Mix> = MIX_LEVELS
        .iter()
        .map(|&l| Mix::constant(l))
        .collect::<Result<_>>()?;
    let grid: Vec<BorelSet> = (0..MIX_GRID_CELLS)
        .map(|k| {
            let n = MIX_GRID_CELLS as f64;
            Interval::new(k as f64 / n, (k + 1) as f64 / n).map(BorelSet::from_interval)
        })
        .collect::<Result<_>>()?;
    mixes.extend(rotations(&grid)?);
    mixes.extend(rotations(&own_pieces(f)?)?);
    Ok(mixes)
}

/// `λ ≡ 0` and `λ ≡ 1`.
pub fn endpoint_mixes() -> Vec<Mix> {
    vec![
        Mix::constant(0.0).expect("0 is a valid mix"),
        Mix::constant(1.0).expect("1 is a valid mix"),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AumannIntegral {
    /// Integrals of the selections, sorted and without exact duplicates.
    pub points: Vec<RieszValue>,
    /// Coordinatewise `[min, max]` of the points.
    pub hull: OrderInterval,
}

fn lexicographic(a: &RieszValue, b: &RieszValue) -> std::cmp::Ordering {
    let (x, y) = (a.coordinates(), b.coordinates());
    x.iter()
        .zip(&y)
        .map(|(p, q)| p.total_cmp(q))
        .find(|o| o.is_ne())
        .unwrap_or(x.len().cmp(&y.len()))
}

/// Integrates `f_λ` over `a` for every mix and returns the points with their
/// interval hull.
pub fn aumann_integral(
    f: &Multifunction,
    a: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
    mixes: &[Mix],
    opts: &CertifyOptions,
) -> Result<AumannIntegral> {
    if mixes.is_empty() {
        return Err(Error::EmptySelectionFamily);
    }
    let strategy = ModulusGauge::default();
    let mut points = par::try_map(opts.exec, mixes, |mix| {
        let s = Selection::new(f.clone(), mix.clone())?;
        kh_integrate(&s.integrand()?, a, spec, reg, probes, &strategy, opts).map(|c| c.value)
    })?;
    points.sort_by(lexicographic);
    points.dedup();
    let (first, rest) = points.split_first().expect("mixes are nonempty");
    let (mut lo, mut hi) = (first.clone(), first.clone());
    for p in rest {
        lo = lo.meet(p)?;
        hi = hi.join(p)?;
    }
    let hull = OrderInterval::new(lo, hi)?;
    Ok(AumannIntegral { points, hull })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MembershipCheck {
    pub point: RieszValue,
    pub member: bool,
}

/// The three descriptions of the integral of a simple multifunction.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonReport {
    /// `Σ_k C_k μ(E_k ∩ A)`.
    pub sum_formula: OrderInterval,
    pub aumann_hull: OrderInterval,
    pub phi_oracle: OrderInterval,
    /// Largest coordinate gap between corresponding ends of the three.
    pub max_discrepancy: f64,
    /// Aumann points tested for membership in `Φ(F, A)`.
    pub membership_checks: Vec<MembershipCheck>,
    /// Twice the smallest probe envelope.
    pub tolerance: RieszValue,
}

impl ComparisonReport {
    pub fn agree(&self) -> bool {
        let close = |x: &OrderInterval, y: &OrderInterval| -> bool {
            [(x.lo(), y.lo()), (x.hi(), y.hi())].iter().all(|(p, q)| {
                p.sub(q)
                    .and_then(|d| d.abs().leq_within(&self.tolerance, ORDER_SLACK))
                    .unwrap_or(false)
            })
        };
        close(&self.sum_formula, &self.aumann_hull) && close(&self.sum_formula, &self.phi_oracle)
    }

    pub fn passed(&self) -> bool {
        self.agree() && self.membership_checks.iter().all(|c| c.member)
    }
}

fn end_gap(x: &OrderInterval, y: &OrderInterval) -> Result<f64> {
    Ok(x.lo().distance(y.lo())?.max(x.hi().distance(y.hi())?))
}

/// Compares the sum formula, the Aumann hull and the `Φ` oracle for a simple
/// (or constant) multifunction over `a`, and tests the Aumann points of the
/// default mixes for membership in `Φ(F, A)`.
pub fn comparison_simple(
    f: &Multifunction,
    a: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
    opts: &PhiOptions,
) -> Result<ComparisonReport> {
    f.validate()?;
    let zero = OrderInterval::singleton(f.template()?.mul(spec.generator())?);
    let mut terms = vec![zero];
    match f {
        Multifunction::ConstantSet(c) => terms.push(set_scale(c, &spec.measure(a))?),
        Multifunction::SimpleSet(pieces) => {
            for p in pieces {
                terms.push(set_scale(&p.value, &spec.measure(&p.set.intersection(a)))?);
            }
        }
        Multifunction::IntervalValued { .. } => {
            return Err(Error::InvalidMultifunction(
                "the comparison needs a simple multifunction".into(),
            ))
        }
    }
    let sum_formula = dot_sum(&terms)?;

    if probes.is_empty() {
        return Err(Error::EmptyProbeSet);
    }
    let mut tolerance = reg.envelope(&probes[0])?;
    for phi in &probes[1..] {
        tolerance = tolerance.meet(&reg.envelope(phi)?)?;
    }
    let tolerance = tolerance.scale(2.0);

    let certify = CertifyOptions {
        samples: opts.samples,
        seed: opts.seed,
        max_depth: opts.max_depth,
        exec: opts.exec,
    };
    let aumann = aumann_integral(f, a, spec, reg, probes, &default_mixes(f)?, &certify)?;
    let phi_oracle = phi_interval_oracle(f, a, spec, reg, probes)?;

    let evaluator = PhiEvaluator::new(f, a, spec, opts)?;
    evaluator.prepare()?;
    let membership_checks = par::try_map(opts.exec, &aumann.points, |z| {
        Ok::<_, Error>(MembershipCheck {
            point: z.clone(),
            member: evaluator.contains(z, reg, probes)?,
        })
    })?;

    let max_discrepancy = end_gap(&sum_formula, &aumann.hull)?
        .max(end_gap(&sum_formula, &phi_oracle)?)
        .max(end_gap(&aumann.hull, &phi_oracle)?);
    Ok(ComparisonReport {
        sum_formula,
        aumann_hull: aumann.hull,
        phi_oracle,
        max_discrepancy,
        membership_checks,
        tolerance,
    })
}
