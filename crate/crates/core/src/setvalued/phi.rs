use std::cell::RefCell;
use std::sync::OnceLock;

use rand::Rng;
use serde::Serialize;

use super::interval::{dot_sum, neighborhood_contains, set_scale, OrderInterval};
use super::multifunction::{cell_set, Multifunction};
use crate::domain::{
    cousin_partition_set, BorelSet, Gauge, MeasureSpec, Radius, TagRadius, DEFAULT_MAX_DEPTH,
};
use crate::error::{Error, Result};
use crate::kh::{kh_integrate, CertifyOptions, ModulusGauge};
use crate::lattice::{IndexMap, Regulator, RieszValue};
use crate::par::{self, Exec};
use crate::sampling::{partition_total, perturb, rng_for};
use crate::ORDER_SLACK;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PhiOptions {
    /// Randomized fine partitions per gauge on top of the canonical one.
    pub samples: usize,
    pub seed: u64,
    /// Gauges `γ_m = 2^{-m}` are tried for `m = 0..=max_level`.
    pub max_level: u32,
    pub max_depth: usize,
    pub exec: Exec,
}

impl Default for PhiOptions {
    fn default() -> Self {
        PhiOptions {
            samples: 32,
            seed: 0,
            max_level: 20,
            max_depth: DEFAULT_MAX_DEPTH,
            exec: Exec::Parallel,
        }
    }
}

/// The level-`m` gauge: `min(2^{-m}, dist(t, B))` off the breakpoints `B`,
/// `2^{-m}` on them. Keeping cells off the jumps is what lets a finite
/// search succeed for simple multifunctions.
pub fn halving_gauge(m: u32, breakpoints: &[f64]) -> Result<Gauge> {
    let r = 0.5f64.powi(m as i32);
    if breakpoints.is_empty() {
        return Gauge::constant(r);
    }
    Gauge::new(
        Radius::DistanceToPoints {
            cap: r,
            slope: 1.0,
            points: breakpoints.to_vec(),
        },
        breakpoints
            .iter()
            .map(|&point| TagRadius { point, radius: r })
            .collect(),
    )
}

/// Riemann set sums of one multifunction over one set, cached per gauge
/// level so that many candidates and probes can be tested cheaply.
///
/// `z` passes for an envelope `r` when at some level every sampled fine
/// partition has `z ∈ U(Σ F(t_i) μ(E_i), r)`.
pub struct PhiEvaluator<'a> {
    f: &'a Multifunction,
    e: &'a BorelSet,
    spec: &'a MeasureSpec,
    opts: PhiOptions,
    breakpoints: Vec<f64>,
    bound: RieszValue,
    levels: Vec<OnceLock<Result<Vec<OrderInterval>>>>,
}

impl<'a> PhiEvaluator<'a> {
    pub fn new(
        f: &'a Multifunction,
        e: &'a BorelSet,
        spec: &'a MeasureSpec,
        opts: &PhiOptions,
    ) -> Result<Self> {
        f.validate()?;
        let bound = f.bound()?;
        f.template()?.mul(spec.generator())?;
        Ok(PhiEvaluator {
            f,
            e,
            spec,
            opts: *opts,
            breakpoints: f.breakpoints()?,
            bound,
            levels: (0..=opts.max_level).map(|_| OnceLock::new()).collect(),
        })
    }

    /// `u` with `F(t) ⊆ [−u, u]`.
    pub fn bound(&self) -> &RieszValue {
        &self.bound
    }

    /// Set sums over the canonical and sampled partitions at level `m`.
    pub fn level_sums(&self, m: u32) -> Result<&[OrderInterval]> {
        let cell = &self.levels[m as usize];
        match cell.get_or_init(|| self.compute_level(m)) {
            Ok(v) => Ok(v),
            Err(e) => Err(e.clone()),
        }
    }

    fn compute_level(&self, m: u32) -> Result<Vec<OrderInterval>> {
        let gauge = halving_gauge(m, &self.breakpoints)?;
        let base = cousin_partition_set(&gauge, self.e, self.opts.max_depth)?;
        let term =
            |c: &crate::domain::TaggedCell| cell_set(self.f, c.tag, c.cell.length(), self.spec);
        let zero = OrderInterval::singleton(self.f.template()?.mul(self.spec.generator())?);
        let canonical = partition_total(&base, zero, term)?;
        par::try_map_range(self.opts.exec, self.opts.samples + 1, |s| {
            if s == 0 {
                return Ok(canonical.clone());
            }
            let mut rng = rng_for(self.opts.seed, 0x5E7 + m as u64, s as u64);
            perturb(&base, &gauge, &mut rng).total(&canonical, term)
        })
    }

    /// Computes the level [`Self::contains`] reads. Call this before fanning
    /// out over candidates so that no worker initializes it while another
    /// waits on the same cell.
    pub fn prepare(&self) -> Result<()> {
        self.level_sums(self.opts.max_level).map(|_| ())
    }

    fn level_passes(&self, m: u32, z: &RieszValue, env: &RieszValue) -> Result<bool> {
        for s in self.level_sums(m)? {
            if !neighborhood_contains(s, env, z)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The coarsest level `m` such that every sampled sum at levels
    /// `m..=max_level` lies within `env` of `z`.
    ///
    /// The family is nested: a partition fine for `γ_{m+1}` is fine for
    /// `γ_m`. So the finest level decides existence, and coarser levels only
    /// report how early a witness gauge appears.
    pub fn witness_level(&self, z: &RieszValue, env: &RieszValue) -> Result<Option<u32>> {
        let top = self.opts.max_level;
        if !self.level_passes(top, z, env)? {
            return Ok(None);
        }
        let mut m = top;
        while m > 0 && self.level_passes(m - 1, z, env)? {
            m -= 1;
        }
        Ok(Some(m))
    }

    /// Membership of `z` for every probe.
    pub fn contains(&self, z: &RieszValue, reg: &Regulator, probes: &[IndexMap]) -> Result<bool> {
        if probes.is_empty() {
            return Err(Error::EmptyProbeSet);
        }
        for phi in probes {
            if !self.level_passes(self.opts.max_level, z, &reg.envelope(phi)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Whether `z` belongs to `Φ(F, E)` as far as the probes and sampled
/// partitions can tell.
pub fn phi_membership(
    z: &RieszValue,
    f: &Multifunction,
    e: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
    opts: &PhiOptions,
) -> Result<bool> {
    PhiEvaluator::new(f, e, spec, opts)?.contains(z, reg, probes)
}

/// An outer description of `Φ(F, E)` as an order interval: exact for
/// constant and simple multifunctions, the certified integrals of the two
/// bounds for interval-valued ones.
pub fn phi_interval_oracle(
    f: &Multifunction,
    e: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
) -> Result<OrderInterval> {
    f.validate()?;
    let zero = OrderInterval::singleton(f.template()?.mul(spec.generator())?);
    match f {
        Multifunction::ConstantSet(c) => set_scale(c, &spec.measure(e)),
        Multifunction::SimpleSet(pieces) => {
            let mut parts = vec![zero];
            for p in pieces {
                parts.push(set_scale(&p.value, &spec.measure(&p.set.intersection(e)))?);
            }
            dot_sum(&parts)
        }
        Multifunction::IntervalValued { lower, upper } => {
            let g = ModulusGauge::default();
            let opts = CertifyOptions::default();
            let lo = kh_integrate(lower, e, spec, reg, probes, &g, &opts)?.value;
            if lower == upper {
                return Ok(OrderInterval::singleton(lo));
            }
            let hi = kh_integrate(upper, e, spec, reg, probes, &g, &opts)?.value;
            OrderInterval::new(lo, hi)
        }
    }
}

/// A coordinatewise step of size `r` that moves away from `c` in every
/// coordinate `c` can occupy.
fn outward_step(c: &OrderInterval, r: f64) -> Result<RieszValue> {
    let support = c.lo().abs().add(&c.hi().abs())?;
    Ok(match &support {
        RieszValue::SparseSeq(m) if m.is_empty() => RieszValue::unit(1).scale(r),
        _ => support.splat_like(r),
    })
}

fn random_point(c: &OrderInterval, rng: &mut impl Rng) -> Result<RieszValue> {
    let rng = RefCell::new(rng);
    c.lo()
        .zip_with(c.hi(), |a, b| a + rng.borrow_mut().gen::<f64>() * (b - a))
}

const ALPHAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
const GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvexityReport {
    pub oracle: OrderInterval,
    /// Sampled pairs where both ends passed membership.
    pub pairs_tested: usize,
    pub combinations_tested: usize,
    pub failures: usize,
}

impl ConvexityReport {
    pub fn passed(&self) -> bool {
        self.pairs_tested > 0 && self.failures == 0
    }
}

/// Convex combinations of accepted pairs stay accepted under the doubled
/// regulator `2(a + a)`.
pub fn phi_convexity_report(
    f: &Multifunction,
    e: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
    trials: usize,
    opts: &PhiOptions,
) -> Result<ConvexityReport> {
    let oracle = phi_interval_oracle(f, e, spec, reg, probes)?;
    let eval = PhiEvaluator::new(f, e, spec, opts)?;
    let doubled = reg.doubled_pair();
    eval.prepare()?;
    let outcomes = par::try_map_range(opts.exec, trials, |k| -> Result<Option<usize>> {
        let mut rng = rng_for(opts.seed, 0xC0, k as u64);
        let z1 = random_point(&oracle, &mut rng)?;
        let z2 = random_point(&oracle, &mut rng)?;
        if !(eval.contains(&z1, reg, probes)? && eval.contains(&z2, reg, probes)?) {
            return Ok(None);
        }
        let mut failures = 0;
        for a in ALPHAS {
            let z = z1.scale(a).add(&z2.scale(1.0 - a))?;
            if !eval.contains(&z, &doubled, probes)? {
                failures += 1;
            }
        }
        Ok(Some(failures))
    })?;
    let tested: Vec<usize> = outcomes.into_iter().flatten().collect();
    Ok(ConvexityReport {
        oracle,
        pairs_tested: tested.len(),
        combinations_tested: tested.len() * ALPHAS.len(),
        failures: tested.iter().sum(),
    })
}

pub fn phi_convexity_check(
    f: &Multifunction,
    e: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
    trials: usize,
    opts: &PhiOptions,
) -> Result<bool> {
    Ok(phi_convexity_report(f, e, spec, reg, probes, trials, opts)?.passed())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClosednessRow {
    pub radius: f64,
    /// Constant probes `1..=extra_probes` were added to push envelopes below
    /// half the radius.
    pub extra_probes: u64,
    pub inside_accepted: bool,
    pub outside_rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClosednessReport {
    pub oracle: OrderInterval,
    pub boundary_members: bool,
    pub rows: Vec<ClosednessRow>,
}

impl ClosednessReport {
    pub fn passed(&self) -> bool {
        self.boundary_members
            && !self.rows.is_empty()
            && self
                .rows
                .iter()
                .all(|r| r.inside_accepted && r.outside_rejected)
    }
}

const MAX_EXTRA_PROBE: u64 = 64;

/// Membership agrees with the closed oracle interval on grids straddling
/// its boundary at shrinking distances.
pub fn phi_closedness_report(
    f: &Multifunction,
    e: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
    opts: &PhiOptions,
) -> Result<ClosednessReport> {
    let oracle = phi_interval_oracle(f, e, spec, reg, probes)?;
    let eval = PhiEvaluator::new(f, e, spec, opts)?;
    let mut boundary_members = true;
    for theta in [0.0, 0.5, 1.0] {
        boundary_members &= eval.contains(&oracle.lerp(theta)?, reg, probes)?;
    }
    let scale = oracle.abs_bound().max_abs().max(1.0);
    let mut rows = Vec::new();
    for r in [0.1, 0.05, 0.02, 0.01].map(|x| x * scale) {
        let mut extended = probes.to_vec();
        let mut c = 0;
        while c < MAX_EXTRA_PROBE {
            c += 1;
            extended.push(IndexMap::Constant(c));
            if reg.envelope(&IndexMap::Constant(c))?.max_abs() < r / 2.0 {
                break;
            }
        }
        let step = outward_step(&oracle, r)?;
        let inside_accepted = eval.contains(oracle.hi(), reg, &extended)?
            && eval.contains(oracle.lo(), reg, &extended)?;
        let above = oracle.hi().add(&step)?;
        let below = oracle.lo().sub(&step)?;
        let outside_rejected = reg.envelope(&IndexMap::Constant(c))?.max_abs() < r / 2.0
            && !eval.contains(&above, reg, &extended)?
            && !eval.contains(&below, reg, &extended)?;
        rows.push(ClosednessRow {
            radius: r,
            extra_probes: c,
            inside_accepted,
            outside_rejected,
        });
    }
    Ok(ClosednessReport {
        oracle,
        boundary_members,
        rows,
    })
}

pub fn phi_closedness_check(
    f: &Multifunction,
    e: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
    opts: &PhiOptions,
) -> Result<bool> {
    Ok(phi_closedness_report(f, e, spec, reg, probes, opts)?.passed())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MonotonicityReport {
    pub oracle_a: OrderInterval,
    pub oracle_b: OrderInterval,
    pub oracle_nested: bool,
    /// Grid points of the smaller oracle accepted for `A`.
    pub members_tested: usize,
    /// Of those, the ones also accepted for `B`.
    pub members_carried: usize,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.oracle_nested && self.members_tested > 0 && self.members_carried == self.members_tested
    }
}

/// `Φ(F, A) ⊆ Φ(F, B)` for `A ⊆ B` when every value contains 0.
pub fn phi_monotonicity_report(
    f: &Multifunction,
    a: &BorelSet,
    b: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
    opts: &PhiOptions,
) -> Result<MonotonicityReport> {
    if !a.is_subset_of(b) {
        return Err(Error::NotNested);
    }
    if !f.values_contain_zero()? {
        return Err(Error::ZeroNotInValues);
    }
    let oracle_a = phi_interval_oracle(f, a, spec, reg, probes)?;
    let oracle_b = phi_interval_oracle(f, b, spec, reg, probes)?;
    let oracle_nested = oracle_a.is_subset_of(&oracle_b, ORDER_SLACK)?;
    let eval_a = PhiEvaluator::new(f, a, spec, opts)?;
    let eval_b = PhiEvaluator::new(f, b, spec, opts)?;
    let mut members_tested = 0;
    let mut members_carried = 0;
    for theta in GRID {
        let z = oracle_a.lerp(theta)?;
        if eval_a.contains(&z, reg, probes)? {
            members_tested += 1;
            if eval_b.contains(&z, reg, probes)? {
                members_carried += 1;
            }
        }
    }
    Ok(MonotonicityReport {
        oracle_a,
        oracle_b,
        oracle_nested,
        members_tested,
        members_carried,
    })
}

pub fn phi_monotonicity_check(
    f: &Multifunction,
    a: &BorelSet,
    b: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
    opts: &PhiOptions,
) -> Result<bool> {
    Ok(phi_monotonicity_report(f, a, b, spec, reg, probes, opts)?.passed())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundednessReport {
    /// `u · μ(T)`, where `F(t) ⊆ [−u, u]`.
    pub total_bound: RieszValue,
    pub candidates: usize,
    pub accepted: usize,
    /// Accepted candidates outside `[−u μ(T), u μ(T)]` by more than the
    /// smallest probe envelope.
    pub violations: usize,
    /// A candidate well beyond the bound was rejected.
    pub far_point_rejected: bool,
}

impl BoundednessReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.far_point_rejected
    }
}

/// Every accepted candidate lies in `[−u μ(T), u μ(T)]`, up to the finest
/// probe envelope.
pub fn phi_boundedness_report(
    f: &Multifunction,
    e: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
    opts: &PhiOptions,
) -> Result<BoundednessReport> {
    let eval = PhiEvaluator::new(f, e, spec, opts)?;
    let total_bound = eval.bound().mul(spec.generator())?;
    let oracle = phi_interval_oracle(f, e, spec, reg, probes)?;
    let mut min_env: Option<RieszValue> = None;
    let mut max_env = 0.0f64;
    for phi in probes {
        let env = reg.envelope(phi)?;
        max_env = max_env.max(env.max_abs());
        min_env = Some(match min_env {
            Some(m) => m.meet(&env)?,
            None => env,
        });
    }
    let min_env = min_env.ok_or(Error::EmptyProbeSet)?;
    let hull = OrderInterval::new(total_bound.neg(), total_bound.clone())?;
    let mut candidates: Vec<RieszValue> = GRID
        .iter()
        .map(|&t| oracle.lerp(t))
        .collect::<Result<_>>()?;
    for k in 1..=4 {
        let step = outward_step(&oracle, min_env.max_abs() * k as f64)?;
        candidates.push(oracle.hi().add(&step)?);
        candidates.push(oracle.lo().sub(&step)?);
    }
    let mut accepted = 0;
    let mut violations = 0;
    for z in &candidates {
        if eval.contains(z, reg, probes)? {
            accepted += 1;
            if !hull.distance_to(z)?.leq_within(&min_env, ORDER_SLACK)? {
                violations += 1;
            }
        }
    }
    let far = total_bound
        .add(&outward_step(&hull, 2.0 * max_env + 0.01)?)?
        .scale(1.5);
    let far_point_rejected = !eval.contains(&far, reg, probes)?;
    Ok(BoundednessReport {
        total_bound,
        candidates: candidates.len() + 1,
        accepted,
        violations,
        far_point_rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kh::Integrand;
    use crate::lattice::standard_probes;

    fn s(x: f64) -> RieszValue {
        RieszValue::scalar(x)
    }

    fn iv(a: f64, b: f64) -> OrderInterval {
        OrderInterval::scalar(a, b).unwrap()
    }

    fn reg() -> Regulator {
        Regulator::geometric(s(1.0), 1.0, 0.5).unwrap()
    }

    fn quick() -> PhiOptions {
        PhiOptions {
            samples: 8,
            max_level: 14,
            ..PhiOptions::default()
        }
    }

    fn two_piece() -> Multifunction {
        Multifunction::simple(vec![
            ("[0,0.5]".parse().unwrap(), iv(0.0, 1.0)),
            ("(0.5,1]".parse().unwrap(), iv(2.0, 3.0)),
        ])
        .unwrap()
    }

    #[test]
    fn oracle_examples() {
        let spec = MeasureSpec::lebesgue();
        let unit = BorelSet::unit();
        let c = phi_interval_oracle(
            &Multifunction::ConstantSet(iv(1.0, 2.0)),
            &"[0,0.25]".parse().unwrap(),
            &spec,
            &reg(),
            &standard_probes(),
        )
        .unwrap();
        assert_eq!(c, iv(0.25, 0.5));
        assert_eq!(
            phi_interval_oracle(&two_piece(), &unit, &spec, &reg(), &standard_probes()).unwrap(),
            iv(1.0, 2.0)
        );
        let id = Multifunction::singleton(Integrand::identity(s(1.0)));
        assert_eq!(
            phi_interval_oracle(&id, &unit, &spec, &reg(), &standard_probes()).unwrap(),
            iv(0.5, 0.5)
        );
    }

    #[test]
    fn membership_examples() {
        let spec = MeasureSpec::lebesgue();
        let unit = BorelSet::unit();
        let c = Multifunction::ConstantSet(iv(0.0, 1.0));
        let probes = standard_probes();
        let eval = PhiEvaluator::new(&c, &unit, &spec, &quick()).unwrap();
        assert!(eval.contains(&s(0.5), &reg(), &probes).unwrap());
        assert!(eval.contains(&s(1.0), &reg(), &probes).unwrap());
        assert!(!eval.contains(&s(1.6), &reg(), &probes).unwrap());
        assert!(!eval.contains(&s(-0.6), &reg(), &probes).unwrap());

        let id = Multifunction::singleton(Integrand::identity(s(1.0)));
        assert!(phi_membership(&s(0.5), &id, &unit, &spec, &reg(), &probes, &quick()).unwrap());
        assert!(!phi_membership(&s(0.6), &id, &unit, &spec, &reg(), &probes, &quick()).unwrap());
    }

    #[test]
    fn unbounded_multifunction_is_reported() {
        let spike = Multifunction::singleton(Integrand::CounterexampleC00);
        let r = phi_membership(
            &RieszValue::sparse([]),
            &spike,
            &BorelSet::unit(),
            &MeasureSpec::lebesgue(),
            &reg(),
            &standard_probes(),
            &quick(),
        );
        assert_eq!(r, Err(Error::UnboundedMultifunction));
    }

    #[test]
    fn structural_checks_on_small_examples() {
        let spec = MeasureSpec::lebesgue();
        let unit = BorelSet::unit();
        let probes = standard_probes();
        for f in [
            Multifunction::ConstantSet(iv(0.0, 1.0)),
            two_piece(),
            Multifunction::singleton(Integrand::identity(s(1.0))),
        ] {
            assert!(phi_convexity_check(&f, &unit, &spec, &reg(), &probes, 6, &quick()).unwrap());
            let c = phi_closedness_report(&f, &unit, &spec, &reg(), &probes, &quick()).unwrap();
            assert!(c.passed(), "{c:?}");
            assert!(
                phi_boundedness_report(&f, &unit, &spec, &reg(), &probes, &quick())
                    .unwrap()
                    .passed()
            );
        }
    }

    #[test]
    fn monotonicity_examples() {
        let spec = MeasureSpec::lebesgue();
        let probes = standard_probes();
        let f = Multifunction::ConstantSet(iv(-1.0, 1.0));
        let a: BorelSet = "[0,0.5]".parse().unwrap();
        let b = BorelSet::unit();
        let r = phi_monotonicity_report(&f, &a, &b, &spec, &reg(), &probes, &quick()).unwrap();
        assert!(r.passed());
        assert_eq!(r.oracle_a, iv(-0.5, 0.5));
        assert_eq!(r.oracle_b, iv(-1.0, 1.0));
        let same = phi_monotonicity_report(&f, &b, &b, &spec, &reg(), &probes, &quick()).unwrap();
        assert_eq!(same.oracle_a, same.oracle_b);
        let g = Multifunction::ConstantSet(iv(1.0, 2.0));
        assert_eq!(
            phi_monotonicity_check(&g, &a, &b, &spec, &reg(), &probes, &quick()),
            Err(Error::ZeroNotInValues)
        );
        assert_eq!(
            phi_monotonicity_check(&f, &b, &a, &spec, &reg(), &probes, &quick()),
            Err(Error::NotNested)
        );
    }
}
