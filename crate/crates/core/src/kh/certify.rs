use serde::Serialize;

use super::integrand::{cell_term, Integrand};
use crate::domain::{
    cousin_partition_set, BorelSet, Gauge, MeasureSpec, Radius, TagRadius, DEFAULT_MAX_DEPTH,
};
use crate::error::{Error, Result};
use crate::lattice::{IndexMap, Regulator, RieszValue};
use crate::par::{self, Exec};
use crate::sampling::{partition_total, perturb, rng_for};
use crate::ORDER_SLACK;

/// Picks a gauge for one probe, given the envelope it has to meet.
pub trait GaugeStrategy: Sync {
    fn gauge(
        &self,
        f: &Integrand,
        e: &BorelSet,
        spec: &MeasureSpec,
        envelope: &RieszValue,
    ) -> Result<Gauge>;
}

/// Builds gauges from the integrand's declared modulus.
///
/// Off the breakpoints `B` the radius is `min(η₁, dist(t, B))`, so a cell never
/// straddles a jump; cells tagged at a breakpoint get radius `η₂`. The two
/// radii split the error budget between the Lipschitz part and the cells at
/// jumps. Half the envelope is held back to absorb round-off in the sums.
#[derive(Debug, Clone, Copy)]
pub struct ModulusGauge {
    /// Refuse gauges whose canonical partition would exceed this many cells.
    pub max_cells: usize,
}

impl Default for ModulusGauge {
    fn default() -> Self {
        ModulusGauge { max_cells: 1 << 21 }
    }
}

/// Uses the same gauge for every probe.
#[derive(Debug, Clone)]
pub struct FixedGauge(pub Gauge);

impl GaugeStrategy for FixedGauge {
    fn gauge(&self, _: &Integrand, _: &BorelSet, _: &MeasureSpec, _: &RieszValue) -> Result<Gauge> {
        Ok(self.0.clone())
    }
}

impl GaugeStrategy for ModulusGauge {
    fn gauge(
        &self,
        f: &Integrand,
        e: &BorelSet,
        spec: &MeasureSpec,
        envelope: &RieszValue,
    ) -> Result<Gauge> {
        let modulus = f.modulus()?.ok_or_else(|| {
            Error::GaugeConstructionFailed("integrand declares no modulus".into())
        })?;
        let m0 = spec.generator().abs();
        let budget = envelope.scale(0.5);
        let jumps: Vec<f64> = modulus
            .breakpoints
            .iter()
            .copied()
            .filter(|b| e.contains(*b))
            .collect();
        let lip = modulus.lipschitz.mul(&m0)?.scale(e.length());
        // Twice the bound: |f(t) − f(s)| ≤ 2M; at most two cells per jump.
        let jump = modulus
            .bound
            .mul(&m0)?
            .scale(2.0 * 2.0 * 2.0 * jumps.len() as f64);
        let both = !lip.is_zero() && !jump.is_zero();
        let share = if both { budget.scale(0.5) } else { budget };

        let radius_for = |den: &RieszValue, what: &str| -> Result<f64> {
            match RieszValue::min_ratio(&share, den)? {
                None => Ok(1.0),
                Some(r) if r > 0.0 => Ok(r.min(1.0)),
                Some(_) => Err(Error::GaugeConstructionFailed(format!(
                    "envelope vanishes where the {what} term needs room"
                ))),
            }
        };
        let eta1 = radius_for(&lip, "Lipschitz")?;
        let eta2 = radius_for(&jump, "jump")?;
        let estimate = e.length() / eta1;
        if estimate > self.max_cells as f64 {
            return Err(Error::GaugeConstructionFailed(format!(
                "gauge radius {eta1:e} needs about {estimate:.0} cells"
            )));
        }
        if modulus.breakpoints.is_empty() {
            return Gauge::constant(eta1);
        }
        Gauge::new(
            Radius::DistanceToPoints {
                cap: eta1,
                slope: 1.0,
                points: modulus.breakpoints.clone(),
            },
            modulus
                .breakpoints
                .iter()
                .map(|&point| TagRadius {
                    point,
                    radius: eta2,
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CertifyOptions {
    /// Randomized fine partitions tried per probe on top of the canonical one.
    pub samples: usize,
    pub seed: u64,
    pub max_depth: usize,
    pub exec: Exec,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            samples: 32,
            seed: 0,
            max_depth: DEFAULT_MAX_DEPTH,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeReport {
    pub phi: IndexMap,
    pub gauge: Gauge,
    pub envelope: RieszValue,
    /// Coordinatewise largest `|S − I|` over the partitions tried.
    pub max_deviation: RieszValue,
    pub partitions_checked: usize,
    pub cells: usize,
}

/// An integral value with the evidence that backs it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IntegralCertificate {
    pub value: RieszValue,
    pub regulator: Regulator,
    pub probes: Vec<ProbeReport>,
}

impl IntegralCertificate {
    /// Every recorded deviation lies below its envelope.
    pub fn is_sound(&self) -> Result<bool> {
        for p in &self.probes {
            if !p.max_deviation.leq_within(&p.envelope, ORDER_SLACK)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Coordinatewise minimum of the probe envelopes.
    pub fn min_envelope(&self) -> Result<RieszValue> {
        let mut it = self.probes.iter();
        let first = it.next().ok_or(Error::EmptyProbeSet)?.envelope.clone();
        it.try_fold(first, |acc, p| acc.meet(&p.envelope))
    }
}

/// Integrates `f` over `e` and certifies `|S − I| ≤ envelope(reg, φ)` on a
/// stress sample of gauge-fine partitions for every probe.
pub fn kh_integrate(
    f: &Integrand,
    e: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
    strategy: &dyn GaugeStrategy,
    opts: &CertifyOptions,
) -> Result<IntegralCertificate> {
    if matches!(f, Integrand::CounterexampleC00) {
        return Err(Error::NotCertifiable(
            "its Riemann sums have no common upper bound in c00".into(),
        ));
    }
    if probes.is_empty() {
        return Err(Error::EmptyProbeSet);
    }
    f.validate()?;
    let value = f
        .exact_integral(e, spec)?
        .ok_or_else(|| Error::GaugeConstructionFailed("no closed-form integral".into()))?;
    reg.template().check_compatible(&value)?;

    let mut reports = Vec::with_capacity(probes.len());
    for (k, phi) in probes.iter().enumerate() {
        let envelope = reg.envelope(phi)?;
        let gauge = strategy.gauge(f, e, spec, &envelope)?;
        let base = cousin_partition_set(&gauge, e, opts.max_depth)?;
        let term = |c: &crate::domain::TaggedCell| cell_term(f, c.tag, c.cell.length(), spec);
        let canonical = partition_total(&base, value.zero_like(), term)?;
        let deviations = par::try_map_range(opts.exec, opts.samples + 1, |s| {
            if s == 0 {
                return canonical.sub(&value).map(|d| d.abs());
            }
            let mut rng = rng_for(opts.seed, k as u64, s as u64);
            let sample = perturb(&base, &gauge, &mut rng);
            sample.total(&canonical, term)?.sub(&value).map(|d| d.abs())
        })?;
        let mut max_deviation = value.zero_like();
        for d in &deviations {
            max_deviation = max_deviation.join(d)?;
        }
        if !max_deviation.leq_within(&envelope, ORDER_SLACK)? {
            return Err(Error::NotCertifiable(format!(
                "deviation {max_deviation} exceeds envelope {envelope} for probe {phi}"
            )));
        }
        reports.push(ProbeReport {
            phi: phi.clone(),
            gauge,
            envelope,
            max_deviation,
            partitions_checked: deviations.len(),
            cells: base.len(),
        });
    }
    Ok(IntegralCertificate {
        value,
        regulator: reg.clone(),
        probes: reports,
    })
}

/// Outcome of [`integral_additivity_report`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AdditivityReport {
    pub whole: RieszValue,
    pub parts_sum: RieszValue,
    pub tolerance: RieszValue,
    pub additive: bool,
    /// `None` when `f` is not pointwise nonnegative.
    pub positive: Option<bool>,
    pub linear: bool,
}

impl AdditivityReport {
    pub fn passed(&self) -> bool {
        self.additive && self.positive != Some(false) && self.linear
    }
}

/// Additivity over disjoint `a`, `b`, positivity and scalar linearity.
pub fn integral_additivity_report(
    f: &Integrand,
    a: &BorelSet,
    b: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
    opts: &CertifyOptions,
) -> Result<AdditivityReport> {
    if a.overlap_length(b) > 0.0 {
        return Err(Error::NotDisjoint);
    }
    let strategy = ModulusGauge::default();
    let union = a.union(b);
    let whole = kh_integrate(f, &union, spec, reg, probes, &strategy, opts)?;
    let ia = kh_integrate(f, a, spec, reg, probes, &strategy, opts)?;
    let ib = kh_integrate(f, b, spec, reg, probes, &strategy, opts)?;
    let min_env = whole.min_envelope()?;
    let tolerance = min_env.scale(2.0);
    let parts_sum = ia.value.add(&ib.value)?;
    let additive = whole
        .value
        .sub(&parts_sum)?
        .abs()
        .leq_within(&tolerance, ORDER_SLACK)?;

    let positive = if f.is_pointwise_nonneg()? {
        Some(whole.value.is_nonneg() || whole.value.neg().leq_within(&tolerance, ORDER_SLACK)?)
    } else {
        None
    };

    let c = 2.0;
    let scaled = kh_integrate(&f.scaled(c), &union, spec, reg, probes, &strategy, opts)?;
    let linear = scaled
        .value
        .sub(&whole.value.scale(c))?
        .abs()
        .leq_within(&min_env.scale(1.0 + c), ORDER_SLACK)?;

    Ok(AdditivityReport {
        whole: whole.value,
        parts_sum,
        tolerance,
        additive,
        positive,
        linear,
    })
}

/// Boolean form of [`integral_additivity_report`].
pub fn integral_additivity_check(
    f: &Integrand,
    a: &BorelSet,
    b: &BorelSet,
    spec: &MeasureSpec,
    reg: &Regulator,
    probes: &[IndexMap],
    opts: &CertifyOptions,
) -> Result<bool> {
    Ok(integral_additivity_report(f, a, b, spec, reg, probes, opts)?.passed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::is_fine;
    use crate::lattice::standard_probes;

    fn s(x: f64) -> RieszValue {
        RieszValue::scalar(x)
    }

    fn reg() -> Regulator {
        Regulator::geometric(s(1.0), 1.0, 0.5).unwrap()
    }

    fn certify(f: &Integrand, e: &BorelSet) -> Result<IntegralCertificate> {
        kh_integrate(
            f,
            e,
            &MeasureSpec::lebesgue(),
            &reg(),
            &standard_probes(),
            &ModulusGauge::default(),
            &CertifyOptions::default(),
        )
    }

    #[test]
    fn identity_integrates_to_a_half() {
        let c = certify(&Integrand::identity(s(1.0)), &BorelSet::unit()).unwrap();
        assert_eq!(c.value, s(0.5));
        assert!(c.is_sound().unwrap());
        assert_eq!(c.probes.len(), standard_probes().len());
        assert!(c.probes.iter().all(|p| p.partitions_checked == 33));
    }

    #[test]
    fn step_function_integrates_exactly() {
        let f = Integrand::simple(vec![
            ("[0,0.5]".parse().unwrap(), s(2.0)),
            ("(0.5,1]".parse().unwrap(), s(1.0)),
        ])
        .unwrap();
        let c = certify(&f, &BorelSet::unit()).unwrap();
        assert_eq!(c.value, s(1.5));
        assert!(c.is_sound().unwrap());
    }

    #[test]
    fn zero_with_zero_regulator() {
        let c = kh_integrate(
            &Integrand::Constant(s(0.0)),
            &BorelSet::unit(),
            &MeasureSpec::lebesgue(),
            &Regulator::zero(&s(0.0)),
            &standard_probes(),
            &ModulusGauge::default(),
            &CertifyOptions::default(),
        )
        .unwrap();
        assert_eq!(c.value, s(0.0));
        assert!(c.probes.iter().all(|p| p.max_deviation.is_zero()));
    }

    #[test]
    fn spike_function_is_refused() {
        let r = certify(&Integrand::CounterexampleC00, &BorelSet::unit());
        assert!(matches!(r, Err(Error::NotCertifiable(_))));
        assert!(r.unwrap_err().to_string().contains("not KH-integrable"));
    }

    #[test]
    fn coarse_fixed_gauge_is_caught() {
        let r = kh_integrate(
            &Integrand::identity(s(1.0)),
            &BorelSet::unit(),
            &MeasureSpec::lebesgue(),
            &reg(),
            &[IndexMap::Constant(8)],
            &FixedGauge(Gauge::constant(0.3).unwrap()),
            &CertifyOptions::default(),
        );
        assert!(matches!(r, Err(Error::NotCertifiable(_))));
    }

    #[test]
    fn gauges_respect_jumps() {
        let f = Integrand::scalar_formula("step:0.3:1:4+t".parse().unwrap(), s(1.0)).unwrap();
        let env = s(1e-3);
        let g = ModulusGauge::default()
            .gauge(&f, &BorelSet::unit(), &MeasureSpec::lebesgue(), &env)
            .unwrap();
        let p = cousin_partition_set(&g, &BorelSet::unit(), 64).unwrap();
        assert!(is_fine(&p, &g));
        // No cell crosses the jump unless it is tagged there.
        for c in p.items() {
            if c.cell.lo() < 0.3 && c.cell.hi() > 0.3 {
                assert_eq!(c.tag, 0.3);
            }
        }
    }

    #[test]
    fn additivity_examples() {
        let spec = MeasureSpec::lebesgue();
        let a: BorelSet = "[0,0.5]".parse().unwrap();
        let b: BorelSet = "[0.5,1]".parse().unwrap();
        let opts = CertifyOptions::default();
        let r = integral_additivity_report(
            &Integrand::identity(s(1.0)),
            &a,
            &b,
            &spec,
            &reg(),
            &standard_probes(),
            &opts,
        )
        .unwrap();
        assert!(r.passed());
        assert_eq!(r.whole, s(0.5));
        assert_eq!(r.parts_sum, s(0.125 + 0.375));
        assert!(integral_additivity_check(
            &Integrand::Constant(s(0.0)),
            &a,
            &b,
            &spec,
            &reg(),
            &standard_probes(),
            &opts
        )
        .unwrap());
        let overlapping: BorelSet = "[0.4,1]".parse().unwrap();
        assert_eq!(
            integral_additivity_check(
                &Integrand::Constant(s(1.0)),
                &a,
                &overlapping,
                &spec,
                &reg(),
                &standard_probes(),
                &opts
            ),
            Err(Error::NotDisjoint)
        );
    }

    #[test]
    fn vector_valued_integrals() {
        let spec = MeasureSpec::new(RieszValue::vector([1.0, 2.0])).unwrap();
        let f =
            Integrand::scalar_formula("sin:3".parse().unwrap(), RieszValue::vector([1.0, -1.0]))
                .unwrap();
        let reg = Regulator::geometric(RieszValue::vector([1.0, 1.0]), 1.0, 0.5).unwrap();
        let c = kh_integrate(
            &f,
            &BorelSet::unit(),
            &spec,
            &reg,
            &standard_probes(),
            &ModulusGauge::default(),
            &CertifyOptions::default(),
        )
        .unwrap();
        let g = (1.0 - 3f64.cos()) / 3.0;
        assert!(
            c.value
                .distance(&RieszValue::vector([g, -2.0 * g]))
                .unwrap()
                < 1e-14
        );
        assert!(c.is_sound().unwrap());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let f = Integrand::scalar_formula("abs:0.3".parse().unwrap(), s(1.0)).unwrap();
        let mut opts = CertifyOptions::default();
        let go = |opts: &CertifyOptions| {
            kh_integrate(
                &f,
                &BorelSet::unit(),
                &MeasureSpec::lebesgue(),
                &reg(),
                &standard_probes(),
                &ModulusGauge::default(),
                opts,
            )
            .unwrap()
        };
        let a = go(&opts);
        opts.exec = Exec::Sequential;
        assert_eq!(a, go(&opts));
    }
}
