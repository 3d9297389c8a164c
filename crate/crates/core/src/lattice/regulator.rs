use serde::{Deserialize, Serialize};

use super::index_map::IndexMap;
use super::value::RieszValue;
use crate::error::{Error, Result};

/// A (D)-sequence `a[i][j]`: bounded, nonincreasing in `j`, with every row
/// decreasing to zero.
///
/// Only closed-form families are representable so that envelopes
/// `sup_i a[i][φ(i)]` can be evaluated exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Regulator {
    /// `a[i][j] = row_scale^i · col_scale^j · base`
    #[serde(rename_all = "camelCase")]
    Geometric {
        base: RieszValue,
        row_scale: f64,
        col_scale: f64,
    },
    /// Explicit rows. Row `i` is extended by its last entry (which must be
    /// zero) and rows past the end are zero.
    FiniteMatrix {
        rows: Vec<Vec<RieszValue>>,
    },
    Scaled {
        inner: Box<Regulator>,
        factor: f64,
    },
    SumPair {
        left: Box<Regulator>,
        right: Box<Regulator>,
    },
    /// Combination produced by [`fremlin_combine`]:
    /// `b[n][j] = bound ∧ 2^n · Σ_{k < n} family[k][n − k][j]`.
    Fremlin {
        family: Vec<Regulator>,
        bound: RieszValue,
    },
}

/// One summand `coef · row^i · col^j` of a regulator's closed form.
#[derive(Debug, Clone)]
struct GeometricTerm {
    coef: RieszValue,
    row: f64,
    col: f64,
}

/// Rows above which the closed form applies.
type GeometricTail = (u64, Vec<GeometricTerm>);

const MAX_ENVELOPE_ROWS: u64 = 1000;

impl Regulator {
    pub fn geometric(base: RieszValue, row_scale: f64, col_scale: f64) -> Result<Self> {
        if !base.is_nonneg() {
            return Err(Error::InvalidRegulator("geometric base must be ≥ 0".into()));
        }
        if !(row_scale > 0.0 && row_scale <= 1.0) {
            return Err(Error::InvalidRegulator(format!(
                "row scale {row_scale} outside (0, 1]"
            )));
        }
        if !(col_scale > 0.0 && col_scale < 1.0) {
            return Err(Error::InvalidRegulator(format!(
                "column scale {col_scale} outside (0, 1)"
            )));
        }
        Ok(Regulator::Geometric {
            base,
            row_scale,
            col_scale,
        })
    }

    /// The regulator whose entries all vanish, in the space of `like`.
    pub fn zero(like: &RieszValue) -> Self {
        Regulator::Geometric {
            base: like.zero_like(),
            row_scale: 1.0,
            col_scale: 0.5,
        }
    }

    pub fn finite_matrix(rows: Vec<Vec<RieszValue>>) -> Result<Self> {
        let first = rows
            .first()
            .and_then(|r| r.first())
            .ok_or_else(|| {
                Error::InvalidRegulator("finite matrix needs at least one entry".into())
            })?
            .clone();
        for row in &rows {
            let last = row
                .last()
                .ok_or_else(|| Error::InvalidRegulator("empty row".into()))?;
            if !last.is_zero() {
                return Err(Error::InvalidRegulator(
                    "last entry of every row must be zero".into(),
                ));
            }
            for pair in row.windows(2) {
                pair[0].check_compatible(&first)?;
                if !pair[1].leq(&pair[0])? {
                    return Err(Error::InvalidRegulator("rows must be nonincreasing".into()));
                }
            }
            for x in row {
                x.check_compatible(&first)?;
                if !x.is_nonneg() {
                    return Err(Error::InvalidRegulator("entries must be ≥ 0".into()));
                }
            }
        }
        Ok(Regulator::FiniteMatrix { rows })
    }

    pub fn scaled(inner: Regulator, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::InvalidRegulator(format!(
                "scale factor {factor} must be ≥ 0"
            )));
        }
        Ok(Regulator::Scaled {
            inner: Box::new(inner),
            factor,
        })
    }

    pub fn sum_pair(left: Regulator, right: Regulator) -> Result<Self> {
        left.template().check_compatible(&right.template())?;
        Ok(Regulator::SumPair {
            left: Box::new(left),
            right: Box::new(right),
        })
    }

    /// `2 · (self + self)`, the regulator that absorbs convex combinations
    /// of two approximations each controlled by `self`.
    pub fn doubled_pair(&self) -> Regulator {
        Regulator::Scaled {
            inner: Box::new(Regulator::SumPair {
                left: Box::new(self.clone()),
                right: Box::new(self.clone()),
            }),
            factor: 2.0,
        }
    }

    /// Zero element of the regulator's value space.
    pub fn template(&self) -> RieszValue {
        match self {
            Regulator::Geometric { base, .. } => base.zero_like(),
            Regulator::FiniteMatrix { rows } => rows[0][0].zero_like(),
            Regulator::Scaled { inner, .. } => inner.template(),
            Regulator::SumPair { left, .. } => left.template(),
            Regulator::Fremlin { bound, .. } => bound.zero_like(),
        }
    }

    /// The entry `a[i][j]`, indices starting at 1.
    pub fn entry(&self, i: u64, j: u64) -> Result<RieszValue> {
        if i == 0 || j == 0 {
            return Err(Error::InvalidIndexMap(
                "regulator indices start at 1".into(),
            ));
        }
        match self {
            Regulator::Geometric {
                base,
                row_scale,
                col_scale,
            } => Ok(base.scale(row_scale.powf(i as f64) * col_scale.powf(j as f64))),
            Regulator::FiniteMatrix { rows } => match rows.get((i - 1) as usize) {
                None => Ok(self.template()),
                Some(row) => {
                    let col = ((j - 1) as usize).min(row.len() - 1);
                    Ok(row[col].clone())
                }
            },
            Regulator::Scaled { inner, factor } => Ok(inner.entry(i, j)?.scale(*factor)),
            Regulator::SumPair { left, right } => left.entry(i, j)?.add(&right.entry(i, j)?),
            Regulator::Fremlin { family, bound } => {
                let mut acc = bound.zero_like();
                for (k0, reg) in family.iter().enumerate() {
                    let k = k0 as u64 + 1;
                    if k >= i {
                        break;
                    }
                    acc = acc.add(&reg.entry(i - k, j)?)?;
                }
                bound.meet(&acc.scale(2f64.powf(i as f64)))
            }
        }
    }

    fn geometric_tail(&self) -> Option<GeometricTail> {
        match self {
            Regulator::Geometric {
                base,
                row_scale,
                col_scale,
            } => Some((
                0,
                vec![GeometricTerm {
                    coef: base.clone(),
                    row: *row_scale,
                    col: *col_scale,
                }],
            )),
            Regulator::FiniteMatrix { rows } => Some((rows.len() as u64, Vec::new())),
            Regulator::Scaled { inner, factor } => {
                let (thr, terms) = inner.geometric_tail()?;
                Some((
                    thr,
                    terms
                        .into_iter()
                        .map(|t| GeometricTerm {
                            coef: t.coef.scale(*factor),
                            ..t
                        })
                        .collect(),
                ))
            }
            Regulator::SumPair { left, right } => {
                let (a, mut ta) = left.geometric_tail()?;
                let (b, tb) = right.geometric_tail()?;
                ta.extend(tb);
                Some((a.max(b), ta))
            }
            Regulator::Fremlin { .. } => None,
        }
    }

    /// `sup_i a[i][φ(i)]`.
    ///
    /// Exact for every variant except `SumPair`, which returns the sum of the
    /// two envelopes (tight when both sides are geometric).
    pub fn envelope(&self, phi: &IndexMap) -> Result<RieszValue> {
        match self {
            Regulator::Geometric {
                base,
                row_scale,
                col_scale,
            } => {
                // Nondecreasing φ and row_scale ≤ 1 put the maximum at i = 1.
                let j = phi.eval(1) as f64;
                Ok(base.scale(row_scale * col_scale.powf(j)))
            }
            Regulator::FiniteMatrix { rows } => {
                let mut acc = self.template();
                for i in 1..=rows.len() as u64 {
                    acc = acc.join(&self.entry(i, phi.eval(i))?)?;
                }
                Ok(acc)
            }
            Regulator::Scaled { inner, factor } => Ok(inner.envelope(phi)?.scale(*factor)),
            Regulator::SumPair { left, right } => left.envelope(phi)?.add(&right.envelope(phi)?),
            Regulator::Fremlin { family, bound } => fremlin_envelope(self, family, bound, phi),
        }
    }
}

fn fremlin_envelope(
    reg: &Regulator,
    family: &[Regulator],
    bound: &RieszValue,
    phi: &IndexMap,
) -> Result<RieszValue> {
    let mut threshold = family.len() as u64 + 1;
    // (shift k, term) pairs describing row n − k of member k for large n
    let mut terms: Vec<(u64, GeometricTerm)> = Vec::new();
    for (k0, member) in family.iter().enumerate() {
        let k = k0 as u64 + 1;
        let (thr, ts) = member.geometric_tail().ok_or_else(|| {
            Error::NonComputableEnvelope("nested combination inside a combined regulator".into())
        })?;
        threshold = threshold.max(thr + k + 1);
        terms.extend(ts.into_iter().map(|t| (k, t)));
    }

    // Past `threshold`, each weighted term 2^n·row^(n−k)·col^φ(n) changes by the
    // factor 2·row·col^(φ(n+1)−φ(n)), which is nonincreasing in n because
    // every supported φ has nondecreasing increments.
    let ratio = |t: &GeometricTerm, n: u64| {
        let step = phi.eval(n + 1).saturating_sub(phi.eval(n)) as f64;
        2.0 * t.row * t.col.powf(step)
    };
    let mut divergent = bound.zero_like();
    let mut settle = threshold;
    for (_, t) in &terms {
        if t.coef.is_zero() {
            continue;
        }
        let mut n = threshold;
        while ratio(t, n) > 1.0 {
            if n >= MAX_ENVELOPE_ROWS || eventually_constant_step(phi, n) {
                break;
            }
            n += 1;
        }
        if ratio(t, n) > 1.0 {
            // Unbounded growth: these coordinates saturate at the bound.
            divergent = divergent.join(&t.coef.map(|x| if x > 0.0 { 1.0 } else { 0.0 }))?;
        } else {
            settle = settle.max(n);
        }
    }
    if settle > MAX_ENVELOPE_ROWS {
        return Err(Error::NonComputableEnvelope(format!(
            "combined envelope needs more than {MAX_ENVELOPE_ROWS} rows"
        )));
    }

    let mut acc = bound.zero_like();
    for n in 2..=settle.max(2) {
        acc = acc.join(&reg.entry(n, phi.eval(n))?)?;
    }
    let saturated = bound.mul(&divergent)?;
    acc.join(&saturated)
}

/// Whether `φ(m+1) − φ(m)` is the same for every `m ≥ n`.
fn eventually_constant_step(phi: &IndexMap, n: u64) -> bool {
    match phi {
        IndexMap::Constant(_) | IndexMap::Identity | IndexMap::Affine { .. } => true,
        IndexMap::Exponential => false,
        IndexMap::Shifted { inner, by } => eventually_constant_step(inner, n + by),
    }
}

/// Combines a family of regulators into one whose envelope dominates
/// `u ∧ Σ_{k ≤ s} envelope(family[k], i ↦ φ(i + k))` for every φ and s.
///
/// Each shifted envelope is at most `Σ_n c[n][φ(n)]` with
/// `c[n][j] = Σ_{k<n} family[k][n−k][j]`, and a series of nonnegative terms is
/// bounded by `sup_n 2^n c[n][φ(n)]`, so `b[n][j] = u ∧ 2^n c[n][j]` works and
/// stays a regulator (finite sums keep rows decreasing to zero).
pub fn fremlin_combine(regs: &[Regulator], u: &RieszValue) -> Result<Regulator> {
    let first = regs.first().ok_or(Error::EmptyFamily)?;
    if !u.is_nonneg() {
        return Err(Error::InvalidRegulator("Fremlin bound must be ≥ 0".into()));
    }
    for r in regs {
        r.template().check_compatible(u)?;
    }
    if u.is_zero() {
        return Ok(Regulator::zero(&first.template()));
    }
    Ok(Regulator::Fremlin {
        family: regs.to_vec(),
        bound: u.clone(),
    })
}

/// Left side of the Fremlin inequality, `u ∧ Σ_{k=1}^{s} envelope(regs[k], φ(· + k))`.
pub fn fremlin_lhs(
    regs: &[Regulator],
    u: &RieszValue,
    phi: &IndexMap,
    s: usize,
) -> Result<RieszValue> {
    let mut acc = u.zero_like();
    for (k0, reg) in regs.iter().take(s).enumerate() {
        acc = acc.add(&reg.envelope(&phi.shifted(k0 as u64 + 1))?)?;
    }
    u.meet(&acc)
}

/// Whether `(D)lim seq = r` under `reg`, checked over `probes`.
///
/// For each probe there must be an index after which every listed term
/// satisfies `|r_n − r| ≤ envelope(reg, φ)`.
pub fn d_limit_check(
    seq: &[RieszValue],
    r: &RieszValue,
    reg: &Regulator,
    probes: &[IndexMap],
) -> Result<bool> {
    Ok(d_limit_thresholds(seq, r, reg, probes)?
        .iter()
        .all(Option::is_some))
}

/// The smallest valid `n0` (0-based) for each probe, if one exists.
pub fn d_limit_thresholds(
    seq: &[RieszValue],
    r: &RieszValue,
    reg: &Regulator,
    probes: &[IndexMap],
) -> Result<Vec<Option<usize>>> {
    if probes.is_empty() {
        return Err(Error::EmptyProbeSet);
    }
    if seq.is_empty() {
        return Err(Error::InvalidIntegrand("sequence must be nonempty".into()));
    }
    let gaps = seq
        .iter()
        .map(|x| Ok(x.sub(r)?.abs()))
        .collect::<Result<Vec<_>>>()?;
    probes
        .iter()
        .map(|phi| {
            let env = reg.envelope(phi)?;
            let mut n0 = None;
            for (n, g) in gaps.iter().enumerate().rev() {
                if g.leq_within(&env, crate::ORDER_SLACK)? {
                    n0 = Some(n);
                } else {
                    break;
                }
            }
            Ok(n0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::index_map::standard_probes;

    fn s(x: f64) -> RieszValue {
        RieszValue::scalar(x)
    }

    fn geo(row: f64, col: f64) -> Regulator {
        Regulator::geometric(s(1.0), row, col).unwrap()
    }

    #[test]
    fn entries() {
        assert_eq!(geo(0.5, 0.5).entry(1, 1).unwrap(), s(0.25));
        let z = Regulator::scaled(Regulator::zero(&s(0.0)), 5.0).unwrap();
        assert_eq!(z.entry(3, 4).unwrap(), s(0.0));
        let m = Regulator::finite_matrix(vec![vec![s(3.0), s(0.0)]]).unwrap();
        assert_eq!(m.entry(1, 5).unwrap(), s(0.0));
        assert_eq!(m.entry(1, 1).unwrap(), s(3.0));
        assert_eq!(m.entry(7, 1).unwrap(), s(0.0));
    }

    #[test]
    fn construction_rejects_bad_families() {
        assert!(Regulator::geometric(s(-1.0), 0.5, 0.5).is_err());
        assert!(Regulator::geometric(s(1.0), 0.0, 0.5).is_err());
        assert!(Regulator::geometric(s(1.0), 0.5, 1.0).is_err());
        assert!(Regulator::finite_matrix(vec![vec![s(1.0), s(0.5)]]).is_err());
        assert!(Regulator::finite_matrix(vec![vec![s(1.0), s(2.0), s(0.0)]]).is_err());
        assert!(Regulator::scaled(geo(1.0, 0.5), -1.0).is_err());
    }

    #[test]
    fn envelope_examples() {
        // Brute force over rows for the closed forms.
        let brute = |reg: &Regulator, phi: &IndexMap| {
            (1..200u64)
                .map(|i| reg.entry(i, phi.eval(i)).unwrap().coordinates()[0])
                .fold(0.0, f64::max)
        };
        let r = geo(0.5, 0.5);
        assert_eq!(r.envelope(&IndexMap::Identity).unwrap(), s(0.25));
        assert_eq!(brute(&r, &IndexMap::Identity), 0.25);
        let r = geo(1.0, 0.5);
        assert_eq!(r.envelope(&IndexMap::Constant(3)).unwrap(), s(0.125));
        assert_eq!(brute(&r, &IndexMap::Constant(3)), 0.125);
        assert_eq!(
            Regulator::zero(&s(0.0))
                .envelope(&IndexMap::Exponential)
                .unwrap(),
            s(0.0)
        );
    }

    #[test]
    fn sum_pair_envelope_is_tight_on_geometric_leaves() {
        let r = Regulator::sum_pair(geo(0.5, 0.5), geo(1.0, 0.25)).unwrap();
        for phi in standard_probes() {
            let env = r.envelope(&phi).unwrap().coordinates()[0];
            let brute = (1..100u64)
                .map(|i| r.entry(i, phi.eval(i)).unwrap().coordinates()[0])
                .fold(0.0, f64::max);
            assert!((env - brute).abs() <= 1e-15, "{phi}: {env} vs {brute}");
        }
    }

    #[test]
    fn fremlin_trivial_cases() {
        let zero = Regulator::zero(&s(0.0));
        let c = fremlin_combine(std::slice::from_ref(&zero), &s(4.0)).unwrap();
        for phi in standard_probes() {
            let lhs = fremlin_lhs(std::slice::from_ref(&zero), &s(4.0), &phi, 10).unwrap();
            assert_eq!(lhs, s(0.0));
            assert!(lhs.leq(&c.envelope(&phi).unwrap()).unwrap());
        }
        let c = fremlin_combine(&[geo(0.5, 0.5)], &s(0.0)).unwrap();
        assert_eq!(c, Regulator::zero(&s(0.0)));
        assert_eq!(fremlin_combine(&[], &s(1.0)), Err(Error::EmptyFamily));
    }

    #[test]
    fn fremlin_three_copies() {
        let regs = vec![geo(0.5, 0.5); 3];
        let u = s(10.0);
        let c = fremlin_combine(&regs, &u).unwrap();
        // Shifted envelopes by hand: 0.5·0.5^(1+k) for k = 1, 2, 3.
        let lhs = fremlin_lhs(&regs, &u, &IndexMap::Identity, 3).unwrap();
        assert!((lhs.coordinates()[0] - 0.21875).abs() < 1e-15);
        let rhs = c.envelope(&IndexMap::Identity).unwrap();
        assert!(lhs.leq(&rhs).unwrap());
        // Rows 1..4 weigh in at 0.5, 0.75, 0.875, 0.4375; row 3 is the peak.
        assert!((rhs.coordinates()[0] - 0.875).abs() < 1e-15);
    }

    #[test]
    fn fremlin_envelope_matches_row_scan() {
        let regs = vec![geo(0.9, 0.5), geo(0.3, 0.8), geo(1.0, 0.1)];
        let u = s(3.0);
        let c = fremlin_combine(&regs, &u).unwrap();
        for phi in standard_probes() {
            let env = c.envelope(&phi).unwrap().coordinates()[0];
            let scan = (1..900u64)
                .map(|n| c.entry(n, phi.eval(n)).unwrap().coordinates()[0])
                .fold(0.0, f64::max);
            assert!(
                scan <= env + 1e-12,
                "{phi}: scan {scan} above envelope {env}"
            );
            if env < 3.0 {
                assert!((env - scan).abs() <= 1e-12, "{phi}: {env} vs {scan}");
            }
        }
    }

    #[test]
    fn d_limit_examples() {
        let r = s(0.7);
        let seq = vec![r.clone(); 5];
        let zero = Regulator::zero(&s(0.0));
        assert!(d_limit_check(&seq, &r, &zero, &standard_probes()).unwrap());

        let seq: Vec<_> = (1..=100).map(|n| s(1.0 / n as f64)).collect();
        let reg = geo(1.0, 0.5);
        let mut probes: Vec<_> = (1..=6).map(IndexMap::Constant).collect();
        probes.push(IndexMap::Identity);
        assert!(d_limit_check(&seq, &s(0.0), &reg, &probes).unwrap());
        assert!(!d_limit_check(&seq, &s(0.5), &reg, &[IndexMap::Constant(6)]).unwrap());
        assert_eq!(
            d_limit_check(&seq, &s(0.0), &reg, &[]),
            Err(Error::EmptyProbeSet)
        );
    }
}
