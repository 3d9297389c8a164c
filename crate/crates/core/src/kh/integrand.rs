use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{BorelSet, MeasureSpec, TaggedPartition};
use crate::error::{Error, Result};
use crate::lattice::RieszValue;

/// Real functions on `[0, 1]` with closed-form antiderivatives and explicit
/// Lipschitz and sup bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ScalarForm {
    /// `Σ c_k t^k`
    Poly(Vec<f64>),
    Sin {
        freq: f64,
    },
    Cos {
        freq: f64,
    },
    Exp {
        rate: f64,
    },
    /// `|t − center|`
    Abs {
        center: f64,
    },
    /// `left` below `at`, `right` from `at` on.
    Step {
        at: f64,
        left: f64,
        right: f64,
    },
    Sum(Vec<ScalarForm>),
    Scaled {
        factor: f64,
        form: Box<ScalarForm>,
    },
}

impl ScalarForm {
    pub fn identity() -> Self {
        ScalarForm::Poly(vec![0.0, 1.0])
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarForm::Poly(c) => c.iter().rev().fold(0.0, |acc, k| acc * t + k),
            ScalarForm::Sin { freq } => (freq * t).sin(),
            ScalarForm::Cos { freq } => (freq * t).cos(),
            ScalarForm::Exp { rate } => (rate * t).exp(),
            ScalarForm::Abs { center } => (t - center).abs(),
            ScalarForm::Step { at, left, right } => {
                if t < *at {
                    *left
                } else {
                    *right
                }
            }
            ScalarForm::Sum(parts) => parts.iter().map(|p| p.eval(t)).sum(),
            ScalarForm::Scaled { factor, form } => factor * form.eval(t),
        }
    }

    /// A continuous antiderivative.
    pub fn antiderivative(&self, t: f64) -> f64 {
        match self {
            ScalarForm::Poly(c) => {
                c.iter()
                    .enumerate()
                    .rev()
                    .fold(0.0, |acc, (k, ck)| acc * t + ck / (k as f64 + 1.0))
                    * t
            }
            ScalarForm::Sin { freq } if *freq == 0.0 => 0.0,
            ScalarForm::Sin { freq } => -(freq * t).cos() / freq,
            ScalarForm::Cos { freq } if *freq == 0.0 => t,
            ScalarForm::Cos { freq } => (freq * t).sin() / freq,
            ScalarForm::Exp { rate } if *rate == 0.0 => t,
            ScalarForm::Exp { rate } => (rate * t).exp() / rate,
            ScalarForm::Abs { center } => (t - center) * (t - center).abs() / 2.0,
            ScalarForm::Step { at, left, right } => left * t.min(*at) + right * (t - at).max(0.0),
            ScalarForm::Sum(parts) => parts.iter().map(|p| p.antiderivative(t)).sum(),
            ScalarForm::Scaled { factor, form } => factor * form.antiderivative(t),
        }
    }

    pub fn integral(&self, e: &BorelSet) -> f64 {
        e.components()
            .iter()
            .map(|c| self.antiderivative(c.hi()) - self.antiderivative(c.lo()))
            .sum()
    }

    /// Lipschitz constant on `[0, 1]` away from [`Self::breakpoints`].
    pub fn lipschitz(&self) -> f64 {
        match self {
            ScalarForm::Poly(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, ck)| k as f64 * ck.abs())
                .sum(),
            ScalarForm::Sin { freq } | ScalarForm::Cos { freq } => freq.abs(),
            ScalarForm::Exp { rate } => rate.abs() * rate.exp().max(1.0),
            ScalarForm::Abs { .. } => 1.0,
            ScalarForm::Step { .. } => 0.0,
            ScalarForm::Sum(parts) => parts.iter().map(ScalarForm::lipschitz).sum(),
            ScalarForm::Scaled { factor, form } => factor.abs() * form.lipschitz(),
        }
    }

    /// `sup |g|` on `[0, 1]`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            ScalarForm::Poly(c) => c.iter().map(|x| x.abs()).sum(),
            ScalarForm::Sin { .. } | ScalarForm::Cos { .. } => 1.0,
            ScalarForm::Exp { rate } => rate.exp().max(1.0),
            ScalarForm::Abs { center } => center.abs().max((1.0 - center).abs()),
            ScalarForm::Step { left, right, .. } => left.abs().max(right.abs()),
            ScalarForm::Sum(parts) => parts.iter().map(ScalarForm::sup_bound).sum(),
            ScalarForm::Scaled { factor, form } => factor.abs() * form.sup_bound(),
        }
    }

    /// Jump points inside `(0, 1)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            ScalarForm::Step { at, .. } if *at > 0.0 && *at < 1.0 => vec![*at],
            ScalarForm::Sum(parts) => parts.iter().flat_map(ScalarForm::breakpoints).collect(),
            ScalarForm::Scaled { form, .. } => form.breakpoints(),
            _ => Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidIntegrand(format!("non-finite parameter {x}")))
            }
        };
        match self {
            ScalarForm::Poly(c) => c.iter().try_for_each(|x| finite(*x)),
            ScalarForm::Sin { freq } | ScalarForm::Cos { freq } => finite(*freq),
            ScalarForm::Exp { rate } => finite(*rate),
            ScalarForm::Abs { center } => finite(*center),
            ScalarForm::Step { at, left, right } => {
                finite(*at)?;
                finite(*left)?;
                finite(*right)
            }
            ScalarForm::Sum(parts) => parts.iter().try_for_each(ScalarForm::validate),
            ScalarForm::Scaled { factor, form } => {
                finite(*factor)?;
                form.validate()
            }
        }
    }
}

impl fmt::Display for ScalarForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarForm::Poly(c) => {
                write!(f, "poly:")?;
                for (i, x) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            ScalarForm::Sin { freq } => write!(f, "sin:{freq}"),
            ScalarForm::Cos { freq } => write!(f, "cos:{freq}"),
            ScalarForm::Exp { rate } => write!(f, "exp:{rate}"),
            ScalarForm::Abs { center } => write!(f, "abs:{center}"),
            ScalarForm::Step { at, left, right } => write!(f, "step:{at}:{left}:{right}"),
            ScalarForm::Sum(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            ScalarForm::Scaled { factor, form } => write!(f, "{factor}*{form}"),
        }
    }
}

impl FromStr for ScalarForm {
    type Err = Error;

    /// Terms joined by `+`, each optionally prefixed by `k*`:
    /// `t`, `poly:c0,c1,..`, `sin:w`, `cos:w`, `exp:r`, `abs:c`, `step:at:left:right`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidIntegrand(format!("cannot parse formula {s:?}"));
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        let mut terms = Vec::new();
        for raw in s.split('+') {
            let raw = raw.trim();
            let (factor, body) = match raw.split_once('*') {
                Some((k, body)) => (Some(num(k)?), body.trim()),
                None => (None, raw),
            };
            let (name, args) = body.split_once(':').unwrap_or((body, ""));
            let term = match name {
                "t" if args.is_empty() => ScalarForm::identity(),
                "poly" => ScalarForm::Poly(args.split(',').map(num).collect::<Result<_>>()?),
                "sin" => ScalarForm::Sin { freq: num(args)? },
                "cos" => ScalarForm::Cos { freq: num(args)? },
                "exp" => ScalarForm::Exp { rate: num(args)? },
                "abs" => ScalarForm::Abs { center: num(args)? },
                "step" => {
                    let v: Vec<f64> = args.split(':').map(num).collect::<Result<_>>()?;
                    let [at, left, right] = v[..] else {
                        return Err(bad());
                    };
                    ScalarForm::Step { at, left, right }
                }
                _ => ScalarForm::Poly(vec![num(body)?]),
            };
            terms.push(match factor {
                Some(factor) => ScalarForm::Scaled {
                    factor,
                    form: Box::new(term),
                },
                None => term,
            });
        }
        let form = if terms.len() == 1 {
            terms.pop().ok_or_else(bad)?
        } else {
            ScalarForm::Sum(terms)
        };
        form.validate()?;
        Ok(form)
    }
}

/// One piece of a simple function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub set: BorelSet,
    pub value: RieszValue,
}

/// One region of a piecewise integrand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub set: BorelSet,
    pub integrand: Integrand,
}

/// Functions `[0, 1] → R` that the integrator understands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Integrand {
    Constant(RieszValue),
    /// Pieces are disjoint up to null sets; at a shared endpoint the first
    /// listed piece wins. Zero off the pieces.
    Simple(Vec<Piece>),
    /// `g(t) · direction`
    PointwiseScalar {
        form: ScalarForm,
        direction: RieszValue,
    },
    /// `Σ c_k f_k`
    Combination(Vec<(f64, Integrand)>),
    /// `f_k` on `E_k` (first match wins), `otherwise` elsewhere.
    Piecewise {
        parts: Vec<Part>,
        otherwise: Box<Integrand>,
    },
    /// `u_n` at `t = 1/n`, zero elsewhere, valued in `c00`.
    CounterexampleC00,
}

/// What the gauge builder needs to know about an integrand.
///
/// Away from `breakpoints`, `|f(s) − f(t)| ≤ lipschitz · |s − t|` holds
/// coordinatewise; everywhere `|f| ≤ bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct Modulus {
    pub breakpoints: Vec<f64>,
    pub lipschitz: RieszValue,
    pub bound: RieszValue,
}

impl Integrand {
    pub fn simple(pieces: Vec<(BorelSet, RieszValue)>) -> Result<Self> {
        let f = Integrand::Simple(
            pieces
                .into_iter()
                .map(|(set, value)| Piece { set, value })
                .collect(),
        );
        f.validate()?;
        Ok(f)
    }

    pub fn scalar_formula(form: ScalarForm, direction: RieszValue) -> Result<Self> {
        let f = Integrand::PointwiseScalar { form, direction };
        f.validate()?;
        Ok(f)
    }

    /// `t ↦ t` with the given direction.
    pub fn identity(direction: RieszValue) -> Self {
        Integrand::PointwiseScalar {
            form: ScalarForm::identity(),
            direction,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Integrand::Combination(vec![(c, self.clone())])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Integrand::Constant(_) | Integrand::CounterexampleC00 => Ok(()),
            Integrand::Simple(pieces) => {
                let first = pieces.first().ok_or_else(|| {
                    Error::InvalidIntegrand("simple function has no pieces".into())
                })?;
                for (i, p) in pieces.iter().enumerate() {
                    p.value.check_compatible(&first.value)?;
                    for q in &pieces[i + 1..] {
                        if p.set.overlap_length(&q.set) > 0.0 {
                            return Err(Error::PiecesOverlap);
                        }
                    }
                }
                Ok(())
            }
            Integrand::PointwiseScalar { form, .. } => form.validate(),
            Integrand::Piecewise { parts, otherwise } => {
                otherwise.validate()?;
                let like = otherwise.template()?;
                for (i, p) in parts.iter().enumerate() {
                    p.integrand.validate()?;
                    p.integrand.template()?.check_compatible(&like)?;
                    for q in &parts[i + 1..] {
                        if p.set.overlap_length(&q.set) > 0.0 {
                            return Err(Error::PiecesOverlap);
                        }
                    }
                }
                Ok(())
            }
            Integrand::Combination(terms) => {
                let (_, first) = terms
                    .first()
                    .ok_or_else(|| Error::InvalidIntegrand("empty combination".into()))?;
                let like = first.template()?;
                for (c, f) in terms {
                    if !c.is_finite() {
                        return Err(Error::InvalidIntegrand(format!("coefficient {c}")));
                    }
                    f.validate()?;
                    f.template()?.check_compatible(&like)?;
                }
                Ok(())
            }
        }
    }

    /// A zero of the value space.
    pub fn template(&self) -> Result<RieszValue> {
        match self {
            Integrand::Constant(v) => Ok(v.zero_like()),
            Integrand::Simple(pieces) => pieces
                .first()
                .map(|p| p.value.zero_like())
                .ok_or_else(|| Error::InvalidIntegrand("simple function has no pieces".into())),
            Integrand::PointwiseScalar { direction, .. } => Ok(direction.zero_like()),
            Integrand::Piecewise { otherwise, .. } => otherwise.template(),
            Integrand::Combination(terms) => terms
                .first()
                .ok_or_else(|| Error::InvalidIntegrand("empty combination".into()))?
                .1
                .template(),
            Integrand::CounterexampleC00 => Ok(RieszValue::sparse([])),
        }
    }

    pub fn eval(&self, t: f64) -> Result<RieszValue> {
        match self {
            Integrand::Constant(v) => Ok(v.clone()),
            Integrand::Simple(pieces) => match pieces.iter().find(|p| p.set.contains(t)) {
                Some(p) => Ok(p.value.clone()),
                None => self.template(),
            },
            Integrand::PointwiseScalar { form, direction } => Ok(direction.scale(form.eval(t))),
            Integrand::Piecewise { parts, otherwise } => {
                match parts.iter().find(|p| p.set.contains(t)) {
                    Some(p) => p.integrand.eval(t),
                    None => otherwise.eval(t),
                }
            }
            Integrand::Combination(terms) => {
                let mut acc = self.template()?;
                for (c, f) in terms {
                    acc = acc.add(&f.eval(t)?.scale(*c))?;
                }
                Ok(acc)
            }
            Integrand::CounterexampleC00 => {
                let n = (1.0 / t).round();
                if t > 0.0 && n >= 1.0 && 1.0 / n == t {
                    Ok(RieszValue::unit(n as u64))
                } else {
                    Ok(RieszValue::sparse([]))
                }
            }
        }
    }

    /// `∫_E f dμ` in closed form; `None` when no finite value exists.
    pub fn exact_integral(&self, e: &BorelSet, spec: &MeasureSpec) -> Result<Option<RieszValue>> {
        let m0 = spec.generator();
        let v = match self {
            Integrand::Constant(v) => v.mul(m0)?.scale(e.length()),
            Integrand::Simple(pieces) => {
                let mut acc = self.template()?.mul(m0)?;
                for p in pieces {
                    let len = p.set.intersection(e).length();
                    acc = acc.add(&p.value.mul(m0)?.scale(len))?;
                }
                acc
            }
            Integrand::PointwiseScalar { form, direction } => {
                direction.mul(m0)?.scale(form.integral(e))
            }
            Integrand::Piecewise { parts, otherwise } => {
                let Some(mut acc) = otherwise.exact_integral(e, spec)? else {
                    return Ok(None);
                };
                for p in parts {
                    let on = p.set.intersection(e);
                    let (Some(inside), Some(replaced)) = (
                        p.integrand.exact_integral(&on, spec)?,
                        otherwise.exact_integral(&on, spec)?,
                    ) else {
                        return Ok(None);
                    };
                    acc = acc.add(&inside)?.sub(&replaced)?;
                }
                acc
            }
            Integrand::Combination(terms) => {
                let mut acc = self.template()?.mul(m0)?;
                for (c, f) in terms {
                    let Some(part) = f.exact_integral(e, spec)? else {
                        return Ok(None);
                    };
                    acc = acc.add(&part.scale(*c))?;
                }
                acc
            }
            Integrand::CounterexampleC00 => return Ok(None),
        };
        Ok(Some(v))
    }

    /// The declared modulus of integrability, if the integrand has one.
    pub fn modulus(&self) -> Result<Option<Modulus>> {
        let m = match self {
            Integrand::Constant(v) => Modulus {
                breakpoints: Vec::new(),
                lipschitz: v.zero_like(),
                bound: v.abs(),
            },
            Integrand::Simple(pieces) => {
                let mut bound = self.template()?;
                let mut breakpoints = Vec::new();
                for p in pieces {
                    bound = bound.join(&p.value.abs())?;
                    breakpoints.extend(p.set.endpoints());
                }
                Modulus {
                    breakpoints,
                    lipschitz: self.template()?,
                    bound,
                }
            }
            Integrand::PointwiseScalar { form, direction } => Modulus {
                breakpoints: form.breakpoints(),
                lipschitz: direction.abs().scale(form.lipschitz()),
                bound: direction.abs().scale(form.sup_bound()),
            },
            Integrand::Piecewise { parts, otherwise } => {
                let Some(mut acc) = otherwise.modulus()? else {
                    return Ok(None);
                };
                for p in parts {
                    let Some(m) = p.integrand.modulus()? else {
                        return Ok(None);
                    };
                    acc.breakpoints.extend(p.set.endpoints());
                    acc.breakpoints.extend(m.breakpoints);
                    acc.lipschitz = acc.lipschitz.join(&m.lipschitz)?;
                    acc.bound = acc.bound.join(&m.bound)?;
                }
                acc
            }
            Integrand::Combination(terms) => {
                let mut acc = Modulus {
                    breakpoints: Vec::new(),
                    lipschitz: self.template()?,
                    bound: self.template()?,
                };
                for (c, f) in terms {
                    let Some(m) = f.modulus()? else {
                        return Ok(None);
                    };
                    acc.breakpoints.extend(m.breakpoints);
                    acc.lipschitz = acc.lipschitz.add(&m.lipschitz.scale(c.abs()))?;
                    acc.bound = acc.bound.add(&m.bound.scale(c.abs()))?;
                }
                acc
            }
            Integrand::CounterexampleC00 => return Ok(None),
        };
        let mut breakpoints: Vec<f64> = m
            .breakpoints
            .into_iter()
            .filter(|b| *b > 0.0 && *b < 1.0)
            .collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Ok(Some(Modulus { breakpoints, ..m }))
    }

    /// Whether `f ≥ 0` on a fine grid plus the breakpoints (exact for
    /// constant and simple integrands).
    pub fn is_pointwise_nonneg(&self) -> Result<bool> {
        match self {
            Integrand::Constant(v) => Ok(v.is_nonneg()),
            Integrand::Simple(pieces) => Ok(pieces.iter().all(|p| p.value.is_nonneg())),
            Integrand::CounterexampleC00 => Ok(true),
            _ => {
                let mut pts: Vec<f64> = (0..=4096).map(|k| k as f64 / 4096.0).collect();
                if let Some(m) = self.modulus()? {
                    pts.extend(m.breakpoints);
                }
                for t in pts {
                    if !self.eval(t)?.is_nonneg() {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

/// `Σ f(t_i) μ(E_i)` over the cells of `partition`.
pub fn riemann_sum(
    f: &Integrand,
    partition: &TaggedPartition,
    spec: &MeasureSpec,
) -> Result<RieszValue> {
    let mut acc = f.template()?.mul(spec.generator())?;
    for c in partition.items() {
        acc = acc.add(&cell_term(f, c.tag, c.cell.length(), spec)?)?;
    }
    Ok(acc)
}

/// `f(t) μ(cell)` for a cell of the given length.
pub(crate) fn cell_term(
    f: &Integrand,
    tag: f64,
    length: f64,
    spec: &MeasureSpec,
) -> Result<RieszValue> {
    Ok(f.eval(tag)?.mul(spec.generator())?.scale(length))
}
