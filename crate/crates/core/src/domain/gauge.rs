use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The base radius function of a gauge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Radius {
    Constant(f64),
    /// `values[k]` applies on `[breaks[k-1], breaks[k])`, with the last value
    /// running through 1.
    PiecewiseConstant {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
    /// `min(cap, slope · dist(t, points))`; zero at the points themselves, so
    /// every point must also carry a tag radius.
    DistanceToPoints {
        cap: f64,
        slope: f64,
        points: Vec<f64>,
    },
    /// Pointwise minimum.
    Min(Vec<Radius>),
}

impl Radius {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Radius::Constant(c) => *c,
            Radius::PiecewiseConstant { breaks, values } => {
                let k = breaks.partition_point(|b| *b <= t);
                values[k]
            }
            Radius::DistanceToPoints { cap, slope, points } => {
                let d = points
                    .iter()
                    .map(|p| (t - p).abs())
                    .fold(f64::INFINITY, f64::min);
                cap.min(slope * d)
            }
            Radius::Min(parts) => parts
                .iter()
                .map(|r| r.eval(t))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Points where the radius may vanish; they must be tagged.
    fn singular_points(&self) -> Vec<f64> {
        match self {
            Radius::DistanceToPoints { points, .. } => points.clone(),
            Radius::Min(parts) => parts.iter().flat_map(Radius::singular_points).collect(),
            _ => Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Radius::Constant(c) if c.is_nan() || *c <= 0.0 => {
                Err(Error::InvalidGauge(format!("radius {c} must be positive")))
            }
            Radius::PiecewiseConstant { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(Error::InvalidGauge("need one value per piece".into()));
                }
                if breaks.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidGauge("breaks must increase".into()));
                }
                if values.iter().any(|v| v.is_nan() || *v <= 0.0) {
                    return Err(Error::InvalidGauge("piece radii must be positive".into()));
                }
                Ok(())
            }
            Radius::DistanceToPoints { cap, slope, .. } if !(*cap > 0.0 && *slope > 0.0) => {
                Err(Error::InvalidGauge("cap and slope must be positive".into()))
            }
            Radius::Min(parts) => parts.iter().try_for_each(Radius::validate),
            _ => Ok(()),
        }
    }

    fn lower_bound_away_from(&self, clearance: f64) -> f64 {
        match self {
            Radius::Constant(c) => *c,
            Radius::PiecewiseConstant { values, .. } => {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
            Radius::DistanceToPoints { cap, slope, .. } => cap.min(slope * clearance),
            Radius::Min(parts) => parts
                .iter()
                .map(|r| r.lower_bound_away_from(clearance))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// A point that partitions must use as a tag, with its own radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TagRadius {
    pub point: f64,
    pub radius: f64,
}

/// A strictly positive radius function on `[0, 1]`.
///
/// Mandatory tags override the base radius at their point. Away from the
/// cells carved around them the gauge stays above `floor`, which is what
/// lets bisection terminate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Gauge {
    radius: Radius,
    mandatory_tags: Vec<TagRadius>,
    floor_on_remainder: f64,
}

impl Gauge {
    pub fn new(radius: Radius, tags: Vec<TagRadius>) -> Result<Self> {
        radius.validate()?;
        let mut tags = tags;
        for t in &tags {
            if !(0.0..=1.0).contains(&t.point) || t.radius.is_nan() || t.radius <= 0.0 {
                return Err(Error::InvalidGauge(format!(
                    "tag {} with radius {} is invalid",
                    t.point, t.radius
                )));
            }
        }
        tags.sort_by(|a, b| a.point.total_cmp(&b.point));
        tags.dedup_by(|a, b| a.point == b.point);
        for p in radius.singular_points() {
            if !tags.iter().any(|t| t.point == p) {
                return Err(Error::InvalidGauge(format!(
                    "radius vanishes at {p}, which is not a mandatory tag"
                )));
            }
        }
        let clearance = tags
            .iter()
            .map(|t| t.radius / 2.0)
            .chain(tags.windows(2).map(|w| (w[1].point - w[0].point) / 2.0))
            .fold(f64::INFINITY, f64::min);
        let floor_on_remainder = radius.lower_bound_away_from(clearance);
        Ok(Gauge {
            radius,
            mandatory_tags: tags,
            floor_on_remainder,
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Gauge::new(Radius::Constant(c), Vec::new())
    }

    /// `min(cap, slope · dist(t, points))` off the points and `at_points` on them.
    pub fn distance_to_points(
        cap: f64,
        slope: f64,
        points: &[f64],
        at_points: f64,
    ) -> Result<Self> {
        let tags = points
            .iter()
            .map(|&point| TagRadius {
                point,
                radius: at_points,
            })
            .collect();
        Gauge::new(
            Radius::DistanceToPoints {
                cap,
                slope,
                points: points.to_vec(),
            },
            tags,
        )
    }

    /// Adds mandatory tags that keep the radius the gauge already has there.
    pub fn with_mandatory_tags(&self, points: &[f64]) -> Result<Self> {
        let mut tags = self.mandatory_tags.clone();
        for &p in points {
            if !tags.iter().any(|t| t.point == p) {
                tags.push(TagRadius {
                    point: p,
                    radius: self.eval(p),
                });
            }
        }
        Gauge::new(self.radius.clone(), tags)
    }

    /// The pointwise minimum of two gauges; a partition fine for the result
    /// is fine for both.
    pub fn min(&self, other: &Gauge) -> Result<Self> {
        let mut tags: Vec<TagRadius> = Vec::new();
        let points: Vec<f64> = self
            .mandatory_tags
            .iter()
            .chain(&other.mandatory_tags)
            .map(|t| t.point)
            .collect();
        for p in points {
            tags.push(TagRadius {
                point: p,
                radius: self.eval(p).min(other.eval(p)),
            });
        }
        Gauge::new(
            Radius::Min(vec![self.radius.clone(), other.radius.clone()]),
            tags,
        )
    }

    pub fn eval(&self, t: f64) -> f64 {
        if let Some(tag) = self.mandatory_tags.iter().find(|tag| tag.point == t) {
            return tag.radius;
        }
        self.radius.eval(t)
    }

    pub fn mandatory_tags(&self) -> &[TagRadius] {
        &self.mandatory_tags
    }

    pub fn floor_on_remainder(&self) -> f64 {
        self.floor_on_remainder
    }
}
