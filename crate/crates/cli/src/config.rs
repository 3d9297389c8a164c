//! Run configuration: a TOML file with sections, every value overridable by
//! flags. Missing keys take the defaults shown in `docs/config.md`.

use std::path::Path;

use kh_riesz::domain::MeasureSpec;
use kh_riesz::lattice::{parse_probe_list, standard_probes, IndexMap, Regulator, RieszValue};
use kh_riesz::par::Exec;
use kh_riesz::suites::SuiteConfig;
use serde::Deserialize;

/// The value space every integrand and set is built in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Scalar,
    Vector(usize),
    C00,
}

impl Space {
    /// The element with every coordinate 1 (`u_1` in c00).
    pub fn unit(&self) -> RieszValue {
        match self {
            Space::Scalar => RieszValue::scalar(1.0),
            Space::Vector(d) => RieszValue::vector(vec![1.0; *d]),
            Space::C00 => RieszValue::unit(1),
        }
    }

    /// Builds a value from coordinates. One number fills every coordinate;
    /// in c00 a list gives the coefficients of `u_1, u_2, …`.
    pub fn value(&self, xs: &[f64]) -> Result<RieszValue, String> {
        match (self, xs) {
            (_, []) => Err("empty value".into()),
            (Space::Scalar, [x]) => Ok(RieszValue::scalar(*x)),
            (Space::Scalar, _) => Err(format!("expected one number, got {}", xs.len())),
            (Space::Vector(d), [x]) => Ok(RieszValue::vector(vec![*x; *d])),
            (Space::Vector(d), _) if xs.len() == *d => Ok(RieszValue::vector(xs.to_vec())),
            (Space::Vector(d), _) => Err(format!("expected {d} coordinates, got {}", xs.len())),
            (Space::C00, _) => Ok(RieszValue::sparse(
                xs.iter().enumerate().map(|(i, x)| (i as u64 + 1, *x)),
            )),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Numbers {
    One(f64),
    Many(Vec<f64>),
}

impl Numbers {
    fn as_slice(&self) -> &[f64] {
        match self {
            Numbers::One(x) => std::slice::from_ref(x),
            Numbers::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceSection {
    kind: Option<String>,
    dim: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureSection {
    generator: Option<Numbers>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegulatorSection {
    kind: Option<String>,
    base: Option<Numbers>,
    row_scale: Option<f64>,
    col_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbesSection {
    list: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplingSection {
    samples: Option<usize>,
    max_depth: Option<usize>,
    max_level: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TolerancesSection {
    agreement: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    #[serde(default)]
    space: SpaceSection,
    #[serde(default)]
    measure: MeasureSection,
    #[serde(default)]
    regulator: RegulatorSection,
    #[serde(default)]
    probes: ProbesSection,
    #[serde(default)]
    sampling: SamplingSection,
    #[serde(default)]
    tolerances: TolerancesSection,
}

/// Flag values that override the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub probes: Option<String>,
    pub samples: Option<usize>,
    pub sequential: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub space: Space,
    pub spec: MeasureSpec,
    pub regulator: Regulator,
    pub probes: Vec<IndexMap>,
    pub seed: u64,
    pub samples: usize,
    pub max_depth: usize,
    pub max_level: u32,
    /// Largest discrepancy `compare` accepts between its three quantities.
    pub agreement: f64,
    pub exec: Exec,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, over: &Overrides) -> Result<Self, String> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| format!("--config: cannot read {}: {e}", p.display()))?,
            None => String::new(),
        };
        Self::from_toml(&text, over)
    }

    pub fn from_toml(text: &str, over: &Overrides) -> Result<Self, String> {
        Self::resolve(
            toml::from_str(text).map_err(|e| format!("--config: {e}"))?,
            over,
        )
    }

    fn resolve(file: FileConfig, over: &Overrides) -> Result<Self, String> {
        let space = match file.space.kind.as_deref().unwrap_or("scalar") {
            "scalar" => Space::Scalar,
            "vector" => match file.space.dim {
                Some(d) if d > 0 => Space::Vector(d),
                _ => return Err("space.dim: vector spaces need a positive dimension".into()),
            },
            "c00" => Space::C00,
            other => return Err(format!("space.kind: unknown space {other:?}")),
        };

        // A single number in c00 is a scalar generator, which acts by scaling.
        let generator = match (&file.measure.generator, space) {
            (None, _) => RieszValue::scalar(1.0),
            (Some(Numbers::One(x)), Space::C00) => RieszValue::scalar(*x),
            (Some(n), s) => s
                .value(n.as_slice())
                .map_err(|e| format!("measure.generator: {e}"))?,
        };
        let spec = MeasureSpec::new(generator).map_err(|e| format!("measure.generator: {e}"))?;

        let r = &file.regulator;
        let base = match &r.base {
            Some(n) => space
                .value(n.as_slice())
                .map_err(|e| format!("regulator.base: {e}"))?,
            None => space.unit(),
        };
        let regulator = match r.kind.as_deref().unwrap_or("geometric") {
            "geometric" => {
                Regulator::geometric(base, r.row_scale.unwrap_or(1.0), r.col_scale.unwrap_or(0.5))
                    .map_err(|e| format!("regulator: {e}"))?
            }
            "zero" => Regulator::zero(&base),
            other => return Err(format!("regulator.kind: unknown regulator {other:?}")),
        };

        let probes = match over.probes.as_deref().or(file.probes.list.as_deref()) {
            Some(list) => parse_probe_list(list).map_err(|e| format!("--probes: {e}"))?,
            None => standard_probes(),
        };

        let agreement = file.tolerances.agreement.unwrap_or(1e-9);
        if agreement.is_nan() || agreement <= 0.0 {
            return Err("tolerances.agreement: must be positive".into());
        }
        let samples = over.samples.or(file.sampling.samples).unwrap_or(32);
        let max_depth = file.sampling.max_depth.unwrap_or(64);
        if max_depth == 0 {
            return Err("sampling.max_depth: must be positive".into());
        }
        let max_level = file.sampling.max_level.unwrap_or(20);
        if max_level > 30 {
            return Err("sampling.max_level: at most 30".into());
        }
        Ok(RunConfig {
            space,
            spec,
            regulator,
            probes,
            seed: over.seed.or(file.seed).unwrap_or(0),
            samples,
            max_depth,
            max_level,
            agreement,
            exec: if over.sequential {
                Exec::Sequential
            } else {
                Exec::Parallel
            },
        })
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            seed: self.seed,
            spec: self.spec.clone(),
            regulator: self.regulator.clone(),
            probes: self.probes.clone(),
            samples: self.samples,
            max_level: self.max_level,
            max_depth: self.max_depth,
            exec: self.exec,
        }
    }
}
