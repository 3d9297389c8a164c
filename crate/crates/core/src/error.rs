use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operands belong to different value spaces ({left} vs {right})")]
    MixedVariant {
        left: &'static str,
        right: &'static str,
    },
    #[error("vector dimensions differ ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid regulator: {0}")]
    InvalidRegulator(String),
    #[error("index map is invalid: {0}")]
    InvalidIndexMap(String),
    #[error("envelope has no finite evaluation scheme: {0}")]
    NonComputableEnvelope(String),
    #[error("regulator family is empty")]
    EmptyFamily,
    #[error("probe set is empty")]
    EmptyProbeSet,
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid gauge: {0}")]
    InvalidGauge(String),
    #[error("bisection exceeded depth {max_depth} near [{lo}, {hi}]")]
    DepthExceeded { max_depth: usize, lo: f64, hi: f64 },
    #[error("envelope too small to build a regularity witness")]
    EnvelopeTooSmall,
    #[error("sets overlap in positive measure")]
    NotDisjoint,
    #[error("integrand is not KH-integrable: {0}")]
    NotCertifiable(String),
    #[error("gauge construction failed: {0}")]
    GaugeConstructionFailed(String),
    #[error("invalid integrand: {0}")]
    InvalidIntegrand(String),
    #[error("invalid order interval: lower end exceeds upper end")]
    InvalidOrderInterval,
    #[error("scaling factor is not positive")]
    NegativeScaleUnsupported,
    #[error("multifunction is not bounded")]
    UnboundedMultifunction,
    #[error("some value of the multifunction does not contain 0")]
    ZeroNotInValues,
    #[error("set A is not contained in set B")]
    NotNested,
    #[error("invalid multifunction: {0}")]
    InvalidMultifunction(String),
    #[error("mix value {0} lies outside [0, 1]")]
    InvalidMix(f64),
    #[error("selection family is empty")]
    EmptySelectionFamily,
    #[error("multifunction pieces overlap in positive measure")]
    PiecesOverlap,
    #[error("no suite named {0:?}")]
    UnknownSuite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
