//! Single-valued gauge integration with regulator certificates.

mod certify;
mod counterexample;
mod integrand;

pub use certify::{
    integral_additivity_check, integral_additivity_report, kh_integrate, AdditivityReport,
    CertifyOptions, FixedGauge, GaugeStrategy, IntegralCertificate, ModulusGauge, ProbeReport,
};
pub use counterexample::{
    counterexample_gauge, counterexample_partition, counterexample_unboundedness,
    counterexample_unboundedness_with, spike_points, CounterexampleRow, UnboundednessReport,
};
pub use integrand::{riemann_sum, Integrand, Modulus, Part, Piece, ScalarForm};
