//! Order-interval valued multifunctions and their set-valued integral.
//!
//! The integral `Φ(F, E)` is never built as a set. It is exposed through a
//! membership test, which searches a halving family of gauges, and through an
//! interval oracle; the checks tie the two together.

mod interval;
mod multifunction;
mod phi;

pub use interval::{dot_sum, neighborhood_contains, set_scale, OrderInterval};
pub use multifunction::{riemann_set_sum, Multifunction, SetPiece};
pub use phi::{
    halving_gauge, phi_boundedness_report, phi_closedness_check, phi_closedness_report,
    phi_convexity_check, phi_convexity_report, phi_interval_oracle, phi_membership,
    phi_monotonicity_check, phi_monotonicity_report, BoundednessReport, ClosednessReport,
    ClosednessRow, ConvexityReport, MonotonicityReport, PhiEvaluator, PhiOptions,
};
