//! Kurzweil-Henstock (gauge) integration over concrete Riesz spaces.
//!
//! Values live in one of three coordinatewise-ordered lattices (reals, fixed
//! dimension vectors, finitely supported sequences). Convergence is
//! controlled by regulators instead of a metric: a claim such as
//! `|S − I| ≤ envelope(reg, φ)` is checked for every probe map `φ`.
//!
//! The crate covers single-valued integrals with certificates, the set-valued
//! integral of order-interval valued multifunctions, and the Aumann integral
//! built from integrable selections.

pub mod aumann;
pub mod domain;
pub mod error;
pub mod kh;
pub mod lattice;
pub mod par;
pub mod sampling;
pub mod setvalued;
pub mod suites;

pub use error::{Error, Result};

/// Absolute slack used by every order comparison between computed values.
pub const ORDER_SLACK: f64 = 1e-12;
