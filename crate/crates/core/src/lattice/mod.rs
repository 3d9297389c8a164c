//! Concrete value lattices, regulators ((D)-sequences) and envelope evaluation.

mod index_map;
mod regulator;
mod value;

pub use index_map::{parse_probe_list, standard_probes, IndexMap};
pub use regulator::{d_limit_check, d_limit_thresholds, fremlin_combine, fremlin_lhs, Regulator};
pub use value::{lattice_op, LatticeOp, RieszValue};
