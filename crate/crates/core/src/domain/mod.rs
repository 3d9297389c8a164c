//! The domain `[0, 1]`: interval unions, the measure, gauges, tagged
//! partitions and regularity witnesses.

mod gauge;
mod measure;
mod partition;
mod regularity;
mod sets;

pub use gauge::{Gauge, Radius, TagRadius};
pub use measure::{measure, MeasureSpec};
pub use partition::{
    cousin_partition, cousin_partition_set, is_fine, TaggedCell, TaggedPartition, DEFAULT_MAX_DEPTH,
};
pub use regularity::{
    regularity_witness, sigma_additivity_check, sigma_additivity_report, RegularityWitness,
    SigmaAdditivityReport,
};
pub use sets::{BorelSet, Interval};
