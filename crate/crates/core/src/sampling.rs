//! Randomized fine partitions used to stress-test universally quantified
//! claims ("for every γ-fine partition ...").
//!
//! A sample is the canonical Cousin partition with a few local edits: tags
//! moved inside their cell, or cells split in two with a fresh tag for the
//! new half. Every edit is kept only if the affected cells stay fine, so each
//! sample is itself γ-fine. Sums over a sample are updated incrementally from
//! the canonical sum, which keeps million-cell partitions cheap to perturb.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Gauge, Interval, TaggedCell, TaggedPartition};
use crate::error::Result;
use crate::lattice::RieszValue;

/// Maximum number of edited cells per sample.
pub const MAX_EDITS: usize = 8;

/// Deterministic generator for one `(a, b)` stream under `seed`.
pub fn rng_for(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(b);
    rng
}

/// Values that can be summed over cells and patched by subtraction.
pub trait Additive: Sized + Clone {
    fn plus(&self, other: &Self) -> Result<Self>;
    fn minus(&self, other: &Self) -> Result<Self>;
}

impl Additive for RieszValue {
    fn plus(&self, other: &Self) -> Result<Self> {
        self.add(other)
    }

    fn minus(&self, other: &Self) -> Result<Self> {
        self.sub(other)
    }
}

/// The canonical partition plus replacement cells at a few indices.
#[derive(Debug, Clone)]
pub struct PartitionSample<'a> {
    base: &'a TaggedPartition,
    /// Sorted by index; each entry replaces `base[index]`.
    edits: Vec<(usize, Vec<TaggedCell>)>,
}

impl<'a> PartitionSample<'a> {
    pub fn canonical(base: &'a TaggedPartition) -> Self {
        PartitionSample {
            base,
            edits: Vec::new(),
        }
    }

    pub fn edit_count(&self) -> usize {
        self.edits.len()
    }

    pub fn materialize(&self) -> TaggedPartition {
        let mut items = Vec::with_capacity(self.base.len() + self.edits.len());
        let mut next = 0;
        for (idx, cells) in &self.edits {
            items.extend_from_slice(&self.base.items()[next..*idx]);
            items.extend_from_slice(cells);
            next = idx + 1;
        }
        items.extend_from_slice(&self.base.items()[next..]);
        TaggedPartition::from_sorted_unchecked(items)
    }

    /// Whether the edited cells are fine (the rest is the canonical partition).
    pub fn edits_are_fine(&self, gauge: &Gauge) -> bool {
        self.edits
            .iter()
            .flat_map(|(_, cells)| cells)
            .all(|c| c.is_fine(gauge))
    }

    /// `Σ f(cell)` over the sample, given the canonical total.
    pub fn total<V: Additive>(
        &self,
        canonical_total: &V,
        f: impl Fn(&TaggedCell) -> Result<V>,
    ) -> Result<V> {
        let mut acc = canonical_total.clone();
        for (idx, cells) in &self.edits {
            acc = acc.minus(&f(&self.base.items()[*idx])?)?;
            for c in cells {
                acc = acc.plus(&f(c)?)?;
            }
        }
        Ok(acc)
    }
}

/// `Σ f(cell)` over a whole partition, starting from `zero`.
pub fn partition_total<V: Additive>(
    partition: &TaggedPartition,
    zero: V,
    f: impl Fn(&TaggedCell) -> Result<V>,
) -> Result<V> {
    let mut acc = zero;
    for c in partition.items() {
        acc = acc.plus(&f(c)?)?;
    }
    Ok(acc)
}

/// A random fine perturbation of `base`.
pub fn perturb<'a>(
    base: &'a TaggedPartition,
    gauge: &Gauge,
    rng: &mut impl Rng,
) -> PartitionSample<'a> {
    let n = base.len();
    if n == 0 {
        return PartitionSample::canonical(base);
    }
    let k = rng.gen_range(1..=MAX_EDITS.min(n));
    let mut picks = index::sample(rng, n, k).into_vec();
    picks.sort_unstable();
    let mut edits = Vec::new();
    for idx in picks {
        let cell = base.items()[idx];
        if cell.cell.length() == 0.0 {
            continue;
        }
        let replacement = if rng.gen_bool(0.5) {
            retag(&cell, gauge, rng).map(|c| vec![c])
        } else {
            split(&cell, gauge, rng)
        };
        if let Some(cells) = replacement {
            edits.push((idx, cells));
        }
    }
    PartitionSample { base, edits }
}

fn random_point(i: &Interval, rng: &mut impl Rng) -> f64 {
    (i.lo() + rng.gen::<f64>() * i.length()).clamp(i.lo(), i.hi())
}

fn retag(cell: &TaggedCell, gauge: &Gauge, rng: &mut impl Rng) -> Option<TaggedCell> {
    let t = random_point(&cell.cell, rng);
    let moved = TaggedCell {
        cell: cell.cell,
        tag: t,
    };
    moved.is_fine(gauge).then_some(moved)
}

fn split(cell: &TaggedCell, gauge: &Gauge, rng: &mut impl Rng) -> Option<Vec<TaggedCell>> {
    let s = random_point(&cell.cell, rng);
    if s <= cell.cell.lo() || s >= cell.cell.hi() {
        return None;
    }
    let left = Interval::new(cell.cell.lo(), s).ok()?;
    let right = Interval::new(s, cell.cell.hi()).ok()?;
    // The half holding the old tag keeps it: a sub-cell of a fine cell is fine.
    let (kept, fresh, kept_is_left) = if cell.tag <= s {
        (left, right, true)
    } else {
        (right, left, false)
    };
    let candidates = [
        fresh.midpoint(),
        random_point(&fresh, rng),
        fresh.hi(),
        fresh.lo(),
    ];
    let tag = candidates.into_iter().find(|&t| {
        TaggedCell {
            cell: fresh,
            tag: t,
        }
        .is_fine(gauge)
    })?;
    let kept = TaggedCell {
        cell: kept,
        tag: cell.tag,
    };
    let fresh = TaggedCell { cell: fresh, tag };
    Some(if kept_is_left {
        vec![kept, fresh]
    } else {
        vec![fresh, kept]
    })
}
