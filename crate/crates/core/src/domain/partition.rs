use serde::{Deserialize, Serialize};

use super::gauge::Gauge;
use super::sets::{BorelSet, Interval};
use crate::error::{Error, Result};

/// Default bisection depth for [`cousin_partition`].
pub const DEFAULT_MAX_DEPTH: usize = 64;

/// A cell together with its tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", try_from = "[f64; 3]")]
pub struct TaggedCell {
    pub cell: Interval,
    pub tag: f64,
}

impl TaggedCell {
    pub fn new(cell: Interval, tag: f64) -> Result<Self> {
        if !cell.contains(tag) {
            return Err(Error::InvalidInterval {
                lo: cell.lo(),
                hi: cell.hi(),
            });
        }
        Ok(TaggedCell { cell, tag })
    }

    /// Whether the cell lies in the open ball of radius `γ(tag)` around the tag.
    pub fn is_fine(&self, gauge: &Gauge) -> bool {
        self.cell.radius_from(self.tag) < gauge.eval(self.tag)
    }
}

impl From<TaggedCell> for [f64; 3] {
    fn from(c: TaggedCell) -> Self {
        [c.cell.lo(), c.cell.hi(), c.tag]
    }
}

impl TryFrom<[f64; 3]> for TaggedCell {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        TaggedCell::new(Interval::new(v[0], v[1])?, v[2])
    }
}

/// A finite list of tagged cells that overlap at most at endpoints.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaggedPartition {
    items: Vec<TaggedCell>,
}

impl TaggedPartition {
    /// Builds a partition, checking tags and overlaps.
    pub fn new(mut items: Vec<TaggedCell>) -> Result<Self> {
        items.sort_by(|a, b| a.cell.lo().total_cmp(&b.cell.lo()));
        for w in items.windows(2) {
            if w[1].cell.lo() < w[0].cell.hi() {
                return Err(Error::NotDisjoint);
            }
        }
        Ok(TaggedPartition { items })
    }

    pub(crate) fn from_sorted_unchecked(items: Vec<TaggedCell>) -> Self {
        TaggedPartition { items }
    }

    pub fn items(&self) -> &[TaggedCell] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.items.iter().map(|c| c.cell.length()).sum()
    }

    /// Whether the cells fill `e` exactly (up to `slack` in length).
    pub fn covers(&self, e: &BorelSet, slack: f64) -> bool {
        let inside = self
            .items
            .iter()
            .all(|c| e.components().iter().any(|k| k.contains_interval(&c.cell)));
        inside && (self.total_length() - e.length()).abs() <= slack
    }

    /// Concatenation of partitions of sets that overlap at most at endpoints.
    pub fn concat(parts: impl IntoIterator<Item = TaggedPartition>) -> Result<Self> {
        TaggedPartition::new(parts.into_iter().flat_map(|p| p.items).collect())
    }
}

/// Whether every cell of `partition` is `gauge`-fine.
pub fn is_fine(partition: &TaggedPartition, gauge: &Gauge) -> bool {
    partition.items.iter().all(|c| c.is_fine(gauge))
}

/// A `gauge`-fine tagged partition of `e`.
///
/// Each mandatory tag inside `e` first gets its own cell, of half-width at
/// most half its radius and half the distance to the neighbouring tags. The
/// remaining pieces are bisected until each fits the ball around its
/// midpoint, right end, or left end, tried in that order.
pub fn cousin_partition(gauge: &Gauge, e: &Interval, max_depth: usize) -> Result<TaggedPartition> {
    if max_depth == 0 {
        return Err(Error::DepthExceeded {
            max_depth,
            lo: e.lo(),
            hi: e.hi(),
        });
    }
    if e.length() == 0.0 {
        return Ok(TaggedPartition::from_sorted_unchecked(vec![TaggedCell {
            cell: *e,
            tag: e.lo(),
        }]));
    }

    let tags: Vec<_> = gauge
        .mandatory_tags()
        .iter()
        .filter(|t| e.contains(t.point))
        .collect();
    let mut carved: Vec<TaggedCell> = Vec::with_capacity(tags.len());
    for (k, t) in tags.iter().enumerate() {
        let mut h = t.radius / 2.0;
        if k > 0 {
            h = h.min((t.point - tags[k - 1].point) / 2.0);
        }
        if k + 1 < tags.len() {
            h = h.min((tags[k + 1].point - t.point) / 2.0);
        }
        let cell = Interval::new((t.point - h).max(e.lo()), (t.point + h).min(e.hi()))?;
        carved.push(TaggedCell { cell, tag: t.point });
    }

    let mut out = Vec::new();
    let mut cursor = e.lo();
    for c in carved {
        if c.cell.lo() > cursor {
            bisect(
                gauge,
                Interval::new(cursor, c.cell.lo())?,
                max_depth,
                &mut out,
            )?;
        }
        out.push(c);
        cursor = c.cell.hi();
    }
    if cursor < e.hi() {
        bisect(gauge, Interval::new(cursor, e.hi())?, max_depth, &mut out)?;
    }
    Ok(TaggedPartition::from_sorted_unchecked(out))
}

/// Cousin partitions of every component of `e`, concatenated.
pub fn cousin_partition_set(
    gauge: &Gauge,
    e: &BorelSet,
    max_depth: usize,
) -> Result<TaggedPartition> {
    let mut items = Vec::new();
    for c in e.components() {
        items.extend(cousin_partition(gauge, c, max_depth)?.items);
    }
    Ok(TaggedPartition::from_sorted_unchecked(items))
}

/// Picks a tag for `piece` from midpoint, right end, left end.
pub(crate) fn fitting_tag(gauge: &Gauge, piece: &Interval) -> Option<f64> {
    [piece.midpoint(), piece.hi(), piece.lo()]
        .into_iter()
        .find(|&t| piece.radius_from(t) < gauge.eval(t))
}

fn bisect(
    gauge: &Gauge,
    piece: Interval,
    max_depth: usize,
    out: &mut Vec<TaggedCell>,
) -> Result<()> {
    let mut stack = vec![(piece, 0usize)];
    while let Some((p, depth)) = stack.pop() {
        if let Some(tag) = fitting_tag(gauge, &p) {
            out.push(TaggedCell { cell: p, tag });
            continue;
        }
        if depth >= max_depth {
            return Err(Error::DepthExceeded {
                max_depth,
                lo: p.lo(),
                hi: p.hi(),
            });
        }
        let m = p.midpoint();
        stack.push((Interval::new(m, p.hi())?, depth + 1));
        stack.push((Interval::new(p.lo(), m)?, depth + 1));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::gauge::{Radius, TagRadius};

    #[test]
    fn wide_gauge_gives_one_cell() {
        let g = Gauge::constant(2.0).unwrap();
        let p = cousin_partition(&g, &Interval::unit(), 10).unwrap();
        assert_eq!(
            p.items(),
            &[TaggedCell::new(Interval::unit(), 0.5).unwrap()]
        );
    }

    #[test]
    fn radius_point_three_splits_once() {
        let g = Gauge::constant(0.3).unwrap();
        let p = cousin_partition(&g, &Interval::unit(), 10).unwrap();
        let expected = vec![
            TaggedCell::new(Interval::new(0.0, 0.5).unwrap(), 0.25).unwrap(),
            TaggedCell::new(Interval::new(0.5, 1.0).unwrap(), 0.75).unwrap(),
        ];
        assert_eq!(p.items(), expected.as_slice());
        assert!(is_fine(&p, &g));
    }

    #[test]
    fn mandatory_tag_at_zero_gets_a_narrow_first_cell() {
        let g = Gauge::new(
            Radius::Constant(1.0),
            vec![TagRadius {
                point: 0.0,
                radius: 0.01,
            }],
        )
        .unwrap();
        let p = cousin_partition(&g, &Interval::unit(), 10).unwrap();
        let first = p.items()[0];
        assert_eq!(first.tag, 0.0);
        assert_eq!(first.cell.lo(), 0.0);
        assert!(first.cell.hi() < 0.01);
        assert!(is_fine(&p, &g));
        assert!(p.covers(&BorelSet::unit(), 1e-12));
    }

    #[test]
    fn fineness_examples() {
        let p =
            TaggedPartition::new(vec![TaggedCell::new(Interval::unit(), 0.5).unwrap()]).unwrap();
        assert!(is_fine(&p, &Gauge::constant(2.0).unwrap()));
        assert!(!is_fine(&p, &Gauge::constant(0.4).unwrap()));
    }

    #[test]
    fn depth_limit_is_reported() {
        let g = Gauge::constant(1e-6).unwrap();
        let e = cousin_partition(&g, &Interval::unit(), 5);
        assert!(matches!(e, Err(Error::DepthExceeded { max_depth: 5, .. })));
    }

    #[test]
    fn overlapping_cells_rejected() {
        let a = TaggedCell::new(Interval::new(0.0, 0.6).unwrap(), 0.1).unwrap();
        let b = TaggedCell::new(Interval::new(0.5, 1.0).unwrap(), 0.9).unwrap();
        assert_eq!(TaggedPartition::new(vec![a, b]), Err(Error::NotDisjoint));
        assert!(TaggedCell::new(Interval::new(0.0, 0.5).unwrap(), 0.7).is_err());
    }

    #[test]
    fn json_triples() {
        let p = cousin_partition(&Gauge::constant(0.3).unwrap(), &Interval::unit(), 4).unwrap();
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            "[[0.0,0.5,0.25],[0.5,1.0,0.75]]"
        );
    }
}
