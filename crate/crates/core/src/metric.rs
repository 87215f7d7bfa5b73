//! Point storage, distances, distance-to-set and the k-center cost functional.
//!
//! All coordinates and distance arithmetic are `f32`. Internally every
//! comparison is done on a *key*: the squared distance for Euclidean and the
//! distance itself otherwise. Keys order exactly like distances, so argmin and
//! argmax never need a square root; reported radii are converted at the end.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scan;

/// Distance function on the rows of a [`PointSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    #[default]
    #[serde(rename = "l2")]
    Euclidean,
    #[serde(rename = "l1")]
    Manhattan,
    #[serde(rename = "linf")]
    Chebyshev,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [
        MetricKind::Euclidean,
        MetricKind::Manhattan,
        MetricKind::Chebyshev,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "l2",
            MetricKind::Manhattan => "l1",
            MetricKind::Chebyshev => "linf",
        }
    }

    /// Comparison key between two rows of equal length.
    #[inline]
    pub(crate) fn key(self, a: &[f32], b: &[f32]) -> f32 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            MetricKind::Euclidean => lanes_sum(a, b, |t| t * t),
            MetricKind::Manhattan => lanes_sum(a, b, f32::abs),
            MetricKind::Chebyshev => a
                .iter()
                .zip(b)
                .fold(0.0f32, |m, (x, y)| m.max((x - y).abs())),
        }
    }

    #[inline]
    pub(crate) fn key_to_distance(self, key: f32) -> f32 {
        match self {
            MetricKind::Euclidean => key.sqrt(),
            _ => key,
        }
    }

    /// Largest key whose distance is `<= delta`.
    ///
    /// `key > threshold_key(delta)` holds exactly when
    /// `key_to_distance(key) > delta`, so squared comparisons agree bit-for-bit
    /// with comparisons on reported distances.
    pub(crate) fn threshold_key(self, delta: f32) -> f32 {
        match self {
            MetricKind::Euclidean => {
                let mut t = delta * delta;
                while t > 0.0 && t.sqrt() > delta {
                    t = t.next_down();
                }
                while t.next_up().sqrt() <= delta && t.next_up().is_finite() {
                    t = t.next_up();
                }
                t
            }
            _ => delta,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" | "euclidean" => Ok(MetricKind::Euclidean),
            "l1" | "manhattan" => Ok(MetricKind::Manhattan),
            "linf" | "chebyshev" => Ok(MetricKind::Chebyshev),
            other => Err(Error::invalid(format!("unknown metric '{other}'"))),
        }
    }
}

const LANES: usize = 8;

// Fixed eight-lane accumulation: deterministic, and lets the compiler
// vectorize without reassociating floating-point sums on its own.
#[inline(always)]
fn lanes_sum(a: &[f32], b: &[f32], term: impl Fn(f32) -> f32) -> f32 {
    let mut acc = [0.0f32; LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (xa, xb) in ca.zip(cb) {
        for l in 0..LANES {
            acc[l] += term(xa[l] - xb[l]);
        }
    }
    let mut tail = 0.0f32;
    for (x, y) in ra.iter().zip(rb) {
        tail += term(x - y);
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Distance between two coordinate rows.
pub fn distance(a: &[f32], b: &[f32], metric: MetricKind) -> Result<f32> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(metric.key_to_distance(metric.key(a, b)))
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// An immutable finite metric space: `n` points in `d` dimensions.
///
/// Coordinates are row-major `f32` and always finite.
#[derive(Debug, Clone)]
pub struct PointSet {
    id: u64,
    n: usize,
    d: usize,
    coords: Vec<f32>,
    metric: MetricKind,
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.d == other.d
            && self.metric == other.metric
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl PointSet {
    pub fn new(d: usize, coords: Vec<f32>, metric: MetricKind) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if coords.is_empty() {
            return Err(Error::invalid("point set must contain at least one point"));
        }
        if !coords.len().is_multiple_of(d) {
            return Err(Error::invalid(format!(
                "{} coordinates do not form rows of dimension {d}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite coordinate in row {} column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(PointSet {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            n: coords.len() / d,
            d,
            coords,
            metric,
        })
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R], metric: MetricKind) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut coords = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::invalid(format!(
                    "row {i} has {} coordinates, expected {d}",
                    row.len()
                )));
            }
            coords.extend_from_slice(row);
        }
        Self::new(d, coords, metric)
    }

    /// Points on the real line with `|x - y|`.
    pub fn line(xs: &[f32]) -> Result<Self> {
        Self::new(1, xs.to_vec(), MetricKind::Euclidean)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn coords(&self) -> &[f32] {
        &self.coords
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    /// Same coordinates under another metric. The result is a distinct space,
    /// so subsets of `self` do not index it.
    pub fn with_metric(&self, metric: MetricKind) -> Self {
        PointSet {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            metric,
            ..self.clone()
        }
    }

    #[inline]
    pub(crate) fn key(&self, i: usize, j: usize) -> f32 {
        self.metric.key(self.row(i), self.row(j))
    }

    pub fn distance(&self, i: usize, j: usize) -> f32 {
        self.metric.key_to_distance(self.key(i, j))
    }

    pub fn full(&self) -> IndexSubset {
        IndexSubset {
            indices: (0..self.n).collect(),
            parent: self.id,
        }
    }

    pub fn subset(&self, indices: Vec<usize>) -> Result<IndexSubset> {
        IndexSubset::new(self, indices)
    }

    pub(crate) fn check_owns(&self, s: &IndexSubset) -> Result<()> {
        if s.parent == self.id {
            Ok(())
        } else {
            Err(Error::ParentMismatch)
        }
    }
}

/// Ordered, duplicate-free list of point indices into one [`PointSet`].
///
/// Order matters: it is the scan order for traversal and the tie-break order
/// for every argmin/argmax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSubset {
    indices: Vec<usize>,
    parent: u64,
}

impl IndexSubset {
    pub fn new(ps: &PointSet, indices: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; ps.n()];
        for &i in &indices {
            if i >= ps.n() {
                return Err(Error::invalid(format!(
                    "index {i} out of range for {} points",
                    ps.n()
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid(format!("duplicate index {i}")));
            }
        }
        Ok(IndexSubset {
            indices,
            parent: ps.id,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn into_indices(self) -> Vec<usize> {
        self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn is_subset_of(&self, other: &IndexSubset) -> bool {
        if self.parent != other.parent {
            return false;
        }
        let set: std::collections::HashSet<usize> = other.iter().collect();
        self.iter().all(|i| set.contains(&i))
    }

    pub(crate) fn from_trusted(parent: &PointSet, indices: Vec<usize>) -> Self {
        IndexSubset {
            indices,
            parent: parent.id,
        }
    }
}

/// Nearest center for one evaluated point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Assignment {
    /// Point index of the nearest center.
    pub center: usize,
    pub distance: f32,
}

/// `cost(C, S)`: the largest distance from a point of `S` to its nearest center.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub radius: f32,
    /// Point index attaining the radius (earliest in `S` on ties).
    pub witness: usize,
    /// One entry per point of `S`, in `S`'s order.
    pub assignment: Vec<Assignment>,
}

/// Nearest center key and its position in `centers`; earliest position wins ties.
#[inline]
pub(crate) fn nearest_key(ps: &PointSet, p: usize, centers: &[usize]) -> (f32, usize) {
    let row = ps.row(p);
    let mut best = (f32::INFINITY, 0usize);
    for (pos, &c) in centers.iter().enumerate() {
        let k = ps.metric.key(row, ps.row(c));
        if k < best.0 {
            best = (k, pos);
        }
    }
    best
}

/// `d(p, C)` together with the nearest center's point index.
pub fn dist_to_set(p: usize, centers: &IndexSubset, ps: &PointSet) -> Result<(f32, usize)> {
    ps.check_owns(centers)?;
    if centers.is_empty() {
        return Err(Error::invalid("center set is empty"));
    }
    if p >= ps.n() {
        return Err(Error::invalid(format!("point index {p} out of range")));
    }
    let (key, pos) = nearest_key(ps, p, centers.indices());
    Ok((ps.metric.key_to_distance(key), centers.indices()[pos]))
}

/// `cost(C, S) = max over s in S of d(s, C)`, with the full assignment.
pub fn cost(centers: &IndexSubset, points: &IndexSubset, ps: &PointSet) -> Result<CostReport> {
    ps.check_owns(centers)?;
    ps.check_owns(points)?;
    if centers.is_empty() {
        return Err(Error::invalid("center set is empty"));
    }
    if points.is_empty() {
        return Err(Error::invalid("evaluated point set is empty"));
    }
    Ok(cost_unchecked(ps, centers.indices(), points.indices()))
}

pub(crate) fn cost_unchecked(ps: &PointSet, centers: &[usize], points: &[usize]) -> CostReport {
    let keyed: Vec<(f32, usize)> = scan::map_positions(points.len(), |pos| {
        let (key, cpos) = nearest_key(ps, points[pos], centers);
        (key, centers[cpos])
    });
    let (max_key, wpos) = scan::argmax(keyed.len(), |pos| keyed[pos].0);
    let metric = ps.metric;
    CostReport {
        radius: metric.key_to_distance(max_key),
        witness: points[wpos],
        assignment: keyed
            .into_iter()
            .map(|(key, center)| Assignment {
                center,
                distance: metric.key_to_distance(key),
            })
            .collect(),
    }
}

/// Radius only: `cost(C, S)` without materializing the assignment.
pub(crate) fn radius_unchecked(ps: &PointSet, centers: &[usize], points: &[usize]) -> f32 {
    let (key, _) = scan::argmax(points.len(), |pos| nearest_key(ps, points[pos], centers).0);
    ps.metric.key_to_distance(key)
}
