//! Uncovered-first δ-cover construction and δ-cover verification.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::metric::{self, IndexSubset, PointSet};
use crate::scan;

/// Order in which the dataset is scanned while building a cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanOrder {
    #[default]
    Natural,
    /// Fisher-Yates shuffle driven by a ChaCha8 stream with this seed.
    Shuffle(u64),
}

impl ScanOrder {
    pub fn permutation(self, n: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..n).collect();
        if let ScanOrder::Shuffle(seed) = self {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        order
    }
}

impl fmt::Display for ScanOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScanOrder::Natural => f.write_str("natural"),
            ScanOrder::Shuffle(s) => write!(f, "shuffle:{s}"),
        }
    }
}

impl FromStr for ScanOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "natural" => Ok(ScanOrder::Natural),
            Some(("shuffle", v)) => v
                .parse()
                .map(ScanOrder::Shuffle)
                .map_err(|_| Error::invalid(format!("bad shuffle seed in '{s}'"))),
            _ => Err(Error::invalid(format!(
                "bad scan order '{s}' (natural, shuffle:SEED)"
            ))),
        }
    }
}

impl Serialize for ScanOrder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone)]
pub struct CoverResult {
    /// Cover points in insertion order; the first is the first scanned point.
    pub cover: IndexSubset,
    pub delta: f32,
    /// `max_p d(p, Q)` over the whole point set.
    pub achieved: f32,
    /// Time spent in the scan itself, excluding the final `achieved` pass.
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverCheck {
    pub valid: bool,
    pub achieved: f32,
    /// A point attaining `achieved`.
    pub worst: usize,
}

fn check_delta(delta: f32, allow_zero: bool) -> Result<()> {
    if delta.is_nan() || delta.is_infinite() {
        return Err(Error::invalid("delta must be a finite number"));
    }
    if delta < 0.0 || (!allow_zero && delta == 0.0) {
        return Err(Error::invalid(format!(
            "delta must be {}, got {delta}",
            if allow_zero {
                "non-negative"
            } else {
                "positive"
            }
        )));
    }
    Ok(())
}

/// Builds a δ-cover by one sequential scan: a point joins the cover when it is
/// strictly farther than `delta` from every cover point so far.
pub fn build_cover(ps: &PointSet, delta: f32, order: ScanOrder) -> Result<CoverResult> {
    check_delta(delta, false)?;
    let start = Instant::now();

    let metric = ps.metric();
    let threshold = metric.threshold_key(delta);
    let d = ps.dim();
    let perm = order.permutation(ps.n());

    let mut cover = vec![perm[0]];
    let mut cover_rows = ps.row(perm[0]).to_vec();
    for &i in &perm[1..] {
        let x = ps.row(i);
        let covered = if cover.len() < scan::PAR_THRESHOLD {
            cover_rows
                .chunks_exact(d)
                .any(|q| metric.key(x, q) <= threshold)
        } else {
            cover_rows
                .par_chunks_exact(d)
                .with_min_len(scan::CHUNK)
                .any(|q| metric.key(x, q) <= threshold)
        };
        if !covered {
            cover.push(i);
            cover_rows.extend_from_slice(x);
        }
    }
    let elapsed = start.elapsed();

    let all: Vec<usize> = (0..ps.n()).collect();
    let achieved = metric::radius_unchecked(ps, &cover, &all);
    Ok(CoverResult {
        cover: IndexSubset::from_trusted(ps, cover),
        delta,
        achieved,
        elapsed,
    })
}

/// Checks that every point lies within `delta` of some point of `cover`.
pub fn verify_cover(ps: &PointSet, cover: &IndexSubset, delta: f32) -> Result<CoverCheck> {
    check_delta(delta, true)?;
    if cover.is_empty() {
        return Err(Error::invalid("cover is empty"));
    }
    let report = metric::cost(cover, &ps.full(), ps)?;
    Ok(CoverCheck {
        valid: report.radius <= delta,
        achieved: report.radius,
        worst: report.witness,
    })
}

/// Smallest pairwise distance within `subset`; `None` when it has fewer than
/// two points.
pub fn min_separation(ps: &PointSet, subset: &IndexSubset) -> Result<Option<f32>> {
    ps.check_owns(subset)?;
    let idx = subset.indices();
    if idx.len() < 2 {
        return Ok(None);
    }
    let metric = ps.metric();
    let best = (0..idx.len() - 1)
        .into_par_iter()
        .map(|i| {
            idx[i + 1..]
                .iter()
                .map(|&j| ps.key(idx[i], j))
                .fold(f32::INFINITY, f32::min)
        })
        .reduce(|| f32::INFINITY, f32::min);
    Ok(Some(metric.key_to_distance(best)))
}
