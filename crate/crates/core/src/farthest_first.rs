//! Farthest-first traversal (Gonzalez) on an arbitrary subset of a point set.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::metric::{IndexSubset, PointSet};
use crate::scan;

/// How the first center is picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SeedPolicy {
    /// The first point in the subset's order.
    #[default]
    FirstIndex,
    /// A specific point index, which must belong to the subset.
    FixedIndex(usize),
    /// A uniformly random position, determined entirely by the seed.
    Random(u64),
}

impl fmt::Display for SeedPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedPolicy::FirstIndex => f.write_str("first"),
            SeedPolicy::FixedIndex(i) => write!(f, "index:{i}"),
            SeedPolicy::Random(s) => write!(f, "random:{s}"),
        }
    }
}

impl FromStr for SeedPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::invalid(format!(
                "bad seed policy '{s}' (first, index:N, random:SEED)"
            ))
        };
        match s.split_once(':') {
            None if s == "first" => Ok(SeedPolicy::FirstIndex),
            Some(("index", v)) => v.parse().map(SeedPolicy::FixedIndex).map_err(|_| bad()),
            Some(("random", v)) => v.parse().map(SeedPolicy::Random).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl Serialize for SeedPolicy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl SeedPolicy {
    /// Position within `subset` of the first center.
    fn start_position(self, subset: &IndexSubset) -> Result<usize> {
        match self {
            SeedPolicy::FirstIndex => Ok(0),
            SeedPolicy::FixedIndex(i) => subset
                .iter()
                .position(|p| p == i)
                .ok_or_else(|| Error::invalid(format!("seed point {i} is not in the subset"))),
            SeedPolicy::Random(seed) => {
                Ok(ChaCha8Rng::seed_from_u64(seed).random_range(0..subset.len()))
            }
        }
    }
}

/// Record of one traversal.
#[derive(Debug, Clone, PartialEq)]
pub struct FFTrace {
    /// Point indices in selection order.
    pub chosen: Vec<usize>,
    /// `max_s d(s, C)` just before each selection from the second center on,
    /// followed by the final `cost(chosen, S)`. Length `k`.
    pub radii: Vec<f32>,
}

impl FFTrace {
    /// `cost(chosen, S)`.
    pub fn final_radius(&self) -> f32 {
        *self.radii.last().expect("trace has k >= 1 radii")
    }

    pub fn centers(&self, ps: &PointSet) -> IndexSubset {
        IndexSubset::from_trusted(ps, self.chosen.clone())
    }

    /// Smallest pairwise distance between chosen centers; `None` for one center.
    pub fn min_separation(&self, ps: &PointSet) -> Option<f32> {
        let mut best: Option<f32> = None;
        for (i, &a) in self.chosen.iter().enumerate() {
            for &b in &self.chosen[i + 1..] {
                let d = ps.distance(a, b);
                best = Some(best.map_or(d, |m| m.min(d)));
            }
        }
        best
    }
}

const TAKEN: f32 = -1.0;

/// Runs farthest-first on `subset` and returns `k` centers.
///
/// Each new center maximizes the distance to the centers chosen so far; ties go
/// to the earliest position in `subset`. Per-point distances to the current
/// center set are kept and lowered incrementally, so each step is one scan.
pub fn farthest_first(
    subset: &IndexSubset,
    k: usize,
    policy: SeedPolicy,
    ps: &PointSet,
) -> Result<FFTrace> {
    ps.check_owns(subset)?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if subset.len() < k {
        return Err(Error::InsufficientPoints {
            needed: k,
            available: subset.len(),
        });
    }
    let mut newest = policy.start_position(subset)?;

    let d = ps.dim();
    let metric = ps.metric();
    let mut rows = Vec::with_capacity(subset.len() * d);
    for i in subset.iter() {
        rows.extend_from_slice(ps.row(i));
    }
    let row = |pos: usize| &rows[pos * d..(pos + 1) * d];

    let mut dist = vec![f32::INFINITY; subset.len()];
    let mut chosen = Vec::with_capacity(k);
    let mut radii = Vec::with_capacity(k);
    chosen.push(subset.indices()[newest]);

    for step in 1..=k {
        let center = row(newest);
        let (best, pos) = scan::update_argmax(&mut dist, |p, v| {
            if p == newest {
                *v = TAKEN;
            } else if *v != TAKEN {
                let key = metric.key(row(p), center);
                if key < *v {
                    *v = key;
                }
            }
        });
        radii.push(metric.key_to_distance(best.max(0.0)));
        if step < k {
            newest = pos;
            chosen.push(subset.indices()[pos]);
        }
    }

    let trace = FFTrace { chosen, radii };
    debug_assert!(trace
        .min_separation(ps)
        .is_none_or(|sep| sep >= trace.final_radius()));
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{cost, MetricKind};

    #[test]
    fn tightness_line_from_zero() {
        let ps = PointSet::line(&[0.0, 1.0, 2.0]).unwrap();
        let t = farthest_first(&ps.full(), 1, SeedPolicy::FirstIndex, &ps).unwrap();
        assert_eq!(t.chosen, vec![0]);
        assert_eq!(t.final_radius(), 2.0);
    }

    #[test]
    fn decrease_line_on_p_and_q() {
        let ps = PointSet::line(&[0.0, 2.0, 3.0, 4.0]).unwrap();
        let t = farthest_first(&ps.full(), 2, SeedPolicy::FirstIndex, &ps).unwrap();
        assert_eq!(t.chosen, vec![0, 3]);
        assert_eq!(t.radii, vec![4.0, 2.0]);
        let q = ps.subset(vec![0, 2]).unwrap();
        let t = farthest_first(&q, 2, SeedPolicy::FirstIndex, &ps).unwrap();
        assert_eq!(t.chosen, vec![0, 2]);
        assert_eq!(cost(&t.centers(&ps), &ps.full(), &ps).unwrap().radius, 1.0);
    }

    #[test]
    fn k_equals_size_takes_everything() {
        let ps = PointSet::line(&[5.0, 1.0, 3.0, 3.5]).unwrap();
        let t = farthest_first(&ps.full(), 4, SeedPolicy::FirstIndex, &ps).unwrap();
        let mut sorted = t.chosen.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
        assert_eq!(t.final_radius(), 0.0);
    }

    #[test]
    fn duplicate_points_never_rechosen() {
        let ps = PointSet::line(&[1.0, 1.0, 1.0]).unwrap();
        let t = farthest_first(&ps.full(), 3, SeedPolicy::FixedIndex(1), &ps).unwrap();
        assert_eq!(t.chosen, vec![1, 0, 2]);
        assert_eq!(t.radii, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn tie_resolves_to_earliest_position() {
        let ps = PointSet::from_rows(
            &[[0.0, 0.0], [-2.0, 3.0], [0.0, 3.0], [2.0, 3.0]],
            MetricKind::Euclidean,
        )
        .unwrap();
        let t = farthest_first(&ps.full(), 2, SeedPolicy::FirstIndex, &ps).unwrap();
        assert_eq!(t.chosen, vec![0, 1]);
        // Reordering the subset flips the tie.
        let s = ps.subset(vec![0, 3, 2, 1]).unwrap();
        let t = farthest_first(&s, 2, SeedPolicy::FirstIndex, &ps).unwrap();
        assert_eq!(t.chosen, vec![0, 3]);
    }

    #[test]
    fn errors() {
        let ps = PointSet::line(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            farthest_first(&ps.full(), 3, SeedPolicy::FirstIndex, &ps),
            Err(Error::InsufficientPoints {
                needed: 3,
                available: 2
            })
        ));
        assert!(matches!(
            farthest_first(&ps.full(), 0, SeedPolicy::FirstIndex, &ps),
            Err(Error::InvalidInput(_))
        ));
        let s = ps.subset(vec![0]).unwrap();
        assert!(farthest_first(&s, 1, SeedPolicy::FixedIndex(1), &ps).is_err());
    }

    #[test]
    fn random_seed_is_deterministic() {
        let xs: Vec<f32> = (0..50).map(|i| (i * i % 17) as f32).collect();
        let ps = PointSet::line(&xs).unwrap();
        let a = farthest_first(&ps.full(), 5, SeedPolicy::Random(9), &ps).unwrap();
        let b = farthest_first(&ps.full(), 5, SeedPolicy::Random(9), &ps).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seed_policy_parse() {
        assert_eq!(
            "first".parse::<SeedPolicy>().unwrap(),
            SeedPolicy::FirstIndex
        );
        assert_eq!(
            "index:4".parse::<SeedPolicy>().unwrap(),
            SeedPolicy::FixedIndex(4)
        );
        assert_eq!(
            "random:77".parse::<SeedPolicy>().unwrap(),
            SeedPolicy::Random(77)
        );
        for bad in ["", "index", "index:x", "random:-1", "last"] {
            assert!(bad.parse::<SeedPolicy>().is_err(), "{bad}");
        }
        for p in [
            SeedPolicy::FirstIndex,
            SeedPolicy::FixedIndex(3),
            SeedPolicy::Random(1),
        ] {
            assert_eq!(p.to_string().parse::<SeedPolicy>().unwrap(), p);
        }
    }
}
