//! Exact k-center by exhaustive search, and the bound checks built on it.
//!
//! Two independent exact strategies are provided: plain enumeration of every
//! size-k center set ([`opt_kcenter`]) and a search over candidate radii with
//! a set-cover feasibility test ([`opt_by_radius_feasibility`]). They share
//! nothing except the distance function.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::verify_cover;
use crate::error::{Error, Result};
use crate::farthest_first::{farthest_first, SeedPolicy};
use crate::fixtures;
use crate::metric::{self, IndexSubset, PointSet};

/// Default limit on `C(n, k)` for [`opt_kcenter`].
pub const DEFAULT_SUBSET_CAP: u64 = 10_000_000;

/// Relative slack on every bound check, for `f32` distance rounding.
pub const BOUND_REL_TOL: f64 = 1e-5;

/// Key matrices above this many points are not materialized.
const MATRIX_MAX_N: usize = 2048;

#[derive(Debug, Clone)]
pub struct OptResult {
    pub radius: f32,
    /// Lexicographically smallest optimal center set, ascending.
    pub centers: IndexSubset,
    pub subsets_examined: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub instance: String,
}

impl BoundReport {
    pub fn new(bound: impl Into<String>, lhs: f64, rhs: f64, instance: impl Into<String>) -> Self {
        BoundReport {
            bound: bound.into(),
            lhs,
            rhs,
            holds: within_bound(lhs, rhs),
            instance: instance.into(),
        }
    }
}

/// `lhs <= rhs` up to [`BOUND_REL_TOL`] relative to the larger magnitude.
pub fn within_bound(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + BOUND_REL_TOL * lhs.abs().max(rhs.abs())
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn check_k(ps: &PointSet, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > ps.n() {
        return Err(Error::InsufficientPoints {
            needed: k,
            available: ps.n(),
        });
    }
    Ok(())
}

pub fn opt_kcenter(ps: &PointSet, k: usize) -> Result<OptResult> {
    opt_kcenter_with_cap(ps, k, DEFAULT_SUBSET_CAP)
}

/// Exact optimum over all `C ⊆ P` with `|C| = k`.
///
/// Fails with [`Error::InstanceTooLarge`] rather than approximate when
/// `C(n, k)` exceeds `cap`.
pub fn opt_kcenter_with_cap(ps: &PointSet, k: usize, cap: u64) -> Result<OptResult> {
    check_k(ps, k)?;
    let n = ps.n();
    let subsets = binomial(n, k);
    if subsets > cap as u128 {
        return Err(Error::InstanceTooLarge { subsets, cap });
    }

    let (key, centers) = if n <= MATRIX_MAX_N {
        let m: Vec<f32> = (0..n * n).map(|ij| ps.key(ij / n, ij % n)).collect();
        enumerate(n, k, |p, c| m[c * n + p])
    } else {
        enumerate(n, k, |p, c| ps.key(p, c))
    };
    Ok(OptResult {
        radius: ps.metric().key_to_distance(key),
        centers: IndexSubset::from_trusted(ps, centers),
        subsets_examined: subsets as u64,
    })
}

/// Min over size-k subsets of `max_p min_{c} key(p, c)`, lexicographically
/// smallest subset on ties. Work is split by the subset's smallest element;
/// earlier splits hold lexicographically smaller subsets, so the merge is
/// `(key, subset)` ordered.
fn enumerate<K>(n: usize, k: usize, key: K) -> (f32, Vec<usize>)
where
    K: Fn(usize, usize) -> f32 + Sync,
{
    (0..=n - k)
        .into_par_iter()
        .map(|first| {
            let mut search = Search {
                n,
                k,
                key: &key,
                chosen: vec![first],
                mins: vec![(0..n).map(|p| key(p, first)).collect()],
                best: (f32::INFINITY, Vec::new()),
            };
            search.descend(first + 1);
            search.best
        })
        .reduce(
            || (f32::INFINITY, Vec::new()),
            |a, b| {
                if b.0 < a.0 || (b.0 == a.0 && !b.1.is_empty() && (a.1.is_empty() || b.1 < a.1)) {
                    b
                } else {
                    a
                }
            },
        )
}

struct Search<'a, K> {
    n: usize,
    k: usize,
    key: &'a K,
    chosen: Vec<usize>,
    /// `mins[j][p]`: distance key of `p` to the first `j + 1` chosen centers.
    mins: Vec<Vec<f32>>,
    best: (f32, Vec<usize>),
}

impl<K: Fn(usize, usize) -> f32> Search<'_, K> {
    fn descend(&mut self, next: usize) {
        let depth = self.chosen.len();
        if depth == self.k {
            let last = &self.mins[depth - 1];
            let mut worst = 0.0f32;
            for &v in last {
                worst = worst.max(v);
                if worst >= self.best.0 {
                    return;
                }
            }
            self.best = (worst, self.chosen.clone());
            return;
        }
        let remaining = self.k - depth;
        for c in next..=self.n - remaining {
            let row: Vec<f32> = self.mins[depth - 1]
                .iter()
                .enumerate()
                .map(|(p, &m)| m.min((self.key)(p, c)))
                .collect();
            self.mins.push(row);
            self.chosen.push(c);
            self.descend(c + 1);
            self.chosen.pop();
            self.mins.pop();
        }
    }
}

/// Largest instance accepted by [`opt_by_radius_feasibility`].
pub const FEASIBILITY_MAX_N: usize = 64;

/// Exact optimum via the smallest pairwise distance `r` for which `k` balls
/// of radius `r` centered at points cover everything.
pub fn opt_by_radius_feasibility(ps: &PointSet, k: usize) -> Result<f32> {
    check_k(ps, k)?;
    let n = ps.n();
    if n > FEASIBILITY_MAX_N {
        return Err(Error::InstanceTooLarge {
            subsets: binomial(n, k),
            cap: 0,
        });
    }
    let mut candidates: Vec<f32> = vec![0.0];
    for i in 0..n {
        for j in i + 1..n {
            candidates.push(ps.key(i, j));
        }
    }
    candidates.sort_by(f32::total_cmp);
    candidates.dedup();

    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let feasible = |r: f32| {
        let balls: Vec<u64> = (0..n)
            .map(|c| {
                (0..n)
                    .filter(|&p| ps.key(p, c) <= r)
                    .fold(0u64, |m, p| m | (1 << p))
            })
            .collect();
        coverable(&balls, full, 0, k)
    };

    // candidates[hi] (the diameter) is always feasible.
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(ps.metric().key_to_distance(candidates[lo]))
}

/// Can `budget` balls cover the points outside `covered`? Branches on the
/// lowest uncovered point, which some chosen ball must contain.
fn coverable(balls: &[u64], full: u64, covered: u64, budget: usize) -> bool {
    if covered == full {
        return true;
    }
    if budget == 0 {
        return false;
    }
    let u = (!covered & full).trailing_zeros();
    balls
        .iter()
        .filter(|b| *b >> u & 1 == 1)
        .any(|&b| coverable(balls, full, covered | b, budget - 1))
}

fn describe(ps: &PointSet, k: usize, policy: Option<SeedPolicy>) -> String {
    let mut s = format!("n={} d={} metric={} k={k}", ps.n(), ps.dim(), ps.metric());
    if let Some(p) = policy {
        s.push_str(&format!(" seed={p}"));
    }
    s
}

fn ff_cost(
    ps: &PointSet,
    s: &IndexSubset,
    k: usize,
    policy: SeedPolicy,
    on: &IndexSubset,
) -> Result<f64> {
    let trace = farthest_first(s, k, policy, ps)?;
    Ok(metric::radius_unchecked(ps, &trace.chosen, on.indices()) as f64)
}

fn require_cover(ps: &PointSet, q: &IndexSubset, delta: f32) -> Result<()> {
    let check = verify_cover(ps, q, delta)?;
    if !check.valid {
        return Err(Error::NotACover {
            achieved: check.achieved,
            delta,
        });
    }
    Ok(())
}

/// `cost(FF(P), P) <= 2 OPT`.
pub fn check_gonzalez(ps: &PointSet, k: usize, policy: SeedPolicy) -> Result<BoundReport> {
    let opt = opt_kcenter(ps, k)?;
    gonzalez_with_opt(ps, k, policy, opt.radius)
}

pub fn gonzalez_with_opt(
    ps: &PointSet,
    k: usize,
    policy: SeedPolicy,
    opt: f32,
) -> Result<BoundReport> {
    let all = ps.full();
    let lhs = ff_cost(ps, &all, k, policy, &all)?;
    Ok(BoundReport::new(
        "gonzalez",
        lhs,
        2.0 * opt as f64,
        describe(ps, k, Some(policy)),
    ))
}

/// `cost(C, P) <= cost(C, Q) + delta` for centers `C ⊆ Q`.
pub fn check_lifting(
    ps: &PointSet,
    q: &IndexSubset,
    delta: f32,
    centers: &IndexSubset,
) -> Result<BoundReport> {
    require_cover(ps, q, delta)?;
    if centers.is_empty() {
        return Err(Error::invalid("center set is empty"));
    }
    if !centers.is_subset_of(q) {
        return Err(Error::invalid("centers must be drawn from the cover"));
    }
    let on_p = metric::radius_unchecked(ps, centers.indices(), &(0..ps.n()).collect::<Vec<_>>());
    let on_q = metric::radius_unchecked(ps, centers.indices(), q.indices());
    Ok(BoundReport::new(
        "lifting",
        on_p as f64,
        on_q as f64 + delta as f64,
        format!(
            "{} |Q|={} |C|={} delta={delta}",
            describe(ps, centers.len(), None),
            q.len(),
            centers.len()
        ),
    ))
}

/// `cost(FF(S), S) <= 2 OPT(P)` for any `S ⊆ P` with `|S| >= k`.
pub fn check_subset_lemma(
    ps: &PointSet,
    s: &IndexSubset,
    k: usize,
    policy: SeedPolicy,
) -> Result<BoundReport> {
    let opt = opt_kcenter(ps, k)?;
    subset_lemma_with_opt(ps, s, k, policy, opt.radius)
}

pub fn subset_lemma_with_opt(
    ps: &PointSet,
    s: &IndexSubset,
    k: usize,
    policy: SeedPolicy,
    opt: f32,
) -> Result<BoundReport> {
    let lhs = ff_cost(ps, s, k, policy, s)?;
    Ok(BoundReport::new(
        "subset_lemma",
        lhs,
        2.0 * opt as f64,
        format!("{} |S|={}", describe(ps, k, Some(policy)), s.len()),
    ))
}

/// `cost(FF(Q), P) <= 2 OPT + delta` for a δ-cover `Q` with `|Q| >= k`.
/// `delta = 0` is accepted (then `Q = P` up to duplicates).
pub fn check_main_theorem(
    ps: &PointSet,
    q: &IndexSubset,
    delta: f32,
    k: usize,
    policy: SeedPolicy,
) -> Result<BoundReport> {
    let opt = opt_kcenter(ps, k)?;
    main_theorem_with_opt(ps, q, delta, k, policy, opt.radius)
}

pub fn main_theorem_with_opt(
    ps: &PointSet,
    q: &IndexSubset,
    delta: f32,
    k: usize,
    policy: SeedPolicy,
    opt: f32,
) -> Result<BoundReport> {
    require_cover(ps, q, delta)?;
    let lhs = ff_cost(ps, q, k, policy, &ps.full())?;
    Ok(BoundReport::new(
        "main_theorem",
        lhs,
        2.0 * opt as f64 + delta as f64,
        format!(
            "{} |Q|={} delta={delta}",
            describe(ps, k, Some(policy)),
            q.len()
        ),
    ))
}

/// The tempting but false `cost(FF(Q), P) <= cost(FF(P), P) + delta`.
pub fn naive_additive_bound(
    ps: &PointSet,
    q: &IndexSubset,
    delta: f32,
    k: usize,
    policy: SeedPolicy,
) -> Result<BoundReport> {
    let all = ps.full();
    let lhs = ff_cost(ps, q, k, policy, &all)?;
    let ff_p = ff_cost(ps, &all, k, policy, &all)?;
    Ok(BoundReport::new(
        "naive_additive",
        lhs,
        ff_p + delta as f64,
        format!(
            "{} |Q|={} delta={delta}",
            describe(ps, k, Some(policy)),
            q.len()
        ),
    ))
}

/// The tempting but false `cost(FF(Q), Q) <= cost(FF(P), P)`.
pub fn naive_monotone_bound(
    ps: &PointSet,
    q: &IndexSubset,
    k: usize,
    policy: SeedPolicy,
) -> Result<BoundReport> {
    let all = ps.full();
    let lhs = ff_cost(ps, q, k, policy, q)?;
    let rhs = ff_cost(ps, &all, k, policy, &all)?;
    Ok(BoundReport::new(
        "naive_monotone",
        lhs,
        rhs,
        format!("{} |Q|={}", describe(ps, k, Some(policy)), q.len()),
    ))
}

/// Both naive bounds evaluated on their counterexample fixtures. Each report
/// has `holds == false`.
pub fn falsify_naive_bounds() -> Result<Vec<BoundReport>> {
    let additive = fixtures::fixture("fail_additive_2d")?;
    let monotone = fixtures::fixture("fail_monotone_2d")?;
    let mut a = naive_additive_bound(
        &additive.points,
        &additive.cover_subset()?.expect("fixture has Q"),
        additive.delta.expect("fixture has delta"),
        additive.k,
        additive.seed,
    )?;
    a.instance = format!("fail_additive_2d {}", a.instance);
    let mut m = naive_monotone_bound(
        &monotone.points,
        &monotone.cover_subset()?.expect("fixture has Q"),
        monotone.k,
        monotone.seed,
    )?;
    m.instance = format!("fail_monotone_2d {}", m.instance);
    Ok(vec![a, m])
}
