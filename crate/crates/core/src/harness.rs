//! The composed cover → farthest-first pipeline, repeated timing runs, and
//! δ tuning for a target cover fraction.

use std::time::{Duration, Instant};

use crate::cover::{build_cover, verify_cover, CoverCheck, CoverResult, ScanOrder};
use crate::error::{Error, Result};
use crate::farthest_first::{farthest_first, FFTrace, SeedPolicy};
use crate::metric::{self, PointSet};
use crate::report::{RunParams, RunReport};

#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    pub delta: f32,
    pub k: usize,
    pub seed: SeedPolicy,
    pub order: ScanOrder,
    /// Skip farthest-first on the full set.
    pub cover_only: bool,
    pub verify: bool,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub cover: CoverResult,
    pub cover_check: Option<CoverCheck>,
    pub ff_q: FFTrace,
    pub ff_q_time: Duration,
    /// `cost(FF(Q), P)`
    pub ff_q_on_p: f32,
    pub ff_p: Option<FFTrace>,
    pub ff_p_time: Option<Duration>,
}

fn cover_with_k(ps: &PointSet, delta: f32, order: ScanOrder, k: usize) -> Result<CoverResult> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let cover = build_cover(ps, delta, order)?;
    if cover.cover.len() < k {
        return Err(Error::CoverTooSmall {
            cover: cover.cover.len(),
            k,
        });
    }
    Ok(cover)
}

pub fn run_pipeline(ps: &PointSet, cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let cover = cover_with_k(ps, cfg.delta, cfg.order, cfg.k)?;
    let cover_check = if cfg.verify {
        Some(verify_cover(ps, &cover.cover, cfg.delta)?)
    } else {
        None
    };

    let t = Instant::now();
    let ff_q = farthest_first(&cover.cover, cfg.k, cfg.seed, ps)?;
    let ff_q_time = t.elapsed();
    let all: Vec<usize> = (0..ps.n()).collect();
    let ff_q_on_p = metric::radius_unchecked(ps, &ff_q.chosen, &all);

    let (ff_p, ff_p_time) = if cfg.cover_only {
        (None, None)
    } else {
        let t = Instant::now();
        let trace = farthest_first(&ps.full(), cfg.k, cfg.seed, ps)?;
        (Some(trace), Some(t.elapsed()))
    };
    Ok(PipelineOutcome {
        cover,
        cover_check,
        ff_q,
        ff_q_time,
        ff_q_on_p,
        ff_p,
        ff_p_time,
    })
}

pub(crate) fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl PipelineOutcome {
    pub fn report(&self, ps: &PointSet, params: RunParams) -> RunReport {
        let mut r = RunReport::new("pipeline", params, ps.n(), ps.dim());
        fill_cover(&mut r, ps, &self.cover, self.cover_check.as_ref());
        r.cost_ff_q_on_p = Some(self.ff_q_on_p as f64);
        r.cost_ff_q_on_q = Some(self.ff_q.final_radius() as f64);
        r.centers_q = Some(self.ff_q.chosen.clone());
        r.timings.ff_q_ms = Some(ms(self.ff_q_time));
        if let Some(ff_p) = &self.ff_p {
            r.cost_ff_p_on_p = Some(ff_p.final_radius() as f64);
            r.centers_p = Some(ff_p.chosen.clone());
        }
        r.timings.ff_p_ms = self.ff_p_time.map(ms);
        r.derive_comparisons();
        r
    }
}

pub fn fill_cover(
    r: &mut RunReport,
    ps: &PointSet,
    cover: &CoverResult,
    check: Option<&CoverCheck>,
) {
    r.n_cover = Some(cover.cover.len());
    r.cover_fraction = Some(cover.cover.len() as f64 / ps.n() as f64);
    r.cover_achieved = Some(cover.achieved as f64);
    r.cover_valid = check.map(|c| c.valid);
    r.timings.cover_ms = Some(ms(cover.elapsed));
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[(xs.len() - 1) / 2]
}

/// Timed pipeline runs for several `k` on one cover.
///
/// The cover is built `repetitions` times and each traversal is repeated
/// `repetitions` times; reported timings are medians. Every repetition must
/// reproduce the same cover, centers and radii.
pub fn bench(
    ps: &PointSet,
    delta: f32,
    ks: &[usize],
    repetitions: usize,
    seed: SeedPolicy,
    order: ScanOrder,
    params: &RunParams,
) -> Result<Vec<RunReport>> {
    if repetitions == 0 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    if ks.is_empty() {
        return Err(Error::invalid("need at least one k"));
    }
    let kmax = *ks.iter().max().unwrap();
    let mut cover_times = Vec::with_capacity(repetitions);
    let mut cover: Option<CoverResult> = None;
    for _ in 0..repetitions {
        let c = cover_with_k(ps, delta, order, kmax)?;
        cover_times.push(c.elapsed);
        if let Some(prev) = &cover {
            if prev.cover != c.cover {
                return Err(Error::invalid("cover changed between repetitions"));
            }
        }
        cover = Some(c);
    }
    let cover = cover.expect("repetitions >= 1");
    let check = verify_cover(ps, &cover.cover, delta)?;
    let all = ps.full();

    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut p_times = Vec::with_capacity(repetitions);
        let mut q_times = Vec::with_capacity(repetitions);
        let mut first: Option<(FFTrace, FFTrace)> = None;
        for _ in 0..repetitions {
            let t = Instant::now();
            let on_p = farthest_first(&all, k, seed, ps)?;
            p_times.push(t.elapsed());
            let t = Instant::now();
            let on_q = farthest_first(&cover.cover, k, seed, ps)?;
            q_times.push(t.elapsed());
            match &first {
                Some((p0, q0)) if *p0 != on_p || *q0 != on_q => {
                    return Err(Error::invalid("traversal changed between repetitions"));
                }
                Some(_) => {}
                None => first = Some((on_p, on_q)),
            }
        }
        let (on_p, on_q) = first.expect("repetitions >= 1");
        let q_on_p = metric::radius_unchecked(ps, &on_q.chosen, all.indices());

        let mut params = params.clone();
        params.k = Some(k);
        params.delta = Some(delta);
        params.repetitions = Some(repetitions);
        let mut r = RunReport::new("bench", params, ps.n(), ps.dim());
        fill_cover(&mut r, ps, &cover, Some(&check));
        r.timings.cover_ms = Some(ms(median(cover_times.clone())));
        r.cost_ff_p_on_p = Some(on_p.final_radius() as f64);
        r.cost_ff_q_on_p = Some(q_on_p as f64);
        r.cost_ff_q_on_q = Some(on_q.final_radius() as f64);
        r.centers_p = Some(on_p.chosen);
        r.centers_q = Some(on_q.chosen);
        r.timings.ff_p_ms = Some(ms(median(p_times)));
        r.timings.ff_q_ms = Some(ms(median(q_times)));
        r.derive_comparisons();
        rows.push(r);
    }
    Ok(rows)
}

/// Finds δ whose cover keeps a fraction of points in `[lo, hi]`.
///
/// Starts above the diameter and shrinks δ geometrically until the cover is
/// large enough, then bisects. Cover size is not strictly monotone in δ, so
/// this can fail; it reports the closest fraction seen when it does.
pub fn tune_delta(ps: &PointSet, lo: f64, hi: f64, order: ScanOrder) -> Result<(f32, CoverResult)> {
    if !(0.0 < lo && lo <= hi && hi <= 1.0) {
        return Err(Error::invalid(format!(
            "bad cover fraction range [{lo}, {hi}]"
        )));
    }
    let frac = |c: &CoverResult| c.cover.len() as f64 / ps.n() as f64;
    let far = (1..ps.n())
        .map(|i| ps.distance(0, i))
        .fold(0.0f32, f32::max);
    let mut upper = (2.0 * far).max(f32::MIN_POSITIVE);
    let mut delta = upper;
    let mut lower: Option<f32> = None;
    let mut closest: Option<(f64, f64)> = None;
    for _ in 0..200 {
        let c = build_cover(ps, delta, order)?;
        let f = frac(&c);
        if (lo..=hi).contains(&f) {
            return Ok((delta, c));
        }
        let miss = if f < lo { lo - f } else { f - hi };
        if closest.is_none_or(|(m, _)| miss < m) {
            closest = Some((miss, f));
        }
        if f < lo {
            upper = delta;
        } else {
            lower = Some(delta);
        }
        delta = match lower {
            None => delta * 0.75,
            Some(l) => 0.5 * (l + upper),
        };
        if lower.is_some_and(|l| upper - l <= f32::EPSILON * upper) {
            break;
        }
    }
    Err(Error::invalid(format!(
        "no delta found with cover fraction in [{lo}, {hi}] (closest {:.4})",
        closest.map_or(0.0, |(_, f)| f)
    )))
}
