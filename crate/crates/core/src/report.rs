//! JSON run reports.
//!
//! A report echoes every parameter needed to replay the run; replaying gives
//! the same radii, centers and cover, only the timings differ.

use serde::{Deserialize, Serialize};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StandardizeNote {
    pub convention: String,
    pub fit_scope: String,
}

impl StandardizeNote {
    pub fn population_full_input() -> Self {
        StandardizeNote {
            convention: "population (divide by n)".into(),
            fit_scope: "all rows of the input, before any subsetting".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub input: Option<String>,
    pub format: Option<String>,
    pub header: bool,
    pub metric: String,
    pub k: Option<usize>,
    pub delta: Option<f32>,
    pub seed_policy: Option<String>,
    pub order: Option<String>,
    pub restrict: Option<String>,
    pub cover_only: bool,
    pub threads: Option<usize>,
    pub repetitions: Option<usize>,
    pub precision: String,
    pub standardize: Option<StandardizeNote>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub cover_ms: Option<f64>,
    pub ff_p_ms: Option<f64>,
    pub ff_q_ms: Option<f64>,
}

/// One run. `q` is the δ-cover for `cover`/`pipeline`/`bench`, and the
/// restriction set for `ff --restrict`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub params: RunParams,
    pub n_points: usize,
    pub dim: usize,
    pub n_cover: Option<usize>,
    pub cover_fraction: Option<f64>,
    pub cover_achieved: Option<f64>,
    pub cover_valid: Option<bool>,
    pub cost_ff_p_on_p: Option<f64>,
    pub cost_ff_q_on_p: Option<f64>,
    pub cost_ff_q_on_q: Option<f64>,
    /// `cost(FF(Q),P) / cost(FF(P),P)`
    pub ratio: Option<f64>,
    /// `|cost(FF(Q),P) - cost(FF(P),P)|`
    pub radius_gap: Option<f64>,
    pub gap_below_delta: Option<bool>,
    pub timings: Timings,
    /// `ff_p_ms / ff_q_ms`, traversal only.
    pub speedup: Option<f64>,
    pub centers_p: Option<Vec<usize>>,
    pub centers_q: Option<Vec<usize>>,
}

impl RunReport {
    pub fn new(command: &str, params: RunParams, n_points: usize, dim: usize) -> Self {
        RunReport {
            command: command.into(),
            version: VERSION.into(),
            params,
            n_points,
            dim,
            ..Default::default()
        }
    }

    /// Fills `ratio`, `radius_gap` and `gap_below_delta` from the radii.
    pub fn derive_comparisons(&mut self) {
        if let (Some(q), Some(p)) = (self.cost_ff_q_on_p, self.cost_ff_p_on_p) {
            self.ratio = (p > 0.0).then(|| q / p);
            self.radius_gap = Some((q - p).abs());
            if let Some(delta) = self.params.delta {
                self.gap_below_delta = Some((q - p).abs() < delta as f64);
            }
        }
        if let (Some(p), Some(q)) = (self.timings.ff_p_ms, self.timings.ff_q_ms) {
            self.speedup = (q > 0.0).then(|| p / q);
        }
    }

    /// Everything except wall-clock timings and derived speedups.
    pub fn without_timings(&self) -> RunReport {
        RunReport {
            timings: Timings::default(),
            speedup: None,
            ..self.clone()
        }
    }
}
