//! Shared multistart-search machinery: deterministic per-restart seeding,
//! stop rules, and the report type returned by both searches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Relative residual below which a restart stops early (machine-precision fit).
pub const STOP_RESIDUAL: f64 = 1e-10;
/// Relative residual below which a search counts as a success.
pub const SUCCESS_RESIDUAL: f64 = 1e-6;
/// Plateau detection: stop when the residual improved by less than
/// `PLATEAU_REL_CHANGE` (relative) over the last `PLATEAU_WINDOW` iterations.
pub const PLATEAU_WINDOW: usize = 50;
pub const PLATEAU_REL_CHANGE: f64 = 1e-12;
/// Armijo sufficient-decrease constant for the backtracking line search.
pub const ARMIJO_C: f64 = 1e-4;
/// Maximum step halvings before a restart is declared stationary.
pub const MAX_HALVINGS: usize = 60;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic RNG for restart `index` under `seed`; independent of both
/// thread scheduling and the order restarts are executed in.
pub fn restart_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut state = seed;
    let a = splitmix64(&mut state);
    let mut state2 = a ^ index.wrapping_mul(0xda94_2042_e4dd_58b5);
    let mixed = splitmix64(&mut state2);
    ChaCha8Rng::seed_from_u64(mixed)
}

/// One (iteration, relative residual) sample.
pub type TracePoint = (usize, f64);

/// Residual trace of a single restart.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub points: Vec<TracePoint>,
}

/// Summary of a multistart search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    /// Best relative Frobenius residual over all restarts.
    pub best_residual: f64,
    /// Restarts requested.
    pub restarts: usize,
    /// Restarts actually executed (the loop exits early once a restart
    /// clears the success threshold).
    pub restarts_run: usize,
    /// Index of the winning restart.
    pub best_restart: usize,
    /// Iteration budget per restart.
    pub iterations_per_restart: usize,
    pub seed: u64,
    /// Whether the best residual clears [`SUCCESS_RESIDUAL`].
    pub converged: bool,
    /// Residual trace of the winning restart.
    pub residual_trace: Vec<TracePoint>,
    /// Traces of every restart; populated only when trace collection is on.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub all_traces: Vec<RestartTrace>,
    /// (dimension, best residual) history when a dimension ladder was run.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ladder: Vec<(usize, f64)>,
}

/// Knobs common to both searches.
#[derive(Debug, Clone, Copy)]
pub struct MultistartOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Keep the residual trace of every restart (for CSV export).
    pub collect_all_traces: bool,
}

impl MultistartOptions {
    pub fn new(restarts: usize, max_iters: usize, seed: u64) -> Self {
        Self {
            restarts,
            max_iters,
            seed,
            collect_all_traces: false,
        }
    }

    pub fn with_traces(mut self) -> Self {
        self.collect_all_traces = true;
        self
    }
}

/// Plateau stop rule over a residual trace.
pub(crate) fn plateaued(points: &[TracePoint]) -> bool {
    if points.len() <= PLATEAU_WINDOW {
        return false;
    }
    let recent = points[points.len() - 1].1;
    let old = points[points.len() - 1 - PLATEAU_WINDOW].1;
    (old - recent).abs() <= PLATEAU_REL_CHANGE * old.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn restart_rngs_are_deterministic_and_distinct() {
        let mut a = restart_rng(7, 0);
        let mut a2 = restart_rng(7, 0);
        let mut b = restart_rng(7, 1);
        let xs: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let xs2: Vec<u64> = (0..4).map(|_| a2.next_u64()).collect();
        let ys: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        assert_eq!(xs, xs2);
        assert_ne!(xs, ys);
    }

    #[test]
    fn plateau_detection() {
        let flat: Vec<TracePoint> = (0..60).map(|i| (i, 0.5)).collect();
        assert!(plateaued(&flat));
        let falling: Vec<TracePoint> = (0..60).map(|i| (i, 1.0 / (1.0 + i as f64))).collect();
        assert!(!plateaued(&falling));
        let short: Vec<TracePoint> = (0..10).map(|i| (i, 0.5)).collect();
        assert!(!plateaued(&short));
    }
}
