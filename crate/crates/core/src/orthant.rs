//! Entrywise-nonnegative factorizations G = B^T B by projected gradient
//! descent, diagonal realizations built from them, and the sign-parity
//! diagnostics for hexagon candidates.
//!
//! A configuration embeds in a positive orthant exactly when its Gram has
//! such a factorization; the diagonal construction then realizes it by
//! commuting PSD matrices. The search provides evidence only: a residual
//! floor is not a proof of impossibility.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::configurations::{gram, hexagon, GramMatrix, VectorConfig};
use crate::error::{Error, Result};
use crate::matrix::HermitianMatrix;
use crate::realize::Realization;
use crate::search::{
    plateaued, restart_rng, MultistartOptions, RestartTrace, SearchReport, TracePoint, ARMIJO_C,
    MAX_HALVINGS, STOP_RESIDUAL, SUCCESS_RESIDUAL,
};

/// Coordinates above this negative bound are clamped to zero by the
/// orthant constructions; anything lower is an error.
pub const ORTHANT_TOL: f64 = 1e-12;

/// An m x n entrywise-nonnegative matrix B with relative residual
/// ||B^T B - G||_F / ||G||_F against the Gram it was fitted to.
#[derive(Debug, Clone)]
pub struct NonnegFactorization {
    m: usize,
    n: usize,
    b: Vec<f64>,
    residual: f64,
}

impl NonnegFactorization {
    pub fn new(m: usize, n: usize, b: Vec<f64>, residual: f64) -> Result<Self> {
        if b.len() != m * n {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {m}x{n} factor, got {}",
                m * n,
                b.len()
            )));
        }
        for (pos, &v) in b.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: pos / n,
                    col: pos % n,
                });
            }
            if v < 0.0 {
                return Err(Error::NotInOrthant {
                    index: pos % n,
                    coord: pos / n,
                    value: v,
                });
            }
        }
        Ok(Self { m, n, b, residual })
    }

    pub fn inner_dim(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major m x n entries.
    pub fn entries(&self) -> &[f64] {
        &self.b
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// The k-th column of B, i.e. the vector assigned to the k-th input.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.m).map(|r| self.b[r * self.n + k]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|k| self.column(k)).collect()
    }
}

/// `||B^T B - G||_F^2` for a row-major m x n factor.
pub fn factorization_objective(b: &[f64], m: usize, g: &GramMatrix) -> f64 {
    let n = g.n();
    debug_assert_eq!(b.len(), m * n);
    let mut acc = 0.0;
    for j in 0..n {
        for k in 0..n {
            let dot: f64 = (0..m).map(|r| b[r * n + j] * b[r * n + k]).sum();
            let resid = dot - g.get(j, k);
            acc += resid * resid;
        }
    }
    acc
}

/// Analytic gradient of [`factorization_objective`]: 4 B (B^T B - G).
pub fn factorization_gradient(b: &[f64], m: usize, g: &GramMatrix) -> Vec<f64> {
    let n = g.n();
    debug_assert_eq!(b.len(), m * n);
    let mut resid = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            let dot: f64 = (0..m).map(|r| b[r * n + j] * b[r * n + k]).sum();
            resid[j * n + k] = dot - g.get(j, k);
        }
    }
    let mut grad = vec![0.0; m * n];
    for r in 0..m {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += b[r * n + k] * resid[k * n + j];
            }
            grad[r * n + j] = 4.0 * acc;
        }
    }
    grad
}

struct PgdOutcome {
    residual: f64,
    trace: Vec<TracePoint>,
}

/// Projected gradient descent on the nonnegative orthant, with a
/// backtracking line search; the projection is an entrywise clamp at zero.
///
/// The initial step of each backtracking pass is the Barzilai-Borwein
/// guess: solutions sit on the orthant boundary, where a fixed unit step
/// crawls sublinearly, while the Armijo halving still guarantees a
/// monotone trace.
fn descend_projected(b: &mut Vec<f64>, m: usize, g: &GramMatrix, max_iters: usize) -> PgdOutcome {
    let g_norm = g.frobenius_norm();
    let rel_of = |obj: f64| {
        let abs = obj.max(0.0).sqrt();
        if g_norm > 0.0 {
            abs / g_norm
        } else {
            abs
        }
    };
    let mut objective = factorization_objective(b, m, g);
    let mut trace = Vec::with_capacity(max_iters.min(4096) + 1);
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;

    for iter in 0..max_iters {
        let rel = rel_of(objective);
        trace.push((iter, rel));
        if rel < STOP_RESIDUAL || plateaued(&trace) {
            break;
        }
        let grad = factorization_gradient(b, m, g);
        if grad.iter().all(|&x| x == 0.0) {
            break;
        }
        let bb_step = prev
            .as_ref()
            .and_then(|(old_b, old_grad)| {
                let mut ss = 0.0;
                let mut sy = 0.0;
                for i in 0..b.len() {
                    let s = b[i] - old_b[i];
                    let y = grad[i] - old_grad[i];
                    ss += s * s;
                    sy += s * y;
                }
                (sy > 0.0 && ss.is_finite()).then(|| (ss / sy).clamp(1e-12, 1e6))
            })
            .unwrap_or(1.0);
        let mut step = bb_step;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = b
                .iter()
                .zip(&grad)
                .map(|(x, gx)| (x - step * gx).max(0.0))
                .collect();
            let trial_obj = factorization_objective(&trial, m, g);
            // Sufficient decrease along the actual (projected) step.
            let along: f64 = grad
                .iter()
                .zip(trial.iter().zip(b.iter()))
                .map(|(gx, (t, x))| gx * (t - x))
                .sum();
            if trial_obj <= objective + ARMIJO_C * along && trial_obj < objective {
                prev = Some((std::mem::replace(b, trial), grad));
                objective = trial_obj;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let final_rel = rel_of(objective);
    if trace.last().is_none_or(|&(_, r)| r != final_rel) {
        trace.push((trace.len(), final_rel));
    }
    PgdOutcome {
        residual: final_rel,
        trace,
    }
}

/// Default inner dimension when none is requested: n(n+1)/2, a safe upper
/// bound at the small sizes this library targets.
pub fn default_inner_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Multistart projected-gradient search for an entrywise-nonnegative B with
/// B^T B close to `g`. Deterministic per (seed, restarts).
pub fn factorize_nonneg(
    g: &GramMatrix,
    m: usize,
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> Result<(NonnegFactorization, SearchReport)> {
    factorize_nonneg_opts(g, m, &MultistartOptions::new(restarts, max_iters, seed))
}

/// [`factorize_nonneg`] with explicit options (trace collection).
pub fn factorize_nonneg_opts(
    g: &GramMatrix,
    m: usize,
    opts: &MultistartOptions,
) -> Result<(NonnegFactorization, SearchReport)> {
    if m < 1 {
        return Err(Error::InvalidInput(
            "inner dimension m must be at least 1".into(),
        ));
    }
    if opts.restarts < 1 {
        return Err(Error::InvalidInput(
            "the search needs at least one restart".into(),
        ));
    }
    if let Some((row, col, value)) = g.negative_entry(ORTHANT_TOL) {
        return Err(Error::GramHasNegativeEntry { row, col, value });
    }
    let n = g.n();
    let init_scale = (g.max_diagonal().max(0.0) / m as f64).sqrt();

    let mut best: Option<(f64, Vec<f64>, Vec<TracePoint>, usize)> = None;
    let mut all_traces = Vec::new();
    let mut executed = 0usize;
    for restart in 0..opts.restarts {
        let mut rng = restart_rng(opts.seed, restart as u64);
        let mut b: Vec<f64> = (0..m * n)
            .map(|_| rng.random_range(0.0..=init_scale.max(f64::MIN_POSITIVE)))
            .collect();
        let outcome = descend_projected(&mut b, m, g, opts.max_iters);
        executed += 1;
        if opts.collect_all_traces {
            all_traces.push(RestartTrace {
                restart,
                points: outcome.trace.clone(),
            });
        }
        let improved = best
            .as_ref()
            .is_none_or(|(r0, _, _, _)| outcome.residual < *r0);
        if improved {
            best = Some((outcome.residual, b, outcome.trace, restart));
        }
        // A success cannot be meaningfully improved by further restarts.
        if best
            .as_ref()
            .is_some_and(|(r0, _, _, _)| *r0 < SUCCESS_RESIDUAL)
        {
            break;
        }
    }

    let (residual, b, trace, best_idx) = best.expect("at least one restart runs");
    let factorization = NonnegFactorization::new(m, n, b, residual)?;
    let report = SearchReport {
        best_residual: residual,
        restarts: opts.restarts,
        restarts_run: executed,
        best_restart: best_idx,
        iterations_per_restart: opts.max_iters,
        seed: opts.seed,
        converged: residual < SUCCESS_RESIDUAL,
        residual_trace: trace,
        all_traces,
        ladder: Vec::new(),
    };
    Ok((factorization, report))
}

/// Realizes a configuration lying in the positive orthant of R^m by
/// commuting diagonal matrices: A_k = sqrt(m) diag(v_k). The trace Gram
/// then reproduces the Euclidean Gram exactly up to rounding.
pub fn diagonal_realization(config: &VectorConfig) -> Result<Realization> {
    let m = config.ambient_dim();
    if m == 0 || config.is_empty() {
        return Err(Error::InvalidInput(
            "diagonal realization needs a nonempty configuration".into(),
        ));
    }
    let scale = (m as f64).sqrt();
    let mut matrices = Vec::with_capacity(config.len());
    for (index, v) in config.vectors().iter().enumerate() {
        let mut diag = Vec::with_capacity(m);
        for (coord, &x) in v.iter().enumerate() {
            if x < -ORTHANT_TOL {
                return Err(Error::NotInOrthant {
                    index,
                    coord,
                    value: x,
                });
            }
            diag.push(scale * x.max(0.0));
        }
        matrices.push(HermitianMatrix::diagonal(&diag));
    }
    Realization::new(matrices)
}

/// Bridges a nonnegative factorization to a realization: the columns of B
/// become diagonal PSD matrices whose trace Gram equals B^T B.
pub fn realization_from_factorization(
    f: &NonnegFactorization,
    residual_threshold: f64,
) -> Result<Realization> {
    // NaN residuals count as too high.
    if f.residual().partial_cmp(&residual_threshold) != Some(std::cmp::Ordering::Less) {
        return Err(Error::ResidualTooHigh {
            residual: f.residual(),
            threshold: residual_threshold,
        });
    }
    let config = VectorConfig::new(f.columns(), None)?;
    diagonal_realization(&config)
}

/// Defects of a six-vector orthant candidate against the structure an exact
/// hexagon embedding would be forced into: opposite midpoints all agree,
/// each centered vector is a signed copy of the midpoint, and the
/// even-index centered vectors sum to zero — which parity makes impossible,
/// so at least one defect stays bounded away from zero whenever the Gram
/// residual is small.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HexagonOrthantReport {
    /// max_k || (a_k + a_{k+3})/2 - e ||, e the k = 0 midpoint.
    pub midpoint_defect: f64,
    /// max over vectors and coordinates of min_s |b_k\[i\] - s e\[i\]|.
    pub sign_defect: f64,
    /// || b_0 + b_2 + b_4 ||.
    pub parity_defect: f64,
    /// Relative Gram deviation against the built-in hexagon Gram.
    pub gram_residual: f64,
    pub max_defect: f64,
    pub worst_link: String,
}

/// Measures how far six nonnegative vectors are from the forced hexagon
/// structure. Complements the Gram residual: a candidate can zero these
/// defects or the residual, never both.
pub fn hexagon_orthant_diagnostics(candidate: &[Vec<f64>]) -> Result<HexagonOrthantReport> {
    if candidate.len() != 6 {
        return Err(Error::ArityError {
            expected: 6,
            actual: candidate.len(),
        });
    }
    let dim = candidate[0].len();
    for (index, v) in candidate.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::DimMismatch {
                left: v.len(),
                right: dim,
            });
        }
        for (coord, &x) in v.iter().enumerate() {
            if x < -1e-9 {
                return Err(Error::NotInOrthant {
                    index,
                    coord,
                    value: x,
                });
            }
        }
    }

    let midpoint: Vec<f64> = (0..dim)
        .map(|i| 0.5 * (candidate[0][i] + candidate[3][i]))
        .collect();
    let mut midpoint_defect = 0.0f64;
    for k in 0..3 {
        let mut acc = 0.0;
        for i in 0..dim {
            let mk = 0.5 * (candidate[k][i] + candidate[k + 3][i]);
            acc += (mk - midpoint[i]) * (mk - midpoint[i]);
        }
        midpoint_defect = midpoint_defect.max(acc.sqrt());
    }

    let centered: Vec<Vec<f64>> = candidate
        .iter()
        .map(|a| (0..dim).map(|i| a[i] - midpoint[i]).collect())
        .collect();
    let mut sign_defect = 0.0f64;
    for b in &centered {
        for i in 0..dim {
            let plus = (b[i] - midpoint[i]).abs();
            let minus = (b[i] + midpoint[i]).abs();
            sign_defect = sign_defect.max(plus.min(minus));
        }
    }

    let parity_defect = (0..dim)
        .map(|i| {
            let s = centered[0][i] + centered[2][i] + centered[4][i];
            s * s
        })
        .sum::<f64>()
        .sqrt();

    let target = gram(&hexagon());
    let mut num = 0.0;
    for j in 0..6 {
        for k in 0..6 {
            let dot: f64 = (0..dim).map(|i| candidate[j][i] * candidate[k][i]).sum();
            let dv = dot - target.get(j, k);
            num += dv * dv;
        }
    }
    let gram_residual = num.sqrt() / target.frobenius_norm();

    let (max_defect, worst_link) = [
        (midpoint_defect, "midpoint"),
        (sign_defect, "sign"),
        (parity_defect, "parity"),
    ]
    .into_iter()
    .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
    .map(|(v, name)| (v, name.to_string()))
    .unwrap();

    Ok(HexagonOrthantReport {
        midpoint_defect,
        sign_defect,
        parity_defect,
        gram_residual,
        max_defect,
        worst_link,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configurations::random_nonneg_config;
    use crate::matrix::trace_inner_product;

    fn planted_gram(m: usize, n: usize, seed: u64) -> (Vec<f64>, GramMatrix) {
        let mut rng = restart_rng(seed, 1000);
        let b: Vec<f64> = (0..m * n).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut entries = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                entries[j * n + k] = (0..m).map(|r| b[r * n + j] * b[r * n + k]).sum();
            }
        }
        (b, GramMatrix::new(n, entries).unwrap())
    }

    #[test]
    fn identity_gram_recovers_identity() {
        let g = GramMatrix::new(3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let (f, report) = factorize_nonneg(&g, 3, 20, 2000, 0).unwrap();
        assert!(report.best_residual < 1e-8, "got {}", report.best_residual);
        assert!(f.entries().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn plant_and_recover_six_by_four() {
        let (_, g) = planted_gram(6, 4, 42);
        let (f, report) = factorize_nonneg(&g, 6, 20, 4000, 7).unwrap();
        assert!(
            report.best_residual < 1e-8,
            "planted recovery failed: {}",
            report.best_residual
        );
        assert_eq!(f.inner_dim(), 6);
    }

    #[test]
    fn monotone_descent_and_projection_invariant() {
        let g = gram(&hexagon());
        let (f, report) = factorize_nonneg(&g, 6, 3, 500, 1).unwrap();
        assert!(f.entries().iter().all(|&x| x >= 0.0));
        for pair in report.residual_trace.windows(2) {
            assert!(pair[1].1 <= pair[0].1 + 1e-15);
        }
    }

    #[test]
    fn rejects_negative_gram_entries() {
        let g = GramMatrix::new(2, vec![1.0, -0.2, -0.2, 1.0]).unwrap();
        assert!(matches!(
            factorize_nonneg(&g, 2, 1, 10, 0),
            Err(Error::GramHasNegativeEntry { .. })
        ));
    }

    #[test]
    fn diagonal_realization_axis_pair() {
        let cfg = VectorConfig::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], None).unwrap();
        let real = diagonal_realization(&cfg).unwrap();
        let s = 2.0_f64.sqrt();
        assert_eq!(real.matrices()[0].entry(0, 0).re, s);
        assert_eq!(real.matrices()[0].entry(1, 1).re, 0.0);
        let tg = real.trace_gram();
        let expect = [1.0, 0.0, 0.0, 1.0];
        for (a, b) in tg.iter().zip(expect) {
            assert!((a - b).abs() <= 1e-14, "trace Gram {tg:?}");
        }
    }

    #[test]
    fn diagonal_realization_diagonal_unit() {
        let x = 1.0 / 2.0_f64.sqrt();
        let cfg = VectorConfig::new(vec![vec![x, x]], None).unwrap();
        let real = diagonal_realization(&cfg).unwrap();
        let self_ip = trace_inner_product(&real.matrices()[0], &real.matrices()[0]).unwrap();
        assert!((self_ip - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn diagonal_realization_zero_vector() {
        let cfg = VectorConfig::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], None).unwrap();
        let real = diagonal_realization(&cfg).unwrap();
        assert_eq!(real.matrices()[0].frobenius_norm(), 0.0);
        let tg = real.trace_gram();
        assert_eq!(tg[0], 0.0);
        assert_eq!(tg[1], 0.0);
    }

    #[test]
    fn diagonal_realization_rejects_negative() {
        let cfg = VectorConfig::new(vec![vec![1.0, -0.5]], None).unwrap();
        assert!(matches!(
            diagonal_realization(&cfg),
            Err(Error::NotInOrthant { .. })
        ));
    }

    #[test]
    fn factorization_bridge_matches_planted_gram() {
        let (_, g) = planted_gram(6, 4, 3);
        let (f, _) = factorize_nonneg(&g, 6, 20, 4000, 11).unwrap();
        let real = realization_from_factorization(&f, 1e-6).unwrap();
        assert_eq!(real.dim(), 6);
        assert_eq!(real.len(), 4);
        let residual = real.gram_residual_vs(&g).unwrap();
        assert!(residual < 1e-6, "bridge residual {residual}");
    }

    #[test]
    fn bridge_rejects_high_residual() {
        let f = NonnegFactorization::new(2, 2, vec![1.0, 0.0, 0.0, 1.0], 0.5).unwrap();
        assert!(matches!(
            realization_from_factorization(&f, 1e-6),
            Err(Error::ResidualTooHigh { .. })
        ));
    }

    #[test]
    fn bridge_zero_column_gives_zero_matrix() {
        let f = NonnegFactorization::new(2, 2, vec![1.0, 0.0, 1.0, 0.0], 0.0).unwrap();
        let real = realization_from_factorization(&f, 1.0).unwrap();
        assert_eq!(real.matrices()[1].frobenius_norm(), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (_, g) = planted_gram(4, 3, 9);
        let mut rng = restart_rng(17, 5);
        let m = 4usize;
        let b: Vec<f64> = (0..m * 3).map(|_| rng.random_range(0.1..1.0)).collect();
        let grad = factorization_gradient(&b, m, &g);
        let h = 1e-5;
        for idx in 0..b.len() {
            let mut plus = b.clone();
            let mut minus = b.clone();
            plus[idx] += h;
            minus[idx] -= h;
            let fd = (factorization_objective(&plus, m, &g)
                - factorization_objective(&minus, m, &g))
                / (2.0 * h);
            let rel = (fd - grad[idx]).abs() / grad[idx].abs().max(1e-6);
            assert!(
                rel <= 1e-5,
                "entry {idx}: fd {fd} vs analytic {}",
                grad[idx]
            );
        }
    }

    #[test]
    fn hexagon_diagnostics_on_degenerate_candidate() {
        // All six vectors equal: midpoint structure is perfect, the Gram is
        // far off. Diagnostics and residual are complementary signals.
        let e = vec![1.0, 2.0, 0.5];
        let candidate: Vec<Vec<f64>> = (0..6).map(|_| e.clone()).collect();
        let report = hexagon_orthant_diagnostics(&candidate).unwrap();
        assert!(report.midpoint_defect <= 1e-12);
        assert!(report.parity_defect <= 1e-12);
        assert!(report.gram_residual > 0.1);
    }

    #[test]
    fn hexagon_diagnostics_on_search_output() {
        let g = gram(&hexagon());
        let (f, report) = factorize_nonneg(&g, 8, 30, 1500, 0).unwrap();
        assert!(
            report.best_residual > 1e-3,
            "no nonnegative factorization exists; got {}",
            report.best_residual
        );
        let diag = hexagon_orthant_diagnostics(&f.columns()).unwrap();
        assert!(
            diag.max_defect > 1e-3,
            "some forced identity must fail: {diag:?}"
        );
    }

    #[test]
    fn hexagon_diagnostics_arity() {
        let candidate: Vec<Vec<f64>> = (0..5).map(|_| vec![1.0]).collect();
        assert!(matches!(
            hexagon_orthant_diagnostics(&candidate),
            Err(Error::ArityError { .. })
        ));
    }

    #[test]
    fn n_at_most_four_factorizes() {
        // Spot check of the small-n guarantee; the acceptance suite sweeps
        // one hundred seeds.
        for seed in 0..5u64 {
            let cfg = random_nonneg_config(4, 4, seed).unwrap();
            let g = gram(&cfg);
            let (_, report) = factorize_nonneg(&g, 4, 50, 3000, seed).unwrap();
            assert!(
                report.best_residual < 1e-6,
                "seed {seed}: residual {}",
                report.best_residual
            );
        }
    }
}
