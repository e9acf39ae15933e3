//! Search for PSD matrices A_1..A_n reproducing a target Gram matrix under
//! the normalized trace inner product, certificate verification, and the
//! contradiction-chain diagnostics for pentagon candidates.
//!
//! The search works in the factored parametrization A_k = C_k C_k*, so every
//! iterate is PSD exactly and the objective
//!
//!   f(C) = sum_{j<=k} w_jk ((1/d) Re Tr(C_j C_j* C_k C_k*) - G_jk)^2,
//!   w_jk = 2 for j < k and 1 for j = k,
//!
//! is a smooth quartic. Summing the weighted upper triangle equals summing
//! the full residual matrix, so f is exactly the squared Frobenius norm of
//! the Gram deviation, and the gradient has the uniform form
//! grad_j = (8/d) (sum_k r_jk A_k) C_j.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::configurations::{gram, pentagon, GramMatrix};
use crate::error::{Error, Result};
use crate::matrix::{
    min_eigenvalue, trace_inner_product, ComplexMatrix, HermitianMatrix, DIMENSION_CAP,
};
use crate::search::{
    plateaued, restart_rng, MultistartOptions, RestartTrace, SearchReport, TracePoint, ARMIJO_C,
    MAX_HALVINGS, STOP_RESIDUAL, SUCCESS_RESIDUAL,
};

/// Default iteration budget used by the dimension ladder. Rank-deficient
/// optima flatten the quartic, so the tail of the descent is sublinear and
/// needs a generous budget; the plateau rule cuts hopeless restarts early.
pub const DEFAULT_MAX_ITERS: usize = 20_000;

/// A family of PSD matrices in a common dimension, optionally carrying the
/// relative Gram residual against the target it was produced for.
#[derive(Debug, Clone)]
pub struct Realization {
    d: usize,
    matrices: Vec<HermitianMatrix>,
    gram_residual: Option<f64>,
    flags: Vec<String>,
}

impl Realization {
    pub fn new(matrices: Vec<HermitianMatrix>) -> Result<Self> {
        let d = match matrices.first() {
            Some(m) => m.dim(),
            None => {
                return Err(Error::InvalidInput(
                    "a realization needs at least one matrix".into(),
                ))
            }
        };
        for m in &matrices {
            if m.dim() != d {
                return Err(Error::DimMismatch {
                    left: m.dim(),
                    right: d,
                });
            }
        }
        Ok(Self {
            d,
            matrices,
            gram_residual: None,
            flags: Vec::new(),
        })
    }

    pub fn with_gram_residual(mut self, residual: f64) -> Self {
        self.gram_residual = Some(residual);
        self
    }

    pub fn with_flag(mut self, flag: impl Into<String>) -> Self {
        self.flags.push(flag.into());
        self
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrices(&self) -> &[HermitianMatrix] {
        &self.matrices
    }

    pub fn gram_residual(&self) -> Option<f64> {
        self.gram_residual
    }

    pub fn flags(&self) -> &[String] {
        &self.flags
    }

    /// Pairwise normalized-trace inner products, row-major n x n.
    pub fn trace_gram(&self) -> Vec<f64> {
        let n = self.matrices.len();
        let mut out = vec![0.0; n * n];
        for j in 0..n {
            for k in j..n {
                let v = trace_inner_product(&self.matrices[j], &self.matrices[k])
                    .expect("matrices share a dimension");
                out[j * n + k] = v;
                out[k * n + j] = v;
            }
        }
        out
    }

    /// Relative Frobenius deviation of the trace Gram from `g`.
    pub fn gram_residual_vs(&self, g: &GramMatrix) -> Result<f64> {
        if g.n() != self.matrices.len() {
            return Err(Error::ArityError {
                expected: g.n(),
                actual: self.matrices.len(),
            });
        }
        let tg = self.trace_gram();
        let mut num = 0.0;
        for (a, b) in tg.iter().zip(g.entries()) {
            num += (a - b) * (a - b);
        }
        let denom = g.frobenius_norm();
        Ok(if denom > 0.0 {
            num.sqrt() / denom
        } else {
            num.sqrt()
        })
    }
}

/// Factored parametrization: one d x r complex factor per matrix, with
/// A_k = C_k C_k* PSD by construction.
#[derive(Debug, Clone)]
pub struct FactorPoint {
    d: usize,
    r: usize,
    factors: Vec<ComplexMatrix>,
}

impl FactorPoint {
    pub fn new(factors: Vec<ComplexMatrix>) -> Result<Self> {
        let (d, r) = match factors.first() {
            Some(f) => (f.rows(), f.cols()),
            None => {
                return Err(Error::InvalidInput(
                    "a factor point needs at least one factor".into(),
                ))
            }
        };
        for f in &factors {
            if f.rows() != d || f.cols() != r {
                return Err(Error::DimMismatch {
                    left: f.rows() * f.cols(),
                    right: d * r,
                });
            }
        }
        Ok(Self { d, r, factors })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    /// Complex Gaussian initialization scaled so the expected squared norm of
    /// each A_j roughly matches the target diagonal.
    fn random(
        n: usize,
        d: usize,
        r: usize,
        diag: &[f64],
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> Self {
        let factors = (0..n)
            .map(|j| {
                let target = diag[j].max(0.0);
                let sigma = (target / ((r * (d + r)) as f64)).powf(0.25);
                let scale = sigma / 2.0_f64.sqrt();
                let mut f = ComplexMatrix::zeros(d, r);
                for entry in f.data_mut() {
                    let re: f64 = rng.sample(rand_distr::StandardNormal);
                    let im: f64 = rng.sample(rand_distr::StandardNormal);
                    *entry = Complex64::new(re * scale, im * scale);
                }
                f
            })
            .collect();
        Self { d, r, factors }
    }

    /// The PSD matrices A_k = C_k C_k*.
    pub fn matrices(&self) -> Vec<HermitianMatrix> {
        self.factors
            .iter()
            .map(|c| HermitianMatrix::symmetrize(c.mul(&c.adjoint())))
            .collect()
    }

    /// Embeds into a larger dimension as a zero-padded direct summand,
    /// rescaled so normalized-trace inner products are preserved:
    /// A -> sqrt(d_new/d) * diag(A, 0).
    pub fn lift(&self, d_new: usize, r_new: usize) -> Result<Self> {
        if d_new < self.d || r_new < self.r {
            return Err(Error::InvalidInput(format!(
                "lift target ({d_new}, {r_new}) is smaller than ({}, {})",
                self.d, self.r
            )));
        }
        let scale = (d_new as f64 / self.d as f64).powf(0.25);
        let factors = self
            .factors
            .iter()
            .map(|c| {
                let mut out = ComplexMatrix::zeros(d_new, r_new);
                for row in 0..self.d {
                    for col in 0..self.r {
                        out.set(row, col, c.get(row, col) * scale);
                    }
                }
                out
            })
            .collect();
        Ok(Self {
            d: d_new,
            r: r_new,
            factors,
        })
    }
}

fn trace_product_re(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.rows();
    let mut acc = 0.0;
    for r in 0..d {
        for c in 0..d {
            let x = a.get(r, c);
            let y = b.get(c, r);
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

fn gram_products(factors: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    factors.iter().map(|c| c.mul(&c.adjoint())).collect()
}

/// Residual matrix r_jk = (1/d) Re Tr(A_j A_k) - G_jk from precomputed A_k.
fn residual_matrix(products: &[ComplexMatrix], g: &GramMatrix) -> Vec<f64> {
    let n = products.len();
    let d = products[0].rows() as f64;
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        for k in j..n {
            let v = trace_product_re(&products[j], &products[k]) / d - g.get(j, k);
            out[j * n + k] = v;
            out[k * n + j] = v;
        }
    }
    out
}

/// Squared Frobenius norm of the Gram deviation at a factor point; equals
/// the weighted upper-triangle objective described in the module docs.
pub fn realization_objective(point: &FactorPoint, g: &GramMatrix) -> f64 {
    let products = gram_products(&point.factors);
    residual_matrix(&products, g).iter().map(|r| r * r).sum()
}

fn gradients_from(
    products: &[ComplexMatrix],
    resid: &[f64],
    factors: &[ComplexMatrix],
    d: usize,
) -> Vec<ComplexMatrix> {
    let n = factors.len();
    let coeff = Complex64::new(8.0 / d as f64, 0.0);
    (0..n)
        .map(|j| {
            let mut combo = ComplexMatrix::zeros(d, d);
            for k in 0..n {
                let w = resid[j * n + k];
                if w != 0.0 {
                    combo = combo.add(&products[k].scale(Complex64::new(w, 0.0)));
                }
            }
            combo.mul(&factors[j]).scale(coeff)
        })
        .collect()
}

/// Analytic gradient of [`realization_objective`] with respect to each
/// factor: grad_j = (8/d) (sum_k r_jk A_k) C_j.
pub fn realization_gradient(point: &FactorPoint, g: &GramMatrix) -> Vec<ComplexMatrix> {
    let products = gram_products(&point.factors);
    let resid = residual_matrix(&products, g);
    gradients_from(&products, &resid, &point.factors, point.d)
}

struct DescentOutcome {
    residual: f64,
    trace: Vec<TracePoint>,
}

fn relative_residual(objective: f64, g_norm: f64) -> f64 {
    let abs = objective.max(0.0).sqrt();
    if g_norm > 0.0 {
        abs / g_norm
    } else {
        abs
    }
}

/// Re-part inner product between two factor lists viewed as real vectors.
fn factors_inner(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            x.data()
                .iter()
                .zip(y.data())
                .map(|(p, q)| p.re * q.re + p.im * q.im)
                .sum::<f64>()
        })
        .sum()
}

/// Gradient descent with backtracking on one factor point, in place.
///
/// The quartic flattens near rank-deficient optima, where a unit initial
/// step crawls; a Barzilai-Borwein first guess for the step keeps the tail
/// fast while the Armijo backtracking keeps every iterate monotone.
fn descend(point: &mut FactorPoint, g: &GramMatrix, max_iters: usize) -> DescentOutcome {
    let g_norm = g.frobenius_norm();
    let d = point.d;

    let mut products = gram_products(&point.factors);
    let mut resid = residual_matrix(&products, g);
    let mut objective: f64 = resid.iter().map(|r| r * r).sum();
    let mut trace = Vec::with_capacity(max_iters.min(4096) + 1);
    let mut prev: Option<(Vec<ComplexMatrix>, Vec<ComplexMatrix>)> = None;

    for iter in 0..max_iters {
        let rel = relative_residual(objective, g_norm);
        trace.push((iter, rel));
        if rel < STOP_RESIDUAL || plateaued(&trace) {
            break;
        }

        let grads = gradients_from(&products, &resid, &point.factors, d);
        let grad_norm_sq = factors_inner(&grads, &grads);
        if grad_norm_sq == 0.0 {
            break;
        }

        let bb_step = prev
            .as_ref()
            .and_then(|(old_factors, old_grads)| {
                let s: Vec<ComplexMatrix> = point
                    .factors
                    .iter()
                    .zip(old_factors)
                    .map(|(c, o)| c.sub(o))
                    .collect();
                let y: Vec<ComplexMatrix> =
                    grads.iter().zip(old_grads).map(|(c, o)| c.sub(o)).collect();
                let sy = factors_inner(&s, &y);
                let ss = factors_inner(&s, &s);
                (sy > 0.0 && ss.is_finite()).then(|| (ss / sy).clamp(1e-12, 1e6))
            })
            .unwrap_or(1.0);

        let mut step = bb_step;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<ComplexMatrix> = point
                .factors
                .iter()
                .zip(&grads)
                .map(|(c, gmat)| c.sub(&gmat.scale(Complex64::new(step, 0.0))))
                .collect();
            let trial_products = gram_products(&trial);
            let trial_resid = residual_matrix(&trial_products, g);
            let trial_obj: f64 = trial_resid.iter().map(|r| r * r).sum();
            if trial_obj <= objective - ARMIJO_C * step * grad_norm_sq {
                prev = Some((std::mem::replace(&mut point.factors, trial), grads));
                products = trial_products;
                resid = trial_resid;
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
    let final_rel = relative_residual(objective, g_norm);
    if trace.last().is_none_or(|&(_, r)| r != final_rel) {
        trace.push((trace.len(), final_rel));
    }
    DescentOutcome {
        residual: final_rel,
        trace,
    }
}

fn validate_gram_for_search(g: &GramMatrix) -> Result<()> {
    if let Some((row, col, value)) = g.negative_entry(1e-12) {
        return Err(Error::GramHasNegativeEntry { row, col, value });
    }
    Ok(())
}

/// Multistart search with caller-supplied warm starts tried before the
/// random restarts. Returns the winning factor point alongside the
/// realization and report.
pub fn realize_from(
    g: &GramMatrix,
    d: usize,
    r: usize,
    opts: &MultistartOptions,
    warm_starts: &[FactorPoint],
) -> Result<(FactorPoint, Realization, SearchReport)> {
    if d < 1 {
        return Err(Error::InvalidInput("dimension d must be at least 1".into()));
    }
    if d > DIMENSION_CAP {
        return Err(Error::DimensionCap {
            requested: d,
            cap: DIMENSION_CAP,
        });
    }
    if r < 1 || r > d {
        return Err(Error::InvalidInput(format!(
            "rank r = {r} must satisfy 1 <= r <= d = {d}"
        )));
    }
    validate_gram_for_search(g)?;
    for w in warm_starts {
        if w.dim() != d || w.rank() != r || w.factors.len() != g.n() {
            return Err(Error::InvalidInput(
                "warm start shape does not match the search".into(),
            ));
        }
    }

    let total = warm_starts.len() + opts.restarts;
    if total == 0 {
        return Err(Error::InvalidInput(
            "the search needs at least one restart or warm start".into(),
        ));
    }

    let n = g.n();
    let diag: Vec<f64> = (0..n).map(|j| g.get(j, j)).collect();
    let mut best: Option<(f64, FactorPoint, Vec<TracePoint>, usize)> = None;
    let mut all_traces = Vec::new();
    let mut executed = 0usize;

    for candidate in 0..total {
        let mut point = if candidate < warm_starts.len() {
            warm_starts[candidate].clone()
        } else {
            let restart_index = (candidate - warm_starts.len()) as u64;
            let mut rng = restart_rng(opts.seed, restart_index);
            FactorPoint::random(n, d, r, &diag, &mut rng)
        };
        let outcome = descend(&mut point, g, opts.max_iters);
        executed += 1;
        if opts.collect_all_traces {
            all_traces.push(RestartTrace {
                restart: candidate,
                points: outcome.trace.clone(),
            });
        }
        let improved = best
            .as_ref()
            .is_none_or(|(r0, _, _, _)| outcome.residual < *r0);
        if improved {
            best = Some((outcome.residual, point, outcome.trace, candidate));
        }
        // A success cannot be meaningfully improved by further restarts.
        if best
            .as_ref()
            .is_some_and(|(r0, _, _, _)| *r0 < SUCCESS_RESIDUAL)
        {
            break;
        }
    }

    let (residual, point, trace, best_idx) = best.expect("at least one candidate runs");
    let realization = Realization::new(point.matrices())?.with_gram_residual(residual);
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
    Ok((point, realization, report))
}

/// Multistart factored-gradient search for a realization of `g` at fixed
/// dimension `d` and factor rank `r`.
pub fn realize(
    g: &GramMatrix,
    d: usize,
    r: usize,
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> Result<(Realization, SearchReport)> {
    let opts = MultistartOptions::new(restarts, max_iters, seed);
    let (_, realization, report) = realize_from(g, d, r, &opts, &[])?;
    Ok((realization, report))
}

/// Escalates the dimension over 1, 2, 4, ..., d_max (realizability at a
/// dimension implies realizability at every larger one) and stops at the
/// first success. Each rung is warm-started from the previous best point.
pub fn realize_ladder(
    g: &GramMatrix,
    d_max: usize,
    restarts: usize,
    seed: u64,
) -> Result<(Realization, SearchReport)> {
    realize_ladder_opts(
        g,
        d_max,
        &MultistartOptions::new(restarts, DEFAULT_MAX_ITERS, seed),
    )
}

/// [`realize_ladder`] with explicit options (iteration budget, traces).
pub fn realize_ladder_opts(
    g: &GramMatrix,
    d_max: usize,
    opts: &MultistartOptions,
) -> Result<(Realization, SearchReport)> {
    if d_max < 1 {
        return Err(Error::InvalidInput("d_max must be at least 1".into()));
    }
    let mut dims = Vec::new();
    let mut d = 1usize;
    while d <= d_max {
        dims.push(d);
        d *= 2;
    }
    if *dims.last().unwrap() != d_max {
        dims.push(d_max);
    }

    let mut history: Vec<(usize, f64)> = Vec::new();
    let mut prev: Option<FactorPoint> = None;
    let mut last: Option<(Realization, SearchReport)> = None;
    for &dim in &dims {
        let warm: Vec<FactorPoint> = match &prev {
            Some(p) => vec![p.lift(dim, dim)?],
            None => vec![],
        };
        let (point, realization, mut report) = realize_from(g, dim, dim, opts, &warm)?;
        history.push((dim, report.best_residual));
        report.ladder = history.clone();
        let success = report.converged;
        prev = Some(point);
        last = Some((realization, report));
        if success {
            break;
        }
    }
    Ok(last.expect("ladder runs at least one rung"))
}

/// Per-matrix PSD margins and the Gram deviation of a claimed realization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n: usize,
    pub d: usize,
    pub min_eigenvalues: Vec<f64>,
    pub psd_ok: bool,
    /// Indices of matrices failing the PSD tolerance.
    pub psd_failures: Vec<usize>,
    /// Row-major n x n deviation (1/d) Tr(A_j A_k) - G_jk.
    pub gram_deviation: Vec<f64>,
    pub gram_residual: f64,
    pub gram_ok: bool,
    pub pass: bool,
    pub tol_psd: f64,
    pub tol_gram: f64,
}

/// Pure check of a realization against a target Gram: no search, no repair.
pub fn verify_realization(
    g: &GramMatrix,
    realization: &Realization,
    tol_psd: f64,
    tol_gram: f64,
) -> Result<VerifyReport> {
    let n = g.n();
    if realization.len() != n {
        return Err(Error::ArityError {
            expected: n,
            actual: realization.len(),
        });
    }
    let mut min_eigenvalues = Vec::with_capacity(n);
    let mut psd_failures = Vec::new();
    for (idx, m) in realization.matrices().iter().enumerate() {
        let min = min_eigenvalue(m)?;
        if min < -tol_psd {
            psd_failures.push(idx);
        }
        min_eigenvalues.push(min);
    }
    let tg = realization.trace_gram();
    let mut deviation = vec![0.0; n * n];
    let mut num = 0.0;
    for idx in 0..n * n {
        let dv = tg[idx] - g.entries()[idx];
        deviation[idx] = dv;
        num += dv * dv;
    }
    let denom = g.frobenius_norm();
    let gram_residual = if denom > 0.0 {
        num.sqrt() / denom
    } else {
        num.sqrt()
    };
    let psd_ok = psd_failures.is_empty();
    let gram_ok = gram_residual <= tol_gram;
    Ok(VerifyReport {
        n,
        d: realization.dim(),
        min_eigenvalues,
        psd_ok,
        psd_failures,
        gram_deviation: deviation,
        gram_residual,
        gram_ok,
        pass: psd_ok && gram_ok,
        tol_psd,
        tol_gram,
    })
}

/// How far a five-matrix candidate is from the structure an exact pentagon
/// realization would be forced into. An exact realization would make the
/// skip-two products vanish, put each neighbor in the span of the skip-two
/// triple, and force the first two matrices collinear — which the pentagon
/// Gram itself forbids, so no candidate can make every defect and the Gram
/// residual small at once.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PentagonDiagnostics {
    /// ||A_k A_{k+2}||_F for k = 0..5.
    pub product_norms: Vec<f64>,
    /// Largest product norm relative to ||A_k||_F ||A_{k+2}||_F.
    pub orthogonality_defect: f64,
    /// Relative least-squares residuals of fitting A_{k+1} and A_{k-1}
    /// in span{A_k, A_{k+2}, A_{k-2}}, ten fits.
    pub span_residuals: Vec<f64>,
    pub span_defect: f64,
    /// min over the sign choice of || A_0/||A_0|| -+ A_1/||A_1|| ||_F.
    pub collinearity_defect: f64,
    /// Relative Gram deviation against the built-in pentagon Gram.
    pub gram_residual: f64,
    /// Largest of the three defects.
    pub max_defect: f64,
    /// Which link of the chain the candidate violates most.
    pub worst_link: String,
}

/// Least-squares fit of `target` in the span of `basis` under the trace
/// inner product; returns the relative Frobenius residual.
fn span_fit_residual(basis: [&HermitianMatrix; 3], target: &HermitianMatrix) -> Result<f64> {
    let mut gram3 = [0.0f64; 9];
    let mut rhs = [0.0f64; 3];
    for i in 0..3 {
        for j in 0..3 {
            gram3[i * 3 + j] = trace_inner_product(basis[i], basis[j])?;
        }
        rhs[i] = trace_inner_product(basis[i], target)?;
    }
    // Pseudo-inverse through the 3x3 eigendecomposition; the basis may be
    // degenerate (repeated matrices), so plain solves are not safe.
    let h = HermitianMatrix::from_real(3, &gram3)?;
    let spec = h.spectral()?;
    let top = spec.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = 1e-12 * top.max(1.0);
    let mut coeffs = [0.0f64; 3];
    for mode in 0..3 {
        let lambda = spec.eigenvalues[mode];
        if lambda <= cutoff {
            continue;
        }
        let mut proj = 0.0;
        for (i, r) in rhs.iter().enumerate() {
            proj += spec.eigenvectors.get(i, mode).re * r;
        }
        let scale = proj / lambda;
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c += scale * spec.eigenvectors.get(i, mode).re;
        }
    }
    let mut fit = target.as_matrix().clone();
    for i in 0..3 {
        fit = fit.sub(&basis[i].as_matrix().scale(Complex64::new(coeffs[i], 0.0)));
    }
    let denom = target.frobenius_norm();
    Ok(if denom > 0.0 {
        fit.frobenius_norm() / denom
    } else {
        fit.frobenius_norm()
    })
}

/// Diagnostics quantifying which part of the forced pentagon structure a
/// five-matrix candidate violates.
pub fn pentagon_psd_diagnostics(realization: &Realization) -> Result<PentagonDiagnostics> {
    if realization.len() != 5 {
        return Err(Error::ArityError {
            expected: 5,
            actual: realization.len(),
        });
    }
    let ms = realization.matrices();
    let norms: Vec<f64> = ms.iter().map(|m| m.frobenius_norm()).collect();

    let mut product_norms = Vec::with_capacity(5);
    let mut orthogonality_defect = 0.0f64;
    for k in 0..5 {
        let other = (k + 2) % 5;
        let prod = ms[k].mul(&ms[other])?.frobenius_norm();
        product_norms.push(prod);
        let scale = norms[k] * norms[other];
        let rel = if scale > 0.0 { prod / scale } else { 0.0 };
        orthogonality_defect = orthogonality_defect.max(rel);
    }

    let mut span_residuals = Vec::with_capacity(10);
    let mut span_defect = 0.0f64;
    for k in 0..5 {
        let basis = [&ms[k], &ms[(k + 2) % 5], &ms[(k + 3) % 5]];
        for target in [&ms[(k + 1) % 5], &ms[(k + 4) % 5]] {
            let res = span_fit_residual(basis, target)?;
            span_residuals.push(res);
            span_defect = span_defect.max(res);
        }
    }

    let collinearity_defect = {
        let (a, b) = (&ms[0], &ms[1]);
        let (na, nb) = (norms[0], norms[1]);
        if na == 0.0 || nb == 0.0 {
            1.0
        } else {
            let ahat = a.scale(1.0 / na);
            let bhat = b.scale(1.0 / nb);
            let minus = ahat.sub(&bhat)?.frobenius_norm();
            let plus = ahat.add(&bhat)?.frobenius_norm();
            minus.min(plus)
        }
    };

    let gram_residual = realization.gram_residual_vs(&gram(&pentagon()))?;

    let (max_defect, worst_link) = [
        (orthogonality_defect, "orthogonality"),
        (span_defect, "span"),
        (collinearity_defect, "collinearity"),
    ]
    .into_iter()
    .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
    .map(|(v, name)| (v, name.to_string()))
    .unwrap();

    Ok(PentagonDiagnostics {
        product_norms,
        orthogonality_defect,
        span_residuals,
        span_defect,
        collinearity_defect,
        gram_residual,
        max_defect,
        worst_link,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configurations::{gram, hexagon, random_nonneg_config};

    #[test]
    fn single_vector_gram_realizes_exactly() {
        let g = GramMatrix::new(1, vec![1.0]).unwrap();
        let (realization, report) = realize(&g, 2, 2, 4, 500, 3).unwrap();
        assert!(report.best_residual < 1e-8, "got {}", report.best_residual);
        assert_eq!(realization.dim(), 2);
        // (1/d) Tr(A^2) = 1.
        let tg = realization.trace_gram();
        assert!((tg[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn positivity_by_construction() {
        let g = gram(&random_nonneg_config(3, 3, 5).unwrap());
        let (realization, _) = realize(&g, 3, 3, 2, 200, 9).unwrap();
        for m in realization.matrices() {
            let min = min_eigenvalue(m).unwrap();
            assert!(min >= -1e-12 * m.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn identity_gram_needs_dimension_two() {
        // Two orthogonal unit vectors cannot be realized by scalars: the
        // ladder must skip d = 1 and land on d = 2.
        let g = GramMatrix::new(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let (realization, report) = realize_ladder(&g, 4, 12, 11).unwrap();
        assert!(report.converged);
        assert_eq!(realization.dim(), 2, "ladder: {:?}", report.ladder);
    }

    #[test]
    fn hexagon_realizes_at_dimension_two() {
        let g = gram(&hexagon());
        let (realization, report) = realize_ladder(&g, 8, 40, 0).unwrap();
        assert!(report.converged, "ladder history {:?}", report.ladder);
        assert!(realization.dim() <= 2, "expected success by d = 2");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = gram(&random_nonneg_config(3, 3, 21).unwrap());
        let mut rng = restart_rng(99, 0);
        let diag: Vec<f64> = (0..3).map(|j| g.get(j, j)).collect();
        let point = FactorPoint::random(3, 3, 2, &diag, &mut rng);
        let grads = realization_gradient(&point, &g);
        let base_factors = point.factors().to_vec();
        let h = 1e-5;
        let mut max_rel = 0.0f64;
        for j in 0..3 {
            for idx in 0..base_factors[j].data().len() {
                for part in 0..2 {
                    let mut plus = base_factors.clone();
                    let mut minus = base_factors.clone();
                    let delta = if part == 0 {
                        Complex64::new(h, 0.0)
                    } else {
                        Complex64::new(0.0, h)
                    };
                    plus[j].data_mut()[idx] += delta;
                    minus[j].data_mut()[idx] -= delta;
                    let fp = realization_objective(&FactorPoint::new(plus).unwrap(), &g);
                    let fm = realization_objective(&FactorPoint::new(minus).unwrap(), &g);
                    let fd = (fp - fm) / (2.0 * h);
                    let analytic = if part == 0 {
                        grads[j].data()[idx].re
                    } else {
                        grads[j].data()[idx].im
                    };
                    let rel = (fd - analytic).abs() / analytic.abs().max(1e-6);
                    max_rel = max_rel.max(rel);
                }
            }
        }
        assert!(max_rel <= 1e-5, "gradient mismatch {max_rel}");
    }

    #[test]
    fn monotone_descent_trace() {
        let g = gram(&hexagon());
        let (_, report) = realize(&g, 2, 2, 1, 300, 4).unwrap();
        for pair in report.residual_trace.windows(2) {
            assert!(pair[1].1 <= pair[0].1 + 1e-15, "trace must not increase");
        }
    }

    #[test]
    fn lift_preserves_trace_gram() {
        let g = gram(&random_nonneg_config(3, 3, 2).unwrap());
        let opts = MultistartOptions::new(3, 300, 8);
        let (point, realization, _) = realize_from(&g, 2, 2, &opts, &[]).unwrap();
        let lifted = point.lift(4, 4).unwrap();
        let lifted_real = Realization::new(lifted.matrices()).unwrap();
        let a = realization.trace_gram();
        let b = lifted_real.trace_gram();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-10, "lift changed the Gram: {x} vs {y}");
        }
    }

    #[test]
    fn monotonicity_in_dimension() {
        let g = gram(&pentagon());
        let opts = MultistartOptions::new(6, 400, 13);
        let (point, _, report_d) = realize_from(&g, 2, 2, &opts, &[]).unwrap();
        let lifted = point.lift(4, 4).unwrap();
        let (_, _, report_2d) = realize_from(&g, 4, 4, &opts, &[lifted]).unwrap();
        assert!(
            report_2d.best_residual <= report_d.best_residual + 1e-9,
            "doubling the dimension may not hurt: {} vs {}",
            report_2d.best_residual,
            report_d.best_residual
        );
    }

    #[test]
    fn verify_detects_negated_matrix() {
        let g = GramMatrix::new(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let a = HermitianMatrix::diagonal(&[2.0_f64.sqrt(), 0.0]);
        let b = HermitianMatrix::diagonal(&[0.0, 2.0_f64.sqrt()]);
        let good = Realization::new(vec![a.clone(), b.clone()]).unwrap();
        let report = verify_realization(&g, &good, 1e-9, 1e-6).unwrap();
        assert!(report.pass, "clean realization verifies: {report:?}");

        let bad = Realization::new(vec![a.scale(-1.0), b]).unwrap();
        let report = verify_realization(&g, &bad, 1e-9, 1e-6).unwrap();
        assert!(!report.psd_ok);
        assert_eq!(report.psd_failures, vec![0]);
    }

    #[test]
    fn verify_flags_perturbed_gram() {
        let a = HermitianMatrix::diagonal(&[2.0_f64.sqrt(), 0.0]);
        let b = HermitianMatrix::diagonal(&[0.0, 2.0_f64.sqrt()]);
        let realization = Realization::new(vec![a, b]).unwrap();
        let g = GramMatrix::new(2, vec![1.0 + 1e-3, 0.0, 0.0, 1.0]).unwrap();
        let report = verify_realization(&g, &realization, 1e-9, 1e-6).unwrap();
        assert!(!report.gram_ok);
        assert!((report.gram_residual - 1e-3 / g.frobenius_norm()).abs() < 1e-6);
    }

    #[test]
    fn diagnostics_on_identity_family() {
        // Five copies of the identity: products have norm sqrt(d), the
        // collinearity defect is zero, and the Gram residual is huge.
        let id = HermitianMatrix::identity(3);
        let realization = Realization::new(vec![id; 5]).unwrap();
        let diag = pentagon_psd_diagnostics(&realization).unwrap();
        for norm in &diag.product_norms {
            assert!((norm - 3.0_f64.sqrt()).abs() < 1e-12);
        }
        assert!(diag.collinearity_defect < 1e-12);
        assert!(diag.span_defect < 1e-9, "identity lies in its own span");
        assert!(diag.gram_residual > 0.1);
    }

    #[test]
    fn diagnostics_on_diagonal_orthogonal_family() {
        // 0/1 diagonal patterns with disjoint skip-two supports: defect (i)
        // is exactly zero but the Gram cannot match.
        let mut mats = Vec::new();
        for k in 0..5usize {
            let mut diag = vec![0.0; 5];
            diag[k] = 1.0;
            diag[(k + 1) % 5] = 1.0;
            mats.push(HermitianMatrix::diagonal(&diag));
        }
        let realization = Realization::new(mats).unwrap();
        let diag = pentagon_psd_diagnostics(&realization).unwrap();
        assert!(
            diag.orthogonality_defect == 0.0,
            "adjacent supports overlap only for neighbors"
        );
        assert!(diag.gram_residual > 1e-2);
    }

    #[test]
    fn arity_errors() {
        let id = HermitianMatrix::identity(2);
        let realization = Realization::new(vec![id; 4]).unwrap();
        assert!(matches!(
            pentagon_psd_diagnostics(&realization),
            Err(Error::ArityError { .. })
        ));
        let g = GramMatrix::new(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            verify_realization(&g, &realization, 1e-9, 1e-6),
            Err(Error::ArityError { .. })
        ));
    }

    #[test]
    fn rejects_negative_gram_entry() {
        let g = GramMatrix::new(2, vec![1.0, -0.5, -0.5, 1.0]).unwrap();
        assert!(matches!(
            realize(&g, 2, 2, 1, 10, 0),
            Err(Error::GramHasNegativeEntry { .. })
        ));
    }
}
