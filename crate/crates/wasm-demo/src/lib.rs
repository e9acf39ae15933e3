//! Browser bindings for the PSD realization toolkit.
//!
//! Three interactive operations, all returning JSON strings so the page
//! stays framework-free: a cone-embedding explorer, the orthant
//! factorization search, and the realization dimension ladder. Everything
//! is seeded and deterministic; no entropy source is required, so the
//! module runs in any wasm environment.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use psdreal::clifford::{embed, in_cone, CONE_MEMBERSHIP_TOL};
use psdreal::configurations::{
    gram, hexagon, pentagon, random_nonneg_config, GramMatrix, VectorConfig,
};
use psdreal::matrix::trace_inner_product;
use psdreal::orthant::{factorize_nonneg_opts, hexagon_orthant_diagnostics};
use psdreal::realize::{pentagon_psd_diagnostics, realize_ladder_opts};
use psdreal::search::MultistartOptions;

#[derive(Serialize)]
struct EmbedResponse {
    x: Vec<f64>,
    in_cone: bool,
    dim: usize,
    /// Row-major [re, im] pairs.
    matrix: Vec<Vec<[f64; 2]>>,
    eigenvalues: Vec<f64>,
    psd: bool,
    /// <phi(x), phi(x)> under (1/d) Tr; equals |x|^2 up to rounding.
    self_inner_product: f64,
    norm_sq: f64,
}

#[derive(Serialize)]
struct ErrorResponse {
    error: String,
}

fn err_json(message: impl std::fmt::Display) -> String {
    serde_json::to_string(&ErrorResponse {
        error: message.to_string(),
    })
    .unwrap()
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap()
}

/// Embeds the vector (c, a, b) from R^3 into a Hermitian 2x2 matrix and
/// reports its spectrum, cone membership and the isometry check.
#[wasm_bindgen]
pub fn embed_point(c: f64, a: f64, b: f64) -> String {
    let x = vec![c, a, b];
    let matrix = match embed(&x) {
        Ok(m) => m,
        Err(e) => return err_json(e),
    };
    let spec = match matrix.spectral() {
        Ok(s) => s,
        Err(e) => return err_json(e),
    };
    let d = matrix.dim();
    let entries = (0..d)
        .map(|r| {
            (0..d)
                .map(|col| {
                    let z = matrix.entry(r, col);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect();
    let self_ip = trace_inner_product(&matrix, &matrix).unwrap();
    let response = EmbedResponse {
        in_cone: in_cone(&x, CONE_MEMBERSHIP_TOL),
        norm_sq: x.iter().map(|v| v * v).sum(),
        x,
        dim: d,
        matrix: entries,
        eigenvalues: spec.eigenvalues.clone(),
        psd: spec.eigenvalues[0] >= -1e-11,
        self_inner_product: self_ip,
    };
    json(&response)
}

fn named_config(name: &str, seed: u64) -> Result<VectorConfig, String> {
    match name {
        "pentagon" => Ok(pentagon()),
        "hexagon" => Ok(hexagon()),
        "random4" => random_nonneg_config(4, 4, seed).map_err(|e| e.to_string()),
        other => Err(format!("unknown configuration '{other}'")),
    }
}

#[derive(Serialize)]
struct ConfigResponse {
    name: String,
    ambient_dim: usize,
    vectors: Vec<Vec<f64>>,
    gram: Vec<Vec<f64>>,
}

/// The built-in configurations the page can draw.
#[wasm_bindgen]
pub fn demo_config(name: &str, seed: u32) -> String {
    let cfg = match named_config(name, seed as u64) {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    let g = gram(&cfg);
    let n = g.n();
    let response = ConfigResponse {
        name: name.to_string(),
        ambient_dim: cfg.ambient_dim(),
        vectors: cfg.vectors().to_vec(),
        gram: (0..n)
            .map(|j| (0..n).map(|k| g.get(j, k)).collect())
            .collect(),
    };
    json(&response)
}

fn gram_of(name: &str, seed: u64) -> Result<GramMatrix, String> {
    Ok(gram(&named_config(name, seed)?))
}

/// Trace thinned to at most ~240 points so the canvas plot stays light.
fn thin(points: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let stride = (points.len() / 240).max(1);
    let mut out: Vec<(usize, f64)> = points.iter().copied().step_by(stride).collect();
    if let (Some(&last), Some(&kept)) = (points.last(), out.last()) {
        if kept != last {
            out.push(last);
        }
    }
    out
}

#[derive(Serialize)]
struct FactorizeResponse {
    config: String,
    inner_dim: usize,
    best_residual: f64,
    converged: bool,
    restarts_run: usize,
    trace: Vec<(usize, f64)>,
    /// Sign-parity diagnostics, present for the hexagon.
    diagnostics: Option<serde_json::Value>,
}

/// Runs the nonnegative-factorization search on a built-in Gram matrix.
#[wasm_bindgen]
pub fn factorize_search(
    name: &str,
    inner_dim: u32,
    restarts: u32,
    max_iters: u32,
    seed: u32,
) -> String {
    let g = match gram_of(name, seed as u64) {
        Ok(g) => g,
        Err(e) => return err_json(e),
    };
    let opts = MultistartOptions::new(restarts as usize, max_iters as usize, seed as u64);
    let (factorization, report) = match factorize_nonneg_opts(&g, inner_dim as usize, &opts) {
        Ok(pair) => pair,
        Err(e) => return err_json(e),
    };
    let diagnostics = (name == "hexagon")
        .then(|| hexagon_orthant_diagnostics(&factorization.columns()).ok())
        .flatten()
        .map(|d| serde_json::to_value(&d).unwrap());
    let response = FactorizeResponse {
        config: name.to_string(),
        inner_dim: inner_dim as usize,
        best_residual: report.best_residual,
        converged: report.converged,
        restarts_run: report.restarts_run,
        trace: thin(&report.residual_trace),
        diagnostics,
    };
    json(&response)
}

#[derive(Serialize)]
struct RealizeResponse {
    config: String,
    best_residual: f64,
    converged: bool,
    dim: usize,
    ladder: Vec<(usize, f64)>,
    trace: Vec<(usize, f64)>,
    /// Contradiction-chain diagnostics, present for the pentagon.
    diagnostics: Option<serde_json::Value>,
}

/// Runs the realization dimension ladder on a built-in Gram matrix.
#[wasm_bindgen]
pub fn realize_search(name: &str, d_max: u32, restarts: u32, max_iters: u32, seed: u32) -> String {
    let g = match gram_of(name, seed as u64) {
        Ok(g) => g,
        Err(e) => return err_json(e),
    };
    let opts = MultistartOptions::new(restarts as usize, max_iters as usize, seed as u64);
    let (realization, report) = match realize_ladder_opts(&g, d_max as usize, &opts) {
        Ok(pair) => pair,
        Err(e) => return err_json(e),
    };
    let diagnostics = (name == "pentagon")
        .then(|| pentagon_psd_diagnostics(&realization).ok())
        .flatten()
        .map(|d| serde_json::to_value(&d).unwrap());
    let response = RealizeResponse {
        config: name.to_string(),
        best_residual: report.best_residual,
        converged: report.converged,
        dim: realization.dim(),
        ladder: report.ladder.clone(),
        trace: thin(&report.residual_trace),
        diagnostics,
    };
    json(&response)
}
