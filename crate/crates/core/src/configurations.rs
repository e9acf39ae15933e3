//! Built-in vector configurations, random nonnegative-Gram generators, and
//! Gram-matrix utilities.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::HermitianMatrix;
use crate::search::restart_rng;

/// Gram entries with absolute value below this snap to exactly 0.0, so that
/// analytically-orthogonal pairs stay orthogonal downstream.
pub const GRAM_SNAP_TOL: f64 = 1e-14;

/// Symmetry tolerance accepted when constructing a Gram matrix.
pub const GRAM_SYMMETRY_TOL: f64 = 1e-12;

/// PSD tolerance (relative to the top eigenvalue) for Gram matrices.
pub const GRAM_PSD_TOL: f64 = 1e-9;

/// Attempt budget for the rejection sampler in [`random_nonneg_config`].
pub const GENERATION_BUDGET: usize = 1_000_000;

/// Ordered list of real vectors sharing an ambient dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorConfig {
    vectors: Vec<Vec<f64>>,
    ambient_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl VectorConfig {
    pub fn new(vectors: Vec<Vec<f64>>, label: Option<String>) -> Result<Self> {
        let ambient_dim = vectors.first().map_or(0, |v| v.len());
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != ambient_dim {
                return Err(Error::DimMismatch {
                    left: v.len(),
                    right: ambient_dim,
                });
            }
            if let Some(coord) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { row: i, col: coord });
            }
        }
        Ok(Self {
            vectors,
            ambient_dim,
            label,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
}

/// Symmetric PSD matrix of pairwise inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl GramMatrix {
    /// Validates symmetry, finiteness and positive semidefiniteness, then
    /// stores the exactly-symmetrized entries.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} Gram entries for n = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / n,
                col: pos % n,
            });
        }
        let mut sym = entries;
        let scale = sym.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
        for j in 0..n {
            for k in j + 1..n {
                let a = sym[j * n + k];
                let b = sym[k * n + j];
                if (a - b).abs() > GRAM_SYMMETRY_TOL * scale {
                    return Err(Error::InvalidInput(format!(
                        "Gram entries ({j}, {k}) and ({k}, {j}) differ by {:e}",
                        (a - b).abs()
                    )));
                }
                let avg = 0.5 * (a + b);
                sym[j * n + k] = avg;
                sym[k * n + j] = avg;
            }
        }
        let g = Self { n, entries: sym };
        let eigs = g.eigenvalues()?;
        let top = eigs.last().copied().unwrap_or(0.0).max(0.0);
        let min = eigs.first().copied().unwrap_or(0.0);
        if min < -GRAM_PSD_TOL * top.max(1.0) {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                tol: GRAM_PSD_TOL * top.max(1.0),
            });
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.entries[j * self.n + k]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n)
            .map(|j| self.get(j, j))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index and value of the most negative entry, if any entry is below `-tol`.
    pub fn negative_entry(&self, tol: f64) -> Option<(usize, usize, f64)> {
        let mut worst: Option<(usize, usize, f64)> = None;
        for j in 0..self.n {
            for k in 0..self.n {
                let v = self.get(j, k);
                if v < -tol && worst.is_none_or(|(_, _, w)| v < w) {
                    worst = Some((j, k, v));
                }
            }
        }
        worst
    }

    /// Ascending eigenvalues of the underlying real symmetric matrix.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = HermitianMatrix::from_real(self.n, &self.entries)?;
        Ok(h.spectral()?.eigenvalues)
    }
}

/// Five unit-norm-squared `cos(pi/5) + 1` vectors in R^3 whose Gram has
/// strictly positive adjacent entries and exactly zero skip-two entries.
/// No family of PSD matrices reproduces this Gram under the normalized
/// trace inner product, in any dimension; the library treats it as the
/// canonical hard instance for the realization search.
pub fn pentagon() -> VectorConfig {
    let c = (PI / 5.0).cos().sqrt();
    let vectors = (0..5)
        .map(|k| {
            let angle = 2.0 * PI * k as f64 / 5.0;
            vec![c, angle.cos(), angle.sin()]
        })
        .collect();
    VectorConfig::new(vectors, Some("pentagon".into())).expect("pentagon construction")
}

/// Six vectors on the boundary of the cone `x1^2 >= x2^2 + x3^2` in R^3.
/// Their Gram is matrix-realizable (the cone embedding does it at dimension
/// two) but provably admits no entrywise-nonnegative factorization, making
/// it the canonical hard instance for the orthant search. Opposite vectors
/// satisfy `v_k + v_{k+3} = (2, 0, 0)` exactly.
pub fn hexagon() -> VectorConfig {
    let mut vectors: Vec<Vec<f64>> = (0..3)
        .map(|k| {
            let angle = 2.0 * PI * k as f64 / 6.0;
            let (sin, cos) = angle.sin_cos();
            // sin(0) is exactly zero; keep tiny trig residue out of the data.
            let snap = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
            vec![1.0, snap(cos), snap(sin)]
        })
        .collect();
    for k in 0..3 {
        let v = &vectors[k];
        vectors.push(vec![1.0, -v[1], -v[2]]);
    }
    VectorConfig::new(vectors, Some("hexagon".into())).expect("hexagon construction")
}

/// Euclidean Gram matrix of a configuration, with entries below
/// [`GRAM_SNAP_TOL`] snapped to exactly zero.
pub fn gram(config: &VectorConfig) -> GramMatrix {
    let n = config.len();
    let mut entries = vec![0.0; n * n];
    for j in 0..n {
        for k in j..n {
            let dot: f64 = config.vectors()[j]
                .iter()
                .zip(&config.vectors()[k])
                .map(|(a, b)| a * b)
                .sum();
            let snapped = if dot.abs() < GRAM_SNAP_TOL { 0.0 } else { dot };
            entries[j * n + k] = snapped;
            entries[k * n + j] = snapped;
        }
    }
    GramMatrix::new(n, entries).expect("Gram of a real configuration is PSD")
}

/// `n` unit vectors in R^m with pairwise nonnegative inner products, by
/// rejection sampling on the sphere. Deterministic per seed.
pub fn random_nonneg_config(n: usize, m: usize, seed: u64) -> Result<VectorConfig> {
    if n < 1 || m < 1 {
        return Err(Error::InvalidInput(
            "random_nonneg_config needs n >= 1 and m >= 1".into(),
        ));
    }
    let mut rng = restart_rng(seed, 0);
    let mut accepted: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while accepted.len() < n {
        if attempts >= GENERATION_BUDGET {
            return Err(Error::GenerationFailure {
                budget: GENERATION_BUDGET,
            });
        }
        attempts += 1;
        let candidate = random_unit_vector(m, &mut rng);
        if accepted
            .iter()
            .all(|v| v.iter().zip(&candidate).map(|(a, b)| a * b).sum::<f64>() >= 0.0)
        {
            accepted.push(candidate);
        }
    }
    VectorConfig::new(accepted, None)
}

fn random_unit_vector(m: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Recovers a configuration from its Gram matrix with ambient dimension
/// equal to the numerical rank. Eigenvalues in `[-1e-9, 0)` are clamped to
/// zero; the rank cutoff is `1e-9` times the top eigenvalue.
pub fn vectors_from_gram(g: &GramMatrix) -> Result<VectorConfig> {
    let n = g.n();
    let h = HermitianMatrix::from_real(n, g.entries())?;
    let spec = h.spectral()?;
    let top = spec.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    if let Some(&min) = spec.eigenvalues.first() {
        if min < -GRAM_PSD_TOL * top.max(1.0) {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                tol: GRAM_PSD_TOL * top.max(1.0),
            });
        }
    }
    // Columns with eigenvalues above the rank cutoff, largest first.
    let cutoff = GRAM_PSD_TOL * top;
    let cols: Vec<usize> = (0..n)
        .rev()
        .filter(|&i| spec.eigenvalues[i] > cutoff)
        .collect();
    let rank = cols.len().max(1);
    let mut vectors = vec![vec![0.0; rank]; n];
    for (j, &col) in cols.iter().enumerate() {
        let root = spec.eigenvalues[col].max(0.0).sqrt();
        for (i, vec_i) in vectors.iter_mut().enumerate() {
            // Eigenvectors of a real symmetric matrix may carry a residual
            // imaginary part from the complex solver; only the real part is
            // meaningful.
            vec_i[j] = root * spec.eigenvectors.get(i, col).re;
        }
    }
    VectorConfig::new(vectors, None)
}
