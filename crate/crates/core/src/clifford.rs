//! Isometric linear embedding of R^n into Hermitian d x d matrices,
//! d = 2^floor(n/2), sending the spherical cone
//! `x_1^2 >= x_2^2 + ... + x_n^2` (with `x_1 >= 0`) into the PSD cone.
//!
//! The map splits x = c + v + w into the first coordinate, the next k and
//! the last k (after zero-padding even n up to odd length), and sends it to
//! `c I + E_v + E_v* + i (E_w - E_w*)` with E the creation operator from
//! [`crate::exterior`]. The anticommutation relations make the square of
//! the traceless part `(|v|^2 + |w|^2) I`, so eigenvalues are exactly
//! `c +- sqrt(|v|^2 + |w|^2)` and cone membership maps to positivity.

use num_complex::Complex64;

use crate::configurations::{gram, VectorConfig};
use crate::error::{Error, Result};
use crate::exterior::creation;
use crate::matrix::{ComplexMatrix, HermitianMatrix};
use crate::realize::Realization;

/// Largest supported input dimension (keeps matrices within 4096 x 4096).
pub const INPUT_DIMENSION_CAP: usize = 24;

/// Tolerance used for cone-membership checks on embedding inputs.
pub const CONE_MEMBERSHIP_TOL: f64 = 1e-10;

/// Flag attached to a batch embedding when some input lies outside the cone
/// (the embedding is still computed; positivity is just not guaranteed).
pub const NOT_CONE_GUARANTEED: &str = "NotConeGuaranteed";

/// Matrix dimension 2^floor(n/2) used to embed R^n.
pub fn embedding_dimension(n: usize) -> Result<usize> {
    if n < 1 {
        return Err(Error::InvalidInput(
            "embedding dimension needs n >= 1".into(),
        ));
    }
    if n > INPUT_DIMENSION_CAP {
        return Err(Error::DimensionCap {
            requested: n,
            cap: INPUT_DIMENSION_CAP,
        });
    }
    Ok(1usize << (n / 2))
}

/// The coordinate split x = scalar + v + w after padding to odd length.
/// The first coordinate is the scalar, the next k feed the real creation
/// operator, the last k (including the zero pad, when present) feed the
/// imaginary one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSplit {
    pub scalar: f64,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl ConeSplit {
    pub fn of(x: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidInput("cannot split an empty vector".into()));
        }
        let mut padded = x.to_vec();
        if padded.len().is_multiple_of(2) {
            padded.push(0.0);
        }
        let k = (padded.len() - 1) / 2;
        Ok(Self {
            scalar: padded[0],
            v: padded[1..1 + k].to_vec(),
            w: padded[1 + k..].to_vec(),
        })
    }

    /// Squared norm of the traceless part, |v|^2 + |w|^2.
    pub fn tail_norm_sq(&self) -> f64 {
        self.v.iter().chain(&self.w).map(|x| x * x).sum()
    }
}

/// Membership in the cone `x_1 >= 0, x_1^2 >= x_2^2 + ... + x_n^2`,
/// within `tol` (scaled by the squared norm for the quadratic part).
pub fn in_cone(x: &[f64], tol: f64) -> bool {
    if x.is_empty() {
        return false;
    }
    let c = x[0];
    let rest_sq: f64 = x[1..].iter().map(|v| v * v).sum();
    let norm_sq = c * c + rest_sq;
    c >= -tol && c * c - rest_sq >= -tol * (1.0 + norm_sq)
}

/// The isometric embedding of a single vector.
pub fn embed(x: &[f64]) -> Result<HermitianMatrix> {
    let d = embedding_dimension(x.len())?;
    let split = ConeSplit::of(x)?;
    let k = split.v.len();
    if k == 0 {
        return Ok(HermitianMatrix::identity(1).scale(split.scalar));
    }
    let ev = creation(k, &split.v)?;
    let ew = creation(k, &split.w)?;
    let mut m = ComplexMatrix::identity(d).scale(Complex64::new(split.scalar, 0.0));
    m = m.add(&ev).add(&ev.adjoint());
    let i = Complex64::new(0.0, 1.0);
    m = m.add(&ew.sub(&ew.adjoint()).scale(i));
    HermitianMatrix::new(m)
}

/// Embeds a whole configuration; the result carries the relative deviation
/// of its trace Gram from the Euclidean Gram, and is flagged
/// [`NOT_CONE_GUARANTEED`] when an input sits outside the cone.
pub fn embed_config(xs: &[Vec<f64>]) -> Result<Realization> {
    if xs.is_empty() {
        return Err(Error::InvalidInput("cannot embed an empty batch".into()));
    }
    let n = xs[0].len();
    for x in xs {
        if x.len() != n {
            return Err(Error::DimMismatch {
                left: x.len(),
                right: n,
            });
        }
    }
    let matrices: Vec<HermitianMatrix> = xs.iter().map(|x| embed(x)).collect::<Result<_>>()?;
    let all_in_cone = xs.iter().all(|x| in_cone(x, CONE_MEMBERSHIP_TOL));

    let config = VectorConfig::new(xs.to_vec(), None)?;
    let target = gram(&config);
    let mut realization = Realization::new(matrices)?;
    let residual = realization.gram_residual_vs(&target)?;
    realization = realization.with_gram_residual(residual);
    if !all_in_cone {
        realization = realization.with_flag(NOT_CONE_GUARANTEED);
    }
    Ok(realization)
}
