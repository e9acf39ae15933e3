//! Creation and annihilation operators on the exterior algebra of R^k,
//! realized as explicit 2^k x 2^k matrices, plus a checker for the
//! canonical anticommutation relations.
//!
//! Basis monomials are indexed by k-bit masks: bit i set means the basis
//! vector e_{i+1} appears in the wedge monomial, with indices in ascending
//! order as the canonical form. Masks are enumerated in increasing integer
//! order (mask 0, the scalar 1, comes first), which pins every matrix
//! representation bit-exactly.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{anticommutator, ComplexMatrix};
use crate::search::restart_rng;

/// Largest supported exterior-algebra rank (matrices are 2^k x 2^k).
pub const MAX_RANK: usize = 12;

/// Index of a wedge-monomial basis element of the exterior algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasisIndex(pub usize);

impl FockBasisIndex {
    #[inline]
    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    /// Sign of inserting e_{i+1} into this monomial: (-1)^(number of
    /// occupied slots below i).
    #[inline]
    pub fn insertion_sign(self, i: usize) -> f64 {
        let below = self.0 & ((1usize << i) - 1);
        if below.count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Ascending list of occupied indices (0-based).
    pub fn indices(self) -> Vec<usize> {
        (0..usize::BITS as usize)
            .filter(|&i| self.contains(i))
            .collect()
    }
}

fn check_rank(k: usize, v: &[f64]) -> Result<()> {
    if !(1..=MAX_RANK).contains(&k) {
        return Err(Error::RankOutOfRange { k, max: MAX_RANK });
    }
    if v.len() != k {
        return Err(Error::DimMismatch {
            left: v.len(),
            right: k,
        });
    }
    Ok(())
}

/// Matrix of the wedge map `u -> v /\ u` on the 2^k-dimensional exterior
/// algebra. Entry (S + {i}, S) for i not in S equals `v_i` times the
/// insertion sign; everything else is zero. The result is linear in `v`.
pub fn creation(k: usize, v: &[f64]) -> Result<ComplexMatrix> {
    check_rank(k, v)?;
    let dim = 1usize << k;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for mask in 0..dim {
        let basis = FockBasisIndex(mask);
        for (i, &vi) in v.iter().enumerate() {
            if basis.contains(i) {
                continue;
            }
            let sign = basis.insertion_sign(i);
            m.add_to(mask | (1 << i), mask, Complex64::new(vi * sign, 0.0));
        }
    }
    Ok(m)
}

/// Adjoint of [`creation`]: contraction with `v`.
pub fn annihilation(k: usize, v: &[f64]) -> Result<ComplexMatrix> {
    Ok(creation(k, v)?.adjoint())
}

/// Result of a randomized check of the canonical anticommutation relations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CarReport {
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    /// Largest Frobenius residual over the three identities and all trials.
    pub max_residual: f64,
    /// Largest residual divided by its per-trial tolerance 1e-12 (1 + |v||w|).
    pub max_ratio: f64,
    pub passed: bool,
}

/// Checks, on random real vector pairs, that creation operators
/// anticommute, that annihilation operators anticommute, and that the mixed
/// anticommutator equals `<v, w> I`.
pub fn verify_car(k: usize, trials: usize, seed: u64) -> Result<CarReport> {
    assert!(trials >= 1, "verify_car needs at least one trial");
    if !(1..=MAX_RANK).contains(&k) {
        return Err(Error::RankOutOfRange { k, max: MAX_RANK });
    }
    let dim = 1usize << k;
    let mut rng = restart_rng(seed, 0);
    let mut max_residual = 0.0f64;
    let mut max_ratio = 0.0f64;
    for _ in 0..trials {
        let v: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cv = creation(k, &v)?;
        let cw = creation(k, &w)?;
        let av = cv.adjoint();
        let aw = cw.adjoint();
        let dot: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let scaled_id = ComplexMatrix::identity(dim).scale(Complex64::new(dot, 0.0));

        let r1 = anticommutator(&cv, &cw).frobenius_norm();
        let r2 = anticommutator(&av, &aw).frobenius_norm();
        let r3 = anticommutator(&cv, &aw).sub(&scaled_id).frobenius_norm();
        let worst = r1.max(r2).max(r3);
        let norm_v: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let norm_w: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let tol = 1e-12 * (1.0 + norm_v * norm_w);
        max_residual = max_residual.max(worst);
        max_ratio = max_ratio.max(worst / tol);
    }
    Ok(CarReport {
        k,
        trials,
        seed,
        max_residual,
        max_ratio,
        passed: max_ratio <= 1.0,
    })
}
