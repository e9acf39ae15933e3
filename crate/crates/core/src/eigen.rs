//! Spectral decomposition of Hermitian matrices by cyclic Jacobi rotations.
//!
//! Jacobi is quadratically convergent and keeps the accumulated eigenvector
//! matrix unitary to machine precision, which is what the PSD tests and
//! square roots downstream rely on. The matrices in this crate are small
//! (embedding dimensions rarely exceed a few dozen), so the O(d^3) sweeps
//! are not a concern.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, HermitianMatrix};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues ascending; eigenvectors are the columns of a unitary matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    /// `U diag(values) U*` for caller-supplied diagonal values (spectral calculus).
    pub fn reconstruct_with(&self, values: &[f64]) -> HermitianMatrix {
        let d = self.eigenvalues.len();
        assert_eq!(values.len(), d);
        let u = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                let mut acc = Complex64::ZERO;
                for (i, &v) in values.iter().enumerate() {
                    acc += u.get(r, i) * v * u.get(c, i).conj();
                }
                out.set(r, c, acc);
            }
        }
        HermitianMatrix::symmetrize(out)
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(&self.eigenvalues)
    }

    /// Max entrywise deviation of `U* U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.eigenvalues.len();
        let u = &self.eigenvectors;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let mut acc = Complex64::ZERO;
                for k in 0..d {
                    acc += u.get(k, r).conj() * u.get(k, c);
                }
                let expect = if r == c {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                };
                worst = worst.max((acc - expect).norm());
            }
        }
        worst
    }
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn spectral_decomposition(a: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let d = a.dim();
    if d == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: vec![],
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let mut w = a.as_matrix().clone();
    let mut v = ComplexMatrix::identity(d);
    let scale = w.frobenius_norm();
    if scale == 0.0 {
        return Ok(SpectralDecomposition {
            eigenvalues: vec![0.0; d],
            eigenvectors: v,
        });
    }
    let target = f64::EPSILON * scale;
    let mut converged = false;
    let mut off = off_diagonal_norm(&w);
    for _sweep in 0..MAX_SWEEPS {
        if off <= target {
            converged = true;
            break;
        }
        // Rotations below this threshold cannot move the off-norm meaningfully.
        let skip = target / (d * d) as f64;
        for p in 0..d {
            for q in p + 1..d {
                let beta = w.get(p, q);
                let r = beta.norm();
                if r <= skip {
                    continue;
                }
                let phase = beta / r;
                let alpha = w.get(p, p).re;
                let gamma = w.get(q, q).re;
                let tau = (gamma - alpha) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s_phase = phase * (t * c);
                apply_rotation(&mut w, &mut v, p, q, c, s_phase);
            }
        }
        off = off_diagonal_norm(&w);
    }
    if !converged && off > target {
        return Err(Error::SpectralFailure {
            off_norm: off,
            sweeps: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| w.get(i, i).re.partial_cmp(&w.get(j, j).re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| w.get(i, i).re).collect();
    let mut vectors = ComplexMatrix::zeros(d, d);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..d {
            vectors.set(row, col, v.get(row, src));
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}

fn off_diagonal_norm(w: &ComplexMatrix) -> f64 {
    let d = w.rows();
    let mut acc = 0.0;
    for p in 0..d {
        for q in 0..d {
            if p != q {
                acc += w.get(p, q).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Conjugates `w` by the unitary that zeroes entry (p, q) and accumulates it
/// into `v`. `c` is real, `s_phase` carries both the rotation angle and the
/// phase of the eliminated entry.
fn apply_rotation(
    w: &mut ComplexMatrix,
    v: &mut ComplexMatrix,
    p: usize,
    q: usize,
    c: f64,
    s_phase: Complex64,
) {
    let d = w.rows();
    let s_conj = s_phase.conj();
    // Right multiply: columns p and q.
    for i in 0..d {
        let wip = w.get(i, p);
        let wiq = w.get(i, q);
        w.set(i, p, c * wip - s_conj * wiq);
        w.set(i, q, s_phase * wip + c * wiq);
    }
    // Left multiply by the adjoint: rows p and q.
    for j in 0..d {
        let wpj = w.get(p, j);
        let wqj = w.get(q, j);
        w.set(p, j, c * wpj - s_phase * wqj);
        w.set(q, j, s_conj * wpj + c * wqj);
    }
    // The rotation zeroes (p, q) analytically; enforce it and keep the
    // diagonal exactly real so rounding does not accumulate.
    w.set(p, q, Complex64::ZERO);
    w.set(q, p, Complex64::ZERO);
    let dp = w.get(p, p);
    let dq = w.get(q, q);
    w.set(p, p, Complex64::new(dp.re, 0.0));
    w.set(q, q, Complex64::new(dq.re, 0.0));
    // Accumulate eigenvectors.
    for i in 0..d {
        let vip = v.get(i, p);
        let viq = v.get(i, q);
        v.set(i, p, c * vip - s_conj * viq);
        v.set(i, q, s_phase * vip + c * viq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        let mut m = ComplexMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                m.set(
                    r,
                    c,
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                );
            }
        }
        let sym = m.add(&m.adjoint()).scale(Complex64::new(0.5, 0.0));
        HermitianMatrix::new(sym).unwrap()
    }

    #[test]
    fn diagonal_matrix_is_fixed_point() {
        let a = HermitianMatrix::diagonal(&[3.0, -1.0, 2.0]);
        let spec = spectral_decomposition(&a).unwrap();
        assert_eq!(spec.eigenvalues, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_analytic() {
        // [[2, 1-i], [1+i, 2]]: eigenvalues 2 -+ sqrt(2).
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, -1.0)],
            vec![Complex64::new(1.0, 1.0), Complex64::new(2.0, 0.0)],
        ])
        .unwrap();
        let a = HermitianMatrix::new(m).unwrap();
        let spec = spectral_decomposition(&a).unwrap();
        let s = 2.0_f64.sqrt();
        assert!((spec.eigenvalues[0] - (2.0 - s)).abs() < 1e-14);
        assert!((spec.eigenvalues[1] - (2.0 + s)).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_and_unitarity_within_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &d in &[1usize, 2, 3, 5, 8, 16, 32] {
            let a = random_hermitian(d, &mut rng);
            let spec = spectral_decomposition(&a).unwrap();
            let recon = spec.reconstruct();
            let err = recon.as_matrix().sub(a.as_matrix()).frobenius_norm();
            let bound = 1e-10 * a.frobenius_norm().max(1.0);
            assert!(err <= bound, "d={d}: reconstruction error {err} > {bound}");
            assert!(
                spec.unitarity_defect() <= 1e-10,
                "d={d}: unitarity defect {}",
                spec.unitarity_defect()
            );
            for pair in spec.eigenvalues.windows(2) {
                assert!(pair[0] <= pair[1]);
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        // Rank-one projector scaled: eigenvalues {0, 0, 3}.
        let a =
            HermitianMatrix::from_real(3, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let spec = spectral_decomposition(&a).unwrap();
        assert!(spec.eigenvalues[0].abs() < 1e-12);
        assert!(spec.eigenvalues[1].abs() < 1e-12);
        assert!((spec.eigenvalues[2] - 3.0).abs() < 1e-12);
    }
}
