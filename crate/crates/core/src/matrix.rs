//! Dense complex matrices, Hermitian matrices and the normalized trace
//! inner product `<A, B> = (1/d) Tr(AB)`.
//!
//! All storage is row-major `Vec<Complex64>`. Matrices are immutable after
//! construction as far as the public API is concerned; operations return new
//! values.

use num_complex::Complex64;

use crate::eigen::{spectral_decomposition, SpectralDecomposition};
use crate::error::{Error, Result};

/// Relative asymmetry above which a matrix is rejected as non-Hermitian.
pub const HERMITIAN_ASYMMETRY_TOL: f64 = 1e-8;

/// Absolute eigenvalue tolerance accepted by [`psd_sqrt`].
pub const PSD_SQRT_TOL: f64 = 1e-8;

/// Hard cap on matrix dimension (`2^12`, the largest exterior-algebra rank).
pub const DIMENSION_CAP: usize = 4096;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::ONE;
        }
        m
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Convenience constructor from rows of (re, im) pairs; used by tests and JSON decoding.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::InvalidInput("ragged matrix rows".into()));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] += v;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        out
    }

    /// Matrix product; panics on inner-dimension mismatch (callers guarantee shape).
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "inner dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = i * rhs.cols;
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::ZERO {
                    continue;
                }
                let rhs_row = k * rhs.cols;
                for j in 0..rhs.cols {
                    out.data[out_row + j] += a * rhs.data[rhs_row + j];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|| M - M* ||_F` for square matrices.
    pub fn asymmetry(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let diff = self.get(r, c) - self.get(c, r).conj();
                acc += diff.norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> Option<(usize, usize)> {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let z = self.get(r, c);
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Some((r, c));
                }
            }
        }
        None
    }
}

/// `ab + ba` for square matrices of equal dimension.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.mul(b).add(&b.mul(a))
}

/// Dense d x d complex Hermitian matrix.
///
/// Construction symmetrizes the input as `(M + M*)/2`, zeroes imaginary
/// parts on the diagonal, and rejects matrices whose relative asymmetry
/// exceeds [`HERMITIAN_ASYMMETRY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimMismatch {
                left: mat.rows(),
                right: mat.cols(),
            });
        }
        if mat.rows() > DIMENSION_CAP {
            return Err(Error::DimensionCap {
                requested: mat.rows(),
                cap: DIMENSION_CAP,
            });
        }
        if let Some((r, c)) = mat.is_finite() {
            return Err(Error::NonFinite { row: r, col: c });
        }
        let scale = mat.frobenius_norm().max(1.0);
        let asymmetry = mat.asymmetry() / scale;
        if asymmetry > HERMITIAN_ASYMMETRY_TOL {
            return Err(Error::NotHermitian {
                asymmetry,
                tol: HERMITIAN_ASYMMETRY_TOL,
            });
        }
        Ok(Self::symmetrize(mat))
    }

    /// Symmetrizes without the asymmetry check. Internal constructors use this
    /// when the input is Hermitian by construction.
    pub(crate) fn symmetrize(mat: ComplexMatrix) -> Self {
        let d = mat.rows();
        let mut out = mat;
        for r in 0..d {
            let diag = out.get(r, r);
            out.set(r, r, Complex64::new(diag.re, 0.0));
            for c in r + 1..d {
                let avg = 0.5 * (out.get(r, c) + out.get(c, r).conj());
                out.set(r, c, avg);
                out.set(c, r, avg.conj());
            }
        }
        Self { mat: out }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim),
        }
    }

    /// Real diagonal matrix.
    pub fn diagonal(entries: &[f64]) -> Self {
        let d = entries.len();
        let mut mat = ComplexMatrix::zeros(d, d);
        for (i, &v) in entries.iter().enumerate() {
            mat.set(i, i, Complex64::new(v, 0.0));
        }
        Self { mat }
    }

    /// Hermitian matrix from a real symmetric array (row-major).
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let data = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(ComplexMatrix::from_data(dim, dim, data)?)
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    #[inline]
    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.mat.get(r, c)
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimMismatch {
                left: self.dim(),
                right: rhs.dim(),
            });
        }
        Ok(Self {
            mat: self.mat.add(&rhs.mat),
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimMismatch {
                left: self.dim(),
                right: rhs.dim(),
            });
        }
        Ok(Self {
            mat: self.mat.sub(&rhs.mat),
        })
    }

    /// Real scaling keeps the matrix Hermitian.
    pub fn scale(&self, factor: f64) -> Self {
        Self {
            mat: self.mat.scale(Complex64::new(factor, 0.0)),
        }
    }

    /// Product of two Hermitian matrices is not Hermitian in general.
    pub fn mul(&self, rhs: &Self) -> Result<ComplexMatrix> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimMismatch {
                left: self.dim(),
                right: rhs.dim(),
            });
        }
        Ok(self.mat.mul(&rhs.mat))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.frobenius_norm()
    }

    pub fn spectral(&self) -> Result<SpectralDecomposition> {
        spectral_decomposition(self)
    }
}

/// `(1/d) Re Tr(ab)`. The trace of a product of Hermitian matrices is real
/// up to rounding; the imaginary part is discarded.
pub fn trace_inner_product(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let d = a.dim();
    if d == 0 {
        return Ok(0.0);
    }
    // Tr(ab) = sum_{jk} a_{jk} b_{kj}; only the real part survives.
    let mut acc = 0.0;
    for j in 0..d {
        for k in 0..d {
            let x = a.entry(j, k);
            let y = b.entry(k, j);
            acc += x.re * y.re - x.im * y.im;
        }
    }
    Ok(acc / d as f64)
}

/// Smallest eigenvalue.
pub fn min_eigenvalue(a: &HermitianMatrix) -> Result<f64> {
    Ok(spectral_decomposition(a)?.eigenvalues[0])
}

/// `true` iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(a: &HermitianMatrix, tol: f64) -> Result<bool> {
    assert!(tol >= 0.0, "PSD tolerance must be nonnegative");
    Ok(min_eigenvalue(a)? >= -tol)
}

/// Positive square root of a PSD matrix.
///
/// Eigenvalues in `[-PSD_SQRT_TOL, 0)` are clamped to zero; anything below
/// that fails with `NotPsd`.
pub fn psd_sqrt(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let spec = spectral_decomposition(a)?;
    let min = spec.eigenvalues[0];
    if min < -PSD_SQRT_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            tol: PSD_SQRT_TOL,
        });
    }
    let roots: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    Ok(spec.reconstruct_with(&roots))
}
