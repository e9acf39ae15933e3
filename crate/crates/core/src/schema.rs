//! JSON wire formats for matrices, configurations, Gram matrices,
//! factorizations and realizations, plus the trace-convention rescaling.
//!
//! Floats round-trip losslessly: serialization uses the shortest decimal
//! representation that parses back to the same double.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::configurations::{GramMatrix, VectorConfig};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, HermitianMatrix};
use crate::orthant::NonnegFactorization;
use crate::realize::Realization;
use crate::search::SearchReport;

/// Which trace inner product a file's matrices are expressed in.
///
/// Internally everything is normalized: `<A, B> = (1/d) Tr(AB)`. A file in
/// the raw convention stores matrices satisfying `Tr(A_j A_k) = G_jk`
/// instead, which differs exactly by the rescaling `A -> A / sqrt(d)` on
/// output and `A -> A * sqrt(d)` on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceConvention {
    #[default]
    Normalized,
    Raw,
}

impl TraceConvention {
    fn output_scale(self, d: usize) -> f64 {
        match self {
            TraceConvention::Normalized => 1.0,
            TraceConvention::Raw => 1.0 / (d as f64).sqrt(),
        }
    }

    fn input_scale(self, d: usize) -> f64 {
        match self {
            TraceConvention::Normalized => 1.0,
            TraceConvention::Raw => (d as f64).sqrt(),
        }
    }
}

impl std::str::FromStr for TraceConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "normalized" => Ok(TraceConvention::Normalized),
            "raw" => Ok(TraceConvention::Raw),
            other => Err(format!(
                "unknown trace convention '{other}' (expected 'normalized' or 'raw')"
            )),
        }
    }
}

impl std::fmt::Display for TraceConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceConvention::Normalized => write!(f, "normalized"),
            TraceConvention::Raw => write!(f, "raw"),
        }
    }
}

/// `{"dim": d, "entries": [[[re, im], ...], ...]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixJson {
    pub fn from_hermitian(m: &HermitianMatrix) -> Self {
        let d = m.dim();
        let entries = (0..d)
            .map(|r| {
                (0..d)
                    .map(|c| {
                        let z = m.entry(r, c);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        Self { dim: d, entries }
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        if self.entries.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "matrix field 'entries' has {} rows, expected dim = {}",
                self.entries.len(),
                self.dim
            )));
        }
        let mut mat = ComplexMatrix::zeros(self.dim, self.dim);
        for (r, row) in self.entries.iter().enumerate() {
            if row.len() != self.dim {
                return Err(Error::InvalidInput(format!(
                    "matrix field 'entries' row {r} has {} columns, expected {}",
                    row.len(),
                    self.dim
                )));
            }
            for (c, &[re, im]) in row.iter().enumerate() {
                mat.set(r, c, Complex64::new(re, im));
            }
        }
        HermitianMatrix::new(mat)
    }
}

/// `{"n": ambient dimension, "vectors": [[x1, ..., xn], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorsJson {
    pub n: usize,
    pub vectors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl VectorsJson {
    pub fn from_config(config: &VectorConfig) -> Self {
        Self {
            n: config.ambient_dim(),
            vectors: config.vectors().to_vec(),
            label: config.label().map(str::to_owned),
        }
    }

    pub fn to_config(&self) -> Result<VectorConfig> {
        for (i, v) in self.vectors.iter().enumerate() {
            if v.len() != self.n {
                return Err(Error::InvalidInput(format!(
                    "field 'vectors[{i}]' has length {}, expected n = {}",
                    v.len(),
                    self.n
                )));
            }
        }
        VectorConfig::new(self.vectors.clone(), self.label.clone())
    }
}

/// `{"n": n, "entries": [[...], ...]}`, symmetric PSD.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramJson {
    pub n: usize,
    pub entries: Vec<Vec<f64>>,
}

impl GramJson {
    pub fn from_gram(g: &GramMatrix) -> Self {
        let n = g.n();
        let entries = (0..n)
            .map(|j| (0..n).map(|k| g.get(j, k)).collect())
            .collect();
        Self { n, entries }
    }

    pub fn to_gram(&self) -> Result<GramMatrix> {
        if self.entries.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "field 'entries' has {} rows, expected n = {}",
                self.entries.len(),
                self.n
            )));
        }
        let mut flat = Vec::with_capacity(self.n * self.n);
        for (j, row) in self.entries.iter().enumerate() {
            if row.len() != self.n {
                return Err(Error::InvalidInput(format!(
                    "field 'entries' row {j} has {} columns, expected {}",
                    row.len(),
                    self.n
                )));
            }
            flat.extend_from_slice(row);
        }
        GramMatrix::new(self.n, flat)
    }
}

/// `{"n": count, "d": dim, "matrices": [...]}` with optional residual,
/// flags and search report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealizationJson {
    pub n: usize,
    pub d: usize,
    pub matrices: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<TraceConvention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<SearchReport>,
}

impl RealizationJson {
    pub fn from_realization(
        realization: &Realization,
        report: Option<&SearchReport>,
        convention: TraceConvention,
    ) -> Self {
        let d = realization.dim();
        let scale = convention.output_scale(d);
        let matrices = realization
            .matrices()
            .iter()
            .map(|m| MatrixJson::from_hermitian(&m.scale(scale)))
            .collect();
        Self {
            n: realization.len(),
            d,
            matrices,
            gram_residual: realization.gram_residual(),
            flags: realization.flags().to_vec(),
            convention: Some(convention),
            report: report.cloned(),
        }
    }

    /// Decodes assuming the file follows `convention` (matrices are
    /// rescaled to the internal normalized convention).
    pub fn to_realization(&self, convention: TraceConvention) -> Result<Realization> {
        if self.matrices.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "field 'matrices' has {} items, expected n = {}",
                self.matrices.len(),
                self.n
            )));
        }
        let scale = convention.input_scale(self.d);
        let mut matrices = Vec::with_capacity(self.n);
        for (i, mj) in self.matrices.iter().enumerate() {
            if mj.dim != self.d {
                return Err(Error::InvalidInput(format!(
                    "field 'matrices[{i}].dim' is {}, expected d = {}",
                    mj.dim, self.d
                )));
            }
            matrices.push(mj.to_hermitian()?.scale(scale));
        }
        let mut realization = Realization::new(matrices)?;
        if let Some(res) = self.gram_residual {
            realization = realization.with_gram_residual(res);
        }
        for flag in &self.flags {
            realization = realization.with_flag(flag.clone());
        }
        Ok(realization)
    }
}

/// Creation operators for the standard basis of R^k, as dumped by
/// `embed --dump-operators`. The matrices are not Hermitian; annihilation
/// operators are their conjugate transposes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorsJson {
    pub k: usize,
    pub d: usize,
    pub creation: Vec<MatrixJson>,
}

/// Encodes an arbitrary (not necessarily Hermitian) square complex matrix.
pub fn matrix_json_from_complex(m: &ComplexMatrix) -> MatrixJson {
    let d = m.rows();
    let entries = (0..d)
        .map(|r| {
            (0..m.cols())
                .map(|c| {
                    let z = m.get(r, c);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect();
    MatrixJson { dim: d, entries }
}

/// `{"m": inner dim, "n": count, "b": [[row], ...], "residual": r}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorizationJson {
    pub m: usize,
    pub n: usize,
    pub b: Vec<Vec<f64>>,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<SearchReport>,
}

impl FactorizationJson {
    pub fn from_factorization(f: &NonnegFactorization, report: Option<&SearchReport>) -> Self {
        let b = (0..f.inner_dim())
            .map(|r| (0..f.n()).map(|c| f.entries()[r * f.n() + c]).collect())
            .collect();
        Self {
            m: f.inner_dim(),
            n: f.n(),
            b,
            residual: f.residual(),
            report: report.cloned(),
        }
    }

    pub fn to_factorization(&self) -> Result<NonnegFactorization> {
        if self.b.len() != self.m {
            return Err(Error::InvalidInput(format!(
                "field 'b' has {} rows, expected m = {}",
                self.b.len(),
                self.m
            )));
        }
        let mut flat = Vec::with_capacity(self.m * self.n);
        for (r, row) in self.b.iter().enumerate() {
            if row.len() != self.n {
                return Err(Error::InvalidInput(format!(
                    "field 'b' row {r} has {} columns, expected n = {}",
                    row.len(),
                    self.n
                )));
            }
            flat.extend_from_slice(row);
        }
        NonnegFactorization::new(self.m, self.n, flat, self.residual)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::embed_config;
    use crate::configurations::{gram, hexagon, pentagon};

    #[test]
    fn matrix_round_trip() {
        let m = crate::clifford::embed(&[2.0, 1.0, 1.0]).unwrap();
        let json = MatrixJson::from_hermitian(&m);
        let text = serde_json::to_string(&json).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        let recon = back.to_hermitian().unwrap();
        assert_eq!(
            recon.as_matrix().sub(m.as_matrix()).frobenius_norm(),
            0.0,
            "JSON floats must round-trip losslessly"
        );
    }

    #[test]
    fn gram_round_trip_is_lossless() {
        let g = gram(&pentagon());
        let json = GramJson::from_gram(&g);
        let text = serde_json::to_string(&json).unwrap();
        let back: GramJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_gram().unwrap().entries(), g.entries());
    }

    #[test]
    fn vectors_round_trip() {
        let cfg = pentagon();
        let json = VectorsJson::from_config(&cfg);
        let text = serde_json::to_string(&json).unwrap();
        let back: VectorsJson = serde_json::from_str(&text).unwrap();
        let cfg2 = back.to_config().unwrap();
        assert_eq!(cfg.vectors(), cfg2.vectors());
        assert_eq!(cfg2.label(), Some("pentagon"));
    }

    #[test]
    fn raw_convention_rescales_to_unnormalized_trace() {
        let realization = embed_config(hexagon().vectors()).unwrap();
        let g = gram(&hexagon());
        let json = RealizationJson::from_realization(&realization, None, TraceConvention::Raw);
        // In the raw file, Tr(A_j A_k) equals the Gram entry directly.
        let mats: Vec<HermitianMatrix> = json
            .matrices
            .iter()
            .map(|m| m.to_hermitian().unwrap())
            .collect();
        let d = json.d;
        for j in 0..json.n {
            for k in 0..json.n {
                let tr: f64 = (0..d)
                    .map(|r| {
                        (0..d)
                            .map(|c| {
                                let x = mats[j].entry(r, c);
                                let y = mats[k].entry(c, r);
                                x.re * y.re - x.im * y.im
                            })
                            .sum::<f64>()
                    })
                    .sum();
                assert!(
                    (tr - g.get(j, k)).abs() <= 1e-10,
                    "raw Tr(A{j} A{k}) = {tr} vs Gram {}",
                    g.get(j, k)
                );
            }
        }
        // Reading the raw file back restores the normalized realization.
        let back = json.to_realization(TraceConvention::Raw).unwrap();
        let residual = back.gram_residual_vs(&g).unwrap();
        assert!(residual <= 1e-10, "round trip residual {residual}");
    }

    #[test]
    fn realization_validates_counts() {
        let realization = embed_config(hexagon().vectors()).unwrap();
        let mut json =
            RealizationJson::from_realization(&realization, None, TraceConvention::Normalized);
        json.n = 5;
        assert!(json.to_realization(TraceConvention::Normalized).is_err());
    }
}
