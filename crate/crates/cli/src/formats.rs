//! Versioned on-disk formats: tuple documents, coefficient dumps, and
//! subspace documents. All complex entries are `[re, im]` pairs in row-major
//! order; parse/serialize round trips are lossless and non-finite entries
//! are rejected.

use fockmodel_core::multianalytic::MultiAnalyticOp;
use fockmodel_core::numerics::{cplx, CMatrix, SubspaceBasis, Tolerance};
use fockmodel_core::words::parse_word;
use fockmodel_core::RowContraction;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

fn check_version(v: u32, what: &str) -> Result<(), String> {
    if v != FORMAT_VERSION {
        return Err(format!(
            "{what}: unsupported format_version {v} (expected {FORMAT_VERSION})"
        ));
    }
    Ok(())
}

fn entries_to_matrix(rows: usize, cols: usize, entries: &[[f64; 2]], what: &str) -> Result<CMatrix, String> {
    if entries.len() != rows * cols {
        return Err(format!(
            "{what}: expected {rows}x{cols} = {} entries, got {}",
            rows * cols,
            entries.len()
        ));
    }
    for (k, e) in entries.iter().enumerate() {
        if !e[0].is_finite() || !e[1].is_finite() {
            return Err(format!("{what}: non-finite entry at position {k}"));
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |r, c| {
        let e = entries[r * cols + c];
        cplx(e[0], e[1])
    }))
}

fn matrix_to_entries(m: &CMatrix) -> Vec<[f64; 2]> {
    // Normalize negative zero so equal matrices serialize identically.
    let clean = |x: f64| if x == 0.0 { 0.0 } else { x };
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push([clean(m[(r, c)].re), clean(m[(r, c)].im)]);
        }
    }
    out
}

/// An `n`-tuple of `d x d` complex matrices with optional tolerances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TupleDocument {
    pub format_version: u32,
    pub n: usize,
    pub d: usize,
    /// `n` matrices, each `d*d` row-major `[re, im]` entries.
    pub matrices: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl TupleDocument {
    pub fn matrices(&self) -> Result<Vec<CMatrix>, String> {
        if self.matrices.len() != self.n {
            return Err(format!(
                "tuple: declared n = {} but {} matrices present",
                self.n,
                self.matrices.len()
            ));
        }
        check_version(self.format_version, "tuple")?;
        self.matrices
            .iter()
            .enumerate()
            .map(|(i, e)| entries_to_matrix(self.d, self.d, e, &format!("tuple matrix {i}")))
            .collect()
    }

    /// Tolerance policy: document fields override the CLI default.
    pub fn tolerance(&self, default: Tolerance) -> Result<Tolerance, String> {
        Tolerance::new(
            self.rank_tol.unwrap_or(default.rank_tol),
            self.eq_tol.unwrap_or(default.eq_tol),
        )
        .map_err(|e| e.to_string())
    }

    pub fn to_contraction(&self, default_tol: Tolerance) -> Result<RowContraction, String> {
        let mats = self.matrices()?;
        let tol = self.tolerance(default_tol)?;
        RowContraction::new(mats, tol).map_err(|e| e.to_string())
    }

    pub fn from_matrices(mats: &[CMatrix], label: Option<String>) -> Self {
        TupleDocument {
            format_version: FORMAT_VERSION,
            n: mats.len(),
            d: mats.first().map_or(0, |m| m.nrows()),
            matrices: mats.iter().map(matrix_to_entries).collect(),
            rank_tol: None,
            eq_tol: None,
            label,
        }
    }
}

/// One Fourier coefficient: the word string plus the row-major matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffRecord {
    pub word: String,
    pub matrix: Vec<[f64; 2]>,
}

/// Coefficient dump of a multi-analytic operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffDump {
    pub format_version: u32,
    pub n: u32,
    pub dim_in: usize,
    pub dim_out: usize,
    pub deg: usize,
    /// One record per stored word, in canonical graded-lex order.
    pub coeffs: Vec<CoeffRecord>,
}

impl CoeffDump {
    pub fn to_op(&self) -> Result<MultiAnalyticOp, String> {
        check_version(self.format_version, "coefficient dump")?;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for rec in &self.coeffs {
            let word = parse_word(self.n, &rec.word).map_err(|e| e.to_string())?;
            let m = entries_to_matrix(
                self.dim_out,
                self.dim_in,
                &rec.matrix,
                &format!("coefficient at {}", rec.word),
            )?;
            coeffs.push((word, m));
        }
        MultiAnalyticOp::from_coeffs(self.n, self.dim_in, self.dim_out, coeffs)
            .map_err(|e| e.to_string())
    }

    pub fn from_op(op: &MultiAnalyticOp) -> Self {
        CoeffDump {
            format_version: FORMAT_VERSION,
            n: op.n(),
            dim_in: op.dim_in(),
            dim_out: op.dim_out(),
            deg: op.deg(),
            coeffs: op
                .coeffs()
                .iter()
                .map(|(w, m)| CoeffRecord {
                    word: w.to_string(),
                    matrix: matrix_to_entries(m),
                })
                .collect(),
        }
    }
}

/// A subspace given by a matrix with orthonormal columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceDocument {
    pub format_version: u32,
    pub ambient_dim: usize,
    pub dim: usize,
    /// Row-major `ambient_dim x dim` entries.
    pub basis: Vec<[f64; 2]>,
}

impl SubspaceDocument {
    pub fn to_subspace(&self, tol: &Tolerance) -> Result<SubspaceBasis, String> {
        check_version(self.format_version, "subspace")?;
        let m = entries_to_matrix(self.ambient_dim, self.dim, &self.basis, "subspace basis")?;
        SubspaceBasis::from_orthonormal(m, tol).map_err(|e| e.to_string())
    }

    pub fn from_subspace(s: &SubspaceBasis) -> Self {
        SubspaceDocument {
            format_version: FORMAT_VERSION,
            ambient_dim: s.ambient_dim(),
            dim: s.dim(),
            basis: matrix_to_entries(s.basis()),
        }
    }
}

/// Serializes a matrix for embedding in reports.
pub fn matrix_json(m: &CMatrix) -> serde_json::Value {
    serde_json::json!({
        "rows": m.nrows(),
        "cols": m.ncols(),
        "entries": matrix_to_entries(m),
    })
}
