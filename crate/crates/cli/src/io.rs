//! File formats and report serialization.
//!
//! States and decompositions travel as JSON with complex numbers encoded as
//! `[re, im]` pairs and matrices as row-major entry lists. Reports round
//! every float to 12 significant digits so repeated runs produce identical
//! bytes.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use bisep::{CMat, SeparableDecomposition};

/// Process exit codes shared by all subcommands.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILED: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const DIMS: i32 = 3;
    pub const UNPHYSICAL: i32 = 4;
    pub const UNSUPPORTED_RANK: i32 = 5;
}

/// Density matrix on disk: factor dims and a row-major complex entry list.
#[derive(Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub matrix: Vec<[f64; 2]>,
}

/// Explicit decomposition on disk.
#[derive(Debug, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub dims: [usize; 2],
    pub weights: Vec<f64>,
    pub states_a: Vec<Vec<[f64; 2]>>,
    pub states_b: Vec<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bloch_r: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bloch_s: Option<Vec<Vec<f64>>>,
}

fn matrix_to_rows(mat: &CMat) -> Vec<[f64; 2]> {
    let n = mat.nrows();
    let mut out = Vec::with_capacity(n * mat.ncols());
    for i in 0..n {
        for j in 0..mat.ncols() {
            let z = mat[(i, j)];
            out.push([z.re, z.im]);
        }
    }
    out
}

fn rows_to_matrix(entries: &[[f64; 2]], dim: usize) -> CMat {
    CMat::from_fn(dim, dim, |i, j| {
        let [re, im] = entries[i * dim + j];
        Complex64::new(re, im)
    })
}

impl StateFile {
    /// Raw matrix plus dims; Hermiticity and positivity are the caller's
    /// problem (`cmd example` writes boundary states whose smallest
    /// eigenvalue is an exact zero).
    pub fn from_matrix(mat: &CMat, dims: [usize; 2]) -> Self {
        Self {
            dims,
            matrix: matrix_to_rows(mat),
        }
    }

    pub fn matrix(&self) -> Result<CMat, String> {
        let dim = self.dims[0] * self.dims[1];
        if self.dims[0] == 0 || self.dims[1] == 0 {
            return Err(format!("dims {:?} must be positive", self.dims));
        }
        if self.matrix.len() != dim * dim {
            return Err(format!(
                "matrix has {} entries but dims {:?} require {}",
                self.matrix.len(),
                self.dims,
                dim * dim
            ));
        }
        Ok(rows_to_matrix(&self.matrix, dim))
    }
}

impl DecompositionFile {
    pub fn from_decomposition(dec: &SeparableDecomposition) -> Self {
        Self {
            dims: [dec.dim_a, dec.dim_b],
            weights: dec.weights.clone(),
            states_a: dec.states_a.iter().map(matrix_to_rows).collect(),
            states_b: dec.states_b.iter().map(matrix_to_rows).collect(),
            bloch_r: Some(dec.bloch_a.iter().map(|v| v.as_slice().to_vec()).collect()),
            bloch_s: Some(dec.bloch_b.iter().map(|v| v.as_slice().to_vec()).collect()),
        }
    }

    pub fn to_decomposition(&self) -> Result<SeparableDecomposition, String> {
        let [dim_a, dim_b] = self.dims;
        let terms = self.weights.len();
        if self.states_a.len() != terms || self.states_b.len() != terms {
            return Err(format!(
                "{} weights but {} / {} local states",
                terms,
                self.states_a.len(),
                self.states_b.len()
            ));
        }
        let parse_side = |mats: &[Vec<[f64; 2]>], dim: usize| -> Result<Vec<CMat>, String> {
            mats.iter()
                .map(|entries| {
                    if entries.len() != dim * dim {
                        return Err(format!(
                            "local state has {} entries, expected {}",
                            entries.len(),
                            dim * dim
                        ));
                    }
                    Ok(rows_to_matrix(entries, dim))
                })
                .collect()
        };
        let states_a = parse_side(&self.states_a, dim_a)?;
        let states_b = parse_side(&self.states_b, dim_b)?;
        let bloch_of = |mats: &[CMat], dim: usize| -> Vec<bisep::RVec> {
            let basis = bisep::basis::HermitianBasis::new(dim).expect("dim >= 2");
            mats.iter()
                .map(|m| bisep::RVec::from_vec(basis.bloch_vector(m)))
                .collect()
        };
        let bloch_a = match &self.bloch_r {
            Some(rows) if rows.len() == terms => {
                rows.iter().map(|r| bisep::RVec::from_vec(r.clone())).collect()
            }
            _ => bloch_of(&states_a, dim_a),
        };
        let bloch_b = match &self.bloch_s {
            Some(rows) if rows.len() == terms => {
                rows.iter().map(|r| bisep::RVec::from_vec(r.clone())).collect()
            }
            _ => bloch_of(&states_b, dim_b),
        };
        Ok(SeparableDecomposition {
            dim_a,
            dim_b,
            weights: self.weights.clone(),
            bloch_a,
            bloch_b,
            states_a,
            states_b,
        })
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| format!("serialization failed: {e}"))?;
    std::fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Rounds to 12 significant digits for stable report output.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn sig12_vec(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| sig12(x)).collect()
}
