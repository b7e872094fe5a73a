//! Generalized Gell-Mann generator bases of SU(N) and matrix reshaping
//! operators (vectorize, wrap, realign).
//!
//! The generator ordering interleaves the off-diagonal pairs with the diagonal
//! generators: the pairs `(j,k)`, `j < k`, are visited in the order
//! `(1,2), (1,3), (2,3), (1,4), (2,4), (3,4), ...`, emitting the symmetric
//! generator then the antisymmetric one, and the `d`-th diagonal generator is
//! inserted right after the pairs confined to the first `d+1` basis states.
//! For N = 2 this yields the Pauli matrices, for N = 3 the eight Gell-Mann
//! matrices in their standard order.

use num_complex::Complex64;

use crate::linalg::cr;
use crate::{CMat, CVec, Error, Result};

/// Structural description of one generator; used for fast expectation values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// `E_jk + E_kj`, zero-based indices `j < k`.
    Symmetric(usize, usize),
    /// `-i E_jk + i E_kj`, zero-based indices `j < k`.
    Antisymmetric(usize, usize),
    /// `sqrt(2/(d(d+1))) (sum_{i<=d} E_ii - d E_{d+1,d+1})`, with `d` in `1..N`.
    Diagonal(usize),
}

/// Orthogonal Hermitian traceless basis of su(N), `Tr[g_mu g_nu] = 2 delta`.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    generators: Vec<CMat>,
    kinds: Vec<GeneratorKind>,
}

/// Builds the N^2 - 1 generators of SU(N) in the interleaved order.
pub fn generators(n: usize) -> Result<HermitianBasis> {
    HermitianBasis::new(n)
}

impl HermitianBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let mut kinds = Vec::with_capacity(n * n - 1);
        for k in 1..n {
            for j in 0..k {
                kinds.push(GeneratorKind::Symmetric(j, k));
                kinds.push(GeneratorKind::Antisymmetric(j, k));
            }
            kinds.push(GeneratorKind::Diagonal(k));
        }
        let generators = kinds.iter().map(|kind| kind.matrix(n)).collect();
        Ok(Self {
            dim: n,
            generators,
            kinds,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of generators, N^2 - 1.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Generator `mu` (zero-based).
    pub fn generator(&self, mu: usize) -> &CMat {
        &self.generators[mu]
    }

    pub fn iter(&self) -> impl Iterator<Item = &CMat> {
        self.generators.iter()
    }

    pub fn kind(&self, mu: usize) -> GeneratorKind {
        self.kinds[mu]
    }

    /// Expands real coefficients into the Hermitian matrix `sum_mu c_mu g_mu`.
    pub fn expand(&self, coeffs: &[f64]) -> CMat {
        assert_eq!(coeffs.len(), self.len(), "coefficient length mismatch");
        let mut out = CMat::zeros(self.dim, self.dim);
        for (c, g) in coeffs.iter().zip(&self.generators) {
            if *c != 0.0 {
                out += g * cr(*c);
            }
        }
        out
    }

    /// Bloch vector of an operator: `r_mu = Re Tr[op g_mu]`.
    pub fn bloch_vector(&self, op: &CMat) -> Vec<f64> {
        self.kinds
            .iter()
            .map(|kind| kind.expectation_of_operator(op))
            .collect()
    }

    /// Bloch vector of the pure state `|psi><psi|`; `psi` must be normalized.
    pub fn bloch_of_pure(&self, psi: &CVec) -> Vec<f64> {
        self.kinds
            .iter()
            .map(|kind| kind.expectation_of_pure(psi))
            .collect()
    }
}

impl GeneratorKind {
    fn matrix(self, n: usize) -> CMat {
        let mut m = CMat::zeros(n, n);
        match self {
            GeneratorKind::Symmetric(j, k) => {
                m[(j, k)] = cr(1.0);
                m[(k, j)] = cr(1.0);
            }
            GeneratorKind::Antisymmetric(j, k) => {
                m[(j, k)] = Complex64::new(0.0, -1.0);
                m[(k, j)] = Complex64::new(0.0, 1.0);
            }
            GeneratorKind::Diagonal(d) => {
                let w = (2.0 / (d as f64 * (d as f64 + 1.0))).sqrt();
                for i in 0..d {
                    m[(i, i)] = cr(w);
                }
                m[(d, d)] = cr(-(d as f64) * w);
            }
        }
        m
    }

    /// `Re Tr[op g]` using the sparsity of the generator.
    fn expectation_of_operator(self, op: &CMat) -> f64 {
        match self {
            GeneratorKind::Symmetric(j, k) => (op[(k, j)] + op[(j, k)]).re,
            GeneratorKind::Antisymmetric(j, k) => {
                // Tr[op (-i E_jk + i E_kj)] = -i op_kj + i op_jk
                (Complex64::new(0.0, -1.0) * op[(k, j)] + Complex64::new(0.0, 1.0) * op[(j, k)]).re
            }
            GeneratorKind::Diagonal(d) => {
                let w = (2.0 / (d as f64 * (d as f64 + 1.0))).sqrt();
                let head: f64 = (0..d).map(|i| op[(i, i)].re).sum();
                w * (head - d as f64 * op[(d, d)].re)
            }
        }
    }

    /// `<psi| g |psi>` for a normalized pure state.
    fn expectation_of_pure(self, psi: &CVec) -> f64 {
        match self {
            GeneratorKind::Symmetric(j, k) => 2.0 * (psi[j].conj() * psi[k]).re,
            GeneratorKind::Antisymmetric(j, k) => 2.0 * (psi[j].conj() * psi[k]).im,
            GeneratorKind::Diagonal(d) => {
                let w = (2.0 / (d as f64 * (d as f64 + 1.0))).sqrt();
                let head: f64 = (0..d).map(|i| psi[i].norm_sqr()).sum();
                w * (head - d as f64 * psi[d].norm_sqr())
            }
        }
    }
}

/// Column-stacks a matrix: `(A_11, ..., A_N1, A_12, ..., A_NM)`.
pub fn vectorize(a: &CMat) -> CVec {
    CVec::from_column_slice(a.as_slice())
}

/// Inverse of [`vectorize`]: wraps a vector into a `rows x cols` matrix.
pub fn wrap(v: &CVec, rows: usize, cols: usize) -> Result<CMat> {
    if v.len() != rows * cols {
        return Err(Error::ShapeMismatch(format!(
            "cannot wrap a vector of length {} into {}x{}",
            v.len(),
            rows,
            cols
        )));
    }
    Ok(CMat::from_column_slice(rows, cols, v.as_slice()))
}

/// Realignment of an `(I1 I2) x (I1 I2)` matrix: column `(i, j)` of the output
/// is the vectorization of the `I2 x I2` block `A_ij`, blocks enumerated
/// column-major, giving an `I2^2 x I1^2` matrix.
pub fn realign(a: &CMat, i1: usize, i2: usize) -> Result<CMat> {
    let n = i1 * i2;
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "realign expects a {n}x{n} matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut out = CMat::zeros(i2 * i2, i1 * i1);
    for j in 0..i1 {
        for i in 0..i1 {
            let block = a.view((i * i2, j * i2), (i2, i2));
            let col = j * i1 + i;
            for (idx, z) in block.iter().enumerate() {
                out[(idx, col)] = *z;
            }
        }
    }
    Ok(out)
}

/// Inverse of [`realign`].
pub fn realign_inverse(r: &CMat, i1: usize, i2: usize) -> Result<CMat> {
    if r.nrows() != i2 * i2 || r.ncols() != i1 * i1 {
        return Err(Error::ShapeMismatch(format!(
            "inverse realign expects a {}x{} matrix, got {}x{}",
            i2 * i2,
            i1 * i1,
            r.nrows(),
            r.ncols()
        )));
    }
    let n = i1 * i2;
    let mut out = CMat::zeros(n, n);
    for j in 0..i1 {
        for i in 0..i1 {
            let col = j * i1 + i;
            for q in 0..i2 {
                for p in 0..i2 {
                    out[(i * i2 + p, j * i2 + q)] = r[(q * i2 + p, col)];
                }
            }
        }
    }
    Ok(out)
}
