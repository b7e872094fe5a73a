//! Conversions between density matrices and the Bloch representation,
//! partial traces, and local orthogonal maps on Bloch data.
//!
//! A bipartite state decomposes as
//!
//! ```text
//! rho = 1/(NM) 1(x)1 + 1/(2M) a.lambda (x) 1 + 1/(2N) 1 (x) b.sigma
//!       + 1/4 sum_{mu,nu} T_{mu nu} lambda_mu (x) sigma_nu
//! ```
//!
//! with `a_mu = Tr[rho (lambda_mu (x) 1)]`, `b_nu = Tr[rho (1 (x) sigma_nu)]`
//! and `T_{mu nu} = Tr[rho (lambda_mu (x) sigma_nu)]`.

use crate::basis::HermitianBasis;
use crate::linalg::{self, cr};
use crate::{CMat, Error, RMat, RVec, Result};

/// Operators are accepted as states when the smallest eigenvalue is above this.
pub const POSITIVITY_TOL: f64 = -1e-10;
/// Ingestion tolerance on the trace before renormalization.
pub const TRACE_TOL: f64 = 1e-9;
/// Asymmetry above this level is worth surfacing to the user on ingestion.
pub const HERMITICITY_WARN: f64 = 1e-9;

/// Validated density matrix: Hermitian, unit trace, positive semidefinite.
///
/// The stored matrix is symmetrized and trace-normalized on construction, so
/// the Hermiticity and trace invariants hold exactly afterwards.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: CMat,
    dim_a: usize,
    dim_b: usize,
}

/// Hermitian unit-trace operator that may fail positivity (for example the
/// image of a Bloch-space linear map).
#[derive(Debug, Clone)]
pub struct HermitianUnitTrace {
    mat: CMat,
    dim_a: usize,
    dim_b: usize,
}

/// Bloch data of a bipartite state: local vectors `a`, `b` and the
/// correlation matrix `T`.
#[derive(Debug, Clone)]
pub struct BlochForm {
    pub dim_a: usize,
    pub dim_b: usize,
    pub a: RVec,
    pub b: RVec,
    pub t: RMat,
}

fn check_bipartite_shape(mat: &CMat, dim_a: usize, dim_b: usize) -> Result<()> {
    let dim = dim_a * dim_b;
    if dim_a < 1 || dim_b < 1 || dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if mat.nrows() != dim || mat.ncols() != dim {
        return Err(Error::ShapeMismatch(format!(
            "expected a {dim}x{dim} matrix for factor dims ({dim_a}, {dim_b}), got {}x{}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    Ok(())
}

fn symmetrize_unit_trace(mat: CMat) -> Result<CMat> {
    let mut h = (&mat + mat.adjoint()) * cr(0.5);
    let tr = linalg::trace(&h);
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::InvalidTrace(tr.re));
    }
    h /= cr(tr.re);
    Ok(h)
}

impl HermitianUnitTrace {
    /// Ingests an operator, symmetrizing it and normalizing the trace.
    pub fn new(mat: CMat, dim_a: usize, dim_b: usize) -> Result<Self> {
        check_bipartite_shape(&mat, dim_a, dim_b)?;
        Ok(Self {
            mat: symmetrize_unit_trace(mat)?,
            dim_a,
            dim_b,
        })
    }

    /// Single-system operator (factor dims `(n, 1)`).
    pub fn single(mat: CMat) -> Result<Self> {
        let n = mat.nrows();
        Self::new(mat, n, 1)
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    /// Smallest eigenvalue of the operator.
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue_of(&self.mat)
    }

    /// Validates positivity, turning the operator into a [`DensityMatrix`].
    pub fn into_density(self) -> Result<DensityMatrix> {
        let min = self.min_eigenvalue();
        if min < POSITIVITY_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(DensityMatrix {
            mat: self.mat,
            dim_a: self.dim_a,
            dim_b: self.dim_b,
        })
    }
}

impl DensityMatrix {
    /// Ingests and validates a density matrix with factor dims `(dim_a, dim_b)`.
    pub fn new(mat: CMat, dim_a: usize, dim_b: usize) -> Result<Self> {
        HermitianUnitTrace::new(mat, dim_a, dim_b)?.into_density()
    }

    /// Single-system state (factor dims `(n, 1)`).
    pub fn single(mat: CMat) -> Result<Self> {
        let n = mat.nrows();
        Self::new(mat, n, 1)
    }

    /// Maximally mixed state on `dim_a * dim_b` levels.
    pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> Self {
        let dim = dim_a * dim_b;
        Self {
            mat: CMat::identity(dim, dim) * cr(1.0 / dim as f64),
            dim_a,
            dim_b,
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    /// Reinterprets the same matrix with different factor dims.
    pub fn with_dims(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        check_bipartite_shape(&self.mat, dim_a, dim_b)?;
        Ok(Self {
            mat: self.mat.clone(),
            dim_a,
            dim_b,
        })
    }

    pub fn as_unit_trace(&self) -> HermitianUnitTrace {
        HermitianUnitTrace {
            mat: self.mat.clone(),
            dim_a: self.dim_a,
            dim_b: self.dim_b,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue_of(&self.mat)
    }

    /// `Tr[rho^2]`.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Bloch form of the state under its stored factor dims.
    pub fn bloch(&self) -> BlochForm {
        to_bloch(&self.mat, self.dim_a, self.dim_b).expect("dims validated on construction")
    }
}

/// Smallest eigenvalue of a Hermitian operator, with an explicit
/// Hermiticity precondition check.
pub fn min_eigenvalue(mat: &CMat) -> Result<f64> {
    if mat.nrows() != mat.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    let asym = linalg::asymmetry(mat);
    if asym > HERMITICITY_WARN {
        return Err(Error::NotHermitian(asym));
    }
    Ok(linalg::min_eigenvalue_of(mat))
}

/// Extracts the Bloch form of a `dim_a x dim_b` bipartite operator.
pub fn to_bloch(mat: &CMat, dim_a: usize, dim_b: usize) -> Result<BlochForm> {
    check_bipartite_shape(mat, dim_a, dim_b)?;
    if dim_a < 2 || dim_b < 2 {
        return Err(Error::InvalidDimension(dim_a.min(dim_b)));
    }
    let basis_a = HermitianBasis::new(dim_a)?;
    let basis_b = HermitianBasis::new(dim_b)?;

    let rho_a = reduce_a_matrix(mat, dim_a, dim_b);
    let rho_b = reduce_b_matrix(mat, dim_a, dim_b);
    let a = RVec::from_vec(basis_a.bloch_vector(&rho_a));
    let b = RVec::from_vec(basis_b.bloch_vector(&rho_b));

    // T_{mu nu} = Tr[rho (g_mu (x) g_nu)], via the partial contraction
    // K_mu[(p, q)] = sum_{i j} g_mu[j, i] rho[(i, p), (j, q)].
    let mut t = RMat::zeros(basis_a.len(), basis_b.len());
    let mut k_mu = CMat::zeros(dim_b, dim_b);
    for mu in 0..basis_a.len() {
        let g = basis_a.generator(mu);
        for p in 0..dim_b {
            for q in 0..dim_b {
                let mut acc = linalg::C_ZERO;
                for i in 0..dim_a {
                    for j in 0..dim_a {
                        let gji = g[(j, i)];
                        if gji != linalg::C_ZERO {
                            acc += gji * mat[(i * dim_b + p, j * dim_b + q)];
                        }
                    }
                }
                k_mu[(p, q)] = acc;
            }
        }
        for nu in 0..basis_b.len() {
            t[(mu, nu)] = linalg::trace_product_re(&k_mu, basis_b.generator(nu));
        }
    }
    Ok(BlochForm {
        dim_a,
        dim_b,
        a,
        b,
        t,
    })
}

/// Assembles the operator described by a Bloch form. The result is Hermitian
/// with unit trace but may fail positivity; validate separately.
pub fn from_bloch(bf: &BlochForm) -> Result<HermitianUnitTrace> {
    let (n, m) = (bf.dim_a, bf.dim_b);
    let basis_a = HermitianBasis::new(n)?;
    let basis_b = HermitianBasis::new(m)?;
    if bf.a.len() != basis_a.len() || bf.b.len() != basis_b.len() {
        return Err(Error::ShapeMismatch(format!(
            "Bloch vectors of lengths {} and {} do not match dims ({n}, {m})",
            bf.a.len(),
            bf.b.len()
        )));
    }
    if bf.t.nrows() != basis_a.len() || bf.t.ncols() != basis_b.len() {
        return Err(Error::ShapeMismatch(format!(
            "correlation matrix {}x{} does not match dims ({n}, {m})",
            bf.t.nrows(),
            bf.t.ncols()
        )));
    }

    let dim = n * m;
    let id_a = CMat::identity(n, n);
    let id_b = CMat::identity(m, m);
    let mut mat = CMat::identity(dim, dim) * cr(1.0 / dim as f64);
    mat += linalg::kron(&basis_a.expand(bf.a.as_slice()), &id_b) * cr(0.5 / m as f64);
    mat += linalg::kron(&id_a, &basis_b.expand(bf.b.as_slice())) * cr(0.5 / n as f64);
    for mu in 0..basis_a.len() {
        for nu in 0..basis_b.len() {
            let c = bf.t[(mu, nu)];
            if c != 0.0 {
                mat += linalg::kron(basis_a.generator(mu), basis_b.generator(nu)) * cr(0.25 * c);
            }
        }
    }
    HermitianUnitTrace::new(mat, n, m)
}

fn reduce_a_matrix(mat: &CMat, dim_a: usize, dim_b: usize) -> CMat {
    let mut out = CMat::zeros(dim_a, dim_a);
    for i in 0..dim_a {
        for j in 0..dim_a {
            let mut acc = linalg::C_ZERO;
            for p in 0..dim_b {
                acc += mat[(i * dim_b + p, j * dim_b + p)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

fn reduce_b_matrix(mat: &CMat, dim_a: usize, dim_b: usize) -> CMat {
    let mut out = CMat::zeros(dim_b, dim_b);
    for p in 0..dim_b {
        for q in 0..dim_b {
            let mut acc = linalg::C_ZERO;
            for i in 0..dim_a {
                acc += mat[(i * dim_b + p, i * dim_b + q)];
            }
            out[(p, q)] = acc;
        }
    }
    out
}

/// Partial trace over the second factor, `rho_A = Tr_B[rho]`.
pub fn reduce_a(rho: &DensityMatrix) -> DensityMatrix {
    let (n, m) = rho.dims();
    DensityMatrix::single(reduce_a_matrix(rho.matrix(), n, m))
        .expect("partial trace of a state is a state")
}

/// Partial trace over the first factor, `rho_B = Tr_A[rho]`.
pub fn reduce_b(rho: &DensityMatrix) -> DensityMatrix {
    let (n, m) = rho.dims();
    DensityMatrix::single(reduce_b_matrix(rho.matrix(), n, m))
        .expect("partial trace of a state is a state")
}

/// Applies local orthogonal maps on Bloch space: `a' = O_A a`, `b' = O_B b`,
/// `T' = O_A T O_B^T`.
pub fn apply_local_orthogonal(bf: &BlochForm, o_a: &RMat, o_b: &RMat) -> Result<BlochForm> {
    linalg::require_orthogonal(o_a, 1e-10)?;
    linalg::require_orthogonal(o_b, 1e-10)?;
    if o_a.nrows() != bf.a.len() || o_b.nrows() != bf.b.len() {
        return Err(Error::ShapeMismatch(format!(
            "orthogonal maps {}x{} and {}x{} do not match Bloch dims {} and {}",
            o_a.nrows(),
            o_a.ncols(),
            o_b.nrows(),
            o_b.ncols(),
            bf.a.len(),
            bf.b.len()
        )));
    }
    Ok(BlochForm {
        dim_a: bf.dim_a,
        dim_b: bf.dim_b,
        a: o_a * &bf.a,
        b: o_b * &bf.b,
        t: o_a * &bf.t * o_b.transpose(),
    })
}

impl BlochForm {
    /// All-zero Bloch form (the maximally mixed state).
    pub fn zero(dim_a: usize, dim_b: usize) -> Self {
        Self {
            dim_a,
            dim_b,
            a: RVec::zeros(dim_a * dim_a - 1),
            b: RVec::zeros(dim_b * dim_b - 1),
            t: RMat::zeros(dim_a * dim_a - 1, dim_b * dim_b - 1),
        }
    }

    pub fn a_norm(&self) -> f64 {
        self.a.norm()
    }

    pub fn b_norm(&self) -> f64 {
        self.b.norm()
    }

    /// `true` when both marginals are maximally mixed within `tol`.
    pub fn is_normal_form(&self, tol: f64) -> bool {
        self.a_norm() < tol && self.b_norm() < tol
    }
}
