//! Small dense linear-algebra helpers shared by the other modules.
//!
//! Matrices here never exceed a few dozen rows, so the spectral routines are
//! plain Jacobi iterations: cyclic complex Jacobi for Hermitian
//! eigendecompositions and one-sided Jacobi for real singular values. Both
//! converge quadratically at these sizes and, unlike shifted-QR codes, have
//! no deflation edge cases on exactly rank-deficient inputs.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{CMat, Error, RMat, RVec, Result};

/// Complex zero shorthand.
pub(crate) const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Complex identity matrix.
pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Kronecker product `a (x) b` with the usual composite index
/// `(i, p) -> i * b.nrows() + p`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Largest absolute deviation from Hermitian symmetry, `max |A - A^dag|`.
pub fn asymmetry(a: &CMat) -> f64 {
    let adj = a.adjoint();
    (a - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Trace of a complex matrix.
pub fn trace(a: &CMat) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Frobenius norm of a complex matrix.
pub fn fro_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Real part of `Tr[a * b]`, evaluated without forming the product.
pub fn trace_product_re(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    let mut s = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let z = a[(i, j)] * b[(j, i)];
            s += z.re;
        }
    }
    s
}

const JACOBI_SWEEPS: usize = 64;

/// Eigenvalues and eigenvectors of a Hermitian matrix, sorted descending.
///
/// Returns `(values, vectors)` where column `k` of `vectors` is the
/// eigenvector for `values[k]`. The input is symmetrized before the solve so
/// tiny asymmetries cannot skew the decomposition.
pub fn hermitian_eigen(a: &CMat) -> (RVec, CMat) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut h = (a + a.adjoint()) * cr(0.5);
    let mut v = CMat::identity(n, n);
    let scale = h.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    let tol = scale * 1e-15;

    for _ in 0..JACOBI_SWEEPS {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(h[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let hpq = h[(p, q)];
                let r = hpq.norm();
                if r <= tol {
                    continue;
                }
                // phase that makes the pivot real, then a real rotation
                let phase = hpq / cr(r);
                let app = h[(p, p)].re;
                let aqq = h[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // unitary columns: U e_p = c e_p - s conj(phase) e_q,
                //                  U e_q = s phase e_p + c e_q
                let sp = cr(s) * phase;
                let spc = sp.conj();
                for k in 0..n {
                    let hp = h[(k, p)];
                    let hq = h[(k, q)];
                    h[(k, p)] = hp * cr(c) - hq * spc;
                    h[(k, q)] = hp * sp + hq * cr(c);
                }
                for k in 0..n {
                    let hp = h[(p, k)];
                    let hq = h[(q, k)];
                    h[(p, k)] = hp * cr(c) - hq * sp;
                    h[(q, k)] = hp * spc + hq * cr(c);
                }
                for k in 0..n {
                    let vp = v[(k, p)];
                    let vq = v[(k, q)];
                    v[(k, p)] = vp * cr(c) - vq * spc;
                    v[(k, q)] = vp * sp + vq * cr(c);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        h[(j, j)]
            .re
            .partial_cmp(&h[(i, i)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = RVec::from_iterator(n, order.iter().map(|&k| h[(k, k)].re));
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue_of(a: &CMat) -> f64 {
    let (vals, _) = hermitian_eigen(a);
    vals[vals.len() - 1]
}

/// Singular values of a complex matrix (descending), via the Hermitian
/// eigenvalues of `A^dag A`.
pub fn singular_values_complex(a: &CMat) -> Vec<f64> {
    let gram = a.adjoint() * a;
    let (vals, _) = hermitian_eigen(&gram);
    vals.iter().map(|&v| v.max(0.0).sqrt()).collect()
}

/// Hermitian inverse square root via spectral decomposition.
///
/// Eigenvalues below `floor` are treated as singular and rejected.
pub fn inv_sqrt_hermitian(a: &CMat, floor: f64) -> Result<CMat> {
    let (vals, vecs) = hermitian_eigen(a);
    if vals.iter().any(|&v| v <= floor) {
        return Err(Error::RankDeficient {
            rank: vals.iter().filter(|&&v| v > floor).count(),
            dim: vals.len(),
        });
    }
    let d = DMatrix::from_diagonal(&vals.map(|v| cr(1.0 / v.sqrt())));
    Ok(&vecs * d * vecs.adjoint())
}

/// Deterministic thin SVD of a real matrix via one-sided Jacobi.
///
/// Singular values come back descending; ties are broken by lexicographic
/// comparison of the left singular vectors, and each left vector is oriented
/// so that its first component of nonnegligible magnitude is positive (the
/// right vector is flipped along with it). Columns whose singular value is
/// numerically zero carry zero vectors rather than an arbitrary basis of the
/// null space.
pub struct RealSvd {
    /// Left singular vectors, one column per singular value.
    pub u: RMat,
    /// Right singular vectors, one column per singular value.
    pub v: RMat,
    /// Singular values, descending.
    pub sigma: RVec,
}

pub fn svd_real(t: &RMat) -> RealSvd {
    let rows = t.nrows();
    let cols = t.ncols();
    let k = rows.min(cols);
    let mut w = t.clone();
    let mut v = RMat::identity(cols, cols);
    let scale = t.iter().map(|x| x.abs()).fold(1e-300, f64::max);

    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let mut a = 0.0;
                let mut b = 0.0;
                let mut c = 0.0;
                for r in 0..rows {
                    let wi = w[(r, i)];
                    let wj = w[(r, j)];
                    a += wi * wi;
                    b += wj * wj;
                    c += wi * wj;
                }
                if c.abs() <= 1e-15 * (a * b).sqrt() || c.abs() < 1e-280 {
                    continue;
                }
                let tau = (b - a) / (2.0 * c);
                let tt = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + tt * tt).sqrt();
                let sn = cs * tt;
                for r in 0..rows {
                    let wi = w[(r, i)];
                    let wj = w[(r, j)];
                    w[(r, i)] = cs * wi - sn * wj;
                    w[(r, j)] = sn * wi + cs * wj;
                }
                for r in 0..cols {
                    let vi = v[(r, i)];
                    let vj = v[(r, j)];
                    v[(r, i)] = cs * vi - sn * vj;
                    v[(r, j)] = sn * vi + cs * vj;
                }
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    // column norms are the singular values; sort descending with a
    // lexicographic tie break on the left vectors
    let mut triplets: Vec<(f64, RVec, RVec)> = (0..cols)
        .map(|j| {
            let col = w.column(j).clone_owned();
            let sigma = col.norm();
            let u = if sigma > scale * 1e-14 {
                col / sigma
            } else {
                RVec::zeros(rows)
            };
            (sigma, u, v.column(j).clone_owned())
        })
        .collect();
    triplets.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                x.1.iter()
                    .zip(y.1.iter())
                    .find_map(|(a, b)| a.partial_cmp(b).filter(|o| o.is_ne()))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    triplets.truncate(k);

    let mut u = RMat::zeros(rows, k);
    let mut vv = RMat::zeros(cols, k);
    let mut sigma = RVec::zeros(k);
    for (dst, (s, mut ucol, mut vcol)) in triplets.into_iter().enumerate() {
        let flip = ucol
            .iter()
            .find(|x| x.abs() > 1e-12)
            .map(|&x| x < 0.0)
            .unwrap_or(false);
        if flip {
            ucol.neg_mut();
            vcol.neg_mut();
        }
        sigma[dst] = s;
        u.set_column(dst, &ucol);
        vv.set_column(dst, &vcol);
    }
    RealSvd { u, v: vv, sigma }
}

/// Largest deviation of `O^T O` from the identity.
pub fn orthogonality_defect(o: &RMat) -> f64 {
    let g = o.transpose() * o;
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - expect).abs());
        }
    }
    worst
}

/// Checks that `o` is square and orthogonal within `tol`.
pub fn require_orthogonal(o: &RMat, tol: f64) -> Result<()> {
    if o.nrows() != o.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "orthogonal map must be square, got {}x{}",
            o.nrows(),
            o.ncols()
        )));
    }
    let defect = orthogonality_defect(o);
    if defect > tol {
        return Err(Error::NotOrthogonal(defect));
    }
    Ok(())
}
