//! Explicit separable decompositions via correlation-matrix factorization.
//!
//! The correlation matrix is factored as `T = M_rp M_sp^T` where the factor
//! matrices carry scaled rows of an orthogonal sign matrix expressed in the
//! singular bases of `T`: row `mu` of `M_rp` is `alpha_mu` times row `mu` of
//! the sign matrix, so the cross terms cancel by row orthonormality and the
//! diagonal terms reproduce the singular values `tau_mu = alpha_mu beta_mu`.
//! Columns scaled by `1/sqrt(p_i)` are the Bloch vectors of the candidate
//! local states; the decomposition is valid exactly when all of those states
//! are positive semidefinite, which a scale search over the split
//! `tau = alpha * beta` tries to arrange.

use crate::basis::HermitianBasis;
use crate::bloch::DensityMatrix;
use crate::linalg::{self, cr, svd_real};
use crate::optim;
use crate::{CMat, Error, RMat, RVec, Result};

/// Singular values of `T` above this participate in the factorization.
const T_RANK_TOL: f64 = 1e-10;
/// Local states must have eigenvalues above this to count as physical.
const LOCAL_PSD_TOL: f64 = -1e-10;

/// Factor matrices of the correlation matrix together with the sign matrix
/// and the scale split that produced them.
#[derive(Debug, Clone)]
pub struct Factorization {
    /// `(dim_a^2 - 1) x terms` factor whose columns scale to the `r_i`.
    pub m_rp: RMat,
    /// `(dim_b^2 - 1) x terms` factor whose columns scale to the `s_i`.
    pub m_sp: RMat,
    /// Scales on the first-factor side, aligned with the singular values of
    /// `T` (descending); signs encode reflections of the singular pairs.
    pub alpha: Vec<f64>,
    /// Second-factor scales, `beta_mu = tau_mu / alpha_mu`.
    pub beta: Vec<f64>,
    /// Right orthogonal factor of `M_rp` (the sign matrix).
    pub q1: RMat,
    /// Right orthogonal factor of `M_sp` (the sign matrix).
    pub q2: RMat,
    /// Rank of `T`.
    pub rank: usize,
    /// Number of product terms `L`.
    pub terms: usize,
}

/// Weights and local states of an explicit separable combination.
#[derive(Debug, Clone)]
pub struct SeparableDecomposition {
    pub dim_a: usize,
    pub dim_b: usize,
    pub weights: Vec<f64>,
    pub bloch_a: Vec<RVec>,
    pub bloch_b: Vec<RVec>,
    pub states_a: Vec<CMat>,
    pub states_b: Vec<CMat>,
}

impl SeparableDecomposition {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `sum_i p_i rho_i^A (x) rho_i^B`.
    pub fn reconstruct(&self) -> CMat {
        let dim = self.dim_a * self.dim_b;
        let mut out = CMat::zeros(dim, dim);
        for i in 0..self.len() {
            out += linalg::kron(&self.states_a[i], &self.states_b[i]) * cr(self.weights[i]);
        }
        out
    }

    /// Smallest eigenvalue over all local states.
    pub fn min_local_eigenvalue(&self) -> f64 {
        self.states_a
            .iter()
            .chain(self.states_b.iter())
            .map(linalg::min_eigenvalue_of)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Normalized Hadamard-type sign matrix with orthonormal rows and a constant
/// last row `1/sqrt(terms)`; `terms` must be a power of two.
pub fn hadamard_sign_matrix(terms: usize) -> Result<RMat> {
    if terms == 0 || !terms.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(terms));
    }
    let mut h = RMat::from_element(1, 1, 1.0);
    let mut size = 1;
    while size < terms {
        let mut next = RMat::zeros(2 * size, 2 * size);
        for i in 0..size {
            for j in 0..size {
                let v = h[(i, j)];
                next[(i, j)] = v;
                next[(i, j + size)] = v;
                next[(i + size, j)] = v;
                next[(i + size, j + size)] = -v;
            }
        }
        h = next;
        size *= 2;
    }
    // move the constant row (the first) to the end, keep the rest in order
    let scale = 1.0 / (terms as f64).sqrt();
    let mut q = RMat::zeros(terms, terms);
    for i in 1..terms {
        for j in 0..terms {
            q[(i - 1, j)] = h[(i, j)] * scale;
        }
    }
    for j in 0..terms {
        q[(terms - 1, j)] = h[(0, j)] * scale;
    }
    Ok(q)
}

fn term_count(rank: usize) -> usize {
    (rank + 1).next_power_of_two().max(2)
}

struct TSvd {
    u: RMat,
    v: RMat,
    tau: Vec<f64>,
}

fn correlation_svd(t: &RMat) -> TSvd {
    let svd = svd_real(t);
    let rank = svd.sigma.iter().filter(|&&s| s > T_RANK_TOL).count();
    TSvd {
        u: svd.u.columns(0, rank).into_owned(),
        v: svd.v.columns(0, rank).into_owned(),
        tau: svd.sigma.iter().take(rank).copied().collect(),
    }
}

fn factor_from_svd(svd: &TSvd, bloch_a: usize, bloch_b: usize, alpha: &[f64]) -> Result<Factorization> {
    let rank = svd.tau.len();
    if alpha.len() != rank {
        return Err(Error::BadScales(format!(
            "got {} scales for correlation rank {rank}",
            alpha.len()
        )));
    }
    if alpha.iter().any(|a| *a == 0.0 || !a.is_finite()) {
        return Err(Error::BadScales("scales must be finite and nonzero".into()));
    }
    let terms = term_count(rank);
    let q = hadamard_sign_matrix(terms)?;
    let beta: Vec<f64> = svd.tau.iter().zip(alpha).map(|(t, a)| t / a).collect();

    let mut m_rp = RMat::zeros(bloch_a, terms);
    let mut m_sp = RMat::zeros(bloch_b, terms);
    for mu in 0..rank {
        for j in 0..terms {
            let qa = alpha[mu] * q[(mu, j)];
            let qb = beta[mu] * q[(mu, j)];
            for row in 0..bloch_a {
                m_rp[(row, j)] += svd.u[(row, mu)] * qa;
            }
            for row in 0..bloch_b {
                m_sp[(row, j)] += svd.v[(row, mu)] * qb;
            }
        }
    }
    Ok(Factorization {
        m_rp,
        m_sp,
        alpha: alpha.to_vec(),
        beta,
        q1: q.clone(),
        q2: q,
        rank,
        terms,
    })
}

/// Factors `T` into `M_rp M_sp^T` using the given scale split.
///
/// `alpha` must hold one finite nonzero scale per singular value of `T`
/// (descending order); negative entries reflect the corresponding singular
/// pair, which widens the search space of realizable sign patterns.
pub fn factor_correlation(t: &RMat, alpha: &[f64]) -> Result<Factorization> {
    let svd = correlation_svd(t);
    factor_from_svd(&svd, t.nrows(), t.ncols(), alpha)
}

impl Factorization {
    /// Entrywise square of `Q1 Q2^T`; doubly stochastic by construction.
    pub fn orthostochastic_q(&self) -> RMat {
        let q = &self.q1 * self.q2.transpose();
        RMat::from_fn(q.nrows(), q.ncols(), |i, j| q[(i, j)] * q[(i, j)])
    }
}

/// Squared Frobenius norm of the factored correlation matrix versus the
/// orthostochastic pairing of the squared scales; the two sides agree for
/// every factorization produced here.
pub fn orthostochastic_identity(f: &Factorization) -> (f64, f64) {
    let t = &f.m_rp * f.m_sp.transpose();
    let lhs = t.iter().map(|x| x * x).sum();
    let q = f.orthostochastic_q();
    let pad = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; f.terms];
        for (o, x) in out.iter_mut().zip(v) {
            *o = x * x;
        }
        out
    };
    let a2 = pad(&f.alpha);
    let b2 = pad(&f.beta);
    let mut rhs = 0.0;
    for i in 0..f.terms {
        for j in 0..f.terms {
            rhs += a2[i] * q[(i, j)] * b2[j];
        }
    }
    (lhs, rhs)
}

/// Realizes the local states of a factorization with equal weights `1/L`.
///
/// Positivity of the local states is *not* asserted here; run
/// [`validate_decomposition`] on the result.
pub fn build_decomposition(
    f: &Factorization,
    dim_a: usize,
    dim_b: usize,
) -> Result<SeparableDecomposition> {
    let basis_a = HermitianBasis::new(dim_a)?;
    let basis_b = HermitianBasis::new(dim_b)?;
    if f.m_rp.nrows() != basis_a.len() || f.m_sp.nrows() != basis_b.len() {
        return Err(Error::ShapeMismatch(format!(
            "factor rows {}x{} do not match Bloch dims for ({dim_a}, {dim_b})",
            f.m_rp.nrows(),
            f.m_sp.nrows()
        )));
    }
    let terms = f.terms;
    let weight = 1.0 / terms as f64;
    let scale = (terms as f64).sqrt(); // 1 / sqrt(p_i)
    let mut dec = SeparableDecomposition {
        dim_a,
        dim_b,
        weights: vec![weight; terms],
        bloch_a: Vec::with_capacity(terms),
        bloch_b: Vec::with_capacity(terms),
        states_a: Vec::with_capacity(terms),
        states_b: Vec::with_capacity(terms),
    };
    for i in 0..terms {
        let r: RVec = f.m_rp.column(i) * scale;
        let s: RVec = f.m_sp.column(i) * scale;
        let rho_a = CMat::identity(dim_a, dim_a) * cr(1.0 / dim_a as f64)
            + basis_a.expand(r.as_slice()) * cr(0.5);
        let rho_b = CMat::identity(dim_b, dim_b) * cr(1.0 / dim_b as f64)
            + basis_b.expand(s.as_slice()) * cr(0.5);
        dec.bloch_a.push(r);
        dec.bloch_b.push(s);
        dec.states_a.push(rho_a);
        dec.states_b.push(rho_b);
    }
    Ok(dec)
}

/// Checks of an explicit decomposition against a target state.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub dims_ok: bool,
    pub psd_ok: bool,
    pub weights_ok: bool,
    pub min_local_eigenvalue: f64,
    pub reconstruction_error: f64,
    pub tol: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.dims_ok && self.psd_ok && self.weights_ok && self.reconstruction_error <= self.tol
    }
}

/// Validates local positivity, the weight simplex, and the Frobenius
/// reconstruction error against `rho`.
pub fn validate_decomposition(
    rho: &DensityMatrix,
    dec: &SeparableDecomposition,
    tol: f64,
) -> ValidationReport {
    let dims_ok = rho.dims() == (dec.dim_a, dec.dim_b);
    let min_local = if dec.is_empty() {
        f64::INFINITY
    } else {
        dec.min_local_eigenvalue()
    };
    let psd_ok = min_local >= LOCAL_PSD_TOL;
    let sum: f64 = dec.weights.iter().sum();
    let weights_ok = dec.weights.iter().all(|&w| w > 0.0) && (sum - 1.0).abs() <= 1e-12;
    let reconstruction_error = if dims_ok {
        linalg::fro_norm(&(dec.reconstruct() - rho.matrix()))
    } else {
        f64::INFINITY
    };
    ValidationReport {
        dims_ok,
        psd_ok,
        weights_ok,
        min_local_eigenvalue: min_local,
        reconstruction_error,
        tol,
    }
}

/// Mean squared Bloch norms of the decomposition members and their variances
/// about the mean Bloch vectors.
#[derive(Debug, Clone, Copy)]
pub struct Quantumness {
    pub e_a: f64,
    pub e_b: f64,
    pub var_a: f64,
    pub var_b: f64,
}

pub fn quantumness(dec: &SeparableDecomposition) -> Quantumness {
    let side = |blochs: &[RVec], dim: usize| -> (f64, f64) {
        let mut e = 0.0;
        let mut mean = RVec::zeros(dim);
        for (w, r) in dec.weights.iter().zip(blochs) {
            e += w * r.norm_squared();
            mean += r * *w;
        }
        (e, e - mean.norm_squared())
    };
    let bloch_a_dim = dec.dim_a * dec.dim_a - 1;
    let bloch_b_dim = dec.dim_b * dec.dim_b - 1;
    let (e_a, var_a) = side(&dec.bloch_a, bloch_a_dim);
    let (e_b, var_b) = side(&dec.bloch_b, bloch_b_dim);
    Quantumness {
        e_a,
        e_b,
        var_a,
        var_b,
    }
}

/// Searches scale splits `tau = alpha * beta` (including per-pair
/// reflections, encoded as signs of `alpha`) for one whose decomposition has
/// positive local states.
///
/// Returns the first successful scale vector in the deterministic candidate
/// order, or the best infeasibility score (the most favorable minimum local
/// eigenvalue seen) on failure. `budget` caps the number of candidate
/// evaluations, local-refinement steps included.
pub fn scale_split_search(
    t: &RMat,
    dim_a: usize,
    dim_b: usize,
    seed: u64,
    budget: usize,
) -> Result<Vec<f64>> {
    let svd = correlation_svd(t);
    let rank = svd.tau.len();
    if rank == 0 {
        return Ok(Vec::new());
    }
    if rank > 3 {
        return Err(Error::UnsupportedRank(rank));
    }
    let basis_a = HermitianBasis::new(dim_a)?;
    let basis_b = HermitianBasis::new(dim_b)?;
    let terms = term_count(rank);
    let q = hadamard_sign_matrix(terms)?;

    // Minimum local eigenvalue of the decomposition induced by the signed
    // scale vector; >= LOCAL_PSD_TOL means success.
    let score = |alpha: &[f64]| -> f64 {
        if alpha.iter().any(|a| !a.is_finite() || *a == 0.0) {
            return f64::NEG_INFINITY;
        }
        let mut worst = f64::INFINITY;
        for j in 0..terms {
            let mut h_a = CMat::identity(dim_a, dim_a) * cr(1.0 / dim_a as f64);
            let mut h_b = CMat::identity(dim_b, dim_b) * cr(1.0 / dim_b as f64);
            for mu in 0..rank {
                let beta = svd.tau[mu] / alpha[mu];
                let sign = q[(mu, j)] * (terms as f64).sqrt();
                for (row, g) in (0..basis_a.len()).map(|r| (r, svd.u[(r, mu)])) {
                    if g != 0.0 {
                        h_a += basis_a.generator(row) * cr(0.5 * alpha[mu] * sign * g);
                    }
                }
                for (row, g) in (0..basis_b.len()).map(|r| (r, svd.v[(r, mu)])) {
                    if g != 0.0 {
                        h_b += basis_b.generator(row) * cr(0.5 * beta * sign * g);
                    }
                }
            }
            worst = worst.min(linalg::min_eigenvalue_of(&h_a));
            worst = worst.min(linalg::min_eigenvalue_of(&h_b));
            if worst < -1.0 {
                break; // hopeless candidate, no need to finish
            }
        }
        worst
    };

    // Closed-form boundary scales along the direction tau_hat: local states
    // are linear in the overall scale, so the largest feasible scale on each
    // side comes straight from the most negative generator eigenvalue.
    let tau_norm = RVec::from_vec(svd.tau.clone()).norm();
    let tau_hat: Vec<f64> = svd.tau.iter().map(|t| t / tau_norm).collect();
    let boundary_scale = |signs: &[f64], side_a: bool| -> f64 {
        let dim = if side_a { dim_a } else { dim_b };
        let basis = if side_a { &basis_a } else { &basis_b };
        let vecs = if side_a { &svd.u } else { &svd.v };
        let mut worst_slope = 0.0f64;
        for j in 0..terms {
            let mut h = CMat::zeros(dim, dim);
            for mu in 0..rank {
                let sign = signs[mu] * q[(mu, j)] * (terms as f64).sqrt();
                for row in 0..basis.len() {
                    let g = vecs[(row, mu)];
                    if g != 0.0 {
                        h += basis.generator(row) * cr(0.5 * tau_hat[mu] * sign * g);
                    }
                }
            }
            worst_slope = worst_slope.max(-linalg::min_eigenvalue_of(&h));
        }
        if worst_slope <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / (dim as f64 * worst_slope)
        }
    };

    // Candidate menu per reflection class: the balanced split, uniform
    // rescalings of it, both boundary-direction splits, and seeded log-space
    // perturbations.
    let sign_classes: Vec<Vec<f64>> = (0..(1usize << rank))
        .map(|mask| {
            (0..rank)
                .map(|mu| if mask & (1 << mu) != 0 { -1.0 } else { 1.0 })
                .collect()
        })
        .collect();

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for signs in &sign_classes {
        let balanced: Vec<f64> = svd
            .tau
            .iter()
            .zip(signs)
            .map(|(t, s)| s * t.sqrt())
            .collect();
        candidates.push(balanced.clone());
        for c in [0.5, 0.75, 1.5, 2.5] {
            candidates.push(balanced.iter().map(|a| a * c).collect());
        }
        let s_a = boundary_scale(signs, true);
        if s_a.is_finite() {
            for shrink in [1.0 - 1e-9, 0.97, 0.8] {
                candidates.push(
                    tau_hat
                        .iter()
                        .zip(signs)
                        .map(|(h, s)| s * h * s_a * shrink)
                        .collect(),
                );
            }
        }
        let s_b = boundary_scale(signs, false);
        if s_b.is_finite() {
            for shrink in [1.0 - 1e-9, 0.97, 0.8] {
                // beta = s_b * tau_hat  =>  alpha_mu = tau_mu / beta_mu
                candidates.push(
                    svd.tau
                        .iter()
                        .zip(&tau_hat)
                        .zip(signs)
                        .map(|((t, h), s)| s * t / (h * s_b * shrink))
                        .collect(),
                );
            }
        }
        use rand::{RngExt, SeedableRng};
        let class_bits = signs
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, s)| acc | (((*s < 0.0) as u64) << i));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ class_bits);
        for _ in 0..4 {
            candidates.push(
                balanced
                    .iter()
                    .map(|a| {
                        let f: f64 = rng.random_range(-1.2..1.2);
                        a * f.exp2()
                    })
                    .collect(),
            );
        }
    }
    candidates.truncate(budget.max(1));

    let scores = optim::evaluate_starts(candidates.len(), |i| score(&candidates[i]));
    let mut spent = candidates.len();
    if let Some(hit) = scores.iter().position(|&s| s >= LOCAL_PSD_TOL) {
        return Ok(candidates[hit].clone());
    }

    // Coordinate descent in log-magnitude space from the most promising
    // candidates of each reflection class.
    let mut best_score = f64::NEG_INFINITY;
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal));
    for &start_idx in order.iter().take(6) {
        let mut current = candidates[start_idx].clone();
        let mut current_score = scores[start_idx];
        best_score = best_score.max(current_score);
        let mut step = 0.5f64; // log2 step
        while spent < budget && step > 1e-4 {
            let mut improved = false;
            for mu in 0..rank {
                for dir in [step, -step] {
                    if spent >= budget {
                        break;
                    }
                    let mut trial = current.clone();
                    trial[mu] *= dir.exp2();
                    let s = score(&trial);
                    spent += 1;
                    if s > current_score {
                        current = trial;
                        current_score = s;
                        improved = true;
                        if current_score >= LOCAL_PSD_TOL {
                            return Ok(current);
                        }
                    }
                }
            }
            best_score = best_score.max(current_score);
            if !improved {
                step *= 0.5;
            }
        }
        if current_score >= LOCAL_PSD_TOL {
            return Ok(current);
        }
    }
    Err(Error::SearchFailed { best_score })
}
