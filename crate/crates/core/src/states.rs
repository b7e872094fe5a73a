//! Constructors for the example state families and seeded random generators.
//!
//! The family constructors return [`HermitianUnitTrace`] because some
//! parameter choices leave the physical region; callers validate positivity
//! where needed. All generators are deterministic for a fixed seed.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::HermitianBasis;
use crate::bloch::{from_bloch, BlochForm, DensityMatrix, HermitianUnitTrace};
use crate::decompose::SeparableDecomposition;
use crate::linalg::{cr, kron, trace};
use crate::{CMat, RMat, RVec, Result};

/// The three example families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// 2 x 4 state correlating the Pauli vector with `(lambda_1, lambda_13, lambda_3)`.
    Example2x4,
    /// 3 x 3 state with diagonal correlations on `(lambda_1, lambda_2, lambda_3)`.
    Octahedral,
    /// 3 x 3 state correlating `(lambda_1, lambda_2, lambda_3)` with `(lambda_1, lambda_4, lambda_6)`.
    Tetrahedral,
}

/// Family selector plus its correlation strengths.
#[derive(Debug, Clone, Copy)]
pub struct FamilyParams {
    pub family: Family,
    pub t: [f64; 3],
}

impl FamilyParams {
    pub fn build(&self) -> HermitianUnitTrace {
        let [t1, t2, t3] = self.t;
        match self.family {
            Family::Example2x4 => example_2x4(t1, t2, t3),
            Family::Octahedral => octahedral(t1, t2, t3),
            Family::Tetrahedral => tetrahedral(t1, t2, t3),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self.family {
            Family::Example2x4 => (2, 4),
            Family::Octahedral | Family::Tetrahedral => (3, 3),
        }
    }
}

fn family_operator(dim_a: usize, dim_b: usize, entries: &[(usize, usize, f64)]) -> HermitianUnitTrace {
    let mut bf = BlochForm::zero(dim_a, dim_b);
    for &(mu, nu, t) in entries {
        bf.t[(mu, nu)] = t;
    }
    from_bloch(&bf).expect("family Bloch form is consistent by construction")
}

/// `1/8 1(x)1 + 1/4 (t1 s1(x)l1 + t2 s2(x)l13 + t3 s3(x)l3)` on 2 x 4.
pub fn example_2x4(t1: f64, t2: f64, t3: f64) -> HermitianUnitTrace {
    family_operator(2, 4, &[(0, 0, t1), (1, 12, t2), (2, 2, t3)])
}

/// `1/9 1(x)1 + 1/4 (t1 l1(x)l1 + t2 l2(x)l2 + t3 l3(x)l3)` on 3 x 3.
pub fn octahedral(t1: f64, t2: f64, t3: f64) -> HermitianUnitTrace {
    family_operator(3, 3, &[(0, 0, t1), (1, 1, t2), (2, 2, t3)])
}

/// `1/9 1(x)1 + 1/4 (t1 l1(x)l1 + t2 l2(x)l4 + t3 l3(x)l6)` on 3 x 3.
pub fn tetrahedral(t1: f64, t2: f64, t3: f64) -> HermitianUnitTrace {
    family_operator(3, 3, &[(0, 0, t1), (1, 3, t2), (2, 5, t3)])
}

/// Standard normal sample via the Box-Muller transform.
pub(crate) fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn complex_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        num_complex::Complex64::new(gaussian(rng), gaussian(rng))
    })
}

/// Random full-rank density matrix `G G^dag / Tr`, seeded.
pub fn random_density(dim: usize, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_with(dim, &mut rng)
}

/// Same as [`random_density`] but drawing from a caller-owned stream.
pub fn random_density_with(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = complex_gaussian(rng, dim, dim);
    let mut m = &g * g.adjoint();
    let tr = trace(&m).re;
    m /= cr(tr);
    DensityMatrix::single(m).expect("G G^dag / Tr is a state")
}

/// Random pure state vector, seeded from a caller-owned stream.
pub fn random_pure_with(dim: usize, rng: &mut ChaCha8Rng) -> crate::CVec {
    let mut psi = crate::CVec::from_fn(dim, |_, _| {
        num_complex::Complex64::new(gaussian(rng), gaussian(rng))
    });
    psi /= cr(psi.norm());
    psi
}

/// Random orthogonal matrix from the QR factorization of a Gaussian sample.
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> RMat {
    let g = RMat::from_fn(n, n, |_, _| gaussian(rng));
    g.qr().q()
}

/// Random separable state as a convex mixture of `terms` random product
/// states, returned together with its generating decomposition.
pub fn random_separable(
    dim_a: usize,
    dim_b: usize,
    terms: usize,
    seed: u64,
) -> Result<(DensityMatrix, SeparableDecomposition)> {
    assert!(terms >= 1, "need at least one product term");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis_a = HermitianBasis::new(dim_a)?;
    let basis_b = HermitianBasis::new(dim_b)?;

    // Dirichlet(1) weights via normalized exponentials
    let mut weights: Vec<f64> = (0..terms)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }

    let mut states_a = Vec::with_capacity(terms);
    let mut states_b = Vec::with_capacity(terms);
    let mut bloch_a = Vec::with_capacity(terms);
    let mut bloch_b = Vec::with_capacity(terms);
    let dim = dim_a * dim_b;
    let mut mat = CMat::zeros(dim, dim);
    for &weight in &weights {
        let ra = random_density_with(dim_a, &mut rng);
        let rb = random_density_with(dim_b, &mut rng);
        mat += kron(ra.matrix(), rb.matrix()) * cr(weight);
        bloch_a.push(RVec::from_vec(basis_a.bloch_vector(ra.matrix())));
        bloch_b.push(RVec::from_vec(basis_b.bloch_vector(rb.matrix())));
        states_a.push(ra.matrix().clone());
        states_b.push(rb.matrix().clone());
    }
    let rho = DensityMatrix::new(mat, dim_a, dim_b)?;
    let dec = SeparableDecomposition {
        dim_a,
        dim_b,
        weights,
        bloch_a,
        bloch_b,
        states_a,
        states_b,
    };
    Ok((rho, dec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::validate_decomposition;
    use crate::linalg::fro_norm;

    #[test]
    fn zero_parameters_give_maximally_mixed() {
        for family in [Family::Example2x4, Family::Octahedral, Family::Tetrahedral] {
            let params = FamilyParams { family, t: [0.0; 3] };
            let op = params.build();
            let dim = op.dim();
            let expect = CMat::identity(dim, dim) * cr(1.0 / dim as f64);
            assert!(fro_norm(&(op.matrix() - expect)) < 1e-15);
        }
    }

    #[test]
    fn example_2x4_boundary_points() {
        // boundary of (|t1| + |t3|)^2 <= 1/4
        let op = example_2x4(0.25, 0.0, 0.25);
        assert!(op.min_eigenvalue().abs() < 1e-12);
        // boundary of t2^2 <= 1/4
        let op = example_2x4(0.0, 0.5, 0.0);
        assert!(op.min_eigenvalue().abs() < 1e-12);
        // inside
        assert!(example_2x4(0.1, 0.2, 0.1).min_eigenvalue() > 0.0);
    }

    #[test]
    fn example_2x4_positivity_region_matches_closed_form() {
        // The generator indexed 13 is pinned by requiring the numeric physical
        // region to match t2^2 <= 1/4 and (|t1| + |t3|)^2 <= 1/4.
        let grid = [-0.3, -0.2, -0.05, 0.0, 0.1, 0.22, 0.3, 0.45, 0.55];
        for &t1 in &grid {
            for &t2 in &grid {
                for &t3 in &grid {
                    let physical = example_2x4(t1, t2, t3).min_eigenvalue() >= -1e-10;
                    let closed = t2 * t2 <= 0.25 + 1e-12
                        && (t1.abs() + t3.abs()).powi(2) <= 0.25 + 1e-12;
                    assert_eq!(physical, closed, "t = ({t1}, {t2}, {t3})");
                }
            }
        }
    }

    #[test]
    fn example_2x4_has_maximally_mixed_marginals() {
        use crate::bloch::{reduce_a, reduce_b};
        let rho = example_2x4(0.1, 0.2, 0.1).into_density().unwrap();
        let half = CMat::identity(2, 2) * cr(0.5);
        let quarter = CMat::identity(4, 4) * cr(0.25);
        assert!(fro_norm(&(reduce_a(&rho).matrix() - half)) < 1e-14);
        assert!(fro_norm(&(reduce_b(&rho).matrix() - quarter)) < 1e-14);
    }

    #[test]
    fn octahedral_correlations_sit_on_the_diagonal_block() {
        let op = octahedral(0.3, -0.2, 0.1);
        let bf = crate::bloch::to_bloch(op.matrix(), 3, 3).unwrap();
        assert!(bf.a_norm() < 1e-14 && bf.b_norm() < 1e-14);
        for mu in 0..8 {
            for nu in 0..8 {
                let want = match (mu, nu) {
                    (0, 0) => 0.3,
                    (1, 1) => -0.2,
                    (2, 2) => 0.1,
                    _ => 0.0,
                };
                assert!((bf.t[(mu, nu)] - want).abs() < 1e-14, "({mu},{nu})");
            }
        }
    }

    #[test]
    fn octahedral_physicality() {
        assert!(octahedral(-0.4, -0.4, -0.4).min_eigenvalue() >= -1e-12);
        assert!(octahedral(0.4, 0.4, 0.4).min_eigenvalue() < -0.18);
        // closed-form eigenvalue 1/9 - (t1+t2+t3)/4 for the all-plus point
        let min = octahedral(0.4, 0.4, 0.4).min_eigenvalue();
        assert!((min - (1.0 / 9.0 - 0.3)).abs() < 1e-12);
    }

    #[test]
    fn tetrahedral_boundary() {
        let r = 4.0 / 9.0;
        let unit = [0.6, -0.64, 0.48]; // |unit| = 1
        let norm: f64 = unit.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        let op = tetrahedral(r * unit[0], r * unit[1], r * unit[2]);
        assert!(op.min_eigenvalue().abs() < 1e-12);
        let inside = tetrahedral(0.9 * r * unit[0], 0.9 * r * unit[1], 0.9 * r * unit[2]);
        assert!(inside.min_eigenvalue() > 0.0);
    }

    #[test]
    fn families_are_linear_in_t() {
        let t = [0.07, -0.11, 0.05];
        let s = [-0.02, 0.04, 0.09];
        for family in [Family::Example2x4, Family::Octahedral, Family::Tetrahedral] {
            let build = |t: [f64; 3]| FamilyParams { family, t }.build().matrix().clone();
            let lhs = build([t[0] + s[0], t[1] + s[1], t[2] + s[2]]);
            let rhs = build(t) + build(s) - build([0.0; 3]);
            assert!(fro_norm(&(lhs - rhs)) < 1e-14);
        }
    }

    #[test]
    fn random_density_is_valid_and_deterministic() {
        let a = random_density(5, 123);
        let b = random_density(5, 123);
        assert_eq!(a.matrix().as_slice(), b.matrix().as_slice());
        assert!(a.min_eigenvalue() > 0.0);
        assert!((trace(a.matrix()).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_separable_ground_truth_validates() {
        let (rho, dec) = random_separable(3, 3, 4, 7).unwrap();
        let report = validate_decomposition(&rho, &dec, 1e-12);
        assert!(report.passed(), "{report:?}");
        assert!(report.reconstruction_error < 1e-12);

        let (rho2, _) = random_separable(3, 3, 4, 7).unwrap();
        assert_eq!(rho.matrix().as_slice(), rho2.matrix().as_slice());
    }
}
