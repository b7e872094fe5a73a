//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS/FAIL line. Run with `cargo test -p bisep --test acceptance --
//! --nocapture` to see the lines.
//!
//! Two checks are expected to fail and document measured reality rather than
//! the advertised target; their assertion messages carry the analysis. See
//! `07d` (the axis-triple sum bound of a three-level system is 1, not 4/9,
//! when maximized over pure states) and `09a` (a rank-deficient entangled
//! state carries no out-of-block correlation after the diagonalizing
//! rotation, so the support-leak screen cannot flag it).

use bisep::basis::generators;
use bisep::bloch::{from_bloch, to_bloch, BlochForm, DensityMatrix};
use bisep::criteria::{self, BoundProvenance, SubspaceBounds, Verdict};
use bisep::decompose;
use bisep::linalg::{fro_norm, trace_product_re};
use bisep::normal_form;
use bisep::states;
use bisep::{CMat, CVec, RMat, RVec};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn ci(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

fn check(id: &str, name: &str, ok: bool, detail: &str) {
    println!(
        "acceptance {id:<4} {name:<44} {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance {id} {name}: {detail}");
}

fn axes(indices: &[usize], bloch_dim: usize) -> Vec<RVec> {
    indices
        .iter()
        .map(|&i| {
            let mut v = RVec::zeros(bloch_dim);
            v[i - 1] = 1.0;
            v
        })
        .collect()
}

fn paper_bounds_2x4(t: &RMat) -> (SubspaceBounds, SubspaceBounds) {
    let sub = criteria::correlation_support_subspaces(t, criteria::SUBSPACE_TOL);
    let a = SubspaceBounds {
        directions: sub.left.clone(),
        sum_bound: 1.0,
        product_bound: 1.0 / 27.0,
        provenance: BoundProvenance::Tabulated,
    };
    let b = SubspaceBounds {
        directions: sub.right.clone(),
        sum_bound: 1.0,
        product_bound: (2.0 / 27.0f64).powi(2),
        provenance: BoundProvenance::Tabulated,
    };
    (a, b)
}

/// The `t` triples whose decompositions criteria 4-6 exercise; criterion 8
/// replays every one of them.
fn decomposition_workload() -> Vec<(states::Family, [f64; 3])> {
    let mut points = vec![
        (states::Family::Example2x4, [0.1, 0.2, 0.1]),
        (
            states::Family::Octahedral,
            [1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0],
        ),
        (
            states::Family::Octahedral,
            [4.0 / 27.0, 4.0 / 27.0, 4.0 / 27.0],
        ),
    ];
    points.extend(
        tetrahedral_points(100)
            .into_iter()
            .map(|t| (states::Family::Tetrahedral, t)),
    );
    points
}

/// 100 seeded points drawn uniformly from the physical ball of the
/// tetrahedral family, radius shrunk to 0.999 of the boundary.
fn tetrahedral_points(count: usize) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let radius = 4.0 / 9.0 * 0.999;
    (0..count)
        .map(|_| {
            let mut raw = [0.0f64; 3];
            for slot in &mut raw {
                let u1: f64 = rng.random();
                let u2: f64 = rng.random();
                *slot = (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
            }
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
            let r = radius * rng.random::<f64>().cbrt();
            raw.map(|x| x / norm * r)
        })
        .collect()
}

fn search_and_build(
    rho: &DensityMatrix,
) -> Result<(decompose::Factorization, decompose::SeparableDecomposition), bisep::Error> {
    let (n, m) = rho.dims();
    let t = rho.bloch().t;
    let alpha = decompose::scale_split_search(&t, n, m, 0, 20_000)?;
    let fact = decompose::factor_correlation(&t, &alpha)?;
    let dec = decompose::build_decomposition(&fact, n, m)?;
    Ok((fact, dec))
}

#[test]
fn acceptance_01_basis() {
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        let basis = generators(n).unwrap();
        for mu in 0..basis.len() {
            for nu in 0..basis.len() {
                let want = if mu == nu { 2.0 } else { 0.0 };
                let got = trace_product_re(basis.generator(mu), basis.generator(nu));
                worst = worst.max((got - want).abs());
            }
        }
    }

    let pauli = [
        CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]),
        CMat::from_row_slice(2, 2, &[cr(0.0), ci(-1.0), ci(1.0), cr(0.0)]),
        CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]),
    ];
    let su2 = generators(2).unwrap();
    let pauli_ok = su2
        .iter()
        .zip(&pauli)
        .all(|(g, p)| fro_norm(&(g - p)) == 0.0);

    let s3 = 1.0 / 3.0f64.sqrt();
    let gell_mann = [
        CMat::from_row_slice(3, 3, &[cr(0.0), cr(1.0), cr(0.0), cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(0.0), cr(0.0)]),
        CMat::from_row_slice(3, 3, &[cr(0.0), ci(-1.0), cr(0.0), ci(1.0), cr(0.0), cr(0.0), cr(0.0), cr(0.0), cr(0.0)]),
        CMat::from_row_slice(3, 3, &[cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(-1.0), cr(0.0), cr(0.0), cr(0.0), cr(0.0)]),
        CMat::from_row_slice(3, 3, &[cr(0.0), cr(0.0), cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0), cr(0.0), cr(0.0)]),
        CMat::from_row_slice(3, 3, &[cr(0.0), cr(0.0), ci(-1.0), cr(0.0), cr(0.0), cr(0.0), ci(1.0), cr(0.0), cr(0.0)]),
        CMat::from_row_slice(3, 3, &[cr(0.0), cr(0.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0), cr(0.0), cr(1.0), cr(0.0)]),
        CMat::from_row_slice(3, 3, &[cr(0.0), cr(0.0), cr(0.0), cr(0.0), cr(0.0), ci(-1.0), cr(0.0), ci(1.0), cr(0.0)]),
        CMat::from_row_slice(3, 3, &[cr(s3), cr(0.0), cr(0.0), cr(0.0), cr(s3), cr(0.0), cr(0.0), cr(0.0), cr(-2.0 * s3)]),
    ];
    let su3 = generators(3).unwrap();
    let gm_ok = su3
        .iter()
        .zip(&gell_mann)
        .all(|(g, p)| fro_norm(&(g - p)) < 1e-15);

    check(
        "01",
        "generator orthogonality and listings",
        worst < 1e-12 && pauli_ok && gm_ok,
        &format!("worst orthogonality defect {worst:.3e}, pauli {pauli_ok}, gell-mann {gm_ok}"),
    );
}

#[test]
fn acceptance_02_bloch_round_trip() {
    let mut worst: f64 = 0.0;
    for (n, m) in [(2usize, 2usize), (2, 3), (2, 4), (3, 3)] {
        for seed in 0..100u64 {
            let rho = states::random_density(n * m, 1000 + seed)
                .with_dims(n, m)
                .unwrap();
            let bf = to_bloch(rho.matrix(), n, m).unwrap();
            let back = from_bloch(&bf).unwrap();
            worst = worst.max(fro_norm(&(back.matrix() - rho.matrix())));
        }
    }
    check(
        "02",
        "Bloch round trip on 400 random states",
        worst < 1e-10,
        &format!("worst error {worst:.3e}"),
    );
}

#[test]
fn acceptance_03_2x4_thresholds() {
    // positive partial transpose across the physical range
    let mut ppt_ok = true;
    for k in 1..=25 {
        let t = k as f64 * 0.01;
        let rho = states::example_2x4(t, t, t).into_density().unwrap();
        ppt_ok &= matches!(criteria::ppt_test(&rho), Verdict::Inconclusive);
    }

    let verdict_at = |t: f64| -> Verdict {
        let bf = to_bloch(states::example_2x4(t, t, t).matrix(), 2, 4).unwrap();
        let (ba, bb) = paper_bounds_2x4(&bf.t);
        criteria::corollary2_test(&bf.t, &ba, &bb).unwrap()
    };
    let hot = verdict_at(0.25).is_entangled();
    let cold = !verdict_at(0.24).is_entangled();

    // bisect the verdict flip
    let (mut lo, mut hi) = (0.24, 0.25);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if verdict_at(mid).is_entangled() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let flip = 0.5 * (lo + hi);
    let flip_ok = (0.2415..=0.2435).contains(&flip);

    check(
        "03",
        "2x4 family thresholds",
        ppt_ok && hot && cold && flip_ok,
        &format!("ppt {ppt_ok}, t=0.25 entangled {hot}, t=0.24 inconclusive {cold}, flip at {flip:.6}"),
    );
}

#[test]
fn acceptance_04_2x4_decomposition() {
    let rho = states::example_2x4(0.1, 0.2, 0.1).into_density().unwrap();
    let (_, dec) = search_and_build(&rho).unwrap();
    let report = decompose::validate_decomposition(&rho, &dec, 1e-9);
    let weights_quarter = dec.weights.iter().all(|w| (w - 0.25).abs() < 1e-12);
    let ok = dec.len() == 4
        && weights_quarter
        && report.reconstruction_error < 1e-9
        && report.min_local_eigenvalue >= -1e-10;
    check(
        "04",
        "2x4 four-term decomposition",
        ok,
        &format!(
            "terms {}, weights 1/4 {weights_quarter}, error {:.3e}, min local eig {:.3e}",
            dec.len(),
            report.reconstruction_error,
            report.min_local_eigenvalue
        ),
    );
}

#[test]
fn acceptance_05_octahedral_family() {
    let interior = states::octahedral(1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0)
        .into_density()
        .unwrap();
    let (_, dec) = search_and_build(&interior).unwrap();
    let q = decompose::quantumness(&dec);
    let interior_ok = decompose::validate_decomposition(&interior, &dec, 1e-9).passed()
        && q.e_a <= 4.0 / 9.0 + 1e-9
        && q.e_b <= 4.0 / 9.0 + 1e-9;

    let c = 4.0 / 27.0;
    let boundary = states::octahedral(c, c, c).into_density().unwrap();
    let (_, dec_b) = search_and_build(&boundary).unwrap();
    let qb = decompose::quantumness(&dec_b);
    let boundary_ok = decompose::validate_decomposition(&boundary, &dec_b, 1e-9).passed()
        && (qb.e_a - 4.0 / 9.0).abs() < 1e-9;

    let op = states::octahedral(-0.4, -0.4, -0.4);
    let physical = op.min_eigenvalue() >= -1e-10;
    let hot = op.into_density().unwrap();
    let ppt_flags = criteria::ppt_test(&hot).is_entangled();
    let inversion = criteria::partial_inversion_map(&[1, 2, 3], 3).unwrap();
    let id = RMat::identity(8, 8);
    let symmetry_flags = criteria::symmetry_map_test(&hot, &inversion, &id)
        .unwrap()
        .is_entangled();

    check(
        "05",
        "octahedral decompositions and witnesses",
        interior_ok && boundary_ok && physical && ppt_flags && symmetry_flags,
        &format!(
            "interior {interior_ok} (E_A {:.6}), boundary {boundary_ok} (E_A {:.9}), physical {physical}, ppt {ppt_flags}, symmetry {symmetry_flags}",
            q.e_a, qb.e_a
        ),
    );
}

#[test]
fn acceptance_06_tetrahedral_family() {
    let mut failures = Vec::new();
    for (k, t) in tetrahedral_points(100).into_iter().enumerate() {
        let op = states::tetrahedral(t[0], t[1], t[2]);
        let rho = match op.into_density() {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("point {k} {t:?} unphysical: {e}"));
                continue;
            }
        };
        match search_and_build(&rho) {
            Ok((_, dec)) => {
                let report = decompose::validate_decomposition(&rho, &dec, 1e-9);
                if !report.passed() {
                    failures.push(format!(
                        "point {k} {t:?} invalid: err {:.3e}, min eig {:.3e}",
                        report.reconstruction_error, report.min_local_eigenvalue
                    ));
                }
            }
            Err(e) => failures.push(format!("point {k} {t:?} search failed: {e}")),
        }
    }
    check(
        "06",
        "tetrahedral ball decompositions (100 points)",
        failures.is_empty(),
        &failures.join("; "),
    );
}

#[test]
fn acceptance_07a_sum_bound_su4_triple() {
    let dirs = axes(&[1, 13, 3], 15);
    let value = criteria::sum_bound_oracle(&dirs, 4, 0, 200).unwrap();
    check(
        "07a",
        "sum bound, axes {1,13,3} of SU(4)",
        (value - 1.0).abs() < 1e-3,
        &format!("measured {value:.6}, expected 1"),
    );
}

#[test]
fn acceptance_07b_product_bound_qubit() {
    let dirs = axes(&[1, 2, 3], 3);
    let value = criteria::product_bound_oracle(&dirs, 2, 0, 60).unwrap();
    let expect = 1.0 / 27.0;
    check(
        "07b",
        "product bound, full qubit Bloch space",
        (value - expect).abs() / expect < 5e-3,
        &format!("measured {value:.8}, expected {expect:.8}"),
    );
}

#[test]
fn acceptance_07c_product_bound_su4_triple() {
    let dirs = axes(&[1, 13, 3], 15);
    let value = criteria::product_bound_oracle(&dirs, 4, 0, 200).unwrap();
    let expect = (2.0 / 27.0f64).powi(2);
    check(
        "07c",
        "product bound, axes {1,13,3} of SU(4)",
        (value - expect).abs() / expect < 1e-2,
        &format!("measured {value:.8}, expected {expect:.8}"),
    );
}

#[test]
fn acceptance_07d_sum_bound_su3_triple() {
    let dirs = axes(&[1, 2, 3], 8);
    let value = criteria::sum_bound_oracle(&dirs, 3, 0, 200).unwrap();
    let expect = 4.0 / 9.0;
    check(
        "07d",
        "sum bound, axes {1,2,3} of SU(3)",
        (value - expect).abs() < 1e-3,
        &format!(
            "measured {value:.6}, expected {expect:.6}. The maximum of \
             sum_mu (u_mu . r(psi))^2 over pure three-level states is 1: any \
             pure state of the embedded two-level sector reaches it (for \
             example (|1> + |2>)/sqrt(2), whose first-generator component is \
             1). The value 4/9 is the squared radius of the positivity ball \
             of states whose Bloch vector is *confined* to the span of the \
             first three generators; no pure state of the full space \
             satisfies that confinement, so the advertised target cannot be \
             met by this maximization."
        ),
    );
}

#[test]
fn acceptance_08_orthostochastic_identity() {
    let mut worst_gap: f64 = 0.0;
    let mut worst_stochastic: f64 = 0.0;
    let mut produced = 0usize;
    for (family, t) in decomposition_workload() {
        let op = states::FamilyParams { family, t }.build();
        let rho = match op.into_density() {
            Ok(r) => r,
            Err(_) => continue,
        };
        let (fact, _) = match search_and_build(&rho) {
            Ok(x) => x,
            Err(_) => continue,
        };
        produced += 1;
        let (lhs, rhs) = decompose::orthostochastic_identity(&fact);
        worst_gap = worst_gap.max((lhs - rhs).abs());
        let q = fact.orthostochastic_q();
        for i in 0..fact.terms {
            let row: f64 = (0..fact.terms).map(|j| q[(i, j)]).sum();
            let col: f64 = (0..fact.terms).map(|j| q[(j, i)]).sum();
            worst_stochastic = worst_stochastic.max((row - 1.0).abs().max((col - 1.0).abs()));
        }
    }
    check(
        "08",
        "orthostochastic pairing identity",
        produced >= 100 && worst_gap < 1e-9 && worst_stochastic < 1e-10,
        &format!(
            "{produced} factorizations, worst identity gap {worst_gap:.3e}, worst stochasticity defect {worst_stochastic:.3e}"
        ),
    );
}

#[test]
fn acceptance_09a_reducible_entangled_state_flagged() {
    // (|0 0> + |1 2>)/sqrt(2) on 2 x 3
    let mut psi = CVec::from_element(6, cr(0.0));
    psi[0] = cr(1.0 / 2.0f64.sqrt());
    psi[5] = cr(1.0 / 2.0f64.sqrt());
    let rho = DensityMatrix::new(&psi * psi.adjoint(), 2, 3).unwrap();
    let ranks = normal_form::local_ranks(&rho, normal_form::RANK_TOL).unwrap();
    let verdict = normal_form::observation1_test(&ranks, normal_form::LEAK_TOL);
    check(
        "09a",
        "support-leak screen flags (|00>+|12>)/sqrt(2)",
        verdict.is_entangled(),
        &format!(
            "measured leak {:.3e}, verdict {:?}. After rotating the second \
             marginal to diagonal form with descending eigenvalues, the \
             state's support lies entirely inside the leading 2 x 2 block \
             (it becomes the two-qubit maximally entangled state), and for \
             any positive operator a vanishing marginal eigenvalue forces \
             the corresponding global rows and columns to vanish. The \
             rotated correlation matrix therefore has no out-of-block \
             entries, the leak is identically zero for every state with \
             exact local ranks, and this screen cannot flag the state; the \
             entanglement is caught after support reduction (the reduced \
             2 x 2 state violates the partial-transposition test).",
            ranks.leak, verdict
        ),
    );
}

#[test]
fn acceptance_09b_no_false_positives_200_states() {
    let mut flagged = Vec::new();
    for trial in 0..200u64 {
        let (dim_a, dim_b) = if trial % 2 == 0 { (2, 2) } else { (3, 3) };
        let (rho, _) = states::random_separable(dim_a, dim_b, 3, 5000 + trial).unwrap();
        let (n, m) = rho.dims();

        let ranks = normal_form::local_ranks(&rho, normal_form::RANK_TOL).unwrap();
        let mut verdicts = vec![
            (
                "observation1",
                normal_form::observation1_test(&ranks, normal_form::LEAK_TOL),
            ),
            ("ppt", criteria::ppt_test(&rho)),
        ];
        if ranks.full_rank() {
            let nf = normal_form::filter_to_normal_form(&rho, 1e-10, 1000).unwrap();
            let bf = nf.state.bloch();
            verdicts.push(("bloch_norms", criteria::bloch_norm_tests(&bf).unwrap()));
            let sub = criteria::correlation_support_subspaces(&bf.t, criteria::SUBSPACE_TOL);
            if let Some((ba, bb)) = criteria::bounds_for_subspaces(&sub, n, m, 0, 80).unwrap() {
                verdicts.push((
                    "corollary2",
                    criteria::corollary2_test(&bf.t, &ba, &bb).unwrap(),
                ));
            }
            if criteria::partial_inversion_applicable(&sub, n, m) {
                let inversion = criteria::partial_inversion_map(&[1, 2, 3], n).unwrap();
                let id = RMat::identity(m * m - 1, m * m - 1);
                verdicts.push((
                    "symmetry",
                    criteria::symmetry_map_test(&nf.state, &inversion, &id).unwrap(),
                ));
            }
        }
        for (name, verdict) in verdicts {
            if verdict.is_entangled() {
                flagged.push(format!("trial {trial}: {name} -> {verdict:?}"));
            }
        }
    }
    check(
        "09b",
        "zero false positives on 200 separable states",
        flagged.is_empty(),
        &flagged.join("; "),
    );
}

#[test]
fn acceptance_10_normal_form() {
    let mut failures = Vec::new();
    for seed in 0..50u64 {
        let rho = states::random_density(9, 9000 + seed).with_dims(3, 3).unwrap();
        match normal_form::filter_to_normal_form(&rho, 1e-10, 1000) {
            Ok(nf) => {
                let bf = nf.state.bloch();
                if bf.a_norm() >= 1e-8 || bf.b_norm() >= 1e-8 {
                    failures.push(format!(
                        "seed {seed}: |a| {:.3e}, |b| {:.3e}",
                        bf.a_norm(),
                        bf.b_norm()
                    ));
                }
            }
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }

    // family states already have maximally mixed marginals: fixed points
    let fixed = [
        states::example_2x4(0.1, 0.2, 0.1),
        states::octahedral(0.1, 0.1, 0.1),
        states::tetrahedral(0.05, 0.08, -0.06),
    ];
    for (k, op) in fixed.into_iter().enumerate() {
        let rho = op.into_density().unwrap();
        match normal_form::filter_to_normal_form(&rho, 1e-10, 1000) {
            Ok(nf) => {
                let change = fro_norm(&(nf.state.matrix() - rho.matrix()));
                if change >= 1e-9 {
                    failures.push(format!("fixed point {k} moved by {change:.3e}"));
                }
            }
            Err(e) => failures.push(format!("fixed point {k}: {e}")),
        }
    }
    check(
        "10",
        "normal-form filtering (50 states + fixed points)",
        failures.is_empty(),
        &failures.join("; "),
    );
}

#[test]
fn acceptance_11_norm_criteria_sanity() {
    let mk = |k: f64| {
        let mut bf = BlochForm::zero(3, 3);
        for i in 0..3 {
            bf.t[(i, i)] = k / 3.0;
        }
        bf
    };
    let hot = criteria::bloch_norm_tests(&mk(1.4)).unwrap();
    let cold = criteria::bloch_norm_tests(&mk(0.3)).unwrap();
    check(
        "11",
        "Ky Fan norm thresholds on 3x3",
        hot.is_entangled() && cold.proves_separable(),
        &format!("kf 1.4 -> {:?}, kf 0.3 -> {:?}", hot, cold),
    );
}
