//! End-to-end tests of the binary: exit codes, file round trips, and report
//! determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bisep")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("bisep-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Self(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn example_analyze_decompose_verify_round_trip() {
    let tmp = TempDir::new("roundtrip");
    for (family, t) in [
        ("2x4", "0.1,0.2,0.1"),
        ("octahedral", "0.1,0.1,0.1"),
        ("tetrahedral", "0.05,0.08,-0.06"),
    ] {
        let state = tmp.path(&format!("{family}.json"));
        let dec = tmp.path(&format!("{family}-dec.json"));
        let out = run(&["example", "--family", family, "--t", t, "--output", path_str(&state)]);
        assert_eq!(code(&out), 0, "{family}: {}", String::from_utf8_lossy(&out.stderr));

        let out = run(&["analyze", "--input", path_str(&state)]);
        assert_eq!(code(&out), 0);
        let report = stdout_json(&out);
        assert_eq!(report["overall"], "SeparableProven", "{family}");

        let out = run(&["decompose", "--input", path_str(&state), "--output", path_str(&dec)]);
        assert_eq!(code(&out), 0, "{family}: {}", String::from_utf8_lossy(&out.stderr));
        let report = stdout_json(&out);
        assert!(report["reconstruction_error"].as_f64().unwrap() < 1e-9);

        let out = run(&["verify", "--state", path_str(&state), "--decomposition", path_str(&dec)]);
        assert_eq!(code(&out), 0, "{family}");
        assert_eq!(stdout_json(&out)["passed"], true);
    }
}

#[test]
fn analyze_flags_the_entangled_2x4_point() {
    let tmp = TempDir::new("entangled");
    let state = tmp.path("hot.json");
    let out = run(&["example", "--family", "2x4", "--t", "0.25,0.25,0.25", "--output", path_str(&state)]);
    assert_eq!(code(&out), 0);

    let out = run(&["analyze", "--input", path_str(&state)]);
    assert_eq!(code(&out), 0, "analyze exits 0 regardless of verdict");
    let report = stdout_json(&out);
    assert_eq!(report["overall"], "Entangled");
    let criteria = report["criteria"].as_array().unwrap();
    let by_name = |name: &str| -> &Value {
        criteria
            .iter()
            .find(|c| c["name"] == name)
            .unwrap_or_else(|| panic!("criterion {name} missing"))
    };
    assert_eq!(by_name("ppt")["verdict"], "Inconclusive");
    assert_eq!(by_name("corollary2")["verdict"], "Entangled");
    assert_eq!(by_name("corollary2")["bounds_provenance"], "tabulated");
}

#[test]
fn unphysical_example_exits_4_and_writes_nothing() {
    let tmp = TempDir::new("unphysical");
    let state = tmp.path("bad.json");
    let out = run(&["example", "--family", "octahedral", "--t", "0.4,0.4,0.4", "--output", path_str(&state)]);
    assert_eq!(code(&out), 4);
    assert!(!state.exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("eigenvalue"));
}

#[test]
fn bad_family_is_a_usage_error() {
    let tmp = TempDir::new("family");
    let out = run(&["example", "--family", "hexagonal", "--t", "0,0,0", "--output", path_str(&tmp.path("x.json"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn malformed_and_inconsistent_inputs() {
    let tmp = TempDir::new("badinput");
    let garbled = tmp.path("garbled.json");
    std::fs::write(&garbled, "{ not json").unwrap();
    assert_eq!(code(&run(&["analyze", "--input", path_str(&garbled)])), 2);
    assert_eq!(code(&run(&["bloch", "--input", path_str(&garbled)])), 2);

    let short = tmp.path("short.json");
    std::fs::write(&short, r#"{"dims": [2, 3], "matrix": [[1.0, 0.0]]}"#).unwrap();
    assert_eq!(code(&run(&["analyze", "--input", path_str(&short)])), 3);

    let missing = tmp.path("missing.json");
    assert_eq!(code(&run(&["analyze", "--input", path_str(&missing)])), 2);
}

#[test]
fn decompose_fails_on_entangled_and_high_rank_states() {
    let tmp = TempDir::new("decfail");
    let hot = tmp.path("hot.json");
    let out = run(&["example", "--family", "octahedral", "--t", "-0.4,-0.4,-0.4", "--output", path_str(&hot)]);
    assert_eq!(code(&out), 0, "this point is physical");
    let out = run(&["decompose", "--input", path_str(&hot), "--output", path_str(&tmp.path("d.json")), "--budget", "3000"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("eigenvalue"));

    // a generic many-term separable state keeps full correlation rank even
    // after filtering: above the constructive regime
    let (rho, _) = bisep::states::random_separable(3, 3, 9, 42).unwrap();
    let full = tmp.path("full.json");
    write_state(&full, &rho);
    let out = run(&["decompose", "--input", path_str(&full), "--output", path_str(&tmp.path("d2.json"))]);
    assert_eq!(code(&out), 5);
}

fn write_state(path: &Path, rho: &bisep::DensityMatrix) {
    let (n, m) = rho.dims();
    let dim = n * m;
    let mut entries = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let z = rho.matrix()[(i, j)];
            entries.push(serde_json::json!([z.re, z.im]));
        }
    }
    let value = serde_json::json!({ "dims": [n, m], "matrix": entries });
    std::fs::write(path, serde_json::to_string(&value).unwrap()).unwrap();
}

#[test]
fn verify_rejects_tampered_decompositions() {
    let tmp = TempDir::new("tamper");
    let state = tmp.path("s.json");
    let dec = tmp.path("d.json");
    run(&["example", "--family", "2x4", "--t", "0.1,0.2,0.1", "--output", path_str(&state)]);
    assert_eq!(code(&run(&["decompose", "--input", path_str(&state), "--output", path_str(&dec)])), 0);

    // perturb one weight
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&dec).unwrap()).unwrap();
    doc["weights"][0] = Value::from(0.26);
    doc["weights"][1] = Value::from(0.24);
    let tampered = tmp.path("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(&["verify", "--state", path_str(&state), "--decomposition", path_str(&tampered)]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["passed"], false);

    // dims mismatch
    let other = tmp.path("other.json");
    run(&["example", "--family", "octahedral", "--t", "0.1,0.1,0.1", "--output", path_str(&other)]);
    let out = run(&["verify", "--state", path_str(&other), "--decomposition", path_str(&dec)]);
    assert_eq!(code(&out), 3);
}

#[test]
fn verify_rejects_negative_local_states() {
    let tmp = TempDir::new("negative");
    let state = tmp.path("s.json");
    let dec = tmp.path("d.json");
    run(&["example", "--family", "2x4", "--t", "0.1,0.2,0.1", "--output", path_str(&state)]);
    assert_eq!(code(&run(&["decompose", "--input", path_str(&state), "--output", path_str(&dec)])), 0);

    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&dec).unwrap()).unwrap();
    // overwrite the first local state on side A with a non-PSD matrix
    doc["states_a"][0] = serde_json::json!([
        [1.5, 0.0], [0.0, 0.0],
        [0.0, 0.0], [-0.5, 0.0]
    ]);
    let bad = tmp.path("bad.json");
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(&["verify", "--state", path_str(&state), "--decomposition", path_str(&bad)]);
    assert_eq!(code(&out), 1);
    let report = stdout_json(&out);
    assert_eq!(report["psd_ok"], false);
}

#[test]
fn bloch_reports_the_sparse_2x4_pattern() {
    let tmp = TempDir::new("bloch");
    let state = tmp.path("s.json");
    run(&["example", "--family", "2x4", "--t", "0.1,0.2,0.1", "--output", path_str(&state)]);
    let out = run(&["bloch", "--input", path_str(&state)]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["normal_form"], true);
    assert_eq!(report["local_ranks"], serde_json::json!([2, 4]));
    let t = report["t"].as_array().unwrap();
    // one-based positions (1,1), (2,13), (3,3)
    assert!((t[0][0].as_f64().unwrap() - 0.1).abs() < 1e-12);
    assert!((t[1][12].as_f64().unwrap() - 0.2).abs() < 1e-12);
    assert!((t[2][2].as_f64().unwrap() - 0.1).abs() < 1e-12);
    let total: f64 = t
        .iter()
        .flat_map(|row| row.as_array().unwrap())
        .map(|x| x.as_f64().unwrap().abs())
        .sum();
    assert!((total - 0.4).abs() < 1e-9, "all other entries vanish");
}

#[test]
fn reports_are_deterministic() {
    let tmp = TempDir::new("determinism");
    let state = tmp.path("s.json");
    run(&["example", "--family", "octahedral", "--t", "0.12,0.05,0.1", "--output", path_str(&state)]);
    let a = run(&["analyze", "--input", path_str(&state), "--seed", "3"]);
    let b = run(&["analyze", "--input", path_str(&state), "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn decompose_handles_states_away_from_the_normal_form() {
    // conjugate a separable normal-form state by invertible local maps; the
    // pipeline must filter, decompose, and pull the terms back
    use num_complex::Complex64;
    let tmp = TempDir::new("pullback");
    let base = bisep::states::octahedral(0.1, 0.1, 0.1).into_density().unwrap();
    let mut g = bisep::CMat::identity(3, 3);
    g[(0, 0)] = Complex64::new(1.25, 0.0);
    g[(0, 1)] = Complex64::new(0.15, 0.1);
    g[(2, 2)] = Complex64::new(0.85, 0.0);
    let map = bisep::linalg::kron(&g, &g);
    let mut skewed = &map * base.matrix() * map.adjoint();
    let trace: Complex64 = skewed.diagonal().iter().sum();
    skewed /= trace;
    let rho = bisep::DensityMatrix::new(skewed, 3, 3).unwrap();
    assert!(rho.bloch().a_norm() > 1e-3, "marginals are skewed");

    let state = tmp.path("skewed.json");
    let dec = tmp.path("dec.json");
    write_state(&state, &rho);
    let out = run(&["decompose", "--input", path_str(&state), "--output", path_str(&dec)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["verify", "--state", path_str(&state), "--decomposition", path_str(&dec)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["passed"], true);
}

#[test]
fn analyze_supports_criteria_selectors() {
    let tmp = TempDir::new("selector");
    let state = tmp.path("s.json");
    run(&["example", "--family", "octahedral", "--t", "0.1,0.1,0.1", "--output", path_str(&state)]);
    for selector in ["ppt", "norms", "corollary2", "symmetry", "observation1"] {
        let out = run(&["analyze", "--input", path_str(&state), "--criteria", selector]);
        assert_eq!(code(&out), 0, "selector {selector}");
        let report = stdout_json(&out);
        let criteria = report["criteria"].as_array().unwrap();
        assert_eq!(criteria.len(), 1, "selector {selector} runs one criterion");
    }
    let out = run(&["analyze", "--input", path_str(&state), "--criteria", "everything"]);
    assert_eq!(code(&out), 2);
}
