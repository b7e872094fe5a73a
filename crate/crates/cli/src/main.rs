//! Command-line front end: build example states, analyze separability,
//! construct and verify explicit decompositions.

mod io;
mod pipeline;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bisep::bloch::{to_bloch, DensityMatrix, HERMITICITY_WARN};
use bisep::criteria;
use bisep::decompose;
use bisep::states::{Family, FamilyParams};
use bisep::Error;

use io::{exit, sig12, sig12_vec, DecompositionFile, StateFile};
use pipeline::{CriteriaSelector, Tolerances};

#[derive(Parser)]
#[command(
    name = "bisep",
    about = "Separability analysis of bipartite quantum states via correlation-matrix factorization",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    #[value(name = "2x4")]
    TwoByFour,
    Octahedral,
    Tetrahedral,
}

#[derive(Subcommand)]
enum Command {
    /// Write one of the built-in example states to a state file.
    Example {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Correlation strengths as a comma-separated triple, e.g. 0.1,0.2,0.1
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run the criteria pipeline on a state file and print a JSON report.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "all")]
        criteria: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluation budget for the decomposition search.
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        #[arg(long, default_value_t = bisep::normal_form::RANK_TOL)]
        rank_tol: f64,
        #[arg(long, default_value_t = bisep::normal_form::LEAK_TOL)]
        leak_tol: f64,
    },
    /// Construct an explicit separable decomposition and write it out.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        #[arg(long, default_value_t = 1e-9)]
        recon_tol: f64,
    },
    /// Check a decomposition file against a state file.
    Verify {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        decomposition: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        recon_tol: f64,
    },
    /// Print the Bloch data of a state file.
    Bloch {
        #[arg(long)]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Example { family, t, output } => cmd_example(family, &t, &output),
        Command::Analyze {
            input,
            criteria,
            seed,
            budget,
            rank_tol,
            leak_tol,
        } => cmd_analyze(&input, &criteria, seed, budget, rank_tol, leak_tol),
        Command::Decompose {
            input,
            output,
            seed,
            budget,
            recon_tol,
        } => cmd_decompose(&input, &output, seed, budget, recon_tol),
        Command::Verify {
            state,
            decomposition,
            recon_tol,
        } => cmd_verify(&state, &decomposition, recon_tol),
        Command::Bloch { input } => cmd_bloch(&input),
    };
    ExitCode::from(code as u8)
}

fn parse_triple(t: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = t.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values, got {t:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|e| format!("bad value {part:?}: {e}"))?;
    }
    Ok(out)
}

fn load_state(path: &Path) -> Result<DensityMatrix, i32> {
    let file: StateFile = io::read_json(path).map_err(|e| {
        eprintln!("error: {e}");
        exit::PARSE
    })?;
    let mat = file.matrix().map_err(|e| {
        eprintln!("error: {e}");
        exit::DIMS
    })?;
    let asym = bisep::linalg::asymmetry(&mat);
    if asym > HERMITICITY_WARN {
        eprintln!("warning: input asymmetry {asym:.3e} exceeds {HERMITICITY_WARN:.0e}; symmetrizing");
    }
    DensityMatrix::new(mat, file.dims[0], file.dims[1]).map_err(|e| {
        eprintln!("error: {e}");
        match e {
            Error::InvalidTrace(_) | Error::NotPositive(_) => exit::UNPHYSICAL,
            Error::ShapeMismatch(_) | Error::InvalidDimension(_) => exit::DIMS,
            _ => exit::PARSE,
        }
    })
}

fn print_json<T: Serialize>(value: &T) {
    match serde_json::to_string_pretty(value) {
        Ok(text) => println!("{text}"),
        Err(e) => eprintln!("error: cannot serialize report: {e}"),
    }
}

fn cmd_example(family: FamilyArg, t: &str, output: &Path) -> i32 {
    let t = match parse_triple(t) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::PARSE;
        }
    };
    let params = FamilyParams {
        family: match family {
            FamilyArg::TwoByFour => Family::Example2x4,
            FamilyArg::Octahedral => Family::Octahedral,
            FamilyArg::Tetrahedral => Family::Tetrahedral,
        },
        t,
    };
    let op = params.build();
    let min_eig = op.min_eigenvalue();
    if min_eig < -1e-10 {
        eprintln!("error: the requested state is unphysical (min eigenvalue {min_eig:.6e})");
        return exit::UNPHYSICAL;
    }
    let (n, m) = params.dims();
    let file = StateFile::from_matrix(op.matrix(), [n, m]);
    if let Err(e) = io::write_json(output, &file) {
        eprintln!("error: {e}");
        return exit::FAILED;
    }

    #[derive(Serialize)]
    struct ExampleReport {
        family: String,
        t: [f64; 3],
        dims: [usize; 2],
        min_eigenvalue: f64,
        output: String,
    }
    print_json(&ExampleReport {
        family: match params.family {
            Family::Example2x4 => "2x4".into(),
            Family::Octahedral => "octahedral".into(),
            Family::Tetrahedral => "tetrahedral".into(),
        },
        t,
        dims: [n, m],
        min_eigenvalue: sig12(min_eig),
        output: output.display().to_string(),
    });
    exit::OK
}

fn cmd_analyze(
    input: &Path,
    criteria_arg: &str,
    seed: u64,
    budget: usize,
    rank_tol: f64,
    leak_tol: f64,
) -> i32 {
    let selector = match CriteriaSelector::parse(criteria_arg) {
        Some(s) => s,
        None => {
            eprintln!("error: unknown criteria selector {criteria_arg:?}");
            return exit::PARSE;
        }
    };
    let rho = match load_state(input) {
        Ok(rho) => rho,
        Err(code) => return code,
    };
    let tol = Tolerances {
        rank_tol,
        leak_tol,
        ..Tolerances::default()
    };
    match pipeline::analyze(&input.display().to_string(), &rho, selector, seed, budget, tol) {
        Ok(report) => {
            print_json(&report);
            exit::OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit::FAILED
        }
    }
}

fn cmd_decompose(input: &Path, output: &Path, seed: u64, budget: usize, recon_tol: f64) -> i32 {
    let rho = match load_state(input) {
        Ok(rho) => rho,
        Err(code) => return code,
    };
    let tol = Tolerances {
        recon_tol,
        ..Tolerances::default()
    };
    match pipeline::decompose_state(&rho, seed, budget, tol) {
        Ok(dec) => {
            let file = DecompositionFile::from_decomposition(&dec);
            if let Err(e) = io::write_json(output, &file) {
                eprintln!("error: {e}");
                return exit::FAILED;
            }
            let report = decompose::validate_decomposition(&rho, &dec, recon_tol);
            let q = decompose::quantumness(&dec);

            #[derive(Serialize)]
            struct DecomposeReport {
                terms: usize,
                reconstruction_error: f64,
                min_local_eigenvalue: f64,
                quantumness: QuantumnessReport,
                output: String,
            }
            #[derive(Serialize)]
            struct QuantumnessReport {
                e_a: f64,
                e_b: f64,
                var_a: f64,
                var_b: f64,
            }
            print_json(&DecomposeReport {
                terms: dec.len(),
                reconstruction_error: sig12(report.reconstruction_error),
                min_local_eigenvalue: sig12(report.min_local_eigenvalue),
                quantumness: QuantumnessReport {
                    e_a: sig12(q.e_a),
                    e_b: sig12(q.e_b),
                    var_a: sig12(q.var_a),
                    var_b: sig12(q.var_b),
                },
                output: output.display().to_string(),
            });
            exit::OK
        }
        Err(Error::UnsupportedRank(l)) => {
            eprintln!("error: correlation rank {l} is above the constructive regime (max 3)");
            exit::UNSUPPORTED_RANK
        }
        Err(Error::SearchFailed { best_score }) => {
            eprintln!(
                "error: no feasible decomposition found; best local min eigenvalue {best_score:.6e}"
            );
            exit::FAILED
        }
        Err(Error::InvalidReduction(leak)) => {
            eprintln!(
                "error: correlations leak outside the local support ({leak:.3e}); the state is entangled"
            );
            exit::FAILED
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit::FAILED
        }
    }
}

fn cmd_verify(state: &Path, decomposition: &Path, recon_tol: f64) -> i32 {
    let rho = match load_state(state) {
        Ok(rho) => rho,
        Err(code) => return code,
    };
    let file: DecompositionFile = match io::read_json(decomposition) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::PARSE;
        }
    };
    let dec = match file.to_decomposition() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::DIMS;
        }
    };
    if (dec.dim_a, dec.dim_b) != rho.dims() {
        eprintln!(
            "error: decomposition dims ({}, {}) do not match state dims {:?}",
            dec.dim_a,
            dec.dim_b,
            rho.dims()
        );
        return exit::DIMS;
    }
    let report = decompose::validate_decomposition(&rho, &dec, recon_tol);

    #[derive(Serialize)]
    struct VerifyReport {
        terms: usize,
        psd_ok: bool,
        weights_ok: bool,
        min_local_eigenvalue: f64,
        reconstruction_error: f64,
        tolerance: f64,
        passed: bool,
    }
    print_json(&VerifyReport {
        terms: dec.len(),
        psd_ok: report.psd_ok,
        weights_ok: report.weights_ok,
        min_local_eigenvalue: sig12(report.min_local_eigenvalue),
        reconstruction_error: sig12(report.reconstruction_error),
        tolerance: recon_tol,
        passed: report.passed(),
    });
    if report.passed() {
        exit::OK
    } else {
        exit::FAILED
    }
}

fn cmd_bloch(input: &Path) -> i32 {
    let rho = match load_state(input) {
        Ok(rho) => rho,
        Err(code) => return code,
    };
    let (n, m) = rho.dims();
    let bf = match to_bloch(rho.matrix(), n, m) {
        Ok(bf) => bf,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::DIMS;
        }
    };
    let ranks = match bisep::normal_form::local_ranks(&rho, bisep::normal_form::RANK_TOL) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::FAILED;
        }
    };
    let sub = criteria::correlation_support_subspaces(&bf.t, criteria::SUBSPACE_TOL);

    #[derive(Serialize)]
    struct BlochReport {
        dims: [usize; 2],
        a: Vec<f64>,
        b: Vec<f64>,
        t: Vec<Vec<f64>>,
        singular_values: Vec<f64>,
        local_ranks: [usize; 2],
        a_norm: f64,
        b_norm: f64,
        normal_form: bool,
    }
    let t_rows: Vec<Vec<f64>> = (0..bf.t.nrows())
        .map(|i| sig12_vec(&(0..bf.t.ncols()).map(|j| bf.t[(i, j)]).collect::<Vec<_>>()))
        .collect();
    print_json(&BlochReport {
        dims: [n, m],
        a: sig12_vec(bf.a.as_slice()),
        b: sig12_vec(bf.b.as_slice()),
        t: t_rows,
        singular_values: sig12_vec(&sub.tau),
        local_ranks: [ranks.rank_a, ranks.rank_b],
        a_norm: sig12(bf.a_norm()),
        b_norm: sig12(bf.b_norm()),
        normal_form: bf.is_normal_form(1e-8),
    });
    exit::OK
}
