//! Command-line entry point: every library operation behind one binary with
//! reproducible seeds and machine-readable JSON reports.
//!
//! Exit codes: 0 for success (verdict true or no verdict), 2 when a tested
//! property is refuted (the witness is in the report), 1 for usage, input,
//! or capability errors.

mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use hyperspec::functions::{SampleGrid, MAX_TEST_ORDER};
use hyperspec::linalg::DEFAULT_RANK_REL_TOL;
use hyperspec::{
    bernstein_test, cm_test, cm_witness_search, cut_embedding, diagonalization_check,
    kernel_matrix, manhattan_transform, negative_type_test, poly_rank_bound, psd_verdict, rank_lab,
    spectrum, Error, FunctionSpec, Hyperrectangle,
};

const SCHEMA: &str = "hyperspec/1";

#[derive(Parser)]
#[command(
    name = "hyperspec",
    version,
    about = "Hadamard spectra of box distance matrices, Manhattan metric transforms, \
             monotone-function testing, and entrywise rank experiments",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FnArg {
    /// Function spec: inline JSON or a path to a JSON file.
    #[arg(long = "fn", value_name = "JSON|PATH")]
    function: String,
}

impl FnArg {
    fn parse(&self) -> Result<FunctionSpec, String> {
        let text = if self.function.trim_start().starts_with('{') {
            self.function.clone()
        } else {
            std::fs::read_to_string(&self.function)
                .map_err(|e| format!("cannot read {}: {e}", self.function))?
        };
        FunctionSpec::from_json(&text).map_err(|e| e.to_string())
    }
}

fn parse_sides(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("invalid side {t:?}: {e}"))
        })
        .collect()
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the box distance matrix, indexed by character.
    Spectrum {
        /// Comma-separated side lengths.
        #[arg(long)]
        sides: String,
        #[command(flatten)]
        function: FnArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Conjugation check: off-diagonal mass of H D H and reconstruction error.
    Diagcheck {
        #[arg(long)]
        sides: String,
        #[command(flatten)]
        function: FnArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled complete-monotonicity test (exit 2 with witness on refutation).
    CheckCm {
        #[command(flatten)]
        function: FnArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled Bernstein test (exit 2 with witness on refutation).
    CheckBernstein {
        #[command(flatten)]
        function: FnArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite an l1 point set as corners of a weighted hypercube.
    EmbedCube {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a Bernstein transform, materializing the output points.
    Transform {
        #[arg(long)]
        points: PathBuf,
        #[command(flatten)]
        function: FnArg,
        /// Where to write the transformed points as CSV (plus sidecar).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Negative-type test of f(pairwise l1 distances); requires f(0) = 0.
    Negtype {
        #[arg(long)]
        points: PathBuf,
        #[command(flatten)]
        function: FnArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Positive-semidefiniteness of the kernel matrix on a point set.
    KernelPsd {
        #[arg(long)]
        points: PathBuf,
        #[command(flatten)]
        function: FnArg,
        /// Absolute PSD tolerance override.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search box spectra for a kernel counterexample (exit 2 when found).
    KernelWitness {
        #[command(flatten)]
        function: FnArg,
        /// Largest box dimension to search.
        #[arg(long, default_value_t = 4)]
        d: usize,
        /// Samples per dimension.
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The binomial entrywise rank bound 2 C(r + floor(deg/2) - 1, floor(deg/2)).
    RankBound {
        #[arg(long)]
        rank: u64,
        #[arg(long)]
        degree: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entrywise rank experiment on the M(a) family.
    RankExperiment {
        #[command(flatten)]
        function: FnArg,
        /// Matrix size; a power of two up to 256.
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "xor|abs_diff", default_value = "xor")]
        variant: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Alternating difference quotient vs. the exact d-th derivative.
    DiffLimit {
        #[command(flatten)]
        function: FnArg,
        /// Comma-separated base-point coordinates a (d = their count).
        #[arg(long)]
        sides: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    version: &'static str,
    operation: &'static str,
    tag: &'static str,
    config: Value,
    verdict: Option<bool>,
    result: Value,
}

struct Outcome {
    report: Report,
    out: Option<PathBuf>,
}

fn threads_from_env() -> Result<usize, String> {
    match std::env::var("HYPERSPEC_THREADS") {
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                format!("HYPERSPEC_THREADS must be a positive integer, got {raw:?}")
            })?;
            if n == 0 {
                return Err("HYPERSPEC_THREADS must be at least 1".into());
            }
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism()
            .map_or(1, |n| n.get())
            .min(8)),
    }
}

fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report payloads serialize")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage problems are exit 1; --help/--version print and exit 0.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize");
            println!("{text}");
            if let Some(path) = outcome.out {
                if let Err(e) = std::fs::write(&path, format!("{text}\n")) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            match outcome.report.verdict {
                Some(false) => ExitCode::from(2),
                _ => ExitCode::SUCCESS,
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<Outcome, String> {
    match command {
        Command::Spectrum {
            sides,
            function,
            out,
        } => {
            let sides = parse_sides(&sides)?;
            let f = function.parse()?;
            let rect = Hyperrectangle::new(sides.clone()).map_err(|e| e.to_string())?;
            let spec = spectrum(&rect, &f).map_err(|e| e.to_string())?;
            Ok(Outcome {
                report: Report {
                    schema: SCHEMA,
                    version: env!("CARGO_PKG_VERSION"),
                    operation: "spectrum",
                    tag: "hadamard-spectrum",
                    config: json!({ "sides": sides, "fn": f }),
                    verdict: None,
                    result: to_value(&spec),
                },
                out,
            })
        }
        Command::Diagcheck {
            sides,
            function,
            out,
        } => {
            let sides = parse_sides(&sides)?;
            let f = function.parse()?;
            let rect = Hyperrectangle::new(sides.clone()).map_err(|e| e.to_string())?;
            let check = diagonalization_check(&rect, &f).map_err(|e| e.to_string())?;
            let n = 1usize << check.d;
            let offdiag_bound = 1e-8 * check.matrix_scale * n as f64;
            let reconstruction_bound = 1e-8 * check.matrix_scale;
            let verdict = check.max_offdiag <= offdiag_bound
                && check.reconstruction_error <= reconstruction_bound;
            Ok(Outcome {
                report: Report {
                    schema: SCHEMA,
                    version: env!("CARGO_PKG_VERSION"),
                    operation: "diagcheck",
                    tag: "hadamard-diagonalization",
                    config: json!({
                        "sides": sides,
                        "fn": f,
                        "offdiag_bound": offdiag_bound,
                        "reconstruction_bound": reconstruction_bound,
                    }),
                    verdict: Some(verdict),
                    result: to_value(&check),
                },
                out,
            })
        }
        Command::CheckCm { function, out } => {
            let f = function.parse()?;
            let grid = SampleGrid::standard();
            let verdict = cm_test(&f, &grid, 6).map_err(|e| e.to_string())?;
            Ok(Outcome {
                report: Report {
                    schema: SCHEMA,
                    version: env!("CARGO_PKG_VERSION"),
                    operation: "check-cm",
                    tag: "complete-monotonicity",
                    config: json!({
                        "fn": f,
                        "grid": grid,
                        "max_order": 6,
                        "max_order_cap": MAX_TEST_ORDER,
                        "violation_tolerance_relative": 1e-9,
                    }),
                    verdict: Some(verdict.holds),
                    result: to_value(&verdict),
                },
                out,
            })
        }
        Command::CheckBernstein { function, out } => {
            let f = function.parse()?;
            let grid = SampleGrid::standard();
            let verdict = bernstein_test(&f, &grid, 6).map_err(|e| e.to_string())?;
            Ok(Outcome {
                report: Report {
                    schema: SCHEMA,
                    version: env!("CARGO_PKG_VERSION"),
                    operation: "check-bernstein",
                    tag: "bernstein-criterion",
                    config: json!({
                        "fn": f,
                        "grid": grid,
                        "max_order": 6,
                        "max_order_cap": MAX_TEST_ORDER,
                        "violation_tolerance_relative": 1e-9,
                    }),
                    verdict: Some(verdict.holds),
                    result: to_value(&verdict),
                },
                out,
            })
        }
        Command::EmbedCube { points, out } => {
            let x = io::read_points(&points)?;
            let cube = cut_embedding(&x).map_err(|e| e.to_string())?;
            let mut max_rel_err = 0.0f64;
            for i in 0..x.len() {
                for j in (i + 1)..x.len() {
                    let want = x.l1_distance(i, j);
                    let got = cube.distance(i, j);
                    max_rel_err = max_rel_err.max((got - want).abs() / (1.0 + want));
                }
            }
            Ok(Outcome {
                report: Report {
                    schema: SCHEMA,
                    version: env!("CARGO_PKG_VERSION"),
                    operation: "embed-cube",
                    tag: "cut-embedding",
                    config: json!({ "points": points.display().to_string(), "n": x.len(), "m": x.dim() }),
                    verdict: None,
                    result: json!({
                        "sides": cube.sides,
                        "bits": cube.bits,
                        "dimension": cube.dim(),
                        "max_relative_distance_error": max_rel_err,
                    }),
                },
                out,
            })
        }
        Command::Transform {
            points,
            function,
            out,
        } => {
            let x = io::read_points(&points)?;
            let f = function.parse()?;
            if x.len() * x.dim() > 20 {
                return Err(format!(
                    "transform accepts n*m <= 20 points x coordinates (the output cube \
                     has 2^(cut axes) corners), got n={} m={}",
                    x.len(),
                    x.dim()
                ));
            }
            let config = json!({
                "points": points.display().to_string(),
                "fn": f,
                "n": x.len(),
                "m": x.dim(),
                "output": out.as_ref().map(|p| p.display().to_string()),
            });
            match manhattan_transform(&x, &f) {
                Ok(q) => {
                    let distances: Vec<Vec<f64>> = (0..q.len())
                        .map(|i| (0..q.len()).map(|j| q.l1_distance(i, j)).collect())
                        .collect();
                    let mut max_rel_err = 0.0f64;
                    for i in 0..x.len() {
                        for j in 0..x.len() {
                            let want = f.eval(x.l1_distance(i, j)).map_err(|e| e.to_string())?;
                            max_rel_err = max_rel_err
                                .max((distances[i][j] - want).abs() / (1.0 + want.abs()));
                        }
                    }
                    if let Some(path) = &out {
                        io::write_points(path, &q)?;
                    }
                    Ok(Outcome {
                        report: Report {
                            schema: SCHEMA,
                            version: env!("CARGO_PKG_VERSION"),
                            operation: "transform",
                            tag: "manhattan-transform",
                            config,
                            verdict: Some(true),
                            result: json!({
                                "output_dimension": q.dim(),
                                "pairwise_l1": distances,
                                "max_relative_error": max_rel_err,
                            }),
                        },
                        // The points CSV goes to --out; the report to stdout.
                        out: None,
                    })
                }
                Err(Error::NotBernstein(witness)) => Ok(Outcome {
                    report: Report {
                        schema: SCHEMA,
                        version: env!("CARGO_PKG_VERSION"),
                        operation: "transform",
                        tag: "manhattan-transform",
                        config,
                        verdict: Some(false),
                        result: json!({ "refutation": "not_bernstein", "witness": witness }),
                    },
                    out: None,
                }),
                Err(Error::NegativeType { chi, lambda }) => Ok(Outcome {
                    report: Report {
                        schema: SCHEMA,
                        version: env!("CARGO_PKG_VERSION"),
                        operation: "transform",
                        tag: "manhattan-transform",
                        config,
                        verdict: Some(false),
                        result: json!({
                            "refutation": "negative_type_violation",
                            "chi": chi,
                            "lambda": lambda,
                        }),
                    },
                    out: None,
                }),
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Negtype {
            points,
            function,
            out,
        } => {
            let x = io::read_points(&points)?;
            let f = function.parse()?;
            let n = x.len();
            let mut rows = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        rows[i][j] = f.eval(x.l1_distance(i, j)).map_err(|e| e.to_string())?;
                    }
                }
            }
            let f0 = f.eval(0.0).map_err(|e| e.to_string())?;
            if f0 != 0.0 {
                return Err(format!(
                    "negtype expects f(0) = 0 so the matrix has a zero diagonal; got f(0) = {f0}"
                ));
            }
            let d = hyperspec::SymMatrix::from_rows(&rows).map_err(|e| e.to_string())?;
            let verdict = negative_type_test(&d).map_err(|e| e.to_string())?;
            Ok(Outcome {
                report: Report {
                    schema: SCHEMA,
                    version: env!("CARGO_PKG_VERSION"),
                    operation: "negtype",
                    tag: "negative-type",
                    config: json!({
                        "points": points.display().to_string(),
                        "fn": f,
                        "n": n,
                        "tolerance": verdict.tolerance,
                    }),
                    verdict: Some(verdict.holds),
                    result: to_value(&verdict),
                },
                out,
            })
        }
        Command::KernelPsd {
            points,
            function,
            tol,
            out,
        } => {
            let x = io::read_points(&points)?;
            let f = function.parse()?;
            let m = kernel_matrix(&x, &f).map_err(|e| e.to_string())?;
            let verdict = psd_verdict(&m, tol).map_err(|e| e.to_string())?;
            Ok(Outcome {
                report: Report {
                    schema: SCHEMA,
                    version: env!("CARGO_PKG_VERSION"),
                    operation: "kernel-psd",
                    tag: "manhattan-kernel-psd",
                    config: json!({
                        "points": points.display().to_string(),
                        "fn": f,
                        "n": x.len(),
                        "tolerance": verdict.tolerance,
                    }),
                    verdict: Some(verdict.is_psd),
                    result: to_value(&verdict),
                },
                out,
            })
        }
        Command::KernelWitness {
            function,
            d,
            trials,
            seed,
            out,
        } => {
            let f = function.parse()?;
            let witness = cm_witness_search(&f, d, trials, seed).map_err(|e| e.to_string())?;
            let found = witness.is_some();
            let result = match &witness {
                Some(w) => {
                    let points = w.witness_points().map_err(|e| e.to_string())?;
                    json!({ "witness": w, "witness_points": points })
                }
                None => json!({ "witness": null }),
            };
            Ok(Outcome {
                report: Report {
                    schema: SCHEMA,
                    version: env!("CARGO_PKG_VERSION"),
                    operation: "kernel-witness",
                    tag: "cm-kernel-witness",
                    config: json!({ "fn": f, "d_max": d, "samples": trials, "seed": seed }),
                    // Found witness = the kernel property is refuted.
                    verdict: Some(!found),
                    result,
                },
                out,
            })
        }
        Command::RankBound { rank, degree, out } => {
            let bound = poly_rank_bound(rank, degree).map_err(|e| e.to_string())?;
            Ok(Outcome {
                report: Report {
                    schema: SCHEMA,
                    version: env!("CARGO_PKG_VERSION"),
                    operation: "rank-bound",
                    tag: "polynomial-rank-bound",
                    config: json!({ "rank": rank, "degree": degree }),
                    verdict: None,
                    result: json!({ "bound": bound.to_string() }),
                },
                out,
            })
        }
        Command::RankExperiment {
            function,
            n,
            trials,
            seed,
            variant,
            out,
        } => {
            if variant != "xor" {
                return Err(format!(
                    "rank-experiment runs on the xor variant; {variant:?} is only \
                     available through the library's walsh_family"
                ));
            }
            let f = function.parse()?;
            let threads = threads_from_env()?;
            let report = rank_lab::converse_experiment(&f, n, trials, seed, threads)
                .map_err(|e| e.to_string())?;
            // For polynomial specs the report carries the binomial bound; the
            // verdict records whether every observed rank respected it.
            let verdict = report.bound_from_fact.as_ref().map(|bound| {
                let bound: u128 = bound.parse().unwrap_or(u128::MAX);
                report
                    .trial_results
                    .iter()
                    .all(|t| (t.rank_fm as u128) <= bound)
            });
            Ok(Outcome {
                report: Report {
                    schema: SCHEMA,
                    version: env!("CARGO_PKG_VERSION"),
                    operation: "rank-experiment",
                    tag: "entrywise-rank",
                    config: json!({
                        "fn": f,
                        "n": n,
                        "trials": trials,
                        "seed": seed,
                        "variant": variant,
                        "threads": threads,
                        "rel_tol": DEFAULT_RANK_REL_TOL,
                    }),
                    verdict,
                    result: to_value(&report),
                },
                out,
            })
        }
        Command::DiffLimit {
            function,
            sides,
            eps,
            out,
        } => {
            let a = parse_sides(&sides)?;
            let f = function.parse()?;
            let estimate = rank_lab::dth_difference(&f, &a, eps).map_err(|e| e.to_string())?;
            let x0: f64 = a.iter().sum();
            let exact = if x0 > 0.0 {
                f.derivative(a.len(), x0).ok()
            } else {
                None
            };
            Ok(Outcome {
                report: Report {
                    schema: SCHEMA,
                    version: env!("CARGO_PKG_VERSION"),
                    operation: "diff-limit",
                    tag: "difference-derivative-limit",
                    config: json!({ "fn": f, "a": a, "d": a.len(), "eps": eps }),
                    verdict: None,
                    result: json!({
                        "estimate": estimate,
                        "exact_derivative": exact,
                        "abs_error": exact.map(|e| (estimate - e).abs()),
                        "base_point": x0,
                    }),
                },
                out,
            })
        }
    }
}
