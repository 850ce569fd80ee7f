use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use landscape_core::catalog::{decompose, enumerate, EnumerationMode, Permutation};
use landscape_core::ensemble::{naimark_dilate, rescale_to_povm, validate};
use landscape_core::export;
use landscape_core::io::{load_matrix, load_problem, parse_problem, problem_to_string};
use landscape_core::landscape::{classify_with, evaluate, Classification, Direction};
use landscape_core::optimizer::{critical_point_survey, run_seeds, OptimizerConfig};
use landscape_core::traps::{certify_trap, corollary2_check, survey_decomposition};
use landscape_core::{bundled, Error, Matrix, Problem, Tolerances};

const AFTER_HELP: &str = "\
Problems: --problem accepts a path, a path without its .json extension, or
the name of a bundled example (opt1, nonuniqueness, povm-dilation,
epsilon-family, appendix-distinguishable); `examples/opt1` also resolves to
the bundled file when no such file exists.

Unitaries: `identity`, `perm:3,2,4,1` (one-line notation, 1-based, sending
basis vector k to position pi(k)), or a path to a matrix file.

Delimited columns:
  enumerate     permutation,value,classification,multiplicity,min_hessian,max_hessian
  detect-traps  value,count,classification,reconcilable,false_trap,first_permutation
  optimize      seed,iterations,terminal_value,terminal_residual,classification,reconcilable,converged
  survey --raw  seed,iterations,converged,value,residual,classification,reconcilable
  histograms    value_bin,count,reconcilable,classification

Permutations in catalogs and census tables refer to the block frame, in
which every state and operator is diagonal with dominant blocks in order.

Environment: LANDSCAPE_THREADS sets the number of worker threads.
Exit codes: 0 success, 1 domain error (JSON object on stderr), 2 usage error.";

#[derive(Parser)]
#[command(name = "landscape", version, about = "Landscape analysis for F(U) = sum_m w_m Tr[U rho_m U^dag O_m]", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Delimited,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OptMode {
    Ascend,
    Descend,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EnumMode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TrapMode {
    Exhaustive,
    Corollary2,
}

#[derive(Args)]
struct ProblemArg {
    /// Problem file or bundled example name.
    #[arg(long)]
    problem: String,
}

#[derive(Args)]
struct Output {
    /// Write the primary output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a problem and report its structure.
    Validate {
        #[command(flatten)]
        problem: ProblemArg,
    },
    /// Evaluate F at a unitary.
    Evaluate {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        unitary: String,
        #[command(flatten)]
        output: Output,
    },
    /// Test criticality and classify by the Hessian.
    Classify {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        unitary: String,
        /// Treat the point as numerical with this gradient tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Catalog reconcilable critical points of a commuting problem.
    Enumerate {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: EnumMode,
        /// Number of sampled permutations.
        #[arg(long, default_value_t = 1000)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Find and certify false traps among reconcilable critical points.
    DetectTraps {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: TrapMode,
        /// Certify this point instead of surveying all permutations.
        #[arg(long)]
        unitary: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Run gradient ascent or descent from random starts.
    Optimize {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, value_enum, default_value = "ascend")]
        mode: OptMode,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
        /// Gradient-norm stopping tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Also write a terminal-value histogram here.
        #[arg(long)]
        histogram: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-3)]
        bin_width: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Locate critical points numerically and categorize them.
    Survey {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, default_value_t = 1000)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
        /// Residual tolerance for accepting a critical point.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Also write per-seed records here.
        #[arg(long)]
        raw: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-3)]
        bin_width: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Write the Naimark dilation of a POVM problem.
    Dilate {
        #[command(flatten)]
        problem: ProblemArg,
        /// Rescale and complete the operators to a POVM first.
        #[arg(long)]
        rescale: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the bundled example problems.
    Examples {
        #[arg(long, default_value = "problems")]
        out: PathBuf,
    },
}

fn resolve_problem(spec: &str) -> Result<Problem, Error> {
    let path = Path::new(spec);
    if path.is_file() {
        return load_problem(path);
    }
    let with_ext = PathBuf::from(format!("{spec}.json"));
    if with_ext.is_file() {
        return load_problem(&with_ext);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
    match bundled::file_contents(stem) {
        Some(text) => parse_problem(text),
        None => Err(Error::Field {
            field: "problem".into(),
            message: format!("no problem file or bundled example named `{spec}`"),
        }),
    }
}

fn resolve_unitary(spec: &str, dim: usize) -> Result<Matrix, Error> {
    if spec == "identity" {
        return Ok(Matrix::identity(dim, dim));
    }
    if let Some(p) = spec.strip_prefix("perm:") {
        let pi: Permutation = p.parse()?;
        if pi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: pi.len(),
            });
        }
        return Ok(pi.matrix());
    }
    load_matrix(spec)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn csv_text(f: impl FnOnce(&mut Vec<u8>) -> Result<(), Error>) -> Result<String, Error> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(String::from_utf8(buf).expect("utf-8"))
}

fn to_value<S: serde::Serialize>(x: &S) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Validate { problem } => {
            let p = resolve_problem(&problem.problem)?;
            let mut report = to_value(&validate(&p));
            report["dimension"] = json!(p.dimension());
            report["terms"] = json!(p.len());
            emit(&None, &pretty(&report))
        }
        Command::Evaluate { problem, unitary, output } => {
            let p = resolve_problem(&problem.problem)?;
            let u = resolve_unitary(&unitary, p.dimension())?;
            let v = evaluate(&p, &u)?;
            let text = match output.format.unwrap_or(Format::Structured) {
                Format::Structured => pretty(&json!({ "value": v })),
                Format::Delimited => format!("value\n{}\n", export::real_field(v)),
            };
            emit(&output.out, &text)
        }
        Command::Classify {
            problem,
            unitary,
            tol,
            output,
        } => {
            let p = resolve_problem(&problem.problem)?;
            let u = resolve_unitary(&unitary, p.dimension())?;
            let tolerances = match tol {
                Some(t) => Tolerances::numerical(&p, t),
                None => Tolerances::for_problem(&p),
            };
            let r = classify_with(&p, &u, &tolerances)?;
            let text = match output.format.unwrap_or(Format::Structured) {
                Format::Structured => pretty(&to_value(&r)),
                Format::Delimited => {
                    let lo = r.hessian_spectrum.first().copied().unwrap_or(0.0);
                    let hi = r.hessian_spectrum.last().copied().unwrap_or(0.0);
                    format!(
                        "value,residual,classification,reconcilable,min_hessian,max_hessian\n{},{},{},{},{},{}\n",
                        export::real_field(r.value),
                        export::real_field(r.residual),
                        r.classification,
                        r.reconcilable,
                        export::real_field(lo),
                        export::real_field(hi)
                    )
                }
            };
            emit(&output.out, &text)
        }
        Command::Enumerate {
            problem,
            mode,
            seeds,
            seed_offset,
            output,
        } => {
            let p = resolve_problem(&problem.problem)?;
            let dec = decompose(&p)?;
            let mode = match mode {
                EnumMode::Exhaustive => EnumerationMode::Exhaustive,
                EnumMode::Sampled => EnumerationMode::Sampled {
                    count: seeds,
                    seed: seed_offset,
                },
            };
            let points = enumerate(&dec, mode)?;
            let text = match output.format.unwrap_or(Format::Delimited) {
                Format::Delimited => csv_text(|b| export::write_catalog(b, &points))?,
                Format::Structured => pretty(&json!({
                    "state_blocks": dec.state_blocks,
                    "operator_blocks": dec.operator_blocks,
                    "points": to_value(&points),
                })),
            };
            emit(&output.out, &text)
        }
        Command::DetectTraps {
            problem,
            mode,
            unitary,
            output,
        } => {
            let p = resolve_problem(&problem.problem)?;
            let dec = decompose(&p)?;
            if let Some(spec) = unitary {
                let u = resolve_unitary(&spec, p.dimension())?;
                let pi = dec.frame_permutation(&u).ok_or_else(|| Error::Field {
                    field: "unitary".into(),
                    message: "not a permutation point of the block frame".into(),
                })?;
                let cert = certify_trap(&dec.point(&pi)?, &dec)?;
                let mut v = to_value(&cert);
                v["witness_cycle"] = json!(cert.witness_one_based());
                v["permutation"] = json!(pi.to_string());
                return emit(&output.out, &pretty(&v));
            }
            match mode {
                TrapMode::Corollary2 => {
                    let out = corollary2_check(&dec)?;
                    let witness = out.witness.as_ref().map(|w| {
                        json!({
                            "blocks": w.blocks.iter().map(|b| b + 1).collect::<Vec<_>>(),
                            "positions": w.positions.iter().map(|k| k + 1).collect::<Vec<_>>(),
                            "permutation": w.permutation.to_string(),
                        })
                    });
                    emit(&output.out, &pretty(&json!({ "traps_exist": out.traps_exist, "witness": witness })))
                }
                TrapMode::Exhaustive => {
                    let census = survey_decomposition(&dec)?;
                    if output.format == Some(Format::Delimited) {
                        return emit(&output.out, &csv_text(|b| export::write_census(b, &census))?);
                    }
                    let certifiable = dec.blocks_match() && dec.operators_projective();
                    let traps = |class: Classification| -> Result<Vec<Value>, Error> {
                        census
                            .entries
                            .iter()
                            .filter(|e| e.false_trap && e.classification == class)
                            .map(|e| {
                                let witness = if certifiable && class == Classification::LocalMax {
                                    certify_trap(&dec.point(&e.first)?, &dec)?.witness_one_based()
                                } else {
                                    None
                                };
                                Ok(json!({
                                    "value": e.value,
                                    "count": e.count,
                                    "permutation": e.first.to_string(),
                                    "witness_cycle": witness,
                                }))
                            })
                            .collect()
                    };
                    let report = json!({
                        "permutations": census.permutations,
                        "state_blocks": dec.state_blocks,
                        "operator_blocks": dec.operator_blocks,
                        "global_max": census.global_max,
                        "global_min": census.global_min,
                        "false_traps": traps(Classification::LocalMax)?,
                        "minimization_traps": traps(Classification::LocalMin)?,
                    });
                    emit(&output.out, &pretty(&report))
                }
            }
        }
        Command::Optimize {
            problem,
            mode,
            seeds,
            seed_offset,
            tol,
            max_iters,
            histogram,
            bin_width,
            output,
        } => {
            let p = resolve_problem(&problem.problem)?;
            let direction = match mode {
                OptMode::Ascend => Direction::Ascend,
                OptMode::Descend => Direction::Descend,
            };
            let mut config = OptimizerConfig::with_mode(direction);
            if let Some(t) = tol {
                config.grad_tol = t;
            }
            if let Some(n) = max_iters {
                config.max_iters = n;
            }
            let seed_list: Vec<u64> = (seed_offset..seed_offset + seeds).collect();
            let runs = run_seeds(&p, &config, &seed_list)?;
            if let Some(path) = histogram {
                let rows = export::run_histogram(&runs, bin_width);
                fs::write(path, csv_text(|b| export::write_histogram(b, &rows))?)?;
            }
            let text = match output.format.unwrap_or(Format::Delimited) {
                Format::Delimited => csv_text(|b| export::write_runs(b, &runs))?,
                Format::Structured => pretty(&json!({
                    "config": to_value(&config),
                    "terminal_values": landscape_core::optimizer::terminal_value_set(&runs, 6),
                    "runs": to_value(&runs),
                })),
            };
            emit(&output.out, &text)
        }
        Command::Survey {
            problem,
            seeds,
            seed_offset,
            tol,
            raw,
            bin_width,
            output,
        } => {
            let p = resolve_problem(&problem.problem)?;
            let seed_list: Vec<u64> = (seed_offset..seed_offset + seeds).collect();
            let survey = critical_point_survey(&p, &seed_list, tol)?;
            if let Some(path) = raw {
                fs::write(path, csv_text(|b| export::write_outcomes(b, &survey.outcomes))?)?;
            }
            let text = match output.format.unwrap_or(Format::Delimited) {
                Format::Delimited => {
                    let rows = export::outcome_histogram(&survey.outcomes, bin_width);
                    csv_text(|b| export::write_histogram(b, &rows))?
                }
                Format::Structured => pretty(&to_value(&survey)),
            };
            emit(&output.out, &text)
        }
        Command::Dilate { problem, rescale, out } => {
            let p = resolve_problem(&problem.problem)?;
            let (base, record) = if rescale {
                let (q, r) = rescale_to_povm(&p, true)?;
                (q, Some(r))
            } else {
                (p, None)
            };
            let dil = naimark_dilate(&base)?;
            if let Some(r) = record {
                eprintln!("{}", serde_json::to_string(&json!({ "affine": to_value(&r) })).expect("serializable"));
            }
            let mut text = problem_to_string(&dil.problem);
            text.push('\n');
            emit(&out, &text)
        }
        Command::Examples { out } => {
            fs::create_dir_all(&out)?;
            for name in bundled::NAMES {
                let text = bundled::file_contents(name).expect("bundled file");
                fs::write(out.join(format!("{name}.json")), text)?;
            }
            emit(&None, &pretty(&json!({ "written": bundled::NAMES, "directory": out })))
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("LANDSCAPE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("LANDSCAPE_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let obj = json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{obj}");
            ExitCode::from(1)
        }
    }
}
