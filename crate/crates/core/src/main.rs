use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use robinson_fit::io::{heatmap_ppm, parse_matrix, parse_order, write_matrix, write_order, CrossCheck, MatrixFile, ResultRecord};
use robinson_fit::oracle::{exact_fit, gen_robinson, perturb};
use robinson_fit::solver::{dump_graphs, fit_with, SearchMode};
use robinson_fit::compatibility_violation;

/// Approximate l-infinity fitting of a dissimilarity by a Robinsonian one.
#[derive(Parser)]
#[command(name = "robfit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Search {
    Binary,
    Linear,
}

impl From<Search> for SearchMode {
    fn from(s: Search) -> Self {
        match s {
            Search::Binary => SearchMode::Binary,
            Search::Linear => SearchMode::Linear,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit a Robinsonian dissimilarity and report the order and error.
    Fit {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "binary")]
        search: Search,
        /// Include the fitted matrix (input element order).
        #[arg(long)]
        emit_fitted: bool,
        /// Include every ε tried by the search.
        #[arg(long)]
        trace: bool,
        /// Write the input matrix, reordered, as a binary PPM.
        #[arg(long, value_name = "PATH")]
        heatmap: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        /// Rerun with the other search mode and report whether both agree.
        #[arg(long)]
        cross_check: bool,
        /// Write the cell graphs at the accepted ε as DOT.
        #[arg(long, value_name = "PATH")]
        dump_graphs: Option<PathBuf>,
    },
    /// Check that an order is ε-compatible with a matrix (exit 1 if not).
    Verify {
        input: PathBuf,
        order: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// Exact optimum by exhaustive search (at most 9 elements).
    Oracle {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generate a random Robinsonian matrix, optionally perturbed, with its
    /// hidden order in `<out>.order`.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

// Failures reported with exit code 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Usage> {
    fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Usage> {
    fs::write(path, bytes).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn load_matrix(path: &Path) -> Result<MatrixFile, Usage> {
    parse_matrix(&read(path)?).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct OracleRecord {
    epsilon_star: f64,
    witness_order: Vec<String>,
}

fn run(cli: Cli) -> Result<ExitCode, Usage> {
    match cli.command {
        Command::Fit {
            input,
            search,
            emit_fitted,
            trace,
            heatmap,
            json,
            cross_check,
            dump_graphs: dump,
        } => {
            let m = load_matrix(&input)?;
            let mode = SearchMode::from(search);
            let report = fit_with(&m.d, mode);
            let mut record = ResultRecord::from_report(&m, &report, trace, emit_fitted);
            if cross_check {
                let other = match mode {
                    SearchMode::Binary => SearchMode::Linear,
                    SearchMode::Linear => SearchMode::Binary,
                };
                let r = fit_with(&m.d, other).result;
                record.cross_check = Some(CrossCheck {
                    search_mode: other.name().to_string(),
                    accepted_epsilon: r.accepted_epsilon,
                    agree: r.accepted_epsilon == report.result.accepted_epsilon,
                });
            }
            if let Some(path) = heatmap {
                write(&path, heatmap_ppm(&m.d, &report.result.order))?;
            }
            if let Some(path) = dump {
                let text = dump_graphs(&m.d, report.result.accepted_epsilon)
                    .unwrap_or_else(|e| format!("// eps {}: {e:?}\n", report.result.accepted_epsilon));
                write(&path, text)?;
            }
            print!("{}", if json { record.to_json() } else { record.to_text() });
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { input, order, eps } => {
            let m = load_matrix(&input)?;
            let o = parse_order(&read(&order)?, &m).map_err(|e| Usage(format!("{}: {e}", order.display())))?;
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(Usage(format!("eps must be a nonnegative number, got {eps}")));
            }
            let v = compatibility_violation(&m.d, &o);
            let pass = v <= eps;
            println!("violation: {v}\neps: {eps}\nresult: {}", if pass { "pass" } else { "fail" });
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Oracle { input, json } => {
            let m = load_matrix(&input)?;
            let r = exact_fit(&m.d)?;
            let record = OracleRecord {
                epsilon_star: r.epsilon_star,
                witness_order: m.order_labels(&r.witness_order),
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&record)?);
            } else {
                println!("epsilon_star: {}\nwitness_order: {}", record.epsilon_star, record.witness_order.join(" "));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen { n, eta, seed, out } => {
            if !(eta >= 0.0 && eta.is_finite()) {
                return Err(Usage(format!("eta must be a nonnegative number, got {eta}")));
            }
            let p = gen_robinson(n, seed)?;
            let m = MatrixFile::unlabelled(perturb(&p.d, eta, seed));
            let mut sidecar = out.clone().into_os_string();
            sidecar.push(".order");
            let sidecar = PathBuf::from(sidecar);
            write(&out, write_matrix(&m))?;
            write(&sidecar, write_order(&p.hidden_order, &m))?;
            println!("matrix: {}\norder: {}", out.display(), sidecar.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(Usage(msg)) => {
            eprintln!("robfit: {msg}");
            ExitCode::from(2)
        }
    }
}
