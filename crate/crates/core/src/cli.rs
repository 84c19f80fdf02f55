//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 parse or I/O error, 3 violated
//! precondition, 4 convergence failure. With `--json`, errors are written to
//! stderr as `{"error", "message", "exit_code"}` objects.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::io::{self, Format};
use crate::matrix::Matrix;
use crate::oracle::{self, InstanceSpec};
use crate::report::{self, canonical_json, AnalyzeOptions};
use crate::{balancing, perron, variational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::NonSquare { .. } | Error::NonFinite { .. } | Error::Io(_) => EXIT_PARSE,
        Error::NoConvergence { .. } | Error::SaddleNoConvergence { .. } => EXIT_CONVERGENCE,
        Error::InvalidInstance(_) => EXIT_USAGE,
        Error::NotIrreducible
        | Error::NotNonnegative
        | Error::NotMetzler
        | Error::DimensionMismatch { .. }
        | Error::Empty
        | Error::NotPositive { .. }
        | Error::NotOnSimplex { .. } => EXIT_PRECONDITION,
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "perron-saddle",
    version,
    about = "Perron roots and spectral bounds with checkable certificates"
)]
struct Cli {
    /// Report errors as JSON on stderr (and tables as JSON on stdout).
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Input {
    /// Matrix file (Matrix Market or CSV); `-` reads stdin.
    file: PathBuf,
    /// Input format; detected from the banner or extension when omitted.
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse()
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SaddleChoice {
    Direct,
    Iterative,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every method and print the full report.
    Analyze {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = perron::DEFAULT_TOL)]
        tol: f64,
        /// Collatz–Wielandt interval width.
        #[arg(long, default_value_t = perron::DEFAULT_TOL)]
        eps: f64,
        #[arg(long, default_value_t = variational::DEFAULT_DIRECT_TOL)]
        direct_tol: f64,
        #[arg(long, default_value_t = variational::DEFAULT_ITERATIVE_TOL)]
        iterative_tol: f64,
        #[arg(long, default_value_t = oracle::DEFAULT_EPS)]
        oracle_eps: f64,
        /// Run the oracle even above n = 64.
        #[arg(long)]
        force_oracle: bool,
        /// Record wall times (output is then no longer byte-stable).
        #[arg(long)]
        timings: bool,
    },
    /// Certified Collatz–Wielandt interval.
    Bounds {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = perron::DEFAULT_TOL)]
        eps: f64,
    },
    /// Scale to line-sum symmetry.
    Balance {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = balancing::DEFAULT_TOL)]
        tol: f64,
        /// Also write the balanced matrix (Matrix Market array).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Perron symmetrizer D_ŷ A D_ŷ⁻¹ with ŷ = √(u/v).
    Symmetrize {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = perron::DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Saddle certificate for the scaled Rayleigh quotient.
    Certify {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = SaddleChoice::Direct)]
        method: SaddleChoice,
        /// Defaults to 1e-10 (direct) or 1e-8 (iterative).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Spectral bound of an irreducible Metzler matrix.
    Sbound {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = variational::DEFAULT_DIRECT_TOL)]
        tol: f64,
    },
    /// Emit a seeded random irreducible instance.
    Gen {
        #[arg(long, required_unless_present = "config")]
        n: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Off-diagonal entries are drawn from [lo, hi].
        #[arg(long, default_value_t = 0.1)]
        lo: f64,
        #[arg(long, default_value_t = 10.0)]
        hi: f64,
        /// Overwrite the diagonal with draws from [diag-lo, diag-hi].
        #[arg(long)]
        metzler: bool,
        #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
        diag_lo: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        diag_hi: f64,
        /// JSON instance description; replaces the other generator flags.
        #[arg(long, conflicts_with_all = ["n", "metzler"])]
        config: Option<PathBuf>,
        /// Matrix Market layout of the output.
        #[arg(long, value_enum, default_value_t = Layout::Coordinate)]
        format: Layout,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Objective values at the Perron data.
    Compare {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = perron::DEFAULT_TOL)]
        tol: f64,
    },
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let json = cli.json;
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = exit_code(&e);
            if json {
                let mut body = json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code });
                if let Error::SaddleNoConvergence { best, .. } = &e {
                    body["best"] = serde_json::to_value(best.as_ref()).expect("serializable");
                }
                let _ = stderr.write_all(&canonical_json(&body));
            } else {
                let _ = writeln!(stderr, "error: {e}");
            }
            code
        }
    }
}

fn load(input: &Input) -> Result<Matrix> {
    io::read_matrix(&input.file, input.format)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

fn emit(stdout: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    stdout.write_all(bytes)?;
    Ok(())
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Analyze {
            input,
            tol,
            eps,
            direct_tol,
            iterative_tol,
            oracle_eps,
            force_oracle,
            timings,
        } => {
            let a = load(&input)?;
            let opts = AnalyzeOptions {
                perron_tol: tol,
                cw_eps: eps,
                direct_tol,
                iterative_tol,
                oracle_eps,
                force_oracle,
                timings,
            };
            emit(stdout, &report::write_report(&report::analyze(&a, &opts)?))
        }
        Command::Bounds { input, eps } => {
            let interval = perron::cw_certified_interval(&load(&input)?, eps)?;
            emit(
                stdout,
                &canonical_json(&json!({
                    "lo": interval.lo,
                    "hi": interval.hi,
                    "width": interval.width(),
                    "witness_x": interval.witness_x,
                    "eps": eps,
                })),
            )
        }
        Command::Balance { input, tol, out } => {
            let result = balancing::balance(&load(&input)?, tol)?;
            if let Some(path) = out {
                write_file(&path, &io::write_matrix_market_array(&result.balanced))?;
            }
            emit(stdout, &canonical_json(&result))
        }
        Command::Symmetrize { input, tol, out } => {
            let a = load(&input)?;
            a.classify().require_nonnegative_irreducible()?;
            let pp = perron::perron_pair(&a, tol)?;
            let y_hat = balancing::symmetrizing_scaling(&pp)?;
            let b = balancing::symmetrizer(&a, &pp)?;
            if let Some(path) = out {
                write_file(&path, &io::write_matrix_market_array(&b))?;
            }
            emit(
                stdout,
                &canonical_json(&json!({
                    "perron_root": pp.r,
                    "y_hat": y_hat,
                    "symmetrized": b,
                    "line_sum_residual": balancing::line_sum_residual(&b),
                })),
            )
        }
        Command::Certify { input, method, tol } => {
            let a = load(&input)?;
            let cert = match method {
                SaddleChoice::Direct => variational::saddle_direct(&a, tol.unwrap_or(variational::DEFAULT_DIRECT_TOL))?,
                SaddleChoice::Iterative => {
                    variational::saddle_iterative(&a, tol.unwrap_or(variational::DEFAULT_ITERATIVE_TOL))?
                }
            };
            emit(stdout, &canonical_json(&cert))
        }
        Command::Sbound { input, tol } => {
            let sb = variational::spectral_bound_with_certificate(&load(&input)?, tol)?;
            emit(stdout, &canonical_json(&sb))
        }
        Command::Gen {
            n,
            density,
            seed,
            lo,
            hi,
            metzler,
            diag_lo,
            diag_hi,
            config,
            format,
            out,
        } => {
            let spec = match config {
                Some(path) => {
                    let text = std::fs::read(&path)?;
                    serde_json::from_slice::<InstanceSpec>(&text)
                        .map_err(|e| Error::parse(e.line(), e.column(), format!("instance config: {e}")))?
                }
                None => {
                    let spec = InstanceSpec::new(n.expect("required by clap"), density, seed).with_entry_range(lo, hi);
                    if metzler {
                        spec.with_metzler_diag(diag_lo, diag_hi)
                    } else {
                        spec
                    }
                }
            };
            let a = oracle::gen_instance(&spec)?;
            let text = match format {
                Layout::Array => io::write_matrix_market_array(&a),
                Layout::Coordinate => io::write_matrix_market_coordinate(&a),
            };
            match out {
                Some(path) => write_file(&path, &text),
                None => emit(stdout, text.as_bytes()),
            }
        }
        Command::Compare { input, tol } => {
            let c = report::compare(&load(&input)?, tol)?;
            if cli.json {
                return emit(stdout, &canonical_json(&c));
            }
            let mut table = format!("{:<16} {}\n", "objective", "value");
            table.push_str(&format!("{:<16} {}\n", "perron_root", io::format_f64(c.perron_root)));
            for (name, v) in &c.values {
                table.push_str(&format!("{:<16} {}\n", name, io::format_f64(*v)));
            }
            table.push_str(&format!("{:<16} {}\n", "agreement", io::format_f64(c.agreement)));
            emit(stdout, table.as_bytes())
        }
    }
}
