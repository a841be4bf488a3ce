//! Command-line front end for `cindep`: reads a JSON model file, runs one
//! computation and prints the result or writes a CSV table.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use cindep::orderstats::{mrl, pair_cdf, single_cdf};
use cindep::{montecarlo, BivariateCopula, CandidateCopula, CiModel};
use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub mod modelfile;
pub mod output;

pub use modelfile::{parse_model, parse_model_str, QUAD_ORDER_ENV};
pub use output::{fmt_sig, parse_grid, ResultTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{at}: unknown {kind} family {name:?}")]
    UnknownFamily {
        at: String,
        kind: &'static str,
        name: String,
    },
    #[error("{at}: {family} needs parameter {name:?}")]
    MissingParameter {
        at: String,
        family: String,
        name: String,
    },
    #[error("{at}: {family} takes no parameter {name:?}")]
    UnexpectedParameter {
        at: String,
        family: String,
        name: String,
    },
    #[error("{at}: parameter out of range: {message}")]
    OutOfRange { at: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Model(cindep::Error),
    #[error("{0}")]
    Incompatible(String),
    #[error("usage: {0}")]
    Usage(String),
}

impl CliError {
    /// 2 for bad input (model file or argument values the model rejects),
    /// 3 for numerical failure, 4 for malformed command lines.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Model(e) if e.is_numerical() => EXIT_NUMERICAL,
            Self::Usage(_) => EXIT_USAGE,
            _ => EXIT_INVALID,
        }
    }
}

impl From<cindep::Error> for CliError {
    fn from(e: cindep::Error) -> Self {
        Self::Model(e)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cindep",
    version,
    about = "Conditionally independent copula models"
)]
pub struct Cli {
    /// JSON model file.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Joint copula C(u1..un), or C(u1..un, w) with --w.
    EvalCopula {
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        u: Vec<f64>,
        #[arg(long, allow_negative_numbers = true)]
        w: Option<f64>,
    },
    /// P{X_(r) <= x}.
    OrderCdf {
        #[arg(long)]
        r: usize,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
    },
    /// P{X_(r) <= x, X_(s) <= y}.
    PairCdf {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        y: f64,
    },
    /// Joint cdf F(x1..xn).
    JointCdf {
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        x: Vec<f64>,
    },
    /// P{Xi < Xj}; components are numbered from 1.
    Stress {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
    },
    /// Mean residual life E{X_(k) - t | X_(r) > t}.
    Mrl {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
    },
    /// Checks a candidate (n+1)-copula against conditional independence.
    VerifyCi {
        /// builtin:product, builtin:fgm-pair, builtin:direct-fgm or builtin:model
        #[arg(long)]
        candidate: String,
        #[arg(long, default_value_t = 11)]
        grid: usize,
    },
    /// Draws (X1..Xn, Z) rows as CSV.
    Sample {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulates a function over a grid `start:end:step` as CSV.
    Table {
        #[arg(long, value_enum)]
        op: TableOp,
        #[arg(long)]
        grid: String,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        s: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableOp {
    /// P{X_(r) <= x}; needs --r.
    OrderCdf,
    /// P{X_(r) <= x, X_(s) <= x}; needs --r and --s.
    PairCdf,
    /// F(x, .., x).
    JointCdf,
    /// Mean residual life at t; needs --k and --r.
    Mrl,
}

/// Runs a parsed command, writing human-readable output to `stdout`.
pub fn run<W: Write>(cli: &Cli, stdout: &mut W) -> Result<(), CliError> {
    let path = cli
        .model
        .as_deref()
        .ok_or_else(|| CliError::Usage("--model <PATH> is required".into()))?;
    let model = parse_model(path)?;
    let print = |out: &mut W, v: f64| writeln!(out, "{}", fmt_sig(v)).map_err(|e| stdout_error(&e));
    match &cli.command {
        Command::EvalCopula { u, w } => {
            let v = match w {
                Some(w) => model.joint_copula_with_z(u, *w)?,
                None => model.joint_copula(u)?,
            };
            print(stdout, v)
        }
        Command::OrderCdf { r, x } => print(stdout, single_cdf(&model, *r, *x)?),
        Command::PairCdf { r, s, x, y } => print(stdout, pair_cdf(&model, *r, *s, *x, *y)?),
        Command::JointCdf { x } => print(stdout, model.joint_cdf(x)?),
        Command::Stress { i, j } => {
            let (i, j) = (component_index(*i, "--i")?, component_index(*j, "--j")?);
            print(stdout, model.stress_strength(i, j)?)
        }
        Command::Mrl { k, r, t } => print(stdout, mrl(&model, *k, *r, *t)?),
        Command::VerifyCi { candidate, grid } => verify_ci(&model, candidate, *grid, stdout),
        Command::Sample { count, seed, out } => {
            if *count == 0 {
                return Err(CliError::Usage("--count must be positive".into()));
            }
            let batch = montecarlo::sample(&model, *count, *seed)?;
            let mut header: Vec<String> = (1..=model.n()).map(|i| format!("x{i}")).collect();
            header.push("z".into());
            let mut table = ResultTable::new(header);
            for row in batch.rows() {
                table.push(row.to_vec());
            }
            emit(&table, out.as_deref(), stdout)
        }
        Command::Table {
            op,
            grid,
            r,
            s,
            k,
            out,
        } => {
            let table = tabulate(&model, *op, &parse_grid(grid)?, *r, *s, *k)?;
            emit(&table, out.as_deref(), stdout)
        }
    }
}

fn stdout_error(e: &io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        message: e.to_string(),
    }
}

fn component_index(i: usize, flag: &str) -> Result<usize, CliError> {
    i.checked_sub(1)
        .ok_or_else(|| CliError::Usage(format!("{flag} counts from 1")))
}

fn emit<W: Write>(table: &ResultTable, out: Option<&Path>, stdout: &mut W) -> Result<(), CliError> {
    match out {
        None => table.write_csv(stdout).map_err(|e| stdout_error(&e)),
        Some(path) => {
            let io_err = |e: io::Error| CliError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            };
            let mut file = BufWriter::new(File::create(path).map_err(io_err)?);
            table.write_csv(&mut file).map_err(io_err)?;
            file.flush().map_err(io_err)
        }
    }
}

fn tabulate(
    model: &CiModel<f64>,
    op: TableOp,
    grid: &[f64],
    r: Option<usize>,
    s: Option<usize>,
    k: Option<usize>,
) -> Result<ResultTable, CliError> {
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| CliError::Usage(format!("--op {op:?} needs {flag}")))
    };
    let forbid = |v: Option<usize>, flag: &str| match v {
        Some(_) => Err(CliError::Usage(format!(
            "{flag} does not apply to this --op"
        ))),
        None => Ok(()),
    };
    let mut table;
    match op {
        TableOp::OrderCdf => {
            let r = need(r, "--r")?;
            forbid(s, "--s")?;
            forbid(k, "--k")?;
            table = ResultTable::new(vec!["x".into(), format!("cdf_r{r}")]);
            for &x in grid {
                table.push(vec![x, single_cdf(model, r, x)?]);
            }
        }
        TableOp::PairCdf => {
            let (r, s) = (need(r, "--r")?, need(s, "--s")?);
            forbid(k, "--k")?;
            table = ResultTable::new(vec!["x".into(), format!("cdf_r{r}_s{s}")]);
            for &x in grid {
                table.push(vec![x, pair_cdf(model, r, s, x, x)?]);
            }
        }
        TableOp::JointCdf => {
            forbid(r, "--r")?;
            forbid(s, "--s")?;
            forbid(k, "--k")?;
            table = ResultTable::new(vec!["x".into(), "joint_cdf".into()]);
            for &x in grid {
                table.push(vec![x, model.joint_cdf(&vec![x; model.n()])?]);
            }
        }
        TableOp::Mrl => {
            let (k, r) = (need(k, "--k")?, need(r, "--r")?);
            forbid(s, "--s")?;
            table = ResultTable::new(vec!["t".into(), format!("mrl_k{k}_r{r}")]);
            for &t in grid {
                table.push(vec![t, mrl(model, k, r, t)?]);
            }
        }
    }
    Ok(table)
}

/// The common FGM parameter of a model whose components are all FGM.
fn common_fgm_alpha(model: &CiModel<f64>) -> Result<f64, CliError> {
    let mut alphas = model.components().iter().map(|c| match c.copula {
        BivariateCopula::Fgm { alpha } => Some(alpha),
        _ => None,
    });
    let first = alphas.next().flatten();
    match first {
        Some(a) if model.n() == 2 && alphas.all(|b| b == Some(a)) => Ok(a),
        _ => Err(CliError::Incompatible(
            "this candidate needs two FGM components with a common alpha".into(),
        )),
    }
}

fn verify_ci<W: Write>(
    model: &CiModel<f64>,
    candidate: &str,
    grid: usize,
    stdout: &mut W,
) -> Result<(), CliError> {
    let name = candidate.strip_prefix("builtin:").ok_or_else(|| {
        CliError::Usage(format!(
            "--candidate must look like builtin:<name>, got {candidate:?}"
        ))
    })?;
    let cand = match name {
        "product" => CandidateCopula::product(model.n()),
        "fgm-pair" => CandidateCopula::fgm_pair(common_fgm_alpha(model)?),
        "direct-fgm" => CandidateCopula::fgm_direct(common_fgm_alpha(model)?),
        "model" => CandidateCopula::from_model(model),
        other => {
            return Err(CliError::Usage(format!(
                "unknown candidate {other:?}; expected product, fgm-pair, direct-fgm or model"
            )))
        }
    };
    let report = model.verify_ci(&cand, grid)?;
    let worst: Vec<String> = report.worst_point.iter().map(|&v| fmt_sig(v)).collect();
    writeln!(
        stdout,
        "passed {}\nresidual {}\ntolerance {}\ncandidate_violation {}\nworst_point {}",
        report.passed,
        fmt_sig(report.residual),
        fmt_sig(report.tolerance),
        fmt_sig(report.candidate_violation),
        worst.join(",")
    )
    .map_err(|e| stdout_error(&e))
}
