//! The `uqcone` command line: instance files in, reports out.
//!
//! Exit codes: 0 success, 2 parse or input error, 3 precondition or
//! certificate failure, 4 solver failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

mod commands;
pub mod format;
pub mod report;

pub use commands::{solver_options, ForceKind};
use report::{Report, ReportFormat, Settings};

#[derive(Debug, Parser)]
#[command(name = "uqcone", version, about = "SOCP relaxations of uniform QCQPs, exactness certificates and Chebyshev centres")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Relative tolerance for numerical rank decisions.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_rank: f64,
    /// Primal and dual feasibility tolerance of the cone solver.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_feas: f64,
    /// Absolute and relative duality gap tolerance of the cone solver.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub gap: f64,
    #[arg(long, global = true, default_value_t = 200)]
    pub max_iter: usize,
    /// Grid spacing for the reference oracles.
    #[arg(long, global = true, default_value_t = 1e-2)]
    pub grid_h: f64,
    /// Seed for the sampling oracle.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of random samples drawn by the sampling oracle.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub samples: usize,
    /// Slack allowed in the approximation-ratio check, relative to the value.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub ratio_tol: f64,
    /// Relaxation to build instead of the one implied by the file.
    #[arg(long, global = true, value_enum)]
    pub force_kind: Option<ForceKind>,
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    pub report_format: ReportFormat,
}

impl GlobalArgs {
    pub fn settings(&self) -> Settings {
        Settings {
            tol_rank: self.tol_rank,
            tol_feas: self.tol_feas,
            gap: self.gap,
            max_iter: self.max_iter,
            grid_h: self.grid_h,
            seed: self.seed,
            samples: self.samples,
            ratio_tol: self.ratio_tol,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relax, certify exactness and recover an optimal point.
    Solve {
        file: PathBuf,
        /// Exit with 3 unless an exact solution was certified and recovered.
        #[arg(long)]
        require_exact: bool,
    },
    /// Feasible point with a guaranteed fraction of the relaxation value.
    Approx { file: PathBuf },
    /// Chebyshev centre of a ball intersection with its certified bracket.
    Cheby { file: PathBuf },
    /// Rewrite a binary ILP as a uniform QCQP instance file.
    ReduceIlp {
        file: PathBuf,
        /// Write here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Reference values by grid search, sampling or enumeration.
    Oracle { file: PathBuf },
    /// Solve every `*.json` file of a directory and print one table.
    Batch { dir: PathBuf },
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::InvalidInput(_)
        | Error::InvalidInstance(_)
        | Error::InvalidBounds(_)
        | Error::InvalidMatrix(_)
        | Error::InvalidIndex { .. } => 2,
        Error::Solver { .. } | Error::InvalidProgram(_) => 4,
        _ => 3,
    }
}

fn load(path: &Path) -> crate::Result<format::Instance> {
    format::read_instance(path).map(|(_, inst)| inst)
}

fn emit(out: &mut dyn Write, text: &str) -> i32 {
    match out.write_all(text.as_bytes()) {
        Ok(()) => 0,
        Err(_) => 2,
    }
}

/// Runs the command line `args` (program name first), writing reports to
/// `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let g = &cli.global;
    let settings = g.settings();
    let report = |command: &str, file: &Path, result: serde_json::Value| Report {
        command: command.into(),
        file: Some(file.display().to_string()),
        settings,
        result,
    };
    let outcome = match &cli.command {
        Command::Solve { file, require_exact } => load(file)
            .and_then(|inst| commands::cmd_solve(&inst, g.force_kind, *require_exact, &settings))
            .map(|o| (report("solve", file, o.result), o.exit)),
        Command::Approx { file } => load(file)
            .and_then(|inst| commands::cmd_approx(&inst, &settings))
            .map(|o| (report("approx", file, o.result), o.exit)),
        Command::Cheby { file } => load(file)
            .and_then(|inst| match inst {
                format::Instance::Balls(b) => commands::cmd_cheby(&b, &settings),
                other => Err(Error::WrongShape(format!("cheby needs a balls instance, got {}", other.kind()))),
            })
            .map(|o| (report("cheby", file, o.result), o.exit)),
        Command::Oracle { file } => load(file)
            .and_then(|inst| commands::cmd_oracle(&inst, &settings))
            .map(|o| (report("oracle", file, o.result), o.exit)),
        Command::ReduceIlp { file, output } => {
            let text = match load(file).and_then(|inst| commands::cmd_reduce_ilp(&inst)) {
                Ok(t) => t,
                Err(e) => return fail(err, &e),
            };
            return match output {
                Some(path) => match std::fs::write(path, text) {
                    Ok(()) => 0,
                    Err(e) => {
                        let _ = writeln!(err, "error: {}: {e}", path.display());
                        2
                    }
                },
                None => emit(out, &text),
            };
        }
        Command::Batch { dir } => {
            let (rows, exit) = match commands::cmd_batch(dir, &settings) {
                Ok(r) => r,
                Err(e) => return fail(err, &e),
            };
            let text = match g.report_format {
                ReportFormat::Text => {
                    let mut t = commands::batch_table(&rows);
                    t.push_str(&format!(
                        "settings: tol_rank={:e} tol_feas={:e} gap={:e} max_iter={}\n",
                        settings.tol_rank, settings.tol_feas, settings.gap, settings.max_iter
                    ));
                    t
                }
                ReportFormat::Structured => Report {
                    command: "batch".into(),
                    file: Some(dir.display().to_string()),
                    settings,
                    result: serde_json::to_value(&rows).expect("rows serialise"),
                }
                .render(ReportFormat::Structured),
            };
            let code = emit(out, &text);
            return code.max(exit);
        }
    };
    match outcome {
        Ok((rep, exit)) => emit(out, &rep.render(g.report_format)).max(exit),
        Err(e) => fail(err, &e),
    }
}

fn fail(err: &mut dyn Write, e: &Error) -> i32 {
    let _ = writeln!(err, "error: {e}");
    exit_code(e)
}

/// Entry point for the binary.
pub fn main_from_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
