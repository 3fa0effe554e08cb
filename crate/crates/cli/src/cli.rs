//! Argument parsing and dispatch for the `sepfid` binary.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sepfid::state::read_state;

use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{emit, write_file};
use crate::verify::Suite;
use crate::{figure, measure, roof, verify};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sepfid", version, about = "Entanglement measures from the fidelity of separability")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Base random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Random restarts per solve.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Number of decomposition elements (default d^2).
    #[arg(long, global = true)]
    s: Option<usize>,
    /// Output file (directory for `roof`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key = value` settings file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print every available measure of a state as CSV.
    Measure { state: PathBuf },
    /// Optimal decomposition and closest separable state.
    Roof { state: PathBuf },
    /// Emit curve data as CSV.
    Figure {
        #[command(subcommand)]
        kind: FigureKind,
    },
    /// Run a verification campaign; exits 1 on any failed check.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        /// Number of samples.
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Where to dump failing samples (default `sepfid-repro-<suite>.txt`).
        #[arg(long)]
        repro: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum FigureKind {
    /// Normalised E_G, E_B and E_Gr against concurrence.
    BuresCurve,
    /// E_F, E_R and its lower bound for the generalised Vedral-Plenio family.
    Gvp {
        #[arg(long)]
        p: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    TwoQubitRoof,
    Inequalities,
    Stationarity,
    #[value(name = "appendix-a")]
    ConvexSets,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::TwoQubitRoof => Suite::TwoQubitRoof,
            SuiteArg::Inequalities => Suite::Inequalities,
            SuiteArg::Stationarity => Suite::Stationarity,
            SuiteArg::ConvexSets => Suite::ConvexSets,
        }
    }
}

fn load(path: &Path) -> Result<sepfid::state::StateFile> {
    read_state(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn execute(cli: Cli) -> Result<i32> {
    let flags = Overrides {
        seed: cli.common.seed,
        restarts: cli.common.restarts,
        s: cli.common.s,
        out: cli.common.out,
        ..Overrides::default()
    };
    let config = RunConfig::resolve(flags, cli.common.config.as_deref())?;
    let out = config.out.as_deref();
    match cli.command {
        Command::Measure { state } => {
            let state = load(&state)?;
            let (report, method) = measure::measure(&state, &config)?;
            emit(out, &measure::report_table(&state, &report, method).to_csv())?;
        }
        Command::Roof { state } => {
            let rho = load(&state)?.to_density();
            let r = roof::roof(&rho, &config)?;
            match out {
                Some(dir) => roof::write_outputs(dir, &rho, &r)?,
                None => emit(None, &roof::summary(&rho, &r)?)?,
            }
        }
        Command::Figure { kind } => {
            let table = match kind {
                FigureKind::BuresCurve => figure::bures_curve()?,
                FigureKind::Gvp { p } => figure::gvp(p)?,
            };
            emit(out, &table.to_csv())?;
        }
        Command::Verify { suite, n, repro } => {
            let suite = Suite::from(suite);
            let report = verify::run_suite(suite, n, &config)?;
            emit(out, &report.table().to_csv())?;
            if !report.passed() {
                let path = repro.unwrap_or_else(|| PathBuf::from(format!("sepfid-repro-{suite}.txt")));
                write_file(&path, &report.repro()?)?;
                eprintln!("verification failed; failing samples written to {}", path.display());
                return Ok(EXIT_FAIL);
            }
        }
    }
    Ok(EXIT_PASS)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
