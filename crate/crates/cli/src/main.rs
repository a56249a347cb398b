//! winplan: sample size planning, estimation and simulation for the global
//! win probability.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use winplan_cli::config::{read_file, PlanConfig, SimConfig};
use winplan_cli::data::read_dataset;
use winplan_cli::{commands, report, CliError, Format};

/// Set to any non-empty value to silence progress output on stderr.
const QUIET_ENV: &str = "WINPLAN_QUIET";

#[derive(Parser)]
#[command(
    name = "winplan",
    version,
    about = "Global win probability trial planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute required sample sizes from a design config
    Plan {
        /// TOML design config
        #[arg(long)]
        config: PathBuf,
        /// Sweep a field over values, e.g. correlation=0.1,0.3,0.5 (repeatable)
        #[arg(long)]
        sweep: Vec<String>,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Estimate WinPs and the global WinP interval from subject-level data
    Estimate {
        /// Delimited data file with a header row
        #[arg(long)]
        data: PathBuf,
        /// Column holding the arm: 1 treated, 0 control
        #[arg(long, default_value = "arm")]
        arm_column: String,
        /// Confidence level
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// Field delimiter
        #[arg(long, default_value = ",")]
        delimiter: char,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Monte Carlo coverage and assurance for a grid of scenarios
    Simulate {
        /// TOML scenario grid
        #[arg(long)]
        config: PathBuf,
        /// Replicates per scenario (overrides the config)
        #[arg(long)]
        replicates: Option<u64>,
        /// Master seed (overrides the config)
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to all cores
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn quiet() -> bool {
    std::env::var_os(QUIET_ENV).is_some_and(|v| !v.is_empty())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Plan {
            config,
            sweep,
            out,
            format,
        } => {
            let cfg = PlanConfig::from_toml(&read_file(&config)?)?;
            let rep = commands::plan(&cfg, &sweep)?;
            emit(&report::render_plan(&rep, format), out.as_deref())?;
            rep.failure().map_or(Ok(()), Err)
        }
        Command::Estimate {
            data,
            arm_column,
            level,
            delimiter,
            out,
            format,
        } => {
            if !delimiter.is_ascii() {
                return Err(CliError::Validation(format!(
                    "delimiter `{delimiter}` must be a single ASCII character"
                )));
            }
            let ds = read_dataset(&data, &arm_column, delimiter as u8)?;
            let rep = commands::estimate(&ds, &data, &arm_column, level)?;
            emit(&report::render_estimate(&rep, format), out.as_deref())
        }
        Command::Simulate {
            config,
            replicates,
            seed,
            threads,
            out,
            format,
        } => {
            let cfg = SimConfig::from_toml(&read_file(&config)?)?;
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(t) = threads {
                if t == 0 {
                    return Err(CliError::Validation(
                        "threads = 0: at least 1 is required".into(),
                    ));
                }
                pool = pool.num_threads(t);
            }
            let pool = pool
                .build()
                .map_err(|e| CliError::Io(format!("cannot start thread pool: {e}")))?;
            let show = !quiet();
            let rep = pool.install(|| {
                commands::simulate(cfg, replicates, seed, |i, total, r| {
                    if show {
                        let status = match r {
                            Ok(r) => format!(
                                "n={} ECP={:.2} EAP={:.2}",
                                r.n_total_used, r.empirical_coverage, r.empirical_assurance
                            ),
                            Err(e) => format!("error: {e}"),
                        };
                        eprintln!("[{}/{}] {status}", i + 1, total);
                    }
                })
            })?;
            emit(&report::render_sim(&rep, format), out.as_deref())?;
            rep.failure().map_or(Ok(()), Err)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("winplan: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
