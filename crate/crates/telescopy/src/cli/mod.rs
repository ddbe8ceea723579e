//! Command-line front end: configuration ingestion, experiment
//! orchestration, plot-data regeneration, and validation suites.
//!
//! Exit codes: 0 on success, 1 on validation failure, 2 on configuration
//! errors. Tables go to `--out` as CSV with a provenance header; a JSON
//! summary always goes to standard output.

pub mod commands;
pub mod config;
pub mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{Failure, Figure};
pub use config::{load_config, load_config_with_base, ExperimentConfig};
pub use table::{Cell, Provenance, ResultTable};

#[derive(Parser, Debug)]
#[command(
    name = "telescopy",
    version,
    about = "Weak-measurement pre-processing for long-baseline interferometry: \
             Fisher information, schedule optimization, and Monte Carlo checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path (omit to skip the table file).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (wins over the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Dotted-path config override, e.g. `--override schedule.d=70`
    /// (repeatable; values parsed as JSON, else taken as strings).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FigureArg {
    /// Interference-scheme Fisher ratio against round count.
    RatioVsD,
    /// Optimized collapse yield against telescope count at 70 rounds.
    GammaVsM,
    /// Optimized strength profiles at 50 rounds.
    TauProfile,
}

impl From<FigureArg> for Figure {
    fn from(f: FigureArg) -> Self {
        match f {
            FigureArg::RatioVsD => Figure::RatioVsD,
            FigureArg::GammaVsM => Figure::GammaVsM,
            FigureArg::TauProfile => Figure::TauProfile,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic and finite-difference Fisher blocks for a scheme.
    Fisher(CommonArgs),
    /// Optimize a measurement-strength schedule.
    Optimize(CommonArgs),
    /// Regenerate plot data as (x, series, value) rows.
    Reproduce {
        #[arg(value_enum)]
        figure: FigureArg,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Trajectory-sampled estimates against analytic values.
    Montecarlo(CommonArgs),
    /// Run the invariant suite and report pass/fail per property.
    Validate(CommonArgs),
}

fn configure_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // A second configuration attempt in the same process is a no-op;
        // results are thread-count independent by construction.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn emit_error(command: &str, failure: &Failure) -> i32 {
    let payload = serde_json::json!({
        "command": command,
        "status": "error",
        "exit_code": failure.code(),
        "message": failure.message(),
    });
    println!("{payload}");
    eprintln!("error: {}", failure.message());
    failure.code()
}

fn execute(command_name: &str, common: &CommonArgs, figure: Option<Figure>) -> i32 {
    configure_threads(common.threads);
    let base = figure.map(|f| f.base_config()).unwrap_or(serde_json::json!({}));
    let config = match config::load_config_with_base(
        base,
        common.config.as_deref(),
        &common.overrides,
        common.seed,
    ) {
        Ok(c) => c,
        Err(e) => return emit_error(command_name, &Failure::Config(e.0)),
    };
    let hash = config.sha256();
    let provenance = Provenance::new(command_name, hash.clone(), config.seed);
    let result = match (command_name, figure) {
        ("fisher", _) => commands::cmd_fisher(&config, provenance),
        ("optimize", _) => commands::cmd_optimize(&config, provenance),
        ("reproduce", Some(f)) => commands::cmd_reproduce(f, &config, provenance),
        ("montecarlo", _) => commands::cmd_montecarlo(&config, provenance),
        ("validate", _) => commands::cmd_validate(&config, provenance),
        _ => unreachable!("dispatcher covers every subcommand"),
    };
    let (table, summary) = match result {
        Ok(pair) => pair,
        Err(e) => return emit_error(command_name, &e),
    };
    if let Some(path) = &common.out {
        if let Err(e) = table.write_csv(path) {
            return emit_error(
                command_name,
                &Failure::Validation(format!("writing {}: {e}", path.display())),
            );
        }
    }
    // Validation failures still emit their full table before signalling.
    let failed_validation = summary.get("all_pass").and_then(|v| v.as_bool()) == Some(false);
    let payload = serde_json::json!({
        "command": command_name,
        "status": if failed_validation { "validation_failure" } else { "ok" },
        "config_sha256": hash,
        "seed": config.seed,
        "rows": table.rows.len(),
        "out": common.out.as_ref().map(|p| p.display().to_string()),
        "summary": summary,
    });
    println!("{payload}");
    if failed_validation {
        1
    } else {
        0
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are successes; anything else is a
            // configuration error.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match &cli.command {
        Command::Fisher(common) => execute("fisher", common, None),
        Command::Optimize(common) => execute("optimize", common, None),
        Command::Reproduce { figure, common } => {
            execute("reproduce", common, Some((*figure).into()))
        }
        Command::Montecarlo(common) => execute("montecarlo", common, None),
        Command::Validate(common) => execute("validate", common, None),
    }
}
