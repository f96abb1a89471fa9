use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chaining_cli::config::Experiment;
use chaining_cli::{run, CliError, ExperimentConfig, Overrides};
use chaining_core::gamma::GammaMode;

/// Worker-count variable; unset means one worker per core.
const THREADS_ENV: &str = "CHAINING_THREADS";

#[derive(Parser)]
#[command(name = "chaining", version, about = "Generic-chaining experiments: γ functionals, suprema, minoration and comparison")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// γ₂ / γ_X with an admissible-partition certificate
    Gamma(Common),
    /// Monte Carlo E sup over a finite index set
    Supremum(Common),
    /// Sudakov minoration harness
    Sudakov(Common),
    /// γ_X next to E sup, with both ratios
    TwoSided(Common),
    /// Weak and strong moments of the supremum
    WeakStrong(Common),
    /// Increment domination, E sup ratio and tail curves
    Compare(Common),
    /// Log-concave envelope sandwich tables
    Tails(Common),
    /// Convex-hull decomposition along a partition tree
    Hull(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json and CSV tables (overrides output.dir; default ./out)
    #[arg(long)]
    out: Option<String>,
    /// Monte Carlo sample count (overrides params.samples)
    #[arg(long)]
    samples: Option<usize>,
    /// Master seed (overrides params.seed)
    #[arg(long)]
    seed: Option<u64>,
    /// γ computation mode (overrides params.mode)
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Greedy,
}

impl Command {
    fn split(&self) -> (Experiment, &Common) {
        match self {
            Command::Gamma(c) => (Experiment::Gamma, c),
            Command::Supremum(c) => (Experiment::Supremum, c),
            Command::Sudakov(c) => (Experiment::Sudakov, c),
            Command::TwoSided(c) => (Experiment::TwoSided, c),
            Command::WeakStrong(c) => (Experiment::WeakStrong, c),
            Command::Compare(c) => (Experiment::Compare, c),
            Command::Tails(c) => (Experiment::Tails, c),
            Command::Hull(c) => (Experiment::Hull, c),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?;
    }
    Ok(())
}

/// Exit 0 when every check passes, 2 when a check fails.
fn execute(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let (experiment, common) = cli.command.split();
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Io { context: format!("reading {}", common.config.display()), source: e })?;
    let cfg = ExperimentConfig::from_json(&text)?;
    if cfg.experiment != experiment {
        return Err(CliError::Schema {
            path: "experiment".into(),
            message: format!("config is for `{}` but the subcommand is `{}`", cfg.experiment.name(), experiment.name()),
        });
    }
    let overrides = Overrides {
        samples: common.samples,
        seed: common.seed,
        mode: common.mode.map(|m| match m {
            Mode::Exact => GammaMode::Exact,
            Mode::Greedy => GammaMode::Greedy,
        }),
        out: common.out.clone(),
    };
    let cfg = cfg.apply(&overrides);
    let outcome = run(&cfg)?;
    let dir = PathBuf::from(cfg.output.dir.clone().unwrap_or_else(|| "out".into()));
    let path = outcome.write(&dir)?;
    for c in &outcome.report.checks {
        println!("{} {}: {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    println!("{} {} -> {}", if outcome.report.pass { "PASS" } else { "FAIL" }, experiment.name(), path.display());
    Ok(outcome.report.pass)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = e.guidance() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(1)
        }
    }
}
