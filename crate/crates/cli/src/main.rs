//! `sisams` command-line experiment runner.

mod config;
mod error;
mod experiment;
mod plot;
mod records;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sisams::evaluation::{exploitability_report, EvalSettings};
use sisams::{build_game, GameKind, GameSpec};

use config::ExperimentConfig;
use error::{CliError, CliResult};
use records::StrategyFile;

#[derive(Parser)]
#[command(
    name = "sisams",
    version,
    about = "Mixed-strategy equilibria of continuous games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-trial experiment from a config file.
    Run(RunArgs),
    /// Estimate the exploitability of a strategy file.
    Eval(EvalArgs),
    /// Run every learning-rate and support-size cell of a config's [sweep] grid.
    Sweep(RunArgs),
    /// List the available games.
    ListGames,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output_dir.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Trials run concurrently (defaults to the number of CPUs).
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the config's seed_base.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, overrides_with = "no_plot")]
    plot: bool,
    #[arg(long, overrides_with = "plot")]
    no_plot: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Game spec file (TOML or JSON).
    #[arg(long)]
    game: PathBuf,
    /// Strategy JSON as written by `run`.
    #[arg(long)]
    strategy: PathBuf,
    /// Best-response lattice resolution (per-space default when omitted).
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    refine_steps: Option<usize>,
}

impl RunArgs {
    fn load(&self) -> CliResult<(ExperimentConfig, PathBuf)> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed_base = seed;
        }
        if self.plot {
            cfg.plot = true;
        }
        if self.no_plot {
            cfg.plot = false;
        }
        let out = self
            .output_dir
            .clone()
            .unwrap_or_else(|| cfg.output_dir.clone());
        Ok((cfg, out))
    }

    fn pool(&self) -> CliResult<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(jobs) = self.jobs {
            if jobs == 0 {
                return Err(CliError::Validation("--jobs must be at least 1".into()));
            }
            builder = builder.num_threads(jobs);
        }
        builder
            .build()
            .map_err(|e| CliError::Validation(e.to_string()))
    }
}

fn load_game_spec(path: &Path) -> CliResult<GameSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| CliError::config(path, e))
    } else {
        toml::from_str(&text).map_err(|e| CliError::config(path, e))
    }
}

fn eval(args: &EvalArgs) -> CliResult<()> {
    let spec = load_game_spec(&args.game)?;
    let game = build_game(&spec)?;
    let file = StrategyFile::read(&args.strategy)?;
    if file.game != spec.name.as_str() {
        return Err(CliError::Validation(format!(
            "strategy is for game '{}', spec is '{}'",
            file.game, spec.name
        )));
    }
    let profile = file.to_strategies(game.spaces())?;
    let mut settings = EvalSettings::for_game(game.as_ref());
    settings.resolution = args.resolution.or(settings.resolution);
    if let Some(steps) = args.refine_steps {
        settings.refine_steps = steps;
    }
    let report = exploitability_report(game.as_ref(), &profile, &settings)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Validation(e.to_string()))?
    );
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => {
            let (cfg, out) = args.load()?;
            let summary = args
                .pool()?
                .install(|| experiment::run_experiment(&cfg, &out))?;
            eprintln!(
                "{}: {}/{} trials completed, mean final exploitability {}",
                out.display(),
                summary.completed,
                summary.trials,
                summary
                    .mean_final_phi
                    .map(|m| format!("{m:.6}"))
                    .unwrap_or_else(|| "n/a".into())
            );
            Ok(())
        }
        Command::Sweep(args) => {
            let (cfg, out) = args.load()?;
            let cells = args.pool()?.install(|| experiment::run_sweep(&cfg, &out))?;
            for (dir, s) in cells {
                eprintln!(
                    "{}: mean final exploitability {}",
                    dir.display(),
                    s.mean_final_phi
                        .map(|m| format!("{m:.6}"))
                        .unwrap_or_else(|| "n/a".into())
                );
            }
            Ok(())
        }
        Command::Eval(args) => eval(&args),
        Command::ListGames => {
            for kind in GameKind::ALL {
                println!("{:<18} {}", kind.as_str(), kind.description());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
