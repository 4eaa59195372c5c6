use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use coin_lnn::agent::LnnPolicy;
use coin_lnn::harness::{
    self, checkpoint_dir, compare_runs, evaluate_games, load_lexicon, load_policy, run_experiment, write_experiment,
    ExperimentConfig, TrainedPolicy,
};
use coin_lnn::worldsim::{generate_game, GameSpec};

#[derive(Parser)]
#[command(
    name = "coin-lnn",
    version,
    about = "Logic-network agents for a text coin collector game"
)]
struct Cli {
    /// Print per-step trace lines (epoch, step, facts, action, q-values, reward).
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set difficulty=medium`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            config.apply_text(&text)?;
        }
        for kv in &self.overrides {
            config.apply_override(kv)?;
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Dump adjacency of one game spec, or of every game in a config.
    Generate {
        /// Game spec file (difficulty/level/seed lines).
        #[arg(long, conflicts_with = "out")]
        spec: Option<PathBuf>,
        /// Directory for per-game dumps of the configured game sets.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run the train/test experiment and write metrics, rules and checkpoints.
    Train {
        /// Run directory to create.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Evaluate saved checkpoints on the configured test games.
    Eval {
        /// Run directory written by `train`.
        #[arg(long)]
        run: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Print the rules read off saved checkpoints.
    Rules {
        /// Run directory written by `train`.
        #[arg(long)]
        run: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Report the first epoch each metrics CSV reaches a reward threshold.
    Compare {
        /// First metrics CSV.
        a: PathBuf,
        /// Second metrics CSV.
        b: PathBuf,
        /// Comma-separated reward thresholds.
        #[arg(long, value_delimiter = ',', default_value = "0.9")]
        thresholds: Vec<f64>,
        /// Column to scan, e.g. `seed0_reward`.
        #[arg(long, default_value = "mean_test_reward")]
        column: String,
    },
    /// Play a game at the console.
    Play {
        /// Game spec file (difficulty/level/seed lines).
        #[arg(long)]
        spec: PathBuf,
        /// Checkpoint directory whose q-values are shown; untrained if absent.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn read_spec(path: &Path) -> Result<GameSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(GameSpec::from_config_str(&text)?)
}

/// Config from the run directory, then the command-line config on top.
fn run_config(run: &Path, args: &ConfigArgs) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    let saved = run.join("config.txt");
    if saved.exists() {
        config.apply_text(&std::fs::read_to_string(&saved)?)?;
    }
    if let Some(path) = &args.config {
        config.apply_text(&std::fs::read_to_string(path)?)?;
    }
    for kv in &args.overrides {
        config.apply_override(kv)?;
    }
    Ok(config)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Generate { spec, out: dir, config } => match (spec, dir) {
            (Some(path), _) => {
                let spec = read_spec(&path)?;
                write!(out, "{}", generate_game(&spec)?.adjacency_dump())?;
            }
            (None, Some(dir)) => {
                let n = harness::generate_games(&config.load()?, &dir)?;
                writeln!(out, "wrote {n} game dumps to {}", dir.display())?;
            }
            (None, None) => bail!("generate needs --spec or --out"),
        },
        Command::Train { out: dir, config } => {
            let config = config.load()?;
            let result = run_experiment(&config, cli.trace)?;
            write_experiment(&result, &dir)?;
            if cli.trace {
                for s in &result.seeds {
                    for line in &s.trace {
                        writeln!(out, "seed{}\t{line}", s.index)?;
                    }
                }
            }
            write!(out, "{}", result.metrics.to_csv())?;
        }
        Command::Eval { run, config } => {
            let config = run_config(&run, &config)?;
            writeln!(out, "seed,mean_test_reward,mean_test_steps")?;
            for i in 0..config.seeds {
                let dir = checkpoint_dir(&run, i);
                if !dir.exists() {
                    continue;
                }
                let policy = load_policy(&dir, load_lexicon(&config)?)?;
                let games: Vec<_> = config
                    .test_specs(i)
                    .iter()
                    .map(generate_game)
                    .collect::<Result<_, _>>()?;
                let (r, s) = evaluate_games(&policy, &games, config.trainer.bonus_coefficient)?;
                writeln!(out, "{i},{r:.6},{s:.6}")?;
            }
        }
        Command::Rules { run, config } => {
            let config = run_config(&run, &config)?;
            for i in 0..config.seeds {
                let dir = checkpoint_dir(&run, i);
                if !dir.exists() {
                    continue;
                }
                let policy = load_policy(&dir, load_lexicon(&config)?)?;
                writeln!(out, "# seed {i}")?;
                for r in policy.rules(config.trainer.alpha) {
                    writeln!(out, "{r}")?;
                }
            }
        }
        Command::Compare {
            a,
            b,
            thresholds,
            column,
        } => {
            let ta = std::fs::read_to_string(&a).with_context(|| format!("reading {}", a.display()))?;
            let tb = std::fs::read_to_string(&b).with_context(|| format!("reading {}", b.display()))?;
            write!(out, "{}", compare_runs(&ta, &tb, &thresholds, &column)?)?;
        }
        Command::Play {
            spec,
            checkpoint,
            config,
        } => {
            let config = config.load()?;
            let lexicon = load_lexicon(&config)?;
            let policy = match checkpoint {
                Some(dir) => load_policy(&dir, lexicon)?,
                None => TrainedPolicy::Lnn(LnnPolicy::new(lexicon)?),
            };
            let spec = read_spec(&spec)?;
            harness::play(&spec, &policy, io::stdin().lock(), out)?;
        }
    }
    Ok(())
}
