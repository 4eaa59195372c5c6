//! Experiment orchestration: game sets, the train/test generalization
//! protocol, metrics, checkpoints, rule dumps and run comparison.

mod config;
mod metrics;
mod play;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use thiserror::Error;

pub use config::{ExperimentConfig, PolicyKind};
pub use metrics::{compare_runs, moving_average, Comparison, Crossing, MetricsRow, MetricsTable};
pub use play::play;

use crate::agent::{evaluate_episode, Adam, Agent, AgentError, LnnPolicy, MlpPolicy, Mode, QFunction, TraceLine};
use crate::lexicon::{Category, LexiconError, LexiconTable};
use crate::lnn::{CheckpointError, LnnNetwork, TruthConfig};
use crate::rng;
use crate::worldsim::{generate_game, RoomGraph, WorldError};

/// OR and literal weights at or above this make it into the rule dump.
pub const RULE_WEIGHT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("metrics error: {0}")]
    Metrics(String),
    #[error("checkpoint error in {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

pub(crate) fn read_file(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// A trained (or loaded) policy of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedPolicy {
    Lnn(LnnPolicy),
    Nn(MlpPolicy),
}

impl TrainedPolicy {
    /// Rule dump lines; the propositional baseline has none.
    pub fn rules(&self, alpha: f64) -> Vec<String> {
        let TrainedPolicy::Lnn(p) = self else {
            return Vec::new();
        };
        let truth = TruthConfig::new(alpha).unwrap_or_default();
        p.networks
            .values()
            .flat_map(|n| n.extract_rules(&truth, RULE_WEIGHT_THRESHOLD))
            .map(|r| r.to_string())
            .collect()
    }

    pub fn evaluate(&self, game: &RoomGraph, bonus: f64) -> Result<(f64, u32), AgentError> {
        let r = match self {
            TrainedPolicy::Lnn(p) => evaluate_episode(p, game, 0, false, bonus)?,
            TrainedPolicy::Nn(p) => evaluate_episode(p, game, 0, false, bonus)?,
        };
        Ok((r.quest_reward, r.steps))
    }
}

/// Result of training one seed.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub index: u64,
    /// `(epoch, mean quest reward, mean steps)` per evaluation, unsmoothed.
    pub evals: Vec<(u64, f64, f64)>,
    pub policy: TrainedPolicy,
    pub optimizer: String,
    pub inductions: u64,
    pub trace: Vec<TraceLine>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub seeds: Vec<SeedRun>,
    pub metrics: MetricsTable,
}

impl ExperimentResult {
    /// Rule dump for every seed, `# seed i` headed.
    pub fn rule_dump(&self) -> String {
        let mut out = String::new();
        for s in &self.seeds {
            let _ = writeln!(out, "# seed {}", s.index);
            for r in s.policy.rules(self.config.trainer.alpha) {
                let _ = writeln!(out, "{r}");
            }
        }
        out
    }
}

pub fn load_lexicon(config: &ExperimentConfig) -> Result<LexiconTable, HarnessError> {
    Ok(match &config.lexicon {
        Some(p) => LexiconTable::load(p)?,
        None => LexiconTable::bundled(),
    })
}

fn build_games(specs: &[crate::worldsim::GameSpec]) -> Result<Vec<RoomGraph>, HarnessError> {
    specs
        .iter()
        .map(|s| generate_game(s).map_err(HarnessError::from))
        .collect()
}

/// Mean quest reward and mean steps of a greedy policy over `games`.
pub fn evaluate_games(policy: &TrainedPolicy, games: &[RoomGraph], bonus: f64) -> Result<(f64, f64), HarnessError> {
    let mut reward = 0.0;
    let mut steps = 0.0;
    for g in games {
        let (r, s) = policy.evaluate(g, bonus)?;
        reward += r;
        steps += s as f64;
    }
    let n = games.len() as f64;
    Ok((reward / n, steps / n))
}

fn train_generic<Q: QFunction>(
    config: &ExperimentConfig,
    index: u64,
    q: Q,
    wrap: impl Fn(&Q) -> TrainedPolicy,
    save_optimizer: impl Fn(&Q::Optimizer) -> String,
    trace: bool,
) -> Result<SeedRun, HarnessError> {
    let run_seed = config.run_seed(index);
    let train = build_games(&config.train_specs(index))?;
    let test = build_games(&config.test_specs(index))?;
    let mut agent = Agent::new(q, config.trainer.clone(), run_seed)?;
    let mut pick = rng::stream(run_seed, "game-choice");
    let epochs = config.epochs();
    let mut evals = Vec::new();
    let mut lines = Vec::new();
    for e in 0..epochs {
        let game = &train[pick.gen_range(0..train.len())];
        let report = agent.run_episode(game, Mode::Train, e, trace)?;
        lines.extend(report.trace);
        let epoch = e + 1;
        if epoch % config.eval_interval == 0 || epoch == epochs {
            let (r, s) = evaluate_games(&wrap(&agent.online), &test, config.trainer.bonus_coefficient)?;
            evals.push((epoch, r, s));
        }
    }
    Ok(SeedRun {
        index,
        evals,
        policy: wrap(&agent.online),
        optimizer: save_optimizer(&agent.optimizer),
        inductions: agent.inductions,
        trace: lines,
    })
}

fn lnn_optimizer_text(opt: &BTreeMap<Category, Adam>) -> String {
    let mut out = String::new();
    for (c, adam) in opt {
        let _ = writeln!(out, "[{c}]");
        out.push_str(&adam.to_text());
    }
    out
}

pub fn train_seed(config: &ExperimentConfig, index: u64, trace: bool) -> Result<SeedRun, HarnessError> {
    match config.policy {
        PolicyKind::Lnn => {
            let mut q = LnnPolicy::new(load_lexicon(config)?)?;
            for n in q.networks.values_mut() {
                n.gate_cap = config.gate_cap;
            }
            train_generic(
                config,
                index,
                q,
                |p| TrainedPolicy::Lnn(p.clone()),
                lnn_optimizer_text,
                trace,
            )
        }
        PolicyKind::Nn => {
            let q = MlpPolicy::new(rng::derive_seed(config.run_seed(index), "init"));
            train_generic(config, index, q, |p| TrainedPolicy::Nn(p.clone()), Adam::to_text, trace)
        }
    }
}

/// Trains every seed (in parallel threads) and aggregates metrics. Output
/// depends only on the config.
pub fn run_experiment(config: &ExperimentConfig, trace: bool) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    let seeds: Vec<SeedRun> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..config.seeds)
            .map(|i| scope.spawn(move || train_seed(config, i, trace)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread panicked"))
            .collect::<Result<_, _>>()
    })?;
    let metrics = MetricsTable::from_evals(
        &seeds.iter().map(|s| s.evals.clone()).collect::<Vec<_>>(),
        config.moving_average_window,
    );
    Ok(ExperimentResult {
        config: config.clone(),
        seeds,
        metrics,
    })
}

/// Writes `config.txt`, `metrics.csv`, `rules.txt`, per-seed checkpoints
/// and (when traced) per-seed trace files under `dir`.
pub fn write_experiment(result: &ExperimentResult, dir: &Path) -> Result<(), HarnessError> {
    write_file(&dir.join("config.txt"), &result.config.to_config_string())?;
    write_file(&dir.join("metrics.csv"), &result.metrics.to_csv())?;
    write_file(&dir.join("rules.txt"), &result.rule_dump())?;
    for s in &result.seeds {
        let cdir = checkpoint_dir(dir, s.index);
        save_policy(&s.policy, &cdir)?;
        write_file(&cdir.join("optimizer.txt"), &s.optimizer)?;
        if !s.trace.is_empty() {
            let mut text = String::new();
            for l in &s.trace {
                let _ = writeln!(text, "{l}");
            }
            write_file(&dir.join(format!("trace_seed{}.tsv", s.index)), &text)?;
        }
    }
    Ok(())
}

pub fn checkpoint_dir(run_dir: &Path, index: u64) -> PathBuf {
    run_dir.join("checkpoints").join(format!("seed{index}"))
}

fn mlp_text(p: &MlpPolicy) -> String {
    let mut out = format!("mlp v1 {}\n", p.params.len());
    for v in &p.params {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

pub fn save_policy(policy: &TrainedPolicy, dir: &Path) -> Result<(), HarnessError> {
    match policy {
        TrainedPolicy::Lnn(p) => {
            for (c, n) in &p.networks {
                write_file(&dir.join(format!("{c}.lnn")), &n.to_checkpoint())?;
            }
        }
        TrainedPolicy::Nn(p) => write_file(&dir.join("mlp.txt"), &mlp_text(p))?,
    }
    Ok(())
}

/// Loads a checkpoint directory written by [`save_policy`].
pub fn load_policy(dir: &Path, lexicon: LexiconTable) -> Result<TrainedPolicy, HarnessError> {
    let bad = |path: &Path, reason: String| HarnessError::Checkpoint {
        path: path.to_path_buf(),
        reason,
    };
    let mlp = dir.join("mlp.txt");
    if mlp.exists() {
        let text = read_file(&mlp)?;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let n: usize = header
            .strip_prefix("mlp v1 ")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| bad(&mlp, "bad header".into()))?;
        let params: Vec<f64> = lines
            .map(|l| l.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(&mlp, e.to_string()))?;
        let expected = MlpPolicy::new(0).param_count();
        if params.len() != n || n != expected {
            return Err(bad(
                &mlp,
                format!("expected {expected} parameters, found {}", params.len()),
            ));
        }
        return Ok(TrainedPolicy::Nn(MlpPolicy { params }));
    }
    let mut networks = BTreeMap::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "lnn"))
        .collect();
    entries.sort();
    for path in entries {
        let net =
            LnnNetwork::from_checkpoint(&read_file(&path)?).map_err(|e: CheckpointError| bad(&path, e.to_string()))?;
        networks.insert(net.category.clone(), net);
    }
    if networks.is_empty() {
        return Err(bad(dir, "no network files".into()));
    }
    Ok(TrainedPolicy::Lnn(LnnPolicy { lexicon, networks }))
}

/// Adjacency dumps of every train and test game of every seed index.
pub fn generate_games(config: &ExperimentConfig, dir: &Path) -> Result<usize, HarnessError> {
    config.validate()?;
    let mut count = 0;
    for i in 0..config.seeds {
        let sets = [("train", config.train_specs(i)), ("test", config.test_specs(i))];
        for (kind, specs) in sets {
            for (j, spec) in specs.iter().enumerate() {
                let g = generate_game(spec)?;
                let text = format!("{}{}", spec.to_config_string(), g.adjacency_dump());
                write_file(&dir.join(format!("seed{i}")).join(format!("{kind}_{j:02}.txt")), &text)?;
                count += 1;
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(policy: &str) -> ExperimentConfig {
        ExperimentConfig::parse(&format!(
            "policy={policy}\nepochs=20\nseeds=2\nn_train_games=5\ntest_levels=5,10\nn_test_per_level=3\neval_interval=5\nmoving_average_window=1\n"
        ))
        .unwrap()
    }

    #[test]
    fn experiment_is_deterministic_and_round_trips_checkpoints() {
        for policy in ["lnn", "nn"] {
            let c = small(policy);
            let a = run_experiment(&c, false).unwrap();
            let b = run_experiment(&c, false).unwrap();
            assert_eq!(a.metrics.to_csv(), b.metrics.to_csv());
            assert_eq!(a.rule_dump(), b.rule_dump());
            assert_eq!(a.metrics.rows.len(), 4);

            let dir = tempfile::tempdir().unwrap();
            write_experiment(&a, dir.path()).unwrap();
            let loaded = load_policy(&checkpoint_dir(dir.path(), 0), LexiconTable::bundled()).unwrap();
            assert_eq!(loaded, a.seeds[0].policy);
            let csv = read_file(&dir.path().join("metrics.csv")).unwrap();
            assert!(csv.starts_with("epoch,mean_test_reward,mean_test_steps,seed0_reward,seed0_steps,seed1_reward"));
        }
    }

    #[test]
    fn generate_writes_dumps() {
        let c = ExperimentConfig::parse("seeds=1\nn_train_games=2\ntest_levels=5\nn_test_per_level=1").unwrap();
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(generate_games(&c, dir.path()).unwrap(), 3);
        let text = read_file(&dir.path().join("seed0").join("train_00.txt")).unwrap();
        assert!(text.starts_with("difficulty=easy\n"));
        assert!(text.contains("exit "));
    }

    #[test]
    fn missing_checkpoint_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_policy(dir.path(), LexiconTable::bundled()).is_err());
    }
}
