use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use super::HarnessError;
use crate::agent::TrainerConfig;
use crate::rng;
use crate::worldsim::{Difficulty, GameSpec, DEFAULT_MAX_EPISODE_STEPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Lnn,
    Nn,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Lnn => "lnn",
            PolicyKind::Nn => "nn",
        }
    }
}

impl FromStr for PolicyKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lnn" => Ok(PolicyKind::Lnn),
            "nn" => Ok(PolicyKind::Nn),
            other => Err(HarnessError::Config(format!(
                "unknown policy `{other}` (expected lnn or nn)"
            ))),
        }
    }
}

/// Everything one experiment needs. Read from flat `key=value` text; any
/// key may be overridden afterwards with [`ExperimentConfig::set`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub difficulty: Difficulty,
    pub policy: PolicyKind,
    /// `None` picks 200 for easy, 500 otherwise.
    pub epochs: Option<u64>,
    pub seeds: u64,
    pub seed: u64,
    pub n_train_games: u64,
    pub train_level: u32,
    pub test_levels: Vec<u32>,
    pub n_test_per_level: u64,
    pub test_seed_offset: u64,
    pub moving_average_window: u64,
    pub eval_interval: u64,
    pub max_episode_steps: u32,
    pub gate_cap: usize,
    pub lexicon: Option<PathBuf>,
    pub trainer: TrainerConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            difficulty: Difficulty::Easy,
            policy: PolicyKind::Lnn,
            epochs: None,
            seeds: 5,
            seed: 0,
            n_train_games: 50,
            train_level: 5,
            test_levels: vec![5, 10, 15, 20, 25],
            n_test_per_level: 10,
            test_seed_offset: 10_000,
            moving_average_window: 100,
            eval_interval: 10,
            max_episode_steps: DEFAULT_MAX_EPISODE_STEPS,
            gate_cap: crate::lnn::DEFAULT_GATE_CAP,
            lexicon: None,
            trainer: TrainerConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value
        .parse()
        .map_err(|_| HarnessError::Config(format!("bad value `{value}` for `{key}`")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut config = ExperimentConfig::default();
        config.apply_text(text)?;
        Ok(config)
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), HarnessError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key=value", lineno + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Applies an override of the form `key=value`.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), HarnessError> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("override `{kv}` is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let t = &mut self.trainer;
        match key {
            "difficulty" => {
                self.difficulty = value
                    .parse()
                    .map_err(|_| HarnessError::Config(format!("unknown difficulty `{value}`")))?
            }
            "policy" => self.policy = value.parse()?,
            "epochs" => self.epochs = Some(parse(key, value)?),
            "seeds" => self.seeds = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "n_train_games" => self.n_train_games = parse(key, value)?,
            "train_level" => self.train_level = parse(key, value)?,
            "test_levels" => {
                self.test_levels = value
                    .split(',')
                    .map(|s| parse(key, s.trim()))
                    .collect::<Result<_, _>>()?
            }
            "n_test_per_level" => self.n_test_per_level = parse(key, value)?,
            "test_seed_offset" => self.test_seed_offset = parse(key, value)?,
            "moving_average_window" => self.moving_average_window = parse(key, value)?,
            "eval_interval" => self.eval_interval = parse(key, value)?,
            "max_episode_steps" => self.max_episode_steps = parse(key, value)?,
            "gate_cap" => self.gate_cap = parse(key, value)?,
            "lexicon" => self.lexicon = Some(PathBuf::from(value)),
            "gamma" => t.gamma = parse(key, value)?,
            "batch_size" => t.batch_size = parse(key, value)?,
            "update_period" => t.update_period = parse(key, value)?,
            "epsilon_start" => t.epsilon_start = parse(key, value)?,
            "epsilon_end" => t.epsilon_end = parse(key, value)?,
            "epsilon_anneal_epochs" => t.epsilon_anneal_epochs = parse(key, value)?,
            "bonus_coefficient" => t.bonus_coefficient = parse(key, value)?,
            "learning_rate" => t.learning_rate = parse(key, value)?,
            "replay_capacity" => t.replay_capacity = parse(key, value)?,
            "priority_fraction" => t.priority_fraction = parse(key, value)?,
            "target_refresh" => t.target_refresh = parse(key, value)?,
            "alpha" => t.alpha = parse(key, value)?,
            other => return Err(HarnessError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn epochs(&self) -> u64 {
        self.epochs.unwrap_or(match self.difficulty {
            Difficulty::Easy => 200,
            Difficulty::Medium | Difficulty::Hard => 500,
        })
    }

    /// Run seed for seed index `i`.
    pub fn run_seed(&self, i: u64) -> u64 {
        rng::derive_indexed(self.seed, "run", i)
    }

    /// Base game seed of seed index `i`, kept small so specs stay readable.
    fn game_base(&self, i: u64) -> u64 {
        rng::derive_indexed(self.seed, "games", i) % 1_000_000_000
    }

    pub fn train_specs(&self, i: u64) -> Vec<GameSpec> {
        let base = self.game_base(i);
        (0..self.n_train_games)
            .map(|j| self.spec(self.train_level, base + j))
            .collect()
    }

    /// Test games, level-major.
    pub fn test_specs(&self, i: u64) -> Vec<GameSpec> {
        let base = self.game_base(i) + self.test_seed_offset;
        let mut out = Vec::new();
        for (li, &level) in self.test_levels.iter().enumerate() {
            for k in 0..self.n_test_per_level {
                out.push(self.spec(level, base + li as u64 * self.n_test_per_level + k));
            }
        }
        out
    }

    fn spec(&self, level: u32, seed: u64) -> GameSpec {
        GameSpec {
            difficulty: self.difficulty,
            level,
            seed,
            max_episode_steps: self.max_episode_steps,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: String| Err(HarnessError::Config(m));
        if self.seeds == 0 || self.n_train_games == 0 || self.eval_interval == 0 || self.moving_average_window == 0 {
            return fail("seeds, n_train_games, eval_interval and moving_average_window must be positive".into());
        }
        if self.test_levels.is_empty() || self.n_test_per_level == 0 {
            return fail("need at least one test game".into());
        }
        if self.gate_cap == 0 {
            return fail("gate_cap must be positive".into());
        }
        self.trainer
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        for i in 0..self.seeds {
            let train = self.train_specs(i);
            for s in train.iter().chain(&self.test_specs(i)) {
                s.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
            }
            let pairs: std::collections::BTreeSet<(u32, u64)> = train.iter().map(|s| (s.level, s.seed)).collect();
            if let Some(s) = self.test_specs(i).iter().find(|s| pairs.contains(&(s.level, s.seed))) {
                return fail(format!(
                    "test game (level {}, seed {}) is also a training game",
                    s.level, s.seed
                ));
            }
        }
        Ok(())
    }

    /// Full config as `key=value` lines, every key present.
    pub fn to_config_string(&self) -> String {
        let t = &self.trainer;
        let levels: Vec<String> = self.test_levels.iter().map(u32::to_string).collect();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("difficulty", self.difficulty.to_string());
        kv("policy", self.policy.as_str().into());
        kv("epochs", self.epochs().to_string());
        kv("seeds", self.seeds.to_string());
        kv("seed", self.seed.to_string());
        kv("n_train_games", self.n_train_games.to_string());
        kv("train_level", self.train_level.to_string());
        kv("test_levels", levels.join(","));
        kv("n_test_per_level", self.n_test_per_level.to_string());
        kv("test_seed_offset", self.test_seed_offset.to_string());
        kv("moving_average_window", self.moving_average_window.to_string());
        kv("eval_interval", self.eval_interval.to_string());
        kv("max_episode_steps", self.max_episode_steps.to_string());
        kv("gate_cap", self.gate_cap.to_string());
        if let Some(p) = &self.lexicon {
            kv("lexicon", p.display().to_string());
        }
        kv("gamma", t.gamma.to_string());
        kv("batch_size", t.batch_size.to_string());
        kv("update_period", t.update_period.to_string());
        kv("epsilon_start", t.epsilon_start.to_string());
        kv("epsilon_end", t.epsilon_end.to_string());
        kv("epsilon_anneal_epochs", t.epsilon_anneal_epochs.to_string());
        kv("bonus_coefficient", t.bonus_coefficient.to_string());
        kv("learning_rate", t.learning_rate.to_string());
        kv("replay_capacity", t.replay_capacity.to_string());
        kv("priority_fraction", t.priority_fraction.to_string());
        kv("target_refresh", t.target_refresh.to_string());
        kv("alpha", t.alpha.to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_epochs() {
        let c = ExperimentConfig::default();
        assert_eq!(c.epochs(), 200);
        assert_eq!(c.test_specs(0).len(), 50);
        assert_eq!(c.train_specs(0).len(), 50);
        let m = ExperimentConfig::parse("difficulty=medium").unwrap();
        assert_eq!(m.epochs(), 500);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn text_round_trip_and_overrides() {
        let mut c = ExperimentConfig::parse("# comment\ndifficulty = hard\nepochs=30\ntest_levels=5,10\n").unwrap();
        c.apply_override("learning_rate=0.01").unwrap();
        assert_eq!(c.trainer.learning_rate, 0.01);
        assert_eq!(c.test_levels, vec![5, 10]);
        let back = ExperimentConfig::parse(&c.to_config_string()).unwrap();
        assert_eq!(back, c);
        assert!(c.apply_override("nonsense=1").is_err());
        assert!(c.apply_override("epochs").is_err());
        assert!(ExperimentConfig::parse("policy=lstm").is_err());
    }

    #[test]
    fn overlapping_sets_rejected() {
        let c = ExperimentConfig::parse("test_seed_offset=10").unwrap();
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
    }

    #[test]
    fn game_sets_differ_between_seed_indices() {
        let c = ExperimentConfig::default();
        assert_ne!(c.train_specs(0), c.train_specs(1));
        assert_eq!(c.test_specs(2), c.test_specs(2));
    }
}
