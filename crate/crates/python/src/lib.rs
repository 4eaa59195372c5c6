//! Python bindings: games, observation parsing, the lexicon, logic networks
//! and whole experiments.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use coin_lnn::agent::{self, TrainerConfig};
use coin_lnn::factextract;
use coin_lnn::harness::{self, ExperimentConfig};
use coin_lnn::lexicon::{Category, CategoryProvider, LexiconTable};
use coin_lnn::lnn::{self, TruthConfig};
use coin_lnn::worldsim::{self, Action, EpisodeState, GameSpec, RoomGraph};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A generated coin-collector game with one running episode.
#[pyclass(module = "coinlnn")]
struct Game {
    graph: RoomGraph,
    state: Option<EpisodeState>,
}

#[pymethods]
impl Game {
    #[new]
    #[pyo3(signature = (difficulty, level, seed, max_episode_steps = worldsim::DEFAULT_MAX_EPISODE_STEPS))]
    fn new(difficulty: &str, level: u32, seed: u64, max_episode_steps: u32) -> PyResult<Self> {
        let spec = GameSpec {
            difficulty: difficulty.parse().map_err(value_err)?,
            level,
            seed,
            max_episode_steps,
        };
        let graph = worldsim::generate_game(&spec).map_err(value_err)?;
        Ok(Game { graph, state: None })
    }

    /// Starts a new episode and returns the first observation.
    fn reset(&mut self) -> PyResult<String> {
        let (state, text) = self.graph.reset().map_err(value_err)?;
        self.state = Some(state);
        Ok(text)
    }

    /// Applies an action such as "go north"; returns
    /// `(observation, quest_reward, done, action_valid)`.
    fn step(&mut self, action: &str) -> PyResult<(String, f64, bool, bool)> {
        let action: Action = action.parse().map_err(value_err)?;
        let state = self
            .state
            .as_mut()
            .ok_or_else(|| PyRuntimeError::new_err("call reset() first"))?;
        let out = self
            .graph
            .step(state, action)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok((out.observation, out.quest_reward, out.done, out.action_valid))
    }

    #[getter]
    fn room_count(&self) -> usize {
        self.graph.room_count()
    }

    #[getter]
    fn steps(&self) -> u32 {
        self.state.as_ref().map_or(0, |s| s.steps)
    }

    fn adjacency_dump(&self) -> String {
        self.graph.adjacency_dump()
    }
}

/// Parses an observation into `{"room_name", "exits", "objects"}`.
#[pyfunction]
fn parse_observation<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyDict>> {
    let parsed = factextract::parse_observation(text).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("room_name", parsed.room_name)?;
    d.set_item(
        "exits",
        parsed.open_exits.iter().map(|e| e.as_str()).collect::<Vec<_>>(),
    )?;
    d.set_item(
        "objects",
        parsed.objects_seen.iter().map(|n| n.as_str()).collect::<Vec<_>>(),
    )?;
    Ok(d)
}

#[pyclass(module = "coinlnn")]
struct Lexicon {
    table: LexiconTable,
}

#[pymethods]
impl Lexicon {
    /// The bundled lexicon, or the TSV file at `path`.
    #[new]
    #[pyo3(signature = (path = None))]
    fn new(path: Option<&str>) -> PyResult<Self> {
        let table = match path {
            Some(p) => LexiconTable::load(p).map_err(value_err)?,
            None => LexiconTable::bundled(),
        };
        Ok(Lexicon { table })
    }

    fn lookup(&self, word: &str) -> Vec<String> {
        self.table.lookup(word).into_iter().map(|c| c.to_string()).collect()
    }

    fn __len__(&self) -> usize {
        self.table.len()
    }
}

/// One per-category logic network.
#[pyclass(module = "coinlnn")]
struct LnnNetwork {
    inner: lnn::LnnNetwork,
}

#[pymethods]
impl LnnNetwork {
    #[new]
    fn new(category: &str) -> PyResult<Self> {
        Ok(LnnNetwork {
            inner: lnn::LnnNetwork::new(Category::new(category)).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn from_checkpoint(text: &str) -> PyResult<Self> {
        Ok(LnnNetwork {
            inner: lnn::LnnNetwork::from_checkpoint(text).map_err(value_err)?,
        })
    }

    fn to_checkpoint(&self) -> String {
        self.inner.to_checkpoint()
    }

    fn forward(&self, facts: Vec<f64>) -> PyResult<f64> {
        self.inner.q(&facts).map_err(value_err)
    }

    /// Gradient of the output with respect to every parameter, flattened.
    fn gradients(&self, facts: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.gradients(&facts, 1.0).map_err(value_err)?.flatten())
    }

    #[pyo3(signature = (facts, alpha = lnn::DEFAULT_ALPHA))]
    fn add_and_gate(&mut self, facts: Vec<f64>, alpha: f64) -> PyResult<()> {
        let truth = TruthConfig::new(alpha).map_err(value_err)?;
        self.inner.add_and_gate(&facts, &truth).map_err(value_err)
    }

    #[pyo3(signature = (alpha = lnn::DEFAULT_ALPHA, weight_threshold = harness::RULE_WEIGHT_THRESHOLD))]
    fn rules(&self, alpha: f64, weight_threshold: f64) -> PyResult<Vec<String>> {
        let truth = TruthConfig::new(alpha).map_err(value_err)?;
        Ok(self
            .inner
            .extract_rules(&truth, weight_threshold)
            .iter()
            .map(ToString::to_string)
            .collect())
    }

    #[getter]
    fn gate_count(&self) -> usize {
        self.inner.gate_count()
    }

    #[getter]
    fn params(&self) -> Vec<f64> {
        self.inner.flat_params()
    }
}

/// "true", "false" or "unknown" under threshold `alpha`.
#[pyfunction]
#[pyo3(signature = (value, alpha = lnn::DEFAULT_ALPHA))]
fn classify_truth(value: f64, alpha: f64) -> PyResult<&'static str> {
    let truth = TruthConfig::new(alpha).map_err(value_err)?;
    Ok(match lnn::classify_truth(value, &truth) {
        lnn::Truth::True => "true",
        lnn::Truth::False => "false",
        lnn::Truth::Unknown => "unknown",
    })
}

#[pyfunction]
fn epsilon_at(epoch: u64) -> f64 {
    agent::epsilon_at(epoch, &TrainerConfig::default())
}

/// Runs an experiment from `key=value` config text plus overrides and
/// returns `{"metrics_csv", "rules"}`; writes the run directory when `out`
/// is given.
#[pyfunction]
#[pyo3(signature = (config = "", overrides = Vec::new(), out = None))]
fn run_experiment<'py>(
    py: Python<'py>,
    config: &str,
    overrides: Vec<String>,
    out: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = ExperimentConfig::parse(config).map_err(value_err)?;
    for kv in &overrides {
        cfg.apply_override(kv).map_err(value_err)?;
    }
    let result = py
        .detach(|| harness::run_experiment(&cfg, false))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    if let Some(dir) = out {
        harness::write_experiment(&result, dir.as_ref()).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    }
    let d = PyDict::new(py);
    d.set_item("metrics_csv", result.metrics.to_csv())?;
    d.set_item("rules", result.rule_dump())?;
    Ok(d)
}

type CrossingRow = (f64, Option<u64>, Option<u64>);

/// First epoch each metrics CSV reaches each threshold: list of
/// `(threshold, epoch_a, epoch_b)` with `None` for "not reached".
#[pyfunction]
#[pyo3(signature = (csv_a, csv_b, thresholds = vec![0.9], column = "mean_test_reward"))]
fn compare_runs(csv_a: &str, csv_b: &str, thresholds: Vec<f64>, column: &str) -> PyResult<Vec<CrossingRow>> {
    let c = harness::compare_runs(csv_a, csv_b, &thresholds, column).map_err(value_err)?;
    Ok(c.crossings.iter().map(|x| (x.threshold, x.a, x.b)).collect())
}

#[pymodule]
fn coinlnn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Game>()?;
    m.add_class::<Lexicon>()?;
    m.add_class::<LnnNetwork>()?;
    m.add_function(wrap_pyfunction!(parse_observation, m)?)?;
    m.add_function(wrap_pyfunction!(classify_truth, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_at, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(compare_runs, m)?)?;
    Ok(())
}
