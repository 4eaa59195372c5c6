//! Q-learning over grounded logical facts.
//!
//! Each step the agent parses the observation, extracts the proposition set,
//! grounds one candidate per (category, noun) pair and lets the category's
//! network score it. Training follows the usual DQN recipe: ε-greedy play,
//! shaped rewards, a two-pool prioritized replay, a periodically refreshed
//! target network and Adam. The LNN learner additionally grows a new AND gate
//! whenever a rewarding transition is not yet explained by any existing gate.

mod adam;
mod baseline;
mod policy;
mod replay;
mod trainer;

use std::collections::BTreeSet;

use rand::Rng;
use thiserror::Error;

pub use adam::Adam;
pub use baseline::{MlpPolicy, HIDDEN_UNITS};
pub use policy::{Induction, LnnPolicy};
pub use replay::{ReplayBuffer, DEFAULT_CAPACITY, DEFAULT_PRIORITY_FRACTION};
pub use trainer::{evaluate_episode, Agent, EpisodeReport, Mode, TraceLine, TrainStats};

use crate::factextract::{ground_facts, AgentMap, FactError, GroundedFactVector, PropositionSet};
use crate::lexicon::{noun_fits, Category, CategoryProvider};
use crate::lnn::{verb_for_category, LnnError};
use crate::worldsim::{Action, Difficulty, Noun, StepOutcome, Verb, WorldError};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("no candidate actions to choose from")]
    NoCandidates,
    #[error("replay buffer is empty")]
    EmptyReplay,
    #[error("invalid trainer config: {0}")]
    Config(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Fact(#[from] FactError),
    #[error(transparent)]
    Lnn(#[from] LnnError),
}

/// A scored action option. `category` is the word class the action's noun
/// was grounded under; propositional learners leave it empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Choice {
    pub action: Action,
    pub category: Option<Category>,
}

impl Choice {
    pub fn untyped(action: Action) -> Self {
        Choice { action, category: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub category: Category,
    pub noun: Noun,
    pub action: Action,
    pub facts: GroundedFactVector,
}

impl Candidate {
    pub fn choice(&self) -> Choice {
        Choice {
            action: self.action,
            category: Some(self.category.clone()),
        }
    }
}

/// Enumeration order of candidate nouns: the coin first, then N, E, S, W.
pub const CANDIDATE_NOUN_ORDER: [Noun; 5] = [Noun::Coin, Noun::North, Noun::East, Noun::South, Noun::West];

/// One candidate per (noun, category) pair the lexicon supports. Nouns with
/// no usable category are skipped.
pub fn enumerate_candidates(props: &PropositionSet, lexicon: &dyn CategoryProvider) -> Vec<Candidate> {
    let mut out = Vec::new();
    for noun in CANDIDATE_NOUN_ORDER {
        let categories: BTreeSet<Category> = lexicon.lookup(noun.as_str());
        for category in categories {
            let Some(verb) = verb_for_category(&category) else {
                continue;
            };
            if !noun_fits(&category, noun) {
                continue;
            }
            let facts = ground_facts(props, &category, noun).expect("noun fits category");
            out.push(Candidate {
                action: Action::new(verb, noun),
                noun,
                category,
                facts,
            });
        }
    }
    out
}

/// An action-value learner the trainer can drive.
pub trait QFunction: Clone {
    type Grad;
    type Optimizer;

    /// Candidate choices in a fixed order (ties resolve to the earliest).
    fn choices(&self, props: &PropositionSet) -> Vec<Choice>;
    /// Values in [0, 1], one per choice.
    fn q_values(&self, props: &PropositionSet, choices: &[Choice]) -> Vec<f64>;
    fn zero_grad(&self) -> Self::Grad;
    /// Adds the gradient of `scale * (prediction - target)^2` to `grad`,
    /// returning the squared error.
    fn accumulate(
        &self,
        props: &PropositionSet,
        choice: &Choice,
        target: f64,
        scale: f64,
        grad: &mut Self::Grad,
    ) -> f64;
    fn new_optimizer(&self, learning_rate: f64) -> Self::Optimizer;
    fn apply(&mut self, grad: &Self::Grad, optimizer: &mut Self::Optimizer);
    /// Structural learning hook for rewarding transitions.
    fn induce(&mut self, _props: &PropositionSet, _choice: &Choice, _alpha: f64) -> Induction {
        Induction::NotNeeded
    }
    fn checksum(&self) -> u64;
}

/// Replay record. `choice` is the chosen action with its grounding
/// category; `next_choices` are the options available afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: PropositionSet,
    pub choice: Choice,
    pub reward: f64,
    pub next_obs: PropositionSet,
    pub next_choices: Vec<Choice>,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerConfig {
    pub gamma: f64,
    pub batch_size: usize,
    pub update_period: u64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_anneal_epochs: u64,
    pub bonus_coefficient: f64,
    pub learning_rate: f64,
    pub replay_capacity: usize,
    pub priority_fraction: f64,
    pub target_refresh: u64,
    pub alpha: f64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            gamma: 0.9,
            batch_size: 4,
            update_period: 4,
            epsilon_start: 1.0,
            epsilon_end: 0.2,
            epsilon_anneal_epochs: 1000,
            bonus_coefficient: 1.0,
            learning_rate: 1e-3,
            replay_capacity: DEFAULT_CAPACITY,
            priority_fraction: DEFAULT_PRIORITY_FRACTION,
            target_refresh: 100,
            alpha: crate::lnn::DEFAULT_ALPHA,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let fail = |m: &str| Err(AgentError::Config(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail("gamma must lie in (0, 1)");
        }
        if self.batch_size == 0 || self.update_period == 0 || self.replay_capacity == 0 || self.target_refresh == 0 {
            return fail("batch_size, update_period, replay_capacity and target_refresh must be positive");
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_end) {
            return fail("epsilon bounds must lie in [0, 1]");
        }
        if self.learning_rate < 0.0 || self.bonus_coefficient < 0.0 {
            return fail("learning_rate and bonus_coefficient must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.priority_fraction) {
            return fail("priority_fraction must lie in [0, 1]");
        }
        if !(0.5..=1.0).contains(&self.alpha) {
            return fail("alpha must lie in [0.5, 1]");
        }
        Ok(())
    }
}

/// Linear anneal from `epsilon_start` to `epsilon_end` over
/// `epsilon_anneal_epochs`, constant afterwards.
pub fn epsilon_at(epoch: u64, config: &TrainerConfig) -> f64 {
    if config.epsilon_anneal_epochs == 0 || epoch >= config.epsilon_anneal_epochs {
        return config.epsilon_end;
    }
    let frac = epoch as f64 / config.epsilon_anneal_epochs as f64;
    config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub choice: Choice,
    pub q_values: Vec<f64>,
}

/// ε-greedy choice; the greedy branch takes the first maximal value. With
/// `epsilon == 0` the generator is left untouched.
pub fn select_action<Q: QFunction, R: Rng>(
    q: &Q,
    props: &PropositionSet,
    epsilon: f64,
    rng: &mut R,
) -> Result<Selection, AgentError> {
    let choices = q.choices(props);
    if choices.is_empty() {
        return Err(AgentError::NoCandidates);
    }
    let q_values = q.q_values(props, &choices);
    let explore = epsilon > 0.0 && rng.gen::<f64>() < epsilon;
    let index = if explore {
        rng.gen_range(0..choices.len())
    } else {
        argmax_first(&q_values)
    };
    Ok(Selection {
        index,
        choice: choices[index].clone(),
        q_values,
    })
}

pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Quest reward plus episodic discovery bonus, plus (medium and hard) a
/// bonus for leaving a room whose open exits are all visited through the
/// direction it was first entered from. Invalid actions earn nothing.
pub fn shape_reward(
    outcome: &StepOutcome,
    map_before: &AgentMap,
    props_before: &PropositionSet,
    action: Action,
    difficulty: Difficulty,
    bonus_coefficient: f64,
) -> f64 {
    if !outcome.action_valid {
        return 0.0;
    }
    let mut reward = outcome.quest_reward;
    if action.verb == Verb::Go && !map_before.has_visited(outcome.room_id) {
        reward += bonus_coefficient;
    }
    let returns_home = difficulty != Difficulty::Easy
        && action.verb == Verb::Go
        && props_before.all_visited()
        && map_before
            .entry_direction
            .get(&map_before.current)
            .is_some_and(|&d| action.noun == Noun::from(d));
    if returns_home {
        reward += bonus_coefficient;
    }
    reward
}

/// Regression target, clamped to [0, 1].
pub fn td_target<Q: QFunction>(transition: &Transition, target: &Q, gamma: f64) -> f64 {
    if transition.terminal || transition.next_choices.is_empty() {
        return transition.reward.clamp(0.0, 1.0);
    }
    let best = target
        .q_values(&transition.next_obs, &transition.next_choices)
        .into_iter()
        .fold(0.0, f64::max);
    (transition.reward + gamma * best).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::LexiconTable;
    use crate::worldsim::{Direction, RoomId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn props(exits: &[Direction], coin: bool) -> PropositionSet {
        let mut find = [false; 5];
        for d in exits {
            find[d.index()] = true;
        }
        find[4] = coin;
        PropositionSet::from_positive(find, [false; 4], [false; 4])
    }

    #[test]
    fn five_candidates_in_fixed_order() {
        let lex = LexiconTable::bundled();
        let c = enumerate_candidates(&props(&[Direction::North], false), &lex);
        assert_eq!(c.len(), 5);
        assert_eq!(c[0].action, Action::take_coin());
        assert_eq!(c[0].category, Category::money());
        let east = c.iter().find(|c| c.noun == Noun::East).unwrap();
        assert_eq!(east.action, Action::go(Direction::East));
        assert_eq!(east.facts.literals.len(), 8);
    }

    #[test]
    fn missing_category_drops_candidate() {
        let mut lex = LexiconTable::default();
        for d in ["north", "east", "south", "west"] {
            lex.insert(d, Category::direction());
        }
        let c = enumerate_candidates(&props(&[], true), &lex);
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|c| c.action.verb == Verb::Go));
    }

    #[test]
    fn epsilon_schedule() {
        let cfg = TrainerConfig::default();
        assert_eq!(epsilon_at(0, &cfg), 1.0);
        assert!((epsilon_at(500, &cfg) - 0.6).abs() < 1e-12);
        assert!((epsilon_at(1000, &cfg) - 0.2).abs() < 1e-12);
        assert!((epsilon_at(5000, &cfg) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(TrainerConfig::default().validate().is_ok());
        let bad = TrainerConfig {
            gamma: 1.0,
            ..TrainerConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainerConfig {
            alpha: 0.3,
            ..TrainerConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn argmax_prefers_earliest() {
        assert_eq!(argmax_first(&[0.2, 0.7, 0.7, 0.1]), 1);
        assert_eq!(argmax_first(&[0.5, 0.5]), 0);
    }

    #[test]
    fn greedy_selection_is_deterministic_and_leaves_rng() {
        let policy = LnnPolicy::with_rules(LexiconTable::bundled());
        let p = props(&[Direction::East, Direction::West], true);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let before = rng.clone();
        let a = select_action(&policy, &p, 0.0, &mut rng).unwrap();
        assert_eq!(rng, before);
        assert_eq!(a.choice.action, Action::take_coin());
        assert_eq!(a, select_action(&policy, &p, 0.0, &mut rng).unwrap());
    }

    #[test]
    fn uniform_exploration_within_three_sigma() {
        let policy = LnnPolicy::new(LexiconTable::bundled()).unwrap();
        let p = props(&[Direction::North], false);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut counts = [0usize; 5];
        let n = 10_000;
        for _ in 0..n {
            counts[select_action(&policy, &p, 1.0, &mut rng).unwrap().index] += 1;
        }
        let expected = n as f64 / 5.0;
        let sigma = (n as f64 * 0.2 * 0.8).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    fn outcome(room: usize, valid: bool, quest: f64) -> StepOutcome {
        StepOutcome {
            observation: String::new(),
            quest_reward: quest,
            done: quest > 0.0,
            room_id: RoomId(room),
            action_valid: valid,
        }
    }

    #[test]
    fn reward_shaping_cases() {
        let mut map = AgentMap::new(RoomId(0));
        let at_start = props(&[Direction::North], false);
        let go_n = Action::go(Direction::North);
        // first entry
        assert_eq!(
            shape_reward(&outcome(1, true, 0.0), &map, &at_start, go_n, Difficulty::Easy, 1.0),
            1.0
        );
        // invalid
        assert_eq!(
            shape_reward(&outcome(0, false, 0.0), &map, &at_start, go_n, Difficulty::Easy, 1.0),
            0.0
        );

        map.update(RoomId(0), go_n, RoomId(1)).unwrap();
        // dead end: only exit is the entry direction, already visited
        let dead_end = PropositionSet::from_positive(
            [false, false, true, false, false],
            [false, false, true, false],
            [false, false, true, false],
        );
        let back = Action::go(Direction::South);
        assert_eq!(
            shape_reward(&outcome(0, true, 0.0), &map, &dead_end, back, Difficulty::Medium, 1.0),
            1.0
        );
        // the same move on easy only revisits
        assert_eq!(
            shape_reward(&outcome(0, true, 0.0), &map, &dead_end, back, Difficulty::Easy, 1.0),
            0.0
        );
        // quest reward passes through
        assert_eq!(
            shape_reward(
                &outcome(1, true, 1.0),
                &map,
                &dead_end,
                Action::take_coin(),
                Difficulty::Easy,
                1.0
            ),
            1.0
        );
    }

    #[test]
    fn td_target_arithmetic() {
        let policy = LnnPolicy::new(LexiconTable::bundled()).unwrap();
        let p = props(&[Direction::North], false);
        let terminal = Transition {
            obs: p,
            choice: Choice::untyped(Action::take_coin()),
            reward: 1.0,
            next_obs: p,
            next_choices: policy.choices(&p),
            terminal: true,
        };
        assert_eq!(td_target(&terminal, &policy, 0.9), 1.0);

        // untrained networks output exactly 0.5 for every grounded candidate
        let mid = Transition {
            reward: 0.0,
            terminal: false,
            ..terminal.clone()
        };
        let best = policy.q_values(&p, &policy.choices(&p)).into_iter().fold(0.0, f64::max);
        assert!((best - 0.5).abs() < 1e-12);
        assert!((td_target(&mid, &policy, 0.9) - 0.45).abs() < 1e-12);

        let big = Transition {
            reward: 2.0,
            terminal: false,
            ..terminal
        };
        assert_eq!(td_target(&big, &policy, 0.9), 1.0);
    }
}
