use std::fmt;

use rand_chacha::ChaCha8Rng;

use super::{
    epsilon_at, select_action, shape_reward, td_target, AgentError, Induction, QFunction, ReplayBuffer, TrainerConfig,
    Transition,
};
use crate::factextract::{extract_propositions, parse_observation, AgentMap, PropositionSet};
use crate::rng;
use crate::worldsim::{Action, EpisodeState, RoomGraph, Verb};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// One step of an episode as printed by `--trace`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLine {
    pub epoch: u64,
    pub step: u32,
    pub facts: String,
    pub action: Action,
    pub q_values: Vec<(Action, f64)>,
    pub reward: f64,
}

impl fmt::Display for TraceLine {
    /// `epoch<TAB>step<TAB>facts<TAB>action<TAB>action=q,..<TAB>reward`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q: Vec<String> = self.q_values.iter().map(|(a, v)| format!("{a}={v:.6}")).collect();
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.epoch,
            self.step,
            self.facts,
            self.action,
            q.join(","),
            self.reward
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeReport {
    /// Unshaped 0/1 quest success.
    pub quest_reward: f64,
    pub shaped_reward: f64,
    pub steps: u32,
    pub trace: Vec<TraceLine>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainStats {
    pub loss: f64,
    pub inductions: Vec<Induction>,
}

/// Environment side of an episode: game state, agent map and current facts.
struct Walker<'g> {
    graph: &'g RoomGraph,
    state: EpisodeState,
    map: AgentMap,
    props: PropositionSet,
}

struct Advance {
    before: PropositionSet,
    reward: f64,
    quest: f64,
}

impl<'g> Walker<'g> {
    fn start(graph: &'g RoomGraph) -> Result<Self, AgentError> {
        let (state, text) = graph.reset()?;
        let map = AgentMap::new(state.room);
        let props = extract_propositions(&parse_observation(&text)?, &map);
        Ok(Walker {
            graph,
            state,
            map,
            props,
        })
    }

    fn advance(&mut self, action: Action, bonus: f64) -> Result<Advance, AgentError> {
        let prev_room = self.state.room;
        let outcome = self.graph.step(&mut self.state, action)?;
        let reward = shape_reward(
            &outcome,
            &self.map,
            &self.props,
            action,
            self.graph.spec.difficulty,
            bonus,
        );
        if outcome.action_valid && action.verb == Verb::Go {
            self.map.update(prev_room, action, outcome.room_id)?;
        }
        let before = self.props;
        self.props = extract_propositions(&parse_observation(&outcome.observation)?, &self.map);
        Ok(Advance {
            before,
            reward,
            quest: outcome.quest_reward,
        })
    }
}

fn trace_line<Q: QFunction>(
    q: &Q,
    props: &PropositionSet,
    epoch: u64,
    step: u32,
    action: Action,
    values: &[f64],
    reward: f64,
) -> TraceLine {
    let choices = q.choices(props);
    TraceLine {
        epoch,
        step,
        facts: props.bitstring(),
        action,
        q_values: choices.iter().map(|c| c.action).zip(values.iter().copied()).collect(),
        reward,
    }
}

/// Greedy rollout with frozen parameters.
pub fn evaluate_episode<Q: QFunction>(
    q: &Q,
    graph: &RoomGraph,
    epoch: u64,
    trace: bool,
    bonus_coefficient: f64,
) -> Result<EpisodeReport, AgentError> {
    let mut walker = Walker::start(graph)?;
    // never drawn from: ε = 0 leaves the generator untouched
    let mut idle = rng::stream(0, "eval");
    let mut report = EpisodeReport {
        quest_reward: 0.0,
        shaped_reward: 0.0,
        steps: 0,
        trace: Vec::new(),
    };
    while !walker.state.done {
        let sel = select_action(q, &walker.props, 0.0, &mut idle)?;
        let adv = walker.advance(sel.choice.action, bonus_coefficient)?;
        report.quest_reward += adv.quest;
        report.shaped_reward += adv.reward;
        if trace {
            report.trace.push(trace_line(
                q,
                &adv.before,
                epoch,
                walker.state.steps,
                sel.choice.action,
                &sel.q_values,
                adv.reward,
            ));
        }
    }
    report.steps = walker.state.steps;
    Ok(report)
}

/// DQN learner around any [`QFunction`].
#[derive(Debug, Clone)]
pub struct Agent<Q: QFunction> {
    pub online: Q,
    pub target: Q,
    pub optimizer: Q::Optimizer,
    pub replay: ReplayBuffer,
    pub config: TrainerConfig,
    pub env_steps: u64,
    pub optimizer_steps: u64,
    pub inductions: u64,
    explore_rng: ChaCha8Rng,
    replay_rng: ChaCha8Rng,
}

impl<Q: QFunction> Agent<Q> {
    pub fn new(q: Q, config: TrainerConfig, seed: u64) -> Result<Self, AgentError> {
        config.validate()?;
        Ok(Agent {
            target: q.clone(),
            optimizer: q.new_optimizer(config.learning_rate),
            online: q,
            replay: ReplayBuffer::new(config.replay_capacity, config.priority_fraction),
            config,
            env_steps: 0,
            optimizer_steps: 0,
            inductions: 0,
            explore_rng: rng::stream(seed, "exploration"),
            replay_rng: rng::stream(seed, "replay"),
        })
    }

    /// One optimizer step on a sampled batch. Rewarding transitions that no
    /// gate explains first trigger induction.
    pub fn train_step(&mut self) -> Result<TrainStats, AgentError> {
        if self.replay.is_empty() {
            return Err(AgentError::EmptyReplay);
        }
        let batch: Vec<Transition> = self
            .replay
            .sample(self.config.batch_size, &mut self.replay_rng)
            .into_iter()
            .cloned()
            .collect();
        let mut stats = TrainStats::default();
        for t in batch.iter().filter(|t| t.reward >= 1.0) {
            match self.online.induce(&t.obs, &t.choice, self.config.alpha) {
                Induction::NotNeeded => {}
                other => {
                    if matches!(other, Induction::Added { .. }) {
                        self.inductions += 1;
                    }
                    stats.inductions.push(other);
                }
            }
        }
        let scale = 1.0 / batch.len() as f64;
        let mut grad = self.online.zero_grad();
        for t in &batch {
            let y = td_target(t, &self.target, self.config.gamma);
            stats.loss += scale * self.online.accumulate(&t.obs, &t.choice, y, scale, &mut grad);
        }
        self.online.apply(&grad, &mut self.optimizer);
        self.optimizer_steps += 1;
        if self.optimizer_steps.is_multiple_of(self.config.target_refresh) {
            self.target = self.online.clone();
        }
        Ok(stats)
    }

    /// Plays one episode. Training mode explores with the annealed ε,
    /// stores transitions and trains every `update_period` steps; evaluation
    /// mode is greedy and leaves all parameters untouched.
    pub fn run_episode(
        &mut self,
        graph: &RoomGraph,
        mode: Mode,
        epoch: u64,
        trace: bool,
    ) -> Result<EpisodeReport, AgentError> {
        if mode == Mode::Eval {
            return evaluate_episode(&self.online, graph, epoch, trace, self.config.bonus_coefficient);
        }
        let epsilon = epsilon_at(epoch, &self.config);
        let mut walker = Walker::start(graph)?;
        let mut report = EpisodeReport {
            quest_reward: 0.0,
            shaped_reward: 0.0,
            steps: 0,
            trace: Vec::new(),
        };
        while !walker.state.done {
            let sel = select_action(&self.online, &walker.props, epsilon, &mut self.explore_rng)?;
            let adv = walker.advance(sel.choice.action, self.config.bonus_coefficient)?;
            report.quest_reward += adv.quest;
            report.shaped_reward += adv.reward;
            if trace {
                report.trace.push(trace_line(
                    &self.online,
                    &adv.before,
                    epoch,
                    walker.state.steps,
                    sel.choice.action,
                    &sel.q_values,
                    adv.reward,
                ));
            }
            self.replay.push(Transition {
                obs: adv.before,
                choice: sel.choice,
                reward: adv.reward,
                next_obs: walker.props,
                next_choices: self.online.choices(&walker.props),
                terminal: adv.quest > 0.0,
            });
            self.env_steps += 1;
            if self.env_steps.is_multiple_of(self.config.update_period) {
                self.train_step()?;
            }
        }
        report.steps = walker.state.steps;
        Ok(report)
    }
}
