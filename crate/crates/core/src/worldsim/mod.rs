//! Procedural coin-collector world: map generation, a deterministic step
//! engine and templated observation text.

mod generate;
mod render;
mod types;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

pub use generate::generate_game;
pub use render::{render_observation, TEMPLATE_VARIANTS};
pub use types::{Action, Difficulty, Direction, Noun, RoomId, Verb};

pub const DEFAULT_MAX_EPISODE_STEPS: u32 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("invalid game spec: {0}")]
    InvalidSpec(String),
    #[error("map generation failed: {0}")]
    GenerationFailed(String),
    #[error("episode already finished after {steps} steps")]
    EpisodeFinished { steps: u32 },
    #[error("room {0} does not exist")]
    UnknownRoom(RoomId),
    #[error("graph has no rooms")]
    EmptyGraph,
    #[error("unknown action `{0}`")]
    UnknownAction(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GameSpec {
    pub difficulty: Difficulty,
    /// Minimum number of moves from the start room to the coin room.
    pub level: u32,
    pub seed: u64,
    pub max_episode_steps: u32,
}

impl GameSpec {
    pub fn new(difficulty: Difficulty, level: u32, seed: u64) -> Self {
        GameSpec {
            difficulty,
            level,
            seed,
            max_episode_steps: DEFAULT_MAX_EPISODE_STEPS,
        }
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        if self.level == 0 {
            return Err(WorldError::InvalidSpec("level must be at least 1".into()));
        }
        if self.max_episode_steps < self.level + 1 {
            return Err(WorldError::InvalidSpec(format!(
                "max_episode_steps {} is below level + 1 = {}",
                self.max_episode_steps,
                self.level + 1
            )));
        }
        Ok(())
    }

    /// Line-oriented `key=value` form.
    pub fn to_config_string(&self) -> String {
        format!(
            "difficulty={}\nlevel={}\nseed={}\nmax_episode_steps={}\n",
            self.difficulty, self.level, self.seed, self.max_episode_steps
        )
    }

    pub fn from_config_str(text: &str) -> Result<Self, WorldError> {
        let mut difficulty = None;
        let mut level = None;
        let mut seed = None;
        let mut max_steps = DEFAULT_MAX_EPISODE_STEPS;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| WorldError::InvalidSpec(format!("line {}: expected key=value", lineno + 1)))?;
            let value = value.trim();
            let bad = |what: &str| WorldError::InvalidSpec(format!("line {}: bad {what} `{value}`", lineno + 1));
            match key.trim() {
                "difficulty" => difficulty = Some(value.parse()?),
                "level" => level = Some(value.parse().map_err(|_| bad("level"))?),
                "seed" => seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "max_episode_steps" => max_steps = value.parse().map_err(|_| bad("max_episode_steps"))?,
                other => {
                    return Err(WorldError::InvalidSpec(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        let missing = |k: &str| WorldError::InvalidSpec(format!("missing key `{k}`"));
        let spec = GameSpec {
            difficulty: difficulty.ok_or_else(|| missing("difficulty"))?,
            level: level.ok_or_else(|| missing("level"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            max_episode_steps: max_steps,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoomRole {
    Path,
    Distractor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Room {
    pub id: RoomId,
    pub name: String,
    pub cell: (i32, i32),
    pub role: RoomRole,
    exits: [Option<RoomId>; 4],
}

impl Room {
    pub fn exit(&self, d: Direction) -> Option<RoomId> {
        self.exits[d.index()]
    }

    pub fn open_exits(&self) -> impl Iterator<Item = Direction> + '_ {
        Direction::ALL.into_iter().filter(|d| self.exits[d.index()].is_some())
    }

    pub fn degree(&self) -> usize {
        self.exits.iter().filter(|e| e.is_some()).count()
    }
}

/// Immutable generated map. Exits are symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomGraph {
    pub spec: GameSpec,
    rooms: Vec<Room>,
    pub start: RoomId,
    pub coin_room: RoomId,
    pub optimal_path: Vec<RoomId>,
}

impl RoomGraph {
    pub(crate) fn from_parts(spec: GameSpec, rooms: Vec<Room>, optimal_path: Vec<RoomId>) -> Result<Self, WorldError> {
        let (&start, &coin_room) = optimal_path
            .first()
            .zip(optimal_path.last())
            .ok_or(WorldError::EmptyGraph)?;
        Ok(RoomGraph {
            spec,
            rooms,
            start,
            coin_room,
            optimal_path,
        })
    }

    pub fn rooms(&self) -> &[Room] {
        &self.rooms
    }

    pub fn room(&self, id: RoomId) -> Result<&Room, WorldError> {
        self.rooms.get(id.0).ok_or(WorldError::UnknownRoom(id))
    }

    pub fn exit(&self, room: RoomId, d: Direction) -> Option<RoomId> {
        self.rooms.get(room.0).and_then(|r| r.exit(d))
    }

    pub fn room_count(&self) -> usize {
        self.rooms.len()
    }

    pub fn reset(&self) -> Result<(EpisodeState, String), WorldError> {
        if self.rooms.is_empty() {
            return Err(WorldError::EmptyGraph);
        }
        let state = EpisodeState {
            room: self.start,
            steps: 0,
            done: false,
        };
        let text = render_observation(self, self.start)?;
        Ok((state, text))
    }

    pub fn step(&self, state: &mut EpisodeState, action: Action) -> Result<StepOutcome, WorldError> {
        if state.done {
            return Err(WorldError::EpisodeFinished { steps: state.steps });
        }
        state.steps += 1;
        let mut quest_reward = 0.0;
        let action_valid = match (action.verb, action.noun.direction()) {
            (Verb::Go, Some(d)) => match self.exit(state.room, d) {
                Some(next) => {
                    state.room = next;
                    true
                }
                None => false,
            },
            (Verb::Take, None) if state.room == self.coin_room => {
                quest_reward = 1.0;
                state.done = true;
                true
            }
            _ => false,
        };
        if state.steps >= self.spec.max_episode_steps {
            state.done = true;
        }
        Ok(StepOutcome {
            observation: render_observation(self, state.room)?,
            quest_reward,
            done: state.done,
            room_id: state.room,
            action_valid,
        })
    }

    /// Plain-text adjacency listing for debugging.
    pub fn adjacency_dump(&self) -> String {
        let mut out = String::new();
        let s = &self.spec;
        let _ = writeln!(
            out,
            "# difficulty={} level={} seed={} rooms={}",
            s.difficulty,
            s.level,
            s.seed,
            self.rooms.len()
        );
        let path_index: BTreeMap<RoomId, usize> = self.optimal_path.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        for room in &self.rooms {
            let mut tags = Vec::new();
            if room.id == self.start {
                tags.push("start".to_string());
            }
            if room.id == self.coin_room {
                tags.push("coin".to_string());
            }
            match (room.role, path_index.get(&room.id)) {
                (RoomRole::Path, Some(i)) => tags.push(format!("path={i}")),
                _ => tags.push("distractor".to_string()),
            }
            let _ = writeln!(
                out,
                "room {} \"{}\" cell=({},{}) {}",
                room.id,
                room.name,
                room.cell.0,
                room.cell.1,
                tags.join(" ")
            );
        }
        for room in &self.rooms {
            for d in room.open_exits() {
                if let Some(to) = room.exit(d) {
                    let _ = writeln!(out, "exit {} {} {}", room.id, d, to);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeState {
    pub room: RoomId,
    pub steps: u32,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: String,
    pub quest_reward: f64,
    pub done: bool,
    pub room_id: RoomId,
    pub action_valid: bool,
}
