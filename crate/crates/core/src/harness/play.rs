use std::io::{BufRead, Write};

use super::{HarnessError, TrainedPolicy};
use crate::agent::QFunction;
use crate::factextract::{extract_propositions, parse_observation, AgentMap, PropositionSet};
use crate::worldsim::{generate_game, Action, GameSpec, Verb};

const HELP: &str = "commands: go <north|east|south|west>, take coin, facts, look, help, quit";

fn io(e: std::io::Error) -> HarnessError {
    HarnessError::Io {
        path: "<console>".into(),
        source: e,
    }
}

fn print_q(out: &mut impl Write, policy: &TrainedPolicy, props: &PropositionSet) -> Result<(), HarnessError> {
    let (choices, values) = match policy {
        TrainedPolicy::Lnn(p) => {
            let c = p.choices(props);
            let v = p.q_values(props, &c);
            (c, v)
        }
        TrainedPolicy::Nn(p) => {
            let c = p.choices(props);
            let v = p.q_values(props, &c);
            (c, v)
        }
    };
    for (c, v) in choices.iter().zip(values) {
        writeln!(out, "  q({}) = {v:.4}", c.action).map_err(io)?;
    }
    Ok(())
}

/// Console loop over one game: prints each observation with the candidate
/// q-values of `policy`, reads commands until `quit`, end of input or the
/// end of the episode.
pub fn play(
    spec: &GameSpec,
    policy: &TrainedPolicy,
    input: impl BufRead,
    mut out: impl Write,
) -> Result<(), HarnessError> {
    let game = generate_game(spec)?;
    let (mut state, mut text) = game.reset()?;
    let mut map = AgentMap::new(state.room);
    let mut props = extract_propositions(&parse_observation(&text).map_err(crate::agent::AgentError::from)?, &map);
    writeln!(out, "{text}").map_err(io)?;
    print_q(&mut out, policy, &props)?;
    for line in input.lines() {
        let line = line.map_err(io)?;
        let cmd = line.trim().to_lowercase();
        match cmd.as_str() {
            "" => continue,
            "quit" | "exit" => break,
            "help" => writeln!(out, "{HELP}").map_err(io)?,
            "facts" => write!(out, "{}", props.debug_dump()).map_err(io)?,
            "look" => {
                writeln!(out, "{text}").map_err(io)?;
                print_q(&mut out, policy, &props)?;
            }
            other => {
                let Ok(action) = other.parse::<Action>() else {
                    writeln!(out, "unrecognised command `{other}`\n{HELP}").map_err(io)?;
                    continue;
                };
                let prev = state.room;
                let outcome = game.step(&mut state, action)?;
                if !outcome.action_valid {
                    writeln!(out, "nothing happens ({action} is not possible here)").map_err(io)?;
                } else {
                    if action.verb == Verb::Go {
                        map.update(prev, action, outcome.room_id)
                            .map_err(crate::agent::AgentError::from)?;
                    }
                    text = outcome.observation.clone();
                    props =
                        extract_propositions(&parse_observation(&text).map_err(crate::agent::AgentError::from)?, &map);
                    writeln!(out, "{text}").map_err(io)?;
                }
                if outcome.quest_reward > 0.0 {
                    writeln!(out, "you took the coin in {} steps", state.steps).map_err(io)?;
                }
                if outcome.done {
                    writeln!(out, "episode over after {} steps", state.steps).map_err(io)?;
                    break;
                }
                print_q(&mut out, policy, &props)?;
            }
        }
    }
    Ok(())
}
