use super::{Direction, RoomGraph, RoomId, WorldError};
use crate::rng::splitmix64;

/// Number of surface forms per content category (header, exits, coin).
pub const TEMPLATE_VARIANTS: usize = 3;

/// Template indices (header, exits, coin) for a room. Keyed by a hash of the
/// game seed and room id so one game mixes several surface forms.
pub(crate) fn template_choice(seed: u64, room: RoomId) -> [usize; 3] {
    let h = splitmix64(seed ^ splitmix64(room.0 as u64 + 1));
    let n = TEMPLATE_VARIANTS as u64;
    [(h % n) as usize, ((h >> 16) % n) as usize, ((h >> 32) % n) as usize]
}

fn join_list(items: &[Direction], conjunction: &str) -> String {
    match items {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => {
            let head: Vec<&str> = init.iter().map(|d| d.as_str()).collect();
            format!("{} {} {}", head.join(", "), conjunction, last)
        }
    }
}

fn header(name: &str, variant: usize) -> String {
    match variant {
        0 => format!("-= {name} =-"),
        1 => format!("You are now in the {name}."),
        _ => format!("You find yourself in the {name}."),
    }
}

fn exits_sentence(exits: &[Direction], variant: usize) -> String {
    if exits.is_empty() {
        return "There is no way out.".to_string();
    }
    match variant {
        0 if exits.len() == 1 => format!("There is an exit to the {}.", exits[0]),
        0 => format!("There are exits to the {}.", join_list(exits, "and")),
        1 => format!("You can go {}.", join_list(exits, "or")),
        _ => exits
            .iter()
            .map(|d| format!("An open doorway leads {d}."))
            .collect::<Vec<_>>()
            .join(" "),
    }
}

fn coin_sentence(variant: usize) -> &'static str {
    match variant {
        0 => "You see a coin here.",
        1 => "A coin lies on the floor.",
        _ => "Something shiny catches your eye: a coin.",
    }
}

/// Templated description of `room`: a header line naming the room, then a
/// line listing the open exits and the coin if present.
pub fn render_observation(graph: &RoomGraph, room: RoomId) -> Result<String, WorldError> {
    let r = graph.room(room)?;
    let [h, e, c] = template_choice(graph.spec.seed, room);
    let exits: Vec<Direction> = r.open_exits().collect();
    let mut body = exits_sentence(&exits, e);
    if room == graph.coin_room {
        body.push(' ');
        body.push_str(coin_sentence(c));
    }
    Ok(format!("{}\n{}", header(&r.name, h), body))
}
