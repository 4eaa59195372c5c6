use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::{Direction, GameSpec, Room, RoomGraph, RoomId, RoomRole, WorldError};
use crate::rng;

const MAX_ATTEMPTS: usize = 4000;

const ADJECTIVES: [&str; 24] = [
    "Dusty",
    "Quiet",
    "Narrow",
    "Bright",
    "Damp",
    "Cozy",
    "Grand",
    "Hidden",
    "Old",
    "Painted",
    "Silent",
    "Sunny",
    "Chilly",
    "Cluttered",
    "Empty",
    "Faded",
    "Gloomy",
    "Lofty",
    "Musty",
    "Neat",
    "Plain",
    "Rustic",
    "Shabby",
    "Tidy",
];

const KINDS: [&str; 24] = [
    "Pantry",
    "Kitchen",
    "Bedroom",
    "Study",
    "Cellar",
    "Attic",
    "Parlor",
    "Library",
    "Gallery",
    "Hallway",
    "Workshop",
    "Scullery",
    "Nursery",
    "Chapel",
    "Armory",
    "Closet",
    "Lounge",
    "Office",
    "Laundry",
    "Vault",
    "Foyer",
    "Garage",
    "Bathroom",
    "Conservatory",
];

struct Layout {
    path: Vec<(i32, i32)>,
    /// (index of the path room, direction from it)
    distractors: Vec<(usize, Direction)>,
}

fn step_cell(cell: (i32, i32), d: Direction) -> (i32, i32) {
    let (dx, dy) = d.offset();
    (cell.0 + dx, cell.1 + dy)
}

fn free_dirs(cell: (i32, i32), occupied: &HashSet<(i32, i32)>) -> Vec<Direction> {
    Direction::ALL
        .into_iter()
        .filter(|&d| !occupied.contains(&step_cell(cell, d)))
        .collect()
}

/// One attempt at a seeded self-avoiding walk with distractor cells reserved
/// as the walk proceeds. Returns `None` when the walk boxes itself in.
fn try_layout(level: usize, per_room: usize, rng: &mut ChaCha8Rng) -> Option<Layout> {
    let mut occupied = HashSet::new();
    let mut path = vec![(0, 0)];
    let mut distractors = Vec::new();
    occupied.insert((0, 0));

    for i in 0..level {
        let cur = path[i];
        let free = free_dirs(cur, &occupied);
        // the next room needs one onward exit plus its own distractors, unless it holds the coin
        let next_needs = if i + 1 == level { 0 } else { 1 + per_room };
        if free.len() <= per_room {
            return None;
        }
        let viable: Vec<Direction> = free
            .iter()
            .copied()
            .filter(|&d| {
                let next = step_cell(cur, d);
                let room_for_next = free_dirs(next, &occupied)
                    .into_iter()
                    .filter(|&nd| step_cell(next, nd) != cur)
                    .count();
                room_for_next >= next_needs
            })
            .collect();
        let &dir = viable.choose(rng)?;
        let next = step_cell(cur, dir);

        let mut spare: Vec<Direction> = free.into_iter().filter(|&d| d != dir).collect();
        spare.shuffle(rng);
        if spare.len() < per_room {
            return None;
        }
        occupied.insert(next);
        for &d in spare.iter().take(per_room) {
            occupied.insert(step_cell(cur, d));
            distractors.push((i, d));
        }
        path.push(next);
    }
    Some(Layout { path, distractors })
}

fn room_names(count: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut combos: Vec<(usize, usize)> = (0..ADJECTIVES.len())
        .flat_map(|a| (0..KINDS.len()).map(move |k| (a, k)))
        .collect();
    combos.shuffle(rng);
    (0..count)
        .map(|i| {
            let (a, k) = combos[i % combos.len()];
            let round = i / combos.len();
            if round == 0 {
                format!("{} {}", ADJECTIVES[a], KINDS[k])
            } else {
                format!("{} {} {}", ADJECTIVES[a], KINDS[k], round + 1)
            }
        })
        .collect()
}

/// Builds the map for `spec`. Deterministic in (difficulty, level, seed).
pub fn generate_game(spec: &GameSpec) -> Result<RoomGraph, WorldError> {
    spec.validate()?;
    let level = spec.level as usize;
    let per_room = spec.difficulty.distractors_per_room();
    let stream_seed = rng::derive_indexed(spec.seed, spec.difficulty.as_str(), spec.level as u64);
    let mut rng = rng::stream(stream_seed, "layout");

    let layout = (0..MAX_ATTEMPTS)
        .find_map(|_| try_layout(level, per_room, &mut rng))
        .ok_or_else(|| {
            WorldError::GenerationFailed(format!(
                "no collision-free grid layout for {} level {} after {} attempts",
                spec.difficulty, spec.level, MAX_ATTEMPTS
            ))
        })?;

    let total = layout.path.len() + layout.distractors.len();
    let names = room_names(total, &mut rng);
    let mut names = names.into_iter();

    let mut rooms: Vec<Room> = layout
        .path
        .iter()
        .enumerate()
        .map(|(i, &cell)| Room {
            id: RoomId(i),
            name: names.next().unwrap_or_default(),
            cell,
            role: RoomRole::Path,
            exits: [None; 4],
        })
        .collect();

    let connect = |rooms: &mut Vec<Room>, a: usize, d: Direction, b: usize| {
        rooms[a].exits[d.index()] = Some(RoomId(b));
        rooms[b].exits[d.opposite().index()] = Some(RoomId(a));
    };

    for i in 0..level {
        let (from, to) = (layout.path[i], layout.path[i + 1]);
        let d = Direction::ALL
            .into_iter()
            .find(|&d| step_cell(from, d) == to)
            .expect("walk steps are unit moves");
        connect(&mut rooms, i, d, i + 1);
    }
    for &(i, d) in &layout.distractors {
        let id = rooms.len();
        rooms.push(Room {
            id: RoomId(id),
            name: names.next().unwrap_or_default(),
            cell: step_cell(layout.path[i], d),
            role: RoomRole::Distractor,
            exits: [None; 4],
        });
        connect(&mut rooms, i, d, id);
    }

    let optimal_path = (0..=level).map(RoomId).collect();
    RoomGraph::from_parts(*spec, rooms, optimal_path)
}
