//! Observation text plus agent history to logical facts.
//!
//! Parsing yields the open exits and visible objects; the [`AgentMap`]
//! remembers traversed edges. Together they produce the 26 propositional
//! truth values of a [`PropositionSet`], which are then grounded per
//! candidate noun into a [`GroundedFactVector`] for the category's network.

mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

pub use parser::parse_observation;

use crate::lexicon::{noun_fits, Category};
use crate::worldsim::{Action, Direction, Noun, RoomId, Verb};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactError {
    #[error("observation text not covered by the grammar: `{span}`")]
    Unmatched { span: String },
    #[error("`{0}` cannot move the agent: go needs a direction")]
    NotAMove(Action),
    #[error("noun `{noun}` cannot be grounded under category `{category}`")]
    CategoryMismatch { category: Category, noun: Noun },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedObservation {
    pub room_name: String,
    pub open_exits: BTreeSet<Direction>,
    pub objects_seen: BTreeSet<Noun>,
}

/// What the agent has learned about the map during the current episode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentMap {
    pub visited: BTreeSet<RoomId>,
    /// Traversed edges only, recorded in both directions.
    pub adjacency: BTreeMap<(RoomId, Direction), RoomId>,
    /// Direction leading back the way the agent first came into each room.
    pub entry_direction: BTreeMap<RoomId, Direction>,
    pub current: RoomId,
}

impl AgentMap {
    pub fn new(start: RoomId) -> Self {
        AgentMap {
            visited: BTreeSet::from([start]),
            adjacency: BTreeMap::new(),
            entry_direction: BTreeMap::new(),
            current: start,
        }
    }

    /// Records a valid action. `take` leaves the map untouched.
    pub fn update(&mut self, prev_room: RoomId, action: Action, new_room: RoomId) -> Result<(), FactError> {
        if action.verb == Verb::Take {
            return Ok(());
        }
        let dir = action.noun.direction().ok_or(FactError::NotAMove(action))?;
        self.adjacency.insert((prev_room, dir), new_room);
        self.adjacency.insert((new_room, dir.opposite()), prev_room);
        if self.visited.insert(new_room) {
            self.entry_direction.insert(new_room, dir.opposite());
        }
        self.current = new_room;
        Ok(())
    }

    pub fn has_visited(&self, room: RoomId) -> bool {
        self.visited.contains(&room)
    }

    /// Whether the room behind `d` from the current room is known and visited.
    pub fn visited_towards(&self, d: Direction) -> bool {
        self.adjacency
            .get(&(self.current, d))
            .is_some_and(|r| self.visited.contains(r))
    }
}

pub const PROPOSITION_COUNT: usize = 26;

const FIND: usize = 0;
const NOT_FIND: usize = 5;
const VISITED: usize = 10;
const NOT_VISITED: usize = 14;
const INITIAL: usize = 18;
const NOT_INITIAL: usize = 22;

/// The 26 truth values: find (5 nouns), visited (4 directions), initial
/// (4 directions), each followed by its negated block.
///
/// Layout: `find[N,E,S,W,coin] | ¬find[..] | visited[N,E,S,W] | ¬visited[..]
/// | initial[N,E,S,W] | ¬initial[..]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PropositionSet {
    values: [bool; PROPOSITION_COUNT],
}

impl PropositionSet {
    pub fn from_positive(find: [bool; 5], visited: [bool; 4], initial: [bool; 4]) -> Self {
        let mut values = [false; PROPOSITION_COUNT];
        for i in 0..5 {
            values[FIND + i] = find[i];
            values[NOT_FIND + i] = !find[i];
        }
        for i in 0..4 {
            values[VISITED + i] = visited[i];
            values[NOT_VISITED + i] = !visited[i];
            values[INITIAL + i] = initial[i];
            values[NOT_INITIAL + i] = !initial[i];
        }
        PropositionSet { values }
    }

    pub fn values(&self) -> &[bool; PROPOSITION_COUNT] {
        &self.values
    }

    pub fn as_reals(&self) -> [f64; PROPOSITION_COUNT] {
        self.values.map(|b| if b { 1.0 } else { 0.0 })
    }

    pub fn find(&self, n: Noun) -> bool {
        self.values[FIND + n.index()]
    }

    pub fn visited(&self, d: Direction) -> bool {
        self.values[VISITED + d.index()]
    }

    pub fn initial(&self, d: Direction) -> bool {
        self.values[INITIAL + d.index()]
    }

    /// Every open exit leads to an already visited room (vacuously true
    /// with no exits).
    pub fn all_visited(&self) -> bool {
        Direction::ALL.iter().all(|&d| !self.find(d.into()) || self.visited(d))
    }

    pub fn names() -> [String; PROPOSITION_COUNT] {
        std::array::from_fn(|i| {
            let (neg, base) = match i {
                0..=4 => ("", format!("find({})", Noun::ALL[i])),
                5..=9 => ("not ", format!("find({})", Noun::ALL[i - 5])),
                10..=13 => ("", format!("visited({})", Direction::ALL[i - 10])),
                14..=17 => ("not ", format!("visited({})", Direction::ALL[i - 14])),
                18..=21 => ("", format!("initial({})", Direction::ALL[i - 18])),
                _ => ("not ", format!("initial({})", Direction::ALL[i - 22])),
            };
            format!("{neg}{base}")
        })
    }

    /// One `name<TAB>0|1` line per value, in layout order.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for (name, v) in Self::names().iter().zip(self.values) {
            let _ = writeln!(out, "{name}\t{}", v as u8);
        }
        out
    }

    pub fn bitstring(&self) -> String {
        self.values.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Builds the proposition set for the agent's current room.
pub fn extract_propositions(parsed: &ParsedObservation, map: &AgentMap) -> PropositionSet {
    let find = Noun::ALL.map(|n| match n.direction() {
        Some(d) => parsed.open_exits.contains(&d),
        None => parsed.objects_seen.contains(&n),
    });
    let visited = Direction::ALL.map(|d| map.visited_towards(d));
    let entry = map.entry_direction.get(&map.current).copied();
    let initial = Direction::ALL.map(|d| entry == Some(d));
    PropositionSet::from_positive(find, visited, initial)
}

pub const DIRECTION_LITERALS: [&str; 8] = [
    "find x",
    "¬find x",
    "visited x",
    "¬visited x",
    "initial x",
    "¬initial x",
    "all are visited",
    "¬all are visited",
];

pub const MONEY_LITERALS: [&str; 2] = ["find x", "¬find x"];

/// Literal names for a category's grounded input layer, or `None` when the
/// category has no grounding.
pub fn literal_names(category: &Category) -> Option<&'static [&'static str]> {
    match category.as_str() {
        Category::DIRECTION => Some(&DIRECTION_LITERALS),
        Category::MONEY => Some(&MONEY_LITERALS),
        _ => None,
    }
}

/// Per-candidate input to a category network. Literal order is fixed (see
/// [`DIRECTION_LITERALS`] / [`MONEY_LITERALS`]); network weights are
/// positional.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundedFactVector {
    pub category: Category,
    pub noun: Noun,
    pub literals: Vec<f64>,
}

fn bit(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn ground_facts(props: &PropositionSet, category: &Category, noun: Noun) -> Result<GroundedFactVector, FactError> {
    if !noun_fits(category, noun) {
        return Err(FactError::CategoryMismatch {
            category: category.clone(),
            noun,
        });
    }
    let find = props.find(noun);
    let literals = match noun.direction() {
        Some(d) => {
            let (v, i, all) = (props.visited(d), props.initial(d), props.all_visited());
            vec![
                bit(find),
                bit(!find),
                bit(v),
                bit(!v),
                bit(i),
                bit(!i),
                bit(all),
                bit(!all),
            ]
        }
        None => vec![bit(find), bit(!find)],
    };
    Ok(GroundedFactVector {
        category: category.clone(),
        noun,
        literals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parsed(exits: &[Direction], coin: bool) -> ParsedObservation {
        ParsedObservation {
            room_name: "Room".into(),
            open_exits: exits.iter().copied().collect(),
            objects_seen: if coin {
                BTreeSet::from([Noun::Coin])
            } else {
                BTreeSet::new()
            },
        }
    }

    #[test]
    fn fresh_map_going_north() {
        let (a, b) = (RoomId(0), RoomId(1));
        let mut map = AgentMap::new(a);
        map.update(a, Action::go(Direction::North), b).unwrap();
        assert_eq!(map.visited, BTreeSet::from([a, b]));
        assert_eq!(map.entry_direction[&b], Direction::South);
        assert_eq!(map.current, b);
    }

    #[test]
    fn reentry_keeps_first_entry_direction() {
        let (a, b) = (RoomId(0), RoomId(1));
        let mut map = AgentMap::new(a);
        map.update(a, Action::go(Direction::North), b).unwrap();
        map.update(b, Action::go(Direction::South), a).unwrap();
        map.update(a, Action::go(Direction::North), b).unwrap();
        assert_eq!(map.entry_direction[&b], Direction::South);
        assert!(!map.entry_direction.contains_key(&a));
    }

    #[test]
    fn two_room_loop() {
        let (a, b) = (RoomId(0), RoomId(1));
        let mut map = AgentMap::new(a);
        map.update(a, Action::go(Direction::East), b).unwrap();
        map.update(b, Action::go(Direction::West), a).unwrap();
        assert_eq!(map.visited.len(), 2);
        assert_eq!(map.adjacency.len(), 2);
        assert_eq!(map.adjacency[&(a, Direction::East)], b);
        assert_eq!(map.adjacency[&(b, Direction::West)], a);
    }

    #[test]
    fn go_coin_is_a_contract_violation() {
        let mut map = AgentMap::new(RoomId(0));
        let go_coin = Action::new(Verb::Go, Noun::Coin);
        assert_eq!(
            map.update(RoomId(0), go_coin, RoomId(0)),
            Err(FactError::NotAMove(go_coin))
        );
        assert!(map.update(RoomId(0), Action::take_coin(), RoomId(0)).is_ok());
    }

    #[test]
    fn episode_start_propositions() {
        let map = AgentMap::new(RoomId(0));
        let p = extract_propositions(&parsed(&[Direction::North, Direction::South], false), &map);
        assert!(p.find(Noun::North) && p.find(Noun::South));
        assert!(!p.find(Noun::East) && !p.find(Noun::West) && !p.find(Noun::Coin));
        assert!(Direction::ALL.iter().all(|&d| !p.visited(d) && !p.initial(d)));
        assert!(!p.all_visited());
    }

    #[test]
    fn entering_north_sets_initial_south() {
        let mut map = AgentMap::new(RoomId(0));
        map.update(RoomId(0), Action::go(Direction::North), RoomId(1)).unwrap();
        let p = extract_propositions(&parsed(&[Direction::South, Direction::East], false), &map);
        assert!(p.initial(Direction::South));
        assert!(p.visited(Direction::South));
        assert!(!p.visited(Direction::East));
        assert!(!p.all_visited());
        let dead_end = extract_propositions(&parsed(&[Direction::South], false), &map);
        assert!(dead_end.all_visited());
    }

    #[test]
    fn grounding_layouts() {
        let map = AgentMap::new(RoomId(0));
        let p = extract_propositions(&parsed(&[Direction::North], true), &map);
        let g = ground_facts(&p, &Category::direction(), Noun::North).unwrap();
        assert_eq!(g.literals, vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let m = ground_facts(&p, &Category::money(), Noun::Coin).unwrap();
        assert_eq!(m.literals, vec![1.0, 0.0]);
        assert!(ground_facts(&p, &Category::money(), Noun::East).is_err());
        assert!(ground_facts(&p, &Category::direction(), Noun::Coin).is_err());
        assert!(ground_facts(&p, &Category::new("tool"), Noun::Coin).is_err());
    }

    #[test]
    fn dump_has_26_named_lines() {
        let p = PropositionSet::from_positive([true; 5], [false; 4], [false; 4]);
        let dump = p.debug_dump();
        assert_eq!(dump.lines().count(), PROPOSITION_COUNT);
        assert!(dump.starts_with("find(north)\t1\n"));
        assert!(dump.contains("not initial(west)\t1"));
        let names: BTreeSet<_> = PropositionSet::names().into_iter().collect();
        assert_eq!(names.len(), PROPOSITION_COUNT);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn grounded_pairs_are_complementary(
            find in prop::array::uniform5(any::<bool>()),
            visited in prop::array::uniform4(any::<bool>()),
            initial in prop::array::uniform4(any::<bool>()),
        ) {
            let p = PropositionSet::from_positive(find, visited, initial);
            for (i, v) in p.values()[..5].iter().enumerate() {
                prop_assert_eq!(*v, !p.values()[5 + i]);
            }
            for n in Noun::ALL {
                let cat = if n == Noun::Coin { Category::money() } else { Category::direction() };
                let g = ground_facts(&p, &cat, n).unwrap();
                for pair in g.literals.chunks(2) {
                    prop_assert_eq!(pair[0] + pair[1], 1.0);
                }
            }
        }
    }
}
