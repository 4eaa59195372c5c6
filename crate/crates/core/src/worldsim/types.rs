use std::fmt;
use std::str::FromStr;

use super::WorldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    /// Distractor rooms attached to every optimal-path room except the coin room.
    pub fn distractors_per_room(self) -> usize {
        match self {
            Difficulty::Easy => 0,
            Difficulty::Medium => 1,
            Difficulty::Hard => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Difficulty {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            other => Err(WorldError::InvalidSpec(format!("unknown difficulty `{other}`"))),
        }
    }
}

/// Compass direction. Declaration order (N, E, S, W) is the canonical
/// enumeration order used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::North, Direction::East, Direction::South, Direction::West];

    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::East => Direction::West,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub(crate) fn offset(self) -> (i32, i32) {
        match self {
            Direction::North => (0, 1),
            Direction::East => (1, 0),
            Direction::South => (0, -1),
            Direction::West => (-1, 0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::North => "north",
            Direction::East => "east",
            Direction::South => "south",
            Direction::West => "west",
        }
    }

    pub fn from_word(word: &str) -> Option<Direction> {
        match word {
            "north" => Some(Direction::North),
            "east" => Some(Direction::East),
            "south" => Some(Direction::South),
            "west" => Some(Direction::West),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verb {
    Take,
    Go,
}

impl Verb {
    pub const ALL: [Verb; 2] = [Verb::Take, Verb::Go];

    pub fn as_str(self) -> &'static str {
        match self {
            Verb::Take => "take",
            Verb::Go => "go",
        }
    }
}

/// Action-vocabulary nouns: the four directions followed by `coin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Noun {
    North,
    East,
    South,
    West,
    Coin,
}

impl Noun {
    pub const ALL: [Noun; 5] = [Noun::North, Noun::East, Noun::South, Noun::West, Noun::Coin];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn direction(self) -> Option<Direction> {
        match self {
            Noun::North => Some(Direction::North),
            Noun::East => Some(Direction::East),
            Noun::South => Some(Direction::South),
            Noun::West => Some(Direction::West),
            Noun::Coin => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Noun::Coin => "coin",
            other => other.direction().map(Direction::as_str).unwrap_or_default(),
        }
    }

    pub fn from_word(word: &str) -> Option<Noun> {
        match word {
            "coin" => Some(Noun::Coin),
            other => Direction::from_word(other).map(Noun::from),
        }
    }
}

impl From<Direction> for Noun {
    fn from(d: Direction) -> Noun {
        match d {
            Direction::North => Noun::North,
            Direction::East => Noun::East,
            Direction::South => Noun::South,
            Direction::West => Noun::West,
        }
    }
}

impl fmt::Display for Noun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A two-word command: verb followed by noun.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub verb: Verb,
    pub noun: Noun,
}

impl Action {
    pub const COUNT: usize = 10;

    pub fn new(verb: Verb, noun: Noun) -> Self {
        Action { verb, noun }
    }

    pub fn go(d: Direction) -> Self {
        Action::new(Verb::Go, d.into())
    }

    pub fn take_coin() -> Self {
        Action::new(Verb::Take, Noun::Coin)
    }

    /// Every verb-noun pair, verbs outer, nouns inner.
    pub fn all() -> Vec<Action> {
        Verb::ALL
            .iter()
            .flat_map(|&v| Noun::ALL.iter().map(move |&n| Action::new(v, n)))
            .collect()
    }

    /// Position of this action in [`Action::all`].
    pub fn index(self) -> usize {
        (self.verb as usize) * Noun::ALL.len() + self.noun.index()
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.verb.as_str(), self.noun.as_str())
    }
}

impl FromStr for Action {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lowered = s.trim().to_ascii_lowercase();
        let mut words = lowered.split_whitespace();
        let (Some(verb), Some(noun), None) = (words.next(), words.next(), words.next()) else {
            return Err(WorldError::UnknownAction(s.to_string()));
        };
        let verb = match verb {
            "take" => Verb::Take,
            "go" => Verb::Go,
            _ => return Err(WorldError::UnknownAction(s.to_string())),
        };
        let noun = Noun::from_word(noun).ok_or_else(|| WorldError::UnknownAction(s.to_string()))?;
        Ok(Action::new(verb, noun))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoomId(pub usize);

impl fmt::Display for RoomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_distinct_actions() {
        let all = Action::all();
        assert_eq!(all.len(), Action::COUNT);
        let set: std::collections::BTreeSet<_> = all.iter().copied().collect();
        assert_eq!(set.len(), 10);
        for (i, a) in all.iter().enumerate() {
            assert_eq!(a.index(), i);
        }
    }

    #[test]
    fn action_text_round_trip() {
        for a in Action::all() {
            assert_eq!(a.to_string().parse::<Action>().unwrap(), a);
        }
        assert!("jump north".parse::<Action>().is_err());
        assert!("go".parse::<Action>().is_err());
        assert!("go north now".parse::<Action>().is_err());
    }

    #[test]
    fn opposites() {
        for d in Direction::ALL {
            assert_eq!(d.opposite().opposite(), d);
            let (dx, dy) = d.offset();
            let (ox, oy) = d.opposite().offset();
            assert_eq!((dx + ox, dy + oy), (0, 0));
        }
    }
}
