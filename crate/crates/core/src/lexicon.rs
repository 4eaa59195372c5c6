//! Offline word-category lexicon.
//!
//! Maps vocabulary words to semantic categories (`direction`, `money`, ...).
//! The category decides which per-category policy network scores an action.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::worldsim::Noun;

const BUNDLED: &str = include_str!("../data/lexicon.tsv");

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Category(String);

impl Category {
    pub const DIRECTION: &'static str = "direction";
    pub const MONEY: &'static str = "money";

    pub fn new(name: impl Into<String>) -> Self {
        Category(name.into())
    }

    pub fn direction() -> Self {
        Category::new(Self::DIRECTION)
    }

    pub fn money() -> Self {
        Category::new(Self::MONEY)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("lexicon is missing required entry: {0}")]
    Validation(String),
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
}

/// Anything that can answer "which categories does this word belong to".
/// Lookups are total: unknown words map to the empty set.
pub trait CategoryProvider {
    fn lookup(&self, word: &str) -> BTreeSet<Category>;
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LexiconTable {
    entries: BTreeMap<String, BTreeSet<Category>>,
}

impl LexiconTable {
    /// The lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled lexicon is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses `word<TAB>category` lines (`#` starts a comment) and validates
    /// that the action vocabulary is covered.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let table = Self::parse_unchecked(text)?;
        table.validate()?;
        Ok(table)
    }

    pub fn parse_unchecked(text: &str) -> Result<Self, LexiconError> {
        let mut entries: BTreeMap<String, BTreeSet<Category>> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim_end();
            if line.trim().is_empty() {
                continue;
            }
            let err = |reason: &str| LexiconError::Parse {
                line: i + 1,
                reason: reason.to_string(),
            };
            let mut fields = line.split('\t');
            let (Some(word), Some(cat), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(err("expected exactly two tab-separated fields"));
            };
            let (word, cat) = (word.trim(), cat.trim());
            if word.is_empty() || cat.is_empty() || word.contains(char::is_whitespace) {
                return Err(err("word and category must be non-empty single tokens"));
            }
            entries
                .entry(word.to_lowercase())
                .or_default()
                .insert(Category::new(cat.to_lowercase()));
        }
        Ok(LexiconTable { entries })
    }

    pub fn validate(&self) -> Result<(), LexiconError> {
        for noun in Noun::ALL {
            let required = match noun.direction() {
                Some(_) => Category::DIRECTION,
                None => Category::MONEY,
            };
            let cats = self.lookup(noun.as_str());
            if !cats.contains(&Category::new(required)) {
                return Err(LexiconError::Validation(format!(
                    "`{noun}` must be in category `{required}`"
                )));
            }
        }
        Ok(())
    }

    pub fn insert(&mut self, word: &str, category: Category) {
        self.entries.entry(word.to_lowercase()).or_default().insert(category);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words_in(&self, category: &Category) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, cats)| cats.contains(category))
            .map(|(w, _)| w.as_str())
            .collect()
    }
}

impl CategoryProvider for LexiconTable {
    fn lookup(&self, word: &str) -> BTreeSet<Category> {
        self.entries.get(word).cloned().unwrap_or_default()
    }
}

/// True when `noun` can be grounded under `category`.
pub fn noun_fits(category: &Category, noun: Noun) -> bool {
    match category.as_str() {
        Category::DIRECTION => noun.direction().is_some(),
        Category::MONEY => noun == Noun::Coin,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        let lex = LexiconTable::bundled();
        assert_eq!(lex.lookup("east"), BTreeSet::from([Category::direction()]));
        assert_eq!(lex.lookup("coin"), BTreeSet::from([Category::money()]));
        assert!(lex.lookup("zzyzx").is_empty());
    }

    #[test]
    fn game_nouns_partition_four_one() {
        let lex = LexiconTable::bundled();
        let mut dir = 0;
        let mut money = 0;
        for n in Noun::ALL {
            let cats = lex.lookup(n.as_str());
            assert_eq!(cats.len(), 1);
            if cats.contains(&Category::direction()) {
                dir += 1;
            }
            if cats.contains(&Category::money()) {
                money += 1;
            }
        }
        assert_eq!((dir, money), (4, 1));
    }

    #[test]
    fn duplicate_lines_merge() {
        let text =
            "north\tdirection\nnorth\tdirection\neast\tdirection\nsouth\tdirection\nwest\tdirection\ncoin\tmoney\n";
        let lex = LexiconTable::parse(text).unwrap();
        assert_eq!(lex.lookup("north").len(), 1);
        assert_eq!(lex.len(), 5);
    }

    #[test]
    fn missing_coin_fails_validation() {
        let text = "north\tdirection\neast\tdirection\nsouth\tdirection\nwest\tdirection\n";
        assert!(matches!(LexiconTable::parse(text), Err(LexiconError::Validation(_))));
    }

    #[test]
    fn malformed_line_reports_number() {
        let text = "# header\nnorth\tdirection\nbroken line\n";
        match LexiconTable::parse(text) {
            Err(LexiconError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.tsv");
        std::fs::write(&path, BUNDLED).unwrap();
        assert_eq!(LexiconTable::load(&path).unwrap(), LexiconTable::bundled());
    }
}
