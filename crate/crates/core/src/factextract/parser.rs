//! Grammar-driven parser for the observation template family.
//!
//! ```text
//! observation := header "\n" sentence (" " sentence)*
//! header      := "-= NAME =-" | "You are now in the NAME." | "You find yourself in the NAME."
//! sentence    := "There is an exit to the DIR." | "There are exits to the LIST(and)."
//!              | "You can go LIST(or)." | "An open doorway leads DIR."
//!              | "There is no way out." | COIN
//! LIST(c)     := DIR ("," " " DIR)* " " c " " DIR
//! ```

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;

use super::{FactError, ParsedObservation};
use crate::worldsim::{Direction, Noun};

const COIN_SENTENCES: [&str; 3] = [
    "You see a coin here.",
    "A coin lies on the floor.",
    "Something shiny catches your eye: a coin.",
];

struct Grammar {
    header: [Regex; 3],
    single_exit: Regex,
    exit_list: Regex,
    can_go: Regex,
    doorway: Regex,
}

fn grammar() -> &'static Grammar {
    static G: OnceLock<Grammar> = OnceLock::new();
    G.get_or_init(|| {
        let re = |p: &str| Regex::new(p).expect("static pattern");
        let name = r"([A-Za-z][A-Za-z0-9' -]*[A-Za-z0-9])";
        Grammar {
            header: [
                re(&format!(r"^-= {name} =-$")),
                re(&format!(r"^You are now in the {name}\.$")),
                re(&format!(r"^You find yourself in the {name}\.$")),
            ],
            single_exit: re(r"^There is an exit to the ([a-z]+)\.$"),
            exit_list: re(r"^There are exits to the (.+)\.$"),
            can_go: re(r"^You can go (.+)\.$"),
            doorway: re(r"^An open doorway leads ([a-z]+)\.$"),
        }
    })
}

fn unmatched(span: &str) -> FactError {
    FactError::Unmatched { span: span.to_string() }
}

fn direction(word: &str, span: &str) -> Result<Direction, FactError> {
    Direction::from_word(word).ok_or_else(|| unmatched(span))
}

/// `a`, `a <conj> b`, `a, b <conj> c`, ...
fn direction_list(list: &str, conjunction: &str, span: &str) -> Result<Vec<Direction>, FactError> {
    let sep = format!(" {conjunction} ");
    let (head, last) = match list.rsplit_once(&sep) {
        Some((head, last)) => (Some(head), last),
        None => (None, list),
    };
    let mut out = Vec::new();
    if let Some(head) = head {
        for item in head.split(", ") {
            out.push(direction(item, span)?);
        }
    }
    out.push(direction(last, span)?);
    Ok(out)
}

/// Splits a body line into sentences, each ending in `.`.
fn sentences(body: &str) -> Result<Vec<&str>, FactError> {
    let mut out = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        match rest.find(". ") {
            Some(i) => {
                out.push(&rest[..=i]);
                rest = rest[i + 2..].trim_start();
            }
            None if rest.ends_with('.') => {
                out.push(rest);
                rest = "";
            }
            None => return Err(unmatched(rest)),
        }
    }
    Ok(out)
}

pub fn parse_observation(text: &str) -> Result<ParsedObservation, FactError> {
    let g = grammar();
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| unmatched(text))?;
    let room_name = g
        .header
        .iter()
        .find_map(|re| re.captures(header))
        .map(|c| c[1].to_string())
        .ok_or_else(|| unmatched(header))?;

    let mut open_exits = BTreeSet::new();
    let mut objects_seen = BTreeSet::new();
    let mut saw_exit_clause = false;
    for line in lines {
        for s in sentences(line)? {
            if COIN_SENTENCES.contains(&s) {
                objects_seen.insert(Noun::Coin);
                continue;
            }
            saw_exit_clause = true;
            if s == "There is no way out." {
                continue;
            }
            if let Some(c) = g.single_exit.captures(s) {
                open_exits.insert(direction(&c[1], s)?);
            } else if let Some(c) = g.doorway.captures(s) {
                open_exits.insert(direction(&c[1], s)?);
            } else if let Some(c) = g.exit_list.captures(s) {
                let dirs = direction_list(&c[1], "and", s)?;
                if dirs.len() < 2 {
                    return Err(unmatched(s));
                }
                open_exits.extend(dirs);
            } else if let Some(c) = g.can_go.captures(s) {
                open_exits.extend(direction_list(&c[1], "or", s)?);
            } else {
                return Err(unmatched(s));
            }
        }
    }
    if !saw_exit_clause {
        return Err(FactError::Unmatched {
            span: "<missing exit description>".into(),
        });
    }
    Ok(ParsedObservation {
        room_name,
        open_exits,
        objects_seen,
    })
}
