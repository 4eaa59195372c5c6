//! Plain-text network checkpoints.
//!
//! ```text
//! lnn-network v1
//! category direction
//! arity 8
//! gates 2
//! gate_cap 16
//! or <bias> <w_0> .. <w_{gates-1}>
//! and <bias> <w_0> .. <w_{arity-1}>
//! and ...
//! ```
//!
//! Reals use 17 significant digits so a save/load cycle is bit exact.

use std::fmt::Write as _;

use thiserror::Error;

use super::{LnnNetwork, LogicNode};
use crate::lexicon::Category;

const MAGIC: &str = "lnn-network v1";

#[derive(Debug, Error, PartialEq)]
pub enum CheckpointError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

impl LnnNetwork {
    pub fn to_checkpoint(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "category {}", self.category);
        let _ = writeln!(out, "arity {}", self.input_arity);
        let _ = writeln!(out, "gates {}", self.and_gates.len());
        let _ = writeln!(out, "gate_cap {}", self.gate_cap);
        let row = |node: &LogicNode| {
            std::iter::once(node.bias)
                .chain(node.weights.iter().copied())
                .map(real)
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "or {}", row(&self.or_root));
        for g in &self.and_gates {
            let _ = writeln!(out, "and {}", row(g));
        }
        out
    }

    pub fn from_checkpoint(text: &str) -> Result<Self, CheckpointError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| CheckpointError::Malformed {
                line: 0,
                reason: format!("missing {what}"),
            })
        };
        let bad = |line: usize, reason: String| CheckpointError::Malformed { line: line + 1, reason };

        let (n, magic) = next("header")?;
        if magic.trim() != MAGIC {
            return Err(bad(n, format!("expected `{MAGIC}`")));
        }
        let mut field = |key: &str| -> Result<(usize, String), CheckpointError> {
            let (n, l) = next(key)?;
            let value = l
                .trim()
                .strip_prefix(key)
                .and_then(|v| v.strip_prefix(' '))
                .ok_or_else(|| bad(n, format!("expected `{key} ...`")))?;
            Ok((n, value.trim().to_string()))
        };
        let (_, category) = field("category")?;
        let (n_arity, arity) = field("arity")?;
        let arity: usize = arity.parse().map_err(|_| bad(n_arity, "bad arity".into()))?;
        let (n_gates, gates) = field("gates")?;
        let gates: usize = gates.parse().map_err(|_| bad(n_gates, "bad gate count".into()))?;
        let (n_cap, cap) = field("gate_cap")?;
        let gate_cap: usize = cap.parse().map_err(|_| bad(n_cap, "bad gate cap".into()))?;

        let mut row = |key: &str, len: usize| -> Result<(f64, Vec<f64>), CheckpointError> {
            let (n, v) = field(key)?;
            let nums = v
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad(n, format!("bad number `{t}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            if nums.len() != len + 1 {
                return Err(bad(n, format!("expected {} numbers, found {}", len + 1, nums.len())));
            }
            Ok((nums[0], nums[1..].to_vec()))
        };
        let (or_bias, or_weights) = row("or", gates)?;
        let mut and_gates = Vec::with_capacity(gates);
        for _ in 0..gates {
            let (b, w) = row("and", arity)?;
            and_gates.push(LogicNode::and(w, b));
        }
        Ok(LnnNetwork {
            category: Category::new(category),
            input_arity: arity,
            and_gates,
            or_root: LogicNode::or(or_weights, or_bias),
            gate_cap,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lnn::TruthConfig;
    use proptest::prelude::*;

    #[test]
    fn rejects_garbage() {
        assert!(LnnNetwork::from_checkpoint("").is_err());
        assert!(LnnNetwork::from_checkpoint("lnn-network v2\n").is_err());
        let mut text = LnnNetwork::new(Category::money()).unwrap().to_checkpoint();
        text = text.replace("and 1.0000000000000000e0 ", "and 1.0000000000000000e0 x ");
        assert!(LnnNetwork::from_checkpoint(&text).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(params in prop::collection::vec(0.0f64..10.0, 23), extra in 0usize..3) {
            let mut net = LnnNetwork::new(Category::direction()).unwrap();
            for _ in 0..extra + 1 {
                net.add_and_gate(&[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0], &TruthConfig::default()).unwrap();
            }
            let n = net.param_count();
            let values: Vec<f64> = params.iter().cycle().take(n).enumerate().map(|(i, p)| p / (i as f64 + 3.0)).collect();
            net.set_flat_params(&values);
            let back = LnnNetwork::from_checkpoint(&net.to_checkpoint()).unwrap();
            prop_assert_eq!(back.flat_params().iter().map(|p| p.to_bits()).collect::<Vec<_>>(),
                            net.flat_params().iter().map(|p| p.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(back, net);
        }
    }
}
