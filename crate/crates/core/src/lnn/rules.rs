use std::fmt;

use super::{LnnNetwork, TruthConfig};
use crate::factextract::literal_names;
use crate::lexicon::Category;
use crate::worldsim::Verb;

pub fn verb_for_category(category: &Category) -> Option<Verb> {
    match category.as_str() {
        Category::DIRECTION => Some(Verb::Go),
        Category::MONEY => Some(Verb::Take),
        _ => None,
    }
}

/// A conjunctive rule read off one AND gate.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub category: Category,
    pub gate: usize,
    pub or_weight: f64,
    /// Input positions, ascending.
    pub literals: Vec<usize>,
    pub literal_names: Vec<&'static str>,
}

fn render_literal(name: &str) -> String {
    match name.strip_prefix('¬') {
        Some(pos) => format!("¬⟨{pos}⟩"),
        None => format!("⟨{name}⟩"),
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.literal_names.iter().map(|n| render_literal(n)).collect();
        let verb = verb_for_category(&self.category).map_or("do", Verb::as_str);
        write!(f, "∃x ∈ W_{}: {} → ⟪{} x⟫", self.category, body.join(" ∧ "), verb)
    }
}

impl LnnNetwork {
    /// Reads rules from gates whose OR-root weight is at least
    /// `weight_threshold`; a rule's body is the literals with weight at least
    /// `weight_threshold`.
    ///
    /// A gate is skipped when its body is empty, holds a literal together
    /// with its complement, or cannot reach True (`>= alpha`) even when its
    /// body holds. Rules come out sorted by OR weight, heaviest first.
    pub fn extract_rules(&self, truth: &TruthConfig, weight_threshold: f64) -> Vec<Rule> {
        let Some(names) = literal_names(&self.category) else {
            return Vec::new();
        };
        let mut rules = Vec::new();
        for (g, gate) in self.and_gates.iter().enumerate() {
            let or_weight = self.or_root.weights[g];
            if or_weight < weight_threshold {
                continue;
            }
            let body: Vec<usize> = (0..gate.arity())
                .filter(|&i| gate.weights[i] >= weight_threshold)
                .collect();
            if body.is_empty() {
                continue;
            }
            let contradictory = body.iter().any(|&i| body.contains(&(i ^ 1)));
            if contradictory {
                continue;
            }
            // best completion: body true, and in every other complementary
            // pair the heavier literal true
            let mut lost = 0.0;
            for pair in (0..gate.arity()).step_by(2) {
                let (a, b) = (pair, pair + 1);
                lost += if body.contains(&a) {
                    gate.weights[b]
                } else if body.contains(&b) {
                    gate.weights[a]
                } else {
                    gate.weights[a].min(gate.weights[b])
                };
            }
            if gate.bias - lost < truth.alpha() {
                continue;
            }
            rules.push(Rule {
                category: self.category.clone(),
                gate: g,
                or_weight,
                literal_names: body.iter().map(|&i| names[i]).collect(),
                literals: body,
            });
        }
        rules.sort_by(|a, b| b.or_weight.total_cmp(&a.or_weight).then(a.gate.cmp(&b.gate)));
        rules
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn money_rule_rendering() {
        let net = LnnNetwork::from_gates(Category::money(), 2, vec![(vec![1.0, 0.0], 1.0, 1.0)], 1.0).unwrap();
        let rules = net.extract_rules(&TruthConfig::default(), 0.5);
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].to_string(), "∃x ∈ W_money: ⟨find x⟩ → ⟪take x⟫");
    }

    #[test]
    fn direction_rules_sorted_by_or_weight() {
        let net = LnnNetwork::from_gates(
            Category::direction(),
            8,
            vec![
                (vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0], 1.0, 0.8),
                (vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0], 1.0, 1.0),
            ],
            1.0,
        )
        .unwrap();
        let rules = net.extract_rules(&TruthConfig::default(), 0.5);
        assert_eq!(rules.len(), 2);
        assert_eq!(
            rules[0].to_string(),
            "∃x ∈ W_direction: ⟨find x⟩ ∧ ¬⟨visited x⟩ ∧ ¬⟨initial x⟩ → ⟪go x⟫"
        );
        assert_eq!(
            rules[1].to_string(),
            "∃x ∈ W_direction: ⟨find x⟩ ∧ ⟨initial x⟩ ∧ ⟨all are visited⟩ → ⟪go x⟫"
        );
    }

    #[test]
    fn small_uniform_weights_give_no_rules() {
        let net = LnnNetwork::with_gate(Category::direction(), 8, vec![0.1; 8], 1.0);
        assert!(net.extract_rules(&TruthConfig::default(), 0.5).is_empty());
    }

    #[test]
    fn contradictory_and_unreachable_gates_skipped() {
        let net = LnnNetwork::from_gates(
            Category::money(),
            2,
            vec![
                (vec![0.6, 0.6], 1.0, 1.0),
                (vec![1.0, 0.0], 0.5, 1.0),
                (vec![1.0, 0.0], 1.0, 0.2),
            ],
            1.0,
        )
        .unwrap();
        assert!(net.extract_rules(&TruthConfig::default(), 0.5).is_empty());
    }
}
