use std::collections::BTreeMap;

use super::adam::Adam;
use super::{enumerate_candidates, AgentError, Choice, QFunction};
use crate::factextract::{ground_facts, PropositionSet};
use crate::lexicon::{Category, CategoryProvider, LexiconTable};
use crate::lnn::{LnnError, LnnGradients, LnnNetwork, TruthConfig};

/// Outcome of the structural learning hook.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Induction {
    NotNeeded,
    Added { category: Category, gate: usize },
    CapReached(Category),
}

/// One logic network per grounded category, shared across all nouns of that
/// category.
#[derive(Debug, Clone, PartialEq)]
pub struct LnnPolicy {
    pub lexicon: LexiconTable,
    pub networks: BTreeMap<Category, LnnNetwork>,
}

impl LnnPolicy {
    pub fn new(lexicon: LexiconTable) -> Result<Self, AgentError> {
        let mut networks = BTreeMap::new();
        for c in [Category::direction(), Category::money()] {
            networks.insert(c.clone(), LnnNetwork::new(c)?);
        }
        Ok(LnnPolicy { lexicon, networks })
    }

    /// Hand-built reference policy: take a visible coin; explore open
    /// unvisited exits that are not the way back; once everything is
    /// visited, go back the way you came.
    pub fn with_rules(lexicon: LexiconTable) -> Self {
        let money =
            LnnNetwork::from_gates(Category::money(), 2, vec![(vec![1.0, 0.0], 1.0, 1.0)], 1.0).expect("arity matches");
        let direction = LnnNetwork::from_gates(
            Category::direction(),
            8,
            vec![
                (vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0], 1.0, 1.0),
                (vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0], 1.0, 1.0),
            ],
            1.0,
        )
        .expect("arity matches");
        let networks = BTreeMap::from([(Category::direction(), direction), (Category::money(), money)]);
        LnnPolicy { lexicon, networks }
    }

    pub fn network(&self, category: &Category) -> Option<&LnnNetwork> {
        self.networks.get(category)
    }

    fn facts_for(&self, props: &PropositionSet, choice: &Choice) -> Option<(Category, Vec<f64>)> {
        let category = match &choice.category {
            Some(c) => c.clone(),
            None => self
                .lexicon
                .lookup(choice.action.noun.as_str())
                .into_iter()
                .find(|c| self.networks.contains_key(c))?,
        };
        let facts = ground_facts(props, &category, choice.action.noun).ok()?;
        Some((category, facts.literals))
    }

    fn score(&self, props: &PropositionSet, choice: &Choice) -> f64 {
        self.facts_for(props, choice)
            .and_then(|(c, facts)| self.networks.get(&c)?.q(&facts).ok())
            .unwrap_or(0.0)
    }
}

impl QFunction for LnnPolicy {
    type Grad = BTreeMap<Category, LnnGradients>;
    type Optimizer = BTreeMap<Category, Adam>;

    fn choices(&self, props: &PropositionSet) -> Vec<Choice> {
        enumerate_candidates(props, &self.lexicon)
            .into_iter()
            .filter(|c| self.networks.contains_key(&c.category))
            .map(|c| c.choice())
            .collect()
    }

    fn q_values(&self, props: &PropositionSet, choices: &[Choice]) -> Vec<f64> {
        choices.iter().map(|c| self.score(props, c)).collect()
    }

    fn zero_grad(&self) -> Self::Grad {
        self.networks
            .iter()
            .map(|(c, n)| (c.clone(), LnnGradients::zeros_like(n)))
            .collect()
    }

    fn accumulate(
        &self,
        props: &PropositionSet,
        choice: &Choice,
        target: f64,
        scale: f64,
        grad: &mut Self::Grad,
    ) -> f64 {
        let Some((category, facts)) = self.facts_for(props, choice) else {
            return 0.0;
        };
        let Some(net) = self.networks.get(&category) else {
            return 0.0;
        };
        let q = net.q(&facts).expect("grounded arity");
        let err = q - target;
        let g = net.gradients(&facts, 2.0 * scale * err).expect("grounded arity");
        if let Some(acc) = grad.get_mut(&category) {
            acc.add_assign(&g);
        }
        err * err
    }

    fn new_optimizer(&self, learning_rate: f64) -> Self::Optimizer {
        self.networks
            .keys()
            .map(|c| (c.clone(), Adam::new(learning_rate)))
            .collect()
    }

    fn apply(&mut self, grad: &Self::Grad, optimizer: &mut Self::Optimizer) {
        for (category, net) in self.networks.iter_mut() {
            let (Some(g), Some(opt)) = (grad.get(category), optimizer.get_mut(category)) else {
                continue;
            };
            let mut params = net.flat_params();
            opt.step(&mut params, &g.flatten());
            net.set_flat_params(&params);
            net.project_nonnegative();
        }
    }

    /// Adds a gate for `choice` when no existing gate reads its facts as
    /// True.
    fn induce(&mut self, props: &PropositionSet, choice: &Choice, alpha: f64) -> Induction {
        let Some((category, facts)) = self.facts_for(props, choice) else {
            return Induction::NotNeeded;
        };
        let Some(net) = self.networks.get_mut(&category) else {
            return Induction::NotNeeded;
        };
        let fwd = net.forward(&facts).expect("grounded arity");
        if fwd.max_and() >= alpha {
            return Induction::NotNeeded;
        }
        let truth = TruthConfig::new(alpha).unwrap_or_default();
        match net.add_and_gate(&facts, &truth) {
            Ok(()) => Induction::Added {
                gate: net.gate_count() - 1,
                category,
            },
            Err(LnnError::GateCapReached(_)) => Induction::CapReached(category),
            Err(_) => Induction::NotNeeded,
        }
    }

    fn checksum(&self) -> u64 {
        self.networks
            .values()
            .fold(0u64, |h, n| h.rotate_left(7) ^ n.checksum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldsim::{Action, Direction};

    fn props(find: [bool; 5], visited: [bool; 4], initial: [bool; 4]) -> PropositionSet {
        PropositionSet::from_positive(find, visited, initial)
    }

    #[test]
    fn rule_policy_scores() {
        let p = LnnPolicy::with_rules(LexiconTable::bundled());
        // north unexplored, south is the way back
        let s = props(
            [true, false, true, false, false],
            [false, false, true, false],
            [false, false, true, false],
        );
        let choices = p.choices(&s);
        let q = p.q_values(&s, &choices);
        let by_action: BTreeMap<Action, f64> = choices.iter().map(|c| c.action).zip(q).collect();
        assert_eq!(by_action[&Action::go(Direction::North)], 1.0);
        assert_eq!(by_action[&Action::go(Direction::South)], 0.0);
        assert_eq!(by_action[&Action::go(Direction::East)], 0.0);
        assert_eq!(by_action[&Action::take_coin()], 0.0);

        // dead end: go back
        let s = props(
            [false, false, true, false, false],
            [false, false, true, false],
            [false, false, true, false],
        );
        let choices = p.choices(&s);
        let q = p.q_values(&s, &choices);
        let best = choices[super::super::argmax_first(&q)].action;
        assert_eq!(best, Action::go(Direction::South));
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let mut p = LnnPolicy::new(LexiconTable::bundled()).unwrap();
        // move off the symmetric start so every clamp is in its linear zone
        let dir = p.networks.get_mut(&Category::direction()).unwrap();
        dir.and_gates[0].weights = vec![0.2, 0.05, 0.1, 0.15, 0.08, 0.12, 0.07, 0.03];
        dir.or_root.bias = 0.9;
        let s = props(
            [true, false, false, true, false],
            [false; 4],
            [false, false, false, true],
        );
        let choice = p
            .choices(&s)
            .into_iter()
            .find(|c| c.action == Action::go(Direction::North))
            .unwrap();
        let target = 0.3;
        let mut grad = p.zero_grad();
        p.accumulate(&s, &choice, target, 1.0, &mut grad);
        let analytic = grad[&Category::direction()].flatten();

        let base = p.networks[&Category::direction()].flat_params();
        let h = 1e-6;
        let loss = |params: &[f64]| {
            let mut q = p.clone();
            q.networks
                .get_mut(&Category::direction())
                .unwrap()
                .set_flat_params(params);
            let v = q.q_values(&s, std::slice::from_ref(&choice))[0];
            (v - target) * (v - target)
        };
        for i in 0..base.len() {
            let mut plus = base.clone();
            plus[i] += h;
            let mut minus = base.clone();
            minus[i] -= h;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
            assert!(
                (numeric - analytic[i]).abs() < 1e-6,
                "param {i}: {numeric} vs {}",
                analytic[i]
            );
        }
    }

    #[test]
    fn induction_adds_one_gate_then_stops() {
        let mut p = LnnPolicy::new(LexiconTable::bundled()).unwrap();
        let s = props([false, false, false, false, true], [false; 4], [false; 4]);
        let choice = Choice {
            action: Action::take_coin(),
            category: Some(Category::money()),
        };
        assert_eq!(
            p.induce(&s, &choice, 0.75),
            Induction::Added {
                category: Category::money(),
                gate: 1
            }
        );
        assert_eq!(p.networks[&Category::money()].and_gates[1].weights, vec![1.0, 0.0]);
        assert_eq!(p.induce(&s, &choice, 0.75), Induction::NotNeeded);
        assert_eq!(p.q_values(&s, &[choice])[0], 1.0);
    }

    #[test]
    fn gate_cap_is_reported() {
        let mut p = LnnPolicy::new(LexiconTable::bundled()).unwrap();
        let net = p.networks.get_mut(&Category::direction()).unwrap();
        net.gate_cap = 1;
        let s = props([true, false, false, false, false], [false; 4], [false; 4]);
        let choice = Choice {
            action: Action::go(Direction::North),
            category: Some(Category::direction()),
        };
        assert_eq!(
            p.induce(&s, &choice, 0.75),
            Induction::CapReached(Category::direction())
        );
    }

    #[test]
    fn apply_keeps_parameters_nonnegative() {
        let mut p = LnnPolicy::new(LexiconTable::bundled()).unwrap();
        let mut opt = p.new_optimizer(0.5);
        let s = props([true, true, true, true, true], [true; 4], [false; 4]);
        for _ in 0..50 {
            let mut g = p.zero_grad();
            for c in p.choices(&s) {
                p.accumulate(&s, &c, 0.0, 1.0, &mut g);
            }
            p.apply(&g, &mut opt);
        }
        for net in p.networks.values() {
            assert!(net.flat_params().iter().all(|&v| v >= 0.0));
        }
    }
}
