use std::collections::VecDeque;

use rand::Rng;

use super::Transition;

pub const DEFAULT_CAPACITY: usize = 500_000;
pub const DEFAULT_PRIORITY_FRACTION: f64 = 0.25;

/// Two-pool prioritized replay: transitions with positive reward go to the
/// prioritized pool, everything else to the ordinary pool. Each batch takes
/// a fixed fraction from the prioritized pool when it is non-empty.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    priority_fraction: f64,
    prioritized: VecDeque<Transition>,
    ordinary: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, priority_fraction: f64) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            priority_fraction: priority_fraction.clamp(0.0, 1.0),
            prioritized: VecDeque::new(),
            ordinary: VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.prioritized.len() + self.ordinary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn prioritized(&self) -> impl Iterator<Item = &Transition> {
        self.prioritized.iter()
    }

    pub fn ordinary(&self) -> impl Iterator<Item = &Transition> {
        self.ordinary.iter()
    }

    /// Inserts, evicting the oldest entry of the same pool when full (or of
    /// the other pool if the same one is empty).
    pub fn push(&mut self, t: Transition) {
        let prioritized = t.reward > 0.0;
        if self.len() >= self.capacity {
            let (same, other) = if prioritized {
                (&mut self.prioritized, &mut self.ordinary)
            } else {
                (&mut self.ordinary, &mut self.prioritized)
            };
            if same.pop_front().is_none() {
                other.pop_front();
            }
        }
        if prioritized {
            self.prioritized.push_back(t);
        } else {
            self.ordinary.push_back(t);
        }
    }

    /// Uniform sampling with replacement inside each pool.
    pub fn sample<R: Rng>(&self, batch_size: usize, rng: &mut R) -> Vec<&Transition> {
        if self.is_empty() || batch_size == 0 {
            return Vec::new();
        }
        let mut from_priority = if self.prioritized.is_empty() {
            0
        } else {
            ((self.priority_fraction * batch_size as f64).round() as usize).min(batch_size)
        };
        if self.ordinary.is_empty() {
            from_priority = batch_size;
        }
        let mut out = Vec::with_capacity(batch_size);
        for _ in 0..from_priority {
            out.push(&self.prioritized[rng.gen_range(0..self.prioritized.len())]);
        }
        for _ in from_priority..batch_size {
            out.push(&self.ordinary[rng.gen_range(0..self.ordinary.len())]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factextract::PropositionSet;
    use crate::worldsim::Action;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(reward: f64, tag: u32) -> Transition {
        let props = PropositionSet::from_positive([tag.is_multiple_of(2); 5], [false; 4], [false; 4]);
        Transition {
            obs: props,
            choice: super::super::Choice::untyped(Action::take_coin()),
            reward,
            next_obs: props,
            next_choices: vec![],
            terminal: tag.is_multiple_of(3),
        }
    }

    #[test]
    fn pools_and_capacity() {
        let mut buf = ReplayBuffer::new(5, 0.25);
        for i in 0..20 {
            buf.push(t(if i % 4 == 0 { 1.0 } else { 0.0 }, i));
            assert!(buf.len() <= 5);
        }
        assert!(buf.prioritized().all(|t| t.reward > 0.0));
        assert!(buf.ordinary().all(|t| t.reward <= 0.0));
    }

    #[test]
    fn batch_mix() {
        let mut buf = ReplayBuffer::new(100, 0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for i in 0..10 {
            buf.push(t(0.0, i));
        }
        assert!(buf.sample(4, &mut rng).iter().all(|t| t.reward == 0.0));
        buf.push(t(2.0, 99));
        let batch = buf.sample(4, &mut rng);
        assert_eq!(batch.iter().filter(|t| t.reward > 0.0).count(), 1);
        let only_priority = {
            let mut b = ReplayBuffer::new(10, 0.25);
            b.push(t(1.0, 1));
            b
        };
        assert_eq!(only_priority.sample(4, &mut rng).len(), 4);
        assert!(ReplayBuffer::new(3, 0.25).sample(4, &mut rng).is_empty());
    }
}
