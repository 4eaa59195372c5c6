use rand::Rng;

use super::adam::Adam;
use super::{Choice, QFunction};
use crate::factextract::{PropositionSet, PROPOSITION_COUNT};
use crate::rng;
use crate::worldsim::Action;

pub const HIDDEN_UNITS: usize = 64;

/// Propositional baseline: the 26 truth values go through one ReLU hidden
/// layer to a linear output per action. Reported values are clamped to
/// [0, 1]; the regression uses the raw output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpPolicy {
    /// `[w1 (H x 26), b1 (H), w2 (10 x H), b2 (10)]`, row-major.
    pub params: Vec<f64>,
}

const W1: usize = 0;
const B1: usize = W1 + HIDDEN_UNITS * PROPOSITION_COUNT;
const W2: usize = B1 + HIDDEN_UNITS;
const B2: usize = W2 + Action::COUNT * HIDDEN_UNITS;
const PARAMS: usize = B2 + Action::COUNT;

impl MlpPolicy {
    /// Uniform init in ±1/sqrt(fan_in), from a stream of `seed`.
    pub fn new(seed: u64) -> Self {
        let mut r = rng::stream(seed, "mlp-init");
        let mut params = vec![0.0; PARAMS];
        let l1 = 1.0 / (PROPOSITION_COUNT as f64).sqrt();
        let l2 = 1.0 / (HIDDEN_UNITS as f64).sqrt();
        for (i, p) in params.iter_mut().enumerate() {
            let limit = if i < W2 { l1 } else { l2 };
            *p = r.gen_range(-limit..limit);
        }
        MlpPolicy { params }
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn hidden(&self, x: &[f64; PROPOSITION_COUNT]) -> [f64; HIDDEN_UNITS] {
        let mut h = [0.0; HIDDEN_UNITS];
        for (j, hj) in h.iter_mut().enumerate() {
            let row = &self.params[W1 + j * PROPOSITION_COUNT..W1 + (j + 1) * PROPOSITION_COUNT];
            let z: f64 = self.params[B1 + j] + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
            *hj = z.max(0.0);
        }
        h
    }

    fn output(&self, h: &[f64; HIDDEN_UNITS], a: usize) -> f64 {
        let row = &self.params[W2 + a * HIDDEN_UNITS..W2 + (a + 1) * HIDDEN_UNITS];
        self.params[B2 + a] + row.iter().zip(h).map(|(w, h)| w * h).sum::<f64>()
    }

    /// Unclamped outputs for all ten actions.
    pub fn raw_outputs(&self, props: &PropositionSet) -> [f64; Action::COUNT] {
        let h = self.hidden(&props.as_reals());
        std::array::from_fn(|a| self.output(&h, a))
    }
}

impl QFunction for MlpPolicy {
    type Grad = Vec<f64>;
    type Optimizer = Adam;

    fn choices(&self, _props: &PropositionSet) -> Vec<Choice> {
        Action::all().into_iter().map(Choice::untyped).collect()
    }

    fn q_values(&self, props: &PropositionSet, choices: &[Choice]) -> Vec<f64> {
        let raw = self.raw_outputs(props);
        choices.iter().map(|c| raw[c.action.index()].clamp(0.0, 1.0)).collect()
    }

    fn zero_grad(&self) -> Vec<f64> {
        vec![0.0; self.params.len()]
    }

    fn accumulate(&self, props: &PropositionSet, choice: &Choice, target: f64, scale: f64, grad: &mut Vec<f64>) -> f64 {
        let x = props.as_reals();
        let h = self.hidden(&x);
        let a = choice.action.index();
        let err = self.output(&h, a) - target;
        let d_out = 2.0 * scale * err;
        grad[B2 + a] += d_out;
        for j in 0..HIDDEN_UNITS {
            grad[W2 + a * HIDDEN_UNITS + j] += d_out * h[j];
            if h[j] <= 0.0 {
                continue;
            }
            let d_h = d_out * self.params[W2 + a * HIDDEN_UNITS + j];
            grad[B1 + j] += d_h;
            for (i, xi) in x.iter().enumerate() {
                grad[W1 + j * PROPOSITION_COUNT + i] += d_h * xi;
            }
        }
        err * err
    }

    fn new_optimizer(&self, learning_rate: f64) -> Adam {
        Adam::new(learning_rate)
    }

    fn apply(&mut self, grad: &Vec<f64>, optimizer: &mut Adam) {
        optimizer.step(&mut self.params, grad);
    }

    fn checksum(&self) -> u64 {
        self.params.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, p| {
            (h ^ p.to_bits()).wrapping_mul(0x0000_0100_0000_01B3)
        })
    }
}
