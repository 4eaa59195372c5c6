//! Weighted real-valued logic network: grounded literals feed a layer of
//! weighted AND gates whose outputs are joined by a single weighted OR.
//!
//! Node semantics (clamped weighted Łukasiewicz forms):
//!
//! ```text
//! AND(x) = clamp01( b - Σ w_i (1 - x_i) )
//! OR(y)  = clamp01( 1 - b + Σ w_g y_g )
//! ```
//!
//! Negation lives in the input layer (each literal arrives with its
//! complement), so there are no trainable NOT nodes. Weights and biases are
//! kept non-negative, which makes every node monotone in its inputs.

mod checkpoint;
mod rules;

use thiserror::Error;

pub use checkpoint::CheckpointError;
pub use rules::{verb_for_category, Rule};

use crate::factextract::literal_names;
use crate::lexicon::Category;

pub const DEFAULT_ALPHA: f64 = 0.75;
pub const DEFAULT_GATE_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LnnError {
    #[error("expected {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("gate cap of {0} reached")]
    GateCapReached(usize),
    #[error("category `{0}` has no grounded input layer")]
    UnknownCategory(Category),
    #[error("alpha {0} outside [0.5, 1]")]
    BadAlpha(f64),
}

/// Truth threshold α: values in [α, 1] read as True, [0, 1-α] as False.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthConfig {
    alpha: f64,
}

impl TruthConfig {
    pub fn new(alpha: f64) -> Result<Self, LnnError> {
        if (0.5..=1.0).contains(&alpha) {
            Ok(TruthConfig { alpha })
        } else {
            Err(LnnError::BadAlpha(alpha))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for TruthConfig {
    fn default() -> Self {
        TruthConfig { alpha: DEFAULT_ALPHA }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

pub fn classify_truth(value: f64, config: &TruthConfig) -> Truth {
    if value >= config.alpha {
        Truth::True
    } else if value <= 1.0 - config.alpha {
        Truth::False
    } else {
        Truth::Unknown
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogicNode {
    pub kind: NodeKind,
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn clamp01(z: f64) -> f64 {
    z.clamp(0.0, 1.0)
}

/// Pass-through derivative of the clamp: 1 strictly inside (0, 1).
fn clamp_slope(z: f64) -> f64 {
    if z > 0.0 && z < 1.0 {
        1.0
    } else {
        0.0
    }
}

impl LogicNode {
    pub fn and(weights: Vec<f64>, bias: f64) -> Self {
        LogicNode {
            kind: NodeKind::And,
            weights,
            bias,
        }
    }

    pub fn or(weights: Vec<f64>, bias: f64) -> Self {
        LogicNode {
            kind: NodeKind::Or,
            weights,
            bias,
        }
    }

    pub fn arity(&self) -> usize {
        self.weights.len()
    }

    /// Value before clamping.
    pub fn pre_activation(&self, inputs: &[f64]) -> f64 {
        match self.kind {
            NodeKind::And => self.bias - self.weights.iter().zip(inputs).map(|(w, x)| w * (1.0 - x)).sum::<f64>(),
            NodeKind::Or => 1.0 - self.bias + self.weights.iter().zip(inputs).map(|(w, x)| w * x).sum::<f64>(),
        }
    }

    pub fn evaluate(&self, inputs: &[f64]) -> f64 {
        clamp01(self.pre_activation(inputs))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub q: f64,
    pub or_pre: f64,
    pub and_pre: Vec<f64>,
    pub and_values: Vec<f64>,
}

impl ForwardPass {
    pub fn max_and(&self) -> f64 {
        self.and_values.iter().copied().fold(0.0, f64::max)
    }
}

/// Gradients shaped like the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LnnGradients {
    pub gate_weights: Vec<Vec<f64>>,
    pub gate_biases: Vec<f64>,
    pub or_weights: Vec<f64>,
    pub or_bias: f64,
}

impl LnnGradients {
    pub fn zeros_like(net: &LnnNetwork) -> Self {
        LnnGradients {
            gate_weights: net.and_gates.iter().map(|g| vec![0.0; g.arity()]).collect(),
            gate_biases: vec![0.0; net.and_gates.len()],
            or_weights: vec![0.0; net.and_gates.len()],
            or_bias: 0.0,
        }
    }

    /// Same layout as [`LnnNetwork::flat_params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = vec![self.or_bias];
        for (g, ws) in self.gate_weights.iter().enumerate() {
            out.push(self.or_weights[g]);
            out.push(self.gate_biases[g]);
            out.extend_from_slice(ws);
        }
        out
    }

    pub fn add_assign(&mut self, other: &LnnGradients) {
        self.or_bias += other.or_bias;
        for g in 0..self.gate_biases.len() {
            self.or_weights[g] += other.or_weights[g];
            self.gate_biases[g] += other.gate_biases[g];
            for (a, b) in self.gate_weights[g].iter_mut().zip(&other.gate_weights[g]) {
                *a += b;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LnnNetwork {
    pub category: Category,
    pub input_arity: usize,
    pub and_gates: Vec<LogicNode>,
    pub or_root: LogicNode,
    pub gate_cap: usize,
}

impl LnnNetwork {
    /// Network with one AND gate of uniform weights `1/arity` and bias 1,
    /// joined by an OR root of weight 1 and bias 1.
    ///
    /// Grounded crisp inputs always have exactly half their literals false,
    /// so this start puts every gate at 0.5, inside the differentiable region.
    pub fn new(category: Category) -> Result<Self, LnnError> {
        let arity = literal_names(&category)
            .ok_or_else(|| LnnError::UnknownCategory(category.clone()))?
            .len();
        Ok(Self::with_gate(category, arity, vec![1.0 / arity as f64; arity], 1.0))
    }

    pub fn with_gate(category: Category, arity: usize, weights: Vec<f64>, bias: f64) -> Self {
        LnnNetwork {
            category,
            input_arity: arity,
            and_gates: vec![LogicNode::and(weights, bias)],
            or_root: LogicNode::or(vec![1.0], 1.0),
            gate_cap: DEFAULT_GATE_CAP,
        }
    }

    /// Builds a network from explicit (weights, bias, or_weight) gates.
    pub fn from_gates(
        category: Category,
        arity: usize,
        gates: Vec<(Vec<f64>, f64, f64)>,
        or_bias: f64,
    ) -> Result<Self, LnnError> {
        let mut and_gates = Vec::with_capacity(gates.len());
        let mut or_weights = Vec::with_capacity(gates.len());
        for (w, b, ow) in gates {
            if w.len() != arity {
                return Err(LnnError::ArityMismatch {
                    expected: arity,
                    got: w.len(),
                });
            }
            and_gates.push(LogicNode::and(w, b));
            or_weights.push(ow);
        }
        Ok(LnnNetwork {
            category,
            input_arity: arity,
            gate_cap: DEFAULT_GATE_CAP.max(and_gates.len()),
            and_gates,
            or_root: LogicNode::or(or_weights, or_bias),
        })
    }

    pub fn gate_count(&self) -> usize {
        self.and_gates.len()
    }

    fn check_arity(&self, facts: &[f64]) -> Result<(), LnnError> {
        if facts.len() != self.input_arity {
            return Err(LnnError::ArityMismatch {
                expected: self.input_arity,
                got: facts.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, facts: &[f64]) -> Result<ForwardPass, LnnError> {
        self.check_arity(facts)?;
        let and_pre: Vec<f64> = self.and_gates.iter().map(|g| g.pre_activation(facts)).collect();
        let and_values: Vec<f64> = and_pre.iter().map(|&z| clamp01(z)).collect();
        let or_pre = self.or_root.pre_activation(&and_values);
        Ok(ForwardPass {
            q: clamp01(or_pre),
            or_pre,
            and_pre,
            and_values,
        })
    }

    pub fn q(&self, facts: &[f64]) -> Result<f64, LnnError> {
        self.forward(facts).map(|f| f.q)
    }

    /// Exact gradients of `upstream * q` through the clamps.
    pub fn gradients(&self, facts: &[f64], upstream: f64) -> Result<LnnGradients, LnnError> {
        let fwd = self.forward(facts)?;
        let mut grads = LnnGradients::zeros_like(self);
        let d_or = upstream * clamp_slope(fwd.or_pre);
        if d_or == 0.0 {
            return Ok(grads);
        }
        grads.or_bias = -d_or;
        for g in 0..self.and_gates.len() {
            grads.or_weights[g] = d_or * fwd.and_values[g];
            let d_gate = d_or * self.or_root.weights[g] * clamp_slope(fwd.and_pre[g]);
            if d_gate == 0.0 {
                continue;
            }
            grads.gate_biases[g] = d_gate;
            for (dw, x) in grads.gate_weights[g].iter_mut().zip(facts) {
                *dw = -d_gate * (1.0 - x);
            }
        }
        Ok(grads)
    }

    /// Adds a gate that fires exactly on the literals that are True in
    /// `facts`: weight 1 where `x >= alpha`, 0 elsewhere, bias 1, joined to
    /// the OR root with weight 1.
    pub fn add_and_gate(&mut self, facts: &[f64], truth: &TruthConfig) -> Result<(), LnnError> {
        self.check_arity(facts)?;
        if self.and_gates.len() >= self.gate_cap {
            return Err(LnnError::GateCapReached(self.gate_cap));
        }
        let weights = facts
            .iter()
            .map(|&x| if x >= truth.alpha() { 1.0 } else { 0.0 })
            .collect();
        self.and_gates.push(LogicNode::and(weights, 1.0));
        self.or_root.weights.push(1.0);
        Ok(())
    }

    /// Parameters in a layout where each gate owns one contiguous block:
    /// `[or_bias, (or_w_g, b_g, w_g..)*]`. Appending a gate appends a block.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = vec![self.or_root.bias];
        for (g, gate) in self.and_gates.iter().enumerate() {
            out.push(self.or_root.weights[g]);
            out.push(gate.bias);
            out.extend_from_slice(&gate.weights);
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) {
        let mut it = params.iter().copied();
        let mut next = || it.next().expect("parameter vector matches network shape");
        self.or_root.bias = next();
        for g in 0..self.and_gates.len() {
            self.or_root.weights[g] = next();
            self.and_gates[g].bias = next();
            for w in self.and_gates[g].weights.iter_mut() {
                *w = next();
            }
        }
    }

    pub fn param_count(&self) -> usize {
        1 + self.and_gates.iter().map(|g| 2 + g.arity()).sum::<usize>()
    }

    /// Clips every weight and bias at zero.
    pub fn project_nonnegative(&mut self) {
        let clip = |v: &mut f64| {
            if *v < 0.0 {
                *v = 0.0;
            }
        };
        clip(&mut self.or_root.bias);
        self.or_root.weights.iter_mut().for_each(clip);
        for g in &mut self.and_gates {
            clip(&mut g.bias);
            g.weights.iter_mut().for_each(clip);
        }
    }

    /// Order-independent digest of the parameters, for purity checks.
    pub fn checksum(&self) -> u64 {
        self.flat_params().iter().fold(0xcbf2_9ce4_8422_2325u64, |h, p| {
            (h ^ p.to_bits()).wrapping_mul(0x0000_0100_0000_01B3)
        })
    }
}
