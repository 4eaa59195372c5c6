use std::fmt::Write as _;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam over a flat parameter vector. Moment buffers grow with zeros when
/// the parameter vector grows (new gates append parameters at the end).
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(learning_rate: f64) -> Self {
        Adam {
            learning_rate,
            beta1: BETA1,
            beta2: BETA2,
            epsilon: EPSILON,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), grads.len(), "gradient shape must match parameters");
        if self.m.len() < params.len() {
            self.m.resize(params.len(), 0.0);
            self.v.resize(params.len(), 0.0);
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "adam lr={:.16e} beta1={:.16e} beta2={:.16e} eps={:.16e} t={}",
            self.learning_rate, self.beta1, self.beta2, self.epsilon, self.t
        );
        let join = |xs: &[f64]| xs.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "m {}", join(&self.m));
        let _ = writeln!(out, "v {}", join(&self.v));
        out
    }

    pub fn from_text(text: &str) -> Option<Adam> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next()?.strip_prefix("adam ")?;
        let mut adam = Adam::new(0.0);
        for kv in header.split_whitespace() {
            let (k, v) = kv.split_once('=')?;
            match k {
                "lr" => adam.learning_rate = v.parse().ok()?,
                "beta1" => adam.beta1 = v.parse().ok()?,
                "beta2" => adam.beta2 = v.parse().ok()?,
                "eps" => adam.epsilon = v.parse().ok()?,
                "t" => adam.t = v.parse().ok()?,
                _ => return None,
            }
        }
        let mut vec_line = |key: &str| -> Option<Vec<f64>> {
            let rest = lines.next()?.trim_end().strip_prefix(key)?;
            rest.split_whitespace().map(|t| t.parse().ok()).collect()
        };
        adam.m = vec_line("m")?;
        adam.v = vec_line("v")?;
        (adam.m.len() == adam.v.len()).then_some(adam)
    }
}
