//! Skip-gram with negative sampling over plain vectors.

use rand::Rng;

use super::params::{ParamAccess, Scratch};

/// `ln σ(x)`, computed without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Target and context embedding tables, `V×d` each, rows addressed by vocabulary id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    pub(crate) target: Vec<f64>,
    pub(crate) context: Vec<f64>,
}

impl EmbeddingTable {
    pub fn zeros(vocab_size: usize, dim: usize) -> Self {
        Self {
            dim,
            target: vec![0.0; vocab_size * dim],
            context: vec![0.0; vocab_size * dim],
        }
    }

    /// Target rows uniform in `[-0.5/d, 0.5/d]`, context rows zero.
    pub fn init<R: Rng + ?Sized>(vocab_size: usize, dim: usize, rng: &mut R) -> Self {
        let mut t = Self::zeros(vocab_size, dim);
        let half = 0.5 / dim as f64;
        for x in &mut t.target {
            *x = rng.random_range(-half..half);
        }
        t
    }

    pub fn from_parts(dim: usize, target: Vec<f64>, context: Vec<f64>) -> Self {
        assert_eq!(target.len(), context.len());
        assert_eq!(target.len() % dim, 0);
        Self {
            dim,
            target,
            context,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_size(&self) -> usize {
        self.target.len() / self.dim
    }

    pub fn target_row(&self, id: u32) -> &[f64] {
        let d = self.dim;
        &self.target[id as usize * d..(id as usize + 1) * d]
    }

    pub fn context_row(&self, id: u32) -> &[f64] {
        let d = self.dim;
        &self.context[id as usize * d..(id as usize + 1) * d]
    }

    pub fn target_row_mut(&mut self, id: u32) -> &mut [f64] {
        let d = self.dim;
        &mut self.target[id as usize * d..(id as usize + 1) * d]
    }

    pub fn context_row_mut(&mut self, id: u32) -> &mut [f64] {
        let d = self.dim;
        &mut self.context[id as usize * d..(id as usize + 1) * d]
    }
}

impl ParamAccess for EmbeddingTable {
    fn input_len(&self) -> usize {
        self.dim
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn read_input(&self, id: u32, out: &mut [f64]) {
        out.copy_from_slice(self.target_row(id));
    }

    fn read_output(&self, id: u32, out: &mut [f64]) {
        out.copy_from_slice(self.context_row(id));
    }

    fn add_input(&mut self, id: u32, offset: usize, scale: f64, delta: &[f64]) {
        let row = &mut self.target_row_mut(id)[offset..offset + delta.len()];
        for (x, g) in row.iter_mut().zip(delta) {
            *x += scale * g;
        }
    }

    fn add_output(&mut self, id: u32, scale: f64, delta: &[f64]) {
        for (x, g) in self.context_row_mut(id).iter_mut().zip(delta) {
            *x += scale * g;
        }
    }
}

/// `J = ln σ(⟨t|c⟩) + Σ_k ln σ(−⟨t|v_k⟩)`.
pub fn sgns_objective(target: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    log_sigmoid(dot(target, context))
        + negatives
            .iter()
            .map(|v| log_sigmoid(-dot(target, v)))
            .sum::<f64>()
}

/// Gradient of [`sgns_objective`] with respect to every argument.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradient {
    pub objective: f64,
    pub target: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn sgns_gradient(target: &[f64], context: &[f64], negatives: &[&[f64]]) -> SgnsGradient {
    let pos = dot(target, context);
    let g_pos = 1.0 - sigmoid(pos);
    let mut g_target: Vec<f64> = context.iter().map(|c| g_pos * c).collect();
    let mut g_negs = Vec::with_capacity(negatives.len());
    let mut objective = log_sigmoid(pos);
    for v in negatives {
        let s = dot(target, v);
        objective += log_sigmoid(-s);
        let g = sigmoid(s);
        for (gt, x) in g_target.iter_mut().zip(v.iter()) {
            *gt -= g * x;
        }
        g_negs.push(target.iter().map(|t| -g * t).collect());
    }
    SgnsGradient {
        objective,
        target: g_target,
        context: target.iter().map(|t| g_pos * t).collect(),
        negatives: g_negs,
    }
}

/// One gradient-ascent step for a (target, context) pair. All gradients are
/// taken at the pre-step parameters. Returns the objective before the step.
pub fn sgns_step(
    table: &mut EmbeddingTable,
    target: u32,
    context: u32,
    negatives: &[u32],
    lr: f64,
) -> f64 {
    let mut scratch = Scratch::default();
    sgns_update(table, target, context, negatives, lr, &mut scratch)
}

pub(crate) fn sgns_update<P: ParamAccess>(
    params: &mut P,
    target: u32,
    context: u32,
    negatives: &[u32],
    lr: f64,
    s: &mut Scratch,
) -> f64 {
    let d = params.dim();
    s.prepare(d, d, negatives.len() + 1);
    params.read_input(target, &mut s.input);
    params.read_output(context, &mut s.outputs[..d]);
    for (k, &n) in negatives.iter().enumerate() {
        params.read_output(n, &mut s.outputs[(k + 1) * d..(k + 2) * d]);
    }

    let t = &s.input;
    let c = &s.outputs[..d];
    let pos = dot(t, c);
    let g_pos = 1.0 - sigmoid(pos);
    let mut objective = log_sigmoid(pos);
    s.grad_input
        .iter_mut()
        .zip(c)
        .for_each(|(g, x)| *g = g_pos * x);
    s.coeffs.clear();
    s.coeffs.push(g_pos);
    for k in 0..negatives.len() {
        let v = &s.outputs[(k + 1) * d..(k + 2) * d];
        let score = dot(t, v);
        objective += log_sigmoid(-score);
        let g = sigmoid(score);
        s.grad_input
            .iter_mut()
            .zip(v)
            .for_each(|(gi, x)| *gi -= g * x);
        s.coeffs.push(-g);
    }

    params.add_input(target, 0, lr, &s.grad_input);
    params.add_output(context, lr * s.coeffs[0], &s.input);
    for (k, &n) in negatives.iter().enumerate() {
        params.add_output(n, lr * s.coeffs[k + 1], &s.input);
    }
    objective
}
