//! Density matrices learned through sense columns: `A = BBᵀ` where each of
//! the `m` columns of `B` is one sense embedding of the word.
//!
//! The multi-sense trainer picks, for each occurrence, the column closest to
//! the aggregated context vector and moves only that column. Plain Word2DM
//! moves every column with its own negative-sampling gradient.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::{ParamAccess, Scratch};
use super::sgns::{dot, log_sigmoid, sigmoid};
use crate::linalg::{DensityMatrix, LinalgError, SenseMatrix};

/// How the relevant sense column is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SenseMetric {
    /// Highest cosine similarity with the context vector.
    #[default]
    Cosine,
    /// Smallest Euclidean distance to the context vector.
    Euclidean,
}

impl std::str::FromStr for SenseMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cosine" | "c" => Ok(SenseMetric::Cosine),
            "euclidean" | "d" => Ok(SenseMetric::Euclidean),
            other => Err(format!("unknown sense metric `{other}`")),
        }
    }
}

/// Whether the context vector is the sum or the mean of the window's context vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ContextAgg {
    #[default]
    Sum,
    Mean,
}

impl ContextAgg {
    pub fn scale(self, n: usize) -> f64 {
        match self {
            ContextAgg::Sum => 1.0,
            ContextAgg::Mean => 1.0 / n as f64,
        }
    }
}

impl std::str::FromStr for ContextAgg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(ContextAgg::Sum),
            "mean" => Ok(ContextAgg::Mean),
            other => Err(format!("unknown context aggregation `{other}`")),
        }
    }
}

/// Per-word sense matrices (`d×m`) and shared context vectors (`V×d`).
#[derive(Debug, Clone, PartialEq)]
pub struct SenseTable {
    dim: usize,
    senses: usize,
    pub(crate) sense_data: Vec<f64>,
    pub(crate) context: Vec<f64>,
}

impl SenseTable {
    pub fn zeros(vocab_size: usize, dim: usize, senses: usize) -> Self {
        Self {
            dim,
            senses,
            sense_data: vec![0.0; vocab_size * senses * dim],
            context: vec![0.0; vocab_size * dim],
        }
    }

    /// Sense entries uniform in `[-0.5/d, 0.5/d]`, context vectors zero.
    pub fn init<R: Rng + ?Sized>(
        vocab_size: usize,
        dim: usize,
        senses: usize,
        rng: &mut R,
    ) -> Self {
        let mut t = Self::zeros(vocab_size, dim, senses);
        let half = 0.5 / dim as f64;
        for x in &mut t.sense_data {
            *x = rng.random_range(-half..half);
        }
        t
    }

    pub fn from_parts(dim: usize, senses: usize, sense_data: Vec<f64>, context: Vec<f64>) -> Self {
        assert_eq!(sense_data.len() % (dim * senses), 0);
        assert_eq!(sense_data.len() / (dim * senses), context.len() / dim);
        Self {
            dim,
            senses,
            sense_data,
            context,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn senses(&self) -> usize {
        self.senses
    }

    pub fn vocab_size(&self) -> usize {
        self.context.len() / self.dim
    }

    fn block_len(&self) -> usize {
        self.dim * self.senses
    }

    /// Column `j` of `B_w`.
    pub fn column(&self, word: u32, j: usize) -> &[f64] {
        let start = word as usize * self.block_len() + j * self.dim;
        &self.sense_data[start..start + self.dim]
    }

    pub fn column_mut(&mut self, word: u32, j: usize) -> &mut [f64] {
        let start = word as usize * self.block_len() + j * self.dim;
        &mut self.sense_data[start..start + self.dim]
    }

    /// The `m·d` block holding all columns of `B_w`, column after column.
    pub fn block(&self, word: u32) -> &[f64] {
        let n = self.block_len();
        &self.sense_data[word as usize * n..(word as usize + 1) * n]
    }

    pub fn context_row(&self, id: u32) -> &[f64] {
        let d = self.dim;
        &self.context[id as usize * d..(id as usize + 1) * d]
    }

    pub fn context_row_mut(&mut self, id: u32) -> &mut [f64] {
        let d = self.dim;
        &mut self.context[id as usize * d..(id as usize + 1) * d]
    }

    pub fn sense_matrix(&self, word: u32) -> SenseMatrix {
        let m = nalgebra::DMatrix::from_column_slice(self.dim, self.senses, self.block(word));
        SenseMatrix::from_matrix(m).expect("sense table entries are finite")
    }
}

impl ParamAccess for SenseTable {
    fn input_len(&self) -> usize {
        self.block_len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn read_input(&self, id: u32, out: &mut [f64]) {
        out.copy_from_slice(self.block(id));
    }

    fn read_output(&self, id: u32, out: &mut [f64]) {
        out.copy_from_slice(self.context_row(id));
    }

    fn add_input(&mut self, id: u32, offset: usize, scale: f64, delta: &[f64]) {
        let start = id as usize * self.block_len() + offset;
        for (x, g) in self.sense_data[start..start + delta.len()]
            .iter_mut()
            .zip(delta)
        {
            *x += scale * g;
        }
    }

    fn add_output(&mut self, id: u32, scale: f64, delta: &[f64]) {
        for (x, g) in self.context_row_mut(id).iter_mut().zip(delta) {
            *x += scale * g;
        }
    }
}

/// `A_w = B_w B_wᵀ`, trace-normalized.
pub fn finalize_density(table: &SenseTable, word: u32) -> Result<DensityMatrix, LinalgError> {
    if word as usize >= table.vocab_size() {
        return Err(LinalgError::Empty);
    }
    table.sense_matrix(word).to_density()
}

/// Index of the column of `b` most similar to `c`; ties go to the lowest index.
pub fn select_sense(b: &SenseMatrix, c: &[f64], metric: SenseMetric) -> usize {
    select_column(b.as_matrix().as_slice(), b.dim(), c, metric)
}

pub(crate) fn select_column(block: &[f64], d: usize, c: &[f64], metric: SenseMetric) -> usize {
    let c_norm = dot(c, c).sqrt();
    let metric = if metric == SenseMetric::Cosine && c_norm == 0.0 {
        SenseMetric::Euclidean
    } else {
        metric
    };
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (j, col) in block.chunks_exact(d).enumerate() {
        let score = match metric {
            SenseMetric::Cosine => {
                let n = dot(col, col).sqrt();
                if n == 0.0 {
                    0.0
                } else {
                    dot(col, c) / (n * c_norm)
                }
            }
            SenseMetric::Euclidean => -col
                .iter()
                .zip(c)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>(),
        };
        if score > best_score {
            best = j;
            best_score = score;
        }
    }
    best
}

/// Objective and gradients of `ln σ(⟨b|c⟩) + Σ_k ln σ(−⟨b|v_k⟩)` with
/// `c = scale · Σ_i v_i` over the context vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SenseGradient {
    pub objective: f64,
    pub sense: Vec<f64>,
    /// One entry per context vector (all equal: the gradient flows through the sum).
    pub contexts: Vec<Vec<f64>>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn ms_objective(
    sense: &[f64],
    contexts: &[&[f64]],
    agg: ContextAgg,
    negatives: &[&[f64]],
) -> f64 {
    let c = aggregate(contexts, agg, sense.len());
    log_sigmoid(dot(sense, &c))
        + negatives
            .iter()
            .map(|v| log_sigmoid(-dot(sense, v)))
            .sum::<f64>()
}

pub fn ms_gradient(
    sense: &[f64],
    contexts: &[&[f64]],
    agg: ContextAgg,
    negatives: &[&[f64]],
) -> SenseGradient {
    let scale = agg.scale(contexts.len());
    let c = aggregate(contexts, agg, sense.len());
    let pos = dot(sense, &c);
    let g_pos = 1.0 - sigmoid(pos);
    let mut objective = log_sigmoid(pos);
    let mut g_sense: Vec<f64> = c.iter().map(|x| g_pos * x).collect();
    let mut g_negs = Vec::with_capacity(negatives.len());
    for v in negatives {
        let s = dot(sense, v);
        objective += log_sigmoid(-s);
        let g = sigmoid(s);
        g_sense
            .iter_mut()
            .zip(v.iter())
            .for_each(|(gs, x)| *gs -= g * x);
        g_negs.push(sense.iter().map(|b| -g * b).collect());
    }
    let g_ctx: Vec<f64> = sense.iter().map(|b| scale * g_pos * b).collect();
    SenseGradient {
        objective,
        sense: g_sense,
        contexts: vec![g_ctx; contexts.len()],
        negatives: g_negs,
    }
}

fn aggregate(contexts: &[&[f64]], agg: ContextAgg, d: usize) -> Vec<f64> {
    let mut c = vec![0.0; d];
    for v in contexts {
        c.iter_mut().zip(v.iter()).for_each(|(a, x)| *a += x);
    }
    let scale = agg.scale(contexts.len());
    c.iter_mut().for_each(|a| *a *= scale);
    c
}

/// Outcome of one multi-sense update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenseStep {
    pub selected: usize,
    pub objective: f64,
}

/// One multi-sense step: select the column of `B_target` closest to the
/// context vector and ascend the objective in that column only (plus the
/// context-side vectors). Returns `None` for an empty context.
pub fn ms_word2dm_step(
    table: &mut SenseTable,
    target: u32,
    context: &[u32],
    negatives: &[u32],
    lr: f64,
    metric: SenseMetric,
    agg: ContextAgg,
) -> Option<SenseStep> {
    let mut scratch = Scratch::default();
    ms_update(
        table,
        target,
        context,
        negatives,
        lr,
        metric,
        agg,
        &mut scratch,
    )
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn ms_update<P: ParamAccess>(
    params: &mut P,
    target: u32,
    context: &[u32],
    negatives: &[u32],
    lr: f64,
    metric: SenseMetric,
    agg: ContextAgg,
    s: &mut Scratch,
) -> Option<SenseStep> {
    if context.is_empty() {
        return None;
    }
    let d = params.dim();
    let n_ctx = context.len();
    s.prepare(params.input_len(), d, n_ctx + negatives.len());
    params.read_input(target, &mut s.input);
    for (i, &id) in context.iter().chain(negatives).enumerate() {
        params.read_output(id, &mut s.outputs[i * d..(i + 1) * d]);
    }
    let scale = agg.scale(n_ctx);
    for i in 0..n_ctx {
        let v = &s.outputs[i * d..(i + 1) * d];
        s.context_sum.iter_mut().zip(v).for_each(|(a, x)| *a += x);
    }
    s.context_sum.iter_mut().for_each(|a| *a *= scale);

    let j = select_column(&s.input, d, &s.context_sum, metric);
    let b = &s.input[j * d..(j + 1) * d];
    let pos = dot(b, &s.context_sum);
    let g_pos = 1.0 - sigmoid(pos);
    let mut objective = log_sigmoid(pos);
    let grad = &mut s.grad_input[..d];
    grad.iter_mut()
        .zip(&s.context_sum)
        .for_each(|(g, x)| *g = g_pos * x);
    for k in 0..negatives.len() {
        let v = &s.outputs[(n_ctx + k) * d..(n_ctx + k + 1) * d];
        let score = dot(b, v);
        objective += log_sigmoid(-score);
        let g = sigmoid(score);
        grad.iter_mut().zip(v).for_each(|(gi, x)| *gi -= g * x);
        s.coeffs.push(-g);
    }

    params.add_input(target, j * d, lr, &s.grad_input[..d]);
    for &id in context {
        params.add_output(id, lr * scale * g_pos, &s.input[j * d..(j + 1) * d]);
    }
    for (k, &id) in negatives.iter().enumerate() {
        params.add_output(id, lr * s.coeffs[k], &s.input[j * d..(j + 1) * d]);
    }
    Some(SenseStep {
        selected: j,
        objective,
    })
}

/// Plain Word2DM step: every column of `B_target` takes its own gradient of
/// the negative-sampling objective; the objective is summed over columns.
pub fn word2dm_step(
    table: &mut SenseTable,
    target: u32,
    context: &[u32],
    negatives: &[u32],
    lr: f64,
    agg: ContextAgg,
) -> Option<f64> {
    let mut scratch = Scratch::default();
    word2dm_update(table, target, context, negatives, lr, agg, &mut scratch)
}

pub(crate) fn word2dm_update<P: ParamAccess>(
    params: &mut P,
    target: u32,
    context: &[u32],
    negatives: &[u32],
    lr: f64,
    agg: ContextAgg,
    s: &mut Scratch,
) -> Option<f64> {
    if context.is_empty() {
        return None;
    }
    let d = params.dim();
    let m = params.input_len() / d;
    let n_ctx = context.len();
    s.prepare(params.input_len(), d, n_ctx + negatives.len());
    params.read_input(target, &mut s.input);
    for (i, &id) in context.iter().chain(negatives).enumerate() {
        params.read_output(id, &mut s.outputs[i * d..(i + 1) * d]);
    }
    let scale = agg.scale(n_ctx);
    for i in 0..n_ctx {
        let v = &s.outputs[i * d..(i + 1) * d];
        s.context_sum.iter_mut().zip(v).for_each(|(a, x)| *a += x);
    }
    s.context_sum.iter_mut().for_each(|a| *a *= scale);

    let mut ctx_delta = vec![0.0; d];
    let mut neg_delta = vec![0.0; negatives.len() * d];
    let mut objective = 0.0;
    for j in 0..m {
        let b = &s.input[j * d..(j + 1) * d];
        let pos = dot(b, &s.context_sum);
        let g_pos = 1.0 - sigmoid(pos);
        objective += log_sigmoid(pos);
        let grad = &mut s.grad_input[j * d..(j + 1) * d];
        grad.iter_mut()
            .zip(&s.context_sum)
            .for_each(|(g, x)| *g = g_pos * x);
        ctx_delta
            .iter_mut()
            .zip(b)
            .for_each(|(c, x)| *c += scale * g_pos * x);
        for k in 0..negatives.len() {
            let v = &s.outputs[(n_ctx + k) * d..(n_ctx + k + 1) * d];
            let score = dot(b, v);
            objective += log_sigmoid(-score);
            let g = sigmoid(score);
            grad.iter_mut().zip(v).for_each(|(gi, x)| *gi -= g * x);
            neg_delta[k * d..(k + 1) * d]
                .iter_mut()
                .zip(b)
                .for_each(|(nd, x)| *nd -= g * x);
        }
    }

    params.add_input(target, 0, lr, &s.grad_input);
    for &id in context {
        params.add_output(id, lr, &ctx_delta);
    }
    for (k, &id) in negatives.iter().enumerate() {
        params.add_output(id, lr, &neg_delta[k * d..(k + 1) * d]);
    }
    Some(objective)
}
