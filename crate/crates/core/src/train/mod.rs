//! Trainers: skip-gram vectors, plain Word2DM and multi-sense Word2DM.

mod multisense;
mod params;
mod sgns;

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use multisense::{
    finalize_density, ms_gradient, ms_objective, ms_word2dm_step, select_sense, word2dm_step,
    ContextAgg, SenseGradient, SenseMetric, SenseStep, SenseTable,
};
pub use sgns::{
    log_sigmoid, sgns_gradient, sgns_objective, sgns_step, sigmoid, EmbeddingTable, SgnsGradient,
};

use crate::corpus::{window_around, Corpus, CorpusError, NegativeSampler, Subsampler, Vocabulary};
use crate::error::{Error, Result};
use crate::io::{self, Dtype};
use crate::store::DensityStore;
use params::{AtomicTables, ParamAccess, Scratch};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("corpus is empty after subsampling")]
    EmptyCorpus,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Skip-gram with negative sampling: one vector per word.
    Sgns,
    /// Sense matrices where every column is updated at every step.
    Word2dm,
    /// Sense matrices where only the column closest to the context is updated.
    #[default]
    MsWord2dm,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Sgns => "sgns",
            Variant::Word2dm => "word2dm",
            Variant::MsWord2dm => "ms_word2dm",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sgns" => Ok(Variant::Sgns),
            "word2dm" => Ok(Variant::Word2dm),
            "ms_word2dm" | "ms-word2dm" => Ok(Variant::MsWord2dm),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub variant: Variant,
    pub dim: usize,
    pub senses: usize,
    pub negatives: usize,
    pub window: usize,
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub sense_metric: SenseMetric,
    pub context_agg: ContextAgg,
    /// Subsampling threshold; `None` keeps every token.
    pub subsample: Option<f64>,
    pub noise_power: f64,
    pub seed: u64,
    /// `1` is the deterministic path; more threads train lock-free and are not reproducible.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            variant: Variant::MsWord2dm,
            dim: 50,
            senses: 5,
            negatives: 5,
            window: 5,
            epochs: 5,
            lr_start: 0.025,
            lr_end: 0.0001,
            sense_metric: SenseMetric::Cosine,
            context_agg: ContextAgg::Sum,
            subsample: Some(1e-5),
            noise_power: 0.75,
            seed: 1,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> std::result::Result<(), TrainError> {
        let bad = |msg: &str| Err(TrainError::InvalidConfig(msg.to_string()));
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if self.senses == 0 {
            return bad("senses must be positive");
        }
        if self.window == 0 {
            return bad("window must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.threads == 0 {
            return bad("threads must be positive");
        }
        if !(self.lr_start > 0.0 && self.lr_start.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(self.lr_end > 0.0) || self.lr_end > self.lr_start || self.lr_end < 1e-4 * self.lr_start
        {
            return bad("final learning rate must lie in [1e-4·start, start]");
        }
        if let Some(t) = self.subsample {
            if !(t > 0.0) {
                return bad("subsampling threshold must be positive");
            }
        }
        Ok(())
    }

    /// Linearly decayed rate after `done` of `total` tokens.
    pub fn learning_rate(&self, done: u64, total: u64) -> f64 {
        let frac = if total == 0 {
            1.0
        } else {
            (done as f64 / total as f64).min(1.0)
        };
        (self.lr_start - (self.lr_start - self.lr_end) * frac).max(self.lr_end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Vectors(EmbeddingTable),
    Senses(SenseTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub model: TrainedModel,
    /// Mean objective per update step, one entry per epoch.
    pub epoch_objectives: Vec<f64>,
}

/// Trains the configured variant. `progress` is called after each epoch with
/// the epoch number (from 1) and the mean objective.
pub fn train(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TrainConfig,
    progress: &mut dyn FnMut(usize, f64),
) -> std::result::Result<TrainOutput, TrainError> {
    config.validate()?;
    if vocab.is_empty() {
        return Err(CorpusError::EmptyVocabulary(0).into());
    }
    let noise = NegativeSampler::new(vocab, config.noise_power)?;
    let subsampler = config
        .subsample
        .map(|t| Subsampler::new(vocab, t))
        .transpose()?;
    let total = config.epochs as u64 * corpus.token_count() as u64;
    if total == 0 {
        return Err(TrainError::EmptyCorpus);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let v = vocab.len();
    let shared = Shared {
        config,
        noise: &noise,
        subsampler: subsampler.as_ref(),
        total,
    };
    let mut objectives = Vec::with_capacity(config.epochs);

    let model = match config.variant {
        Variant::Sgns => {
            let mut table = EmbeddingTable::init(v, config.dim, &mut rng);
            if config.threads == 1 {
                run_sequential(
                    &mut table,
                    corpus,
                    &shared,
                    &mut rng,
                    &mut objectives,
                    progress,
                )?;
            } else {
                let atomic =
                    AtomicTables::new(config.dim, config.dim, &table.target, &table.context);
                run_parallel(&atomic, corpus, &shared, &mut objectives, progress)?;
                let (t, c) = atomic.into_parts();
                table = EmbeddingTable::from_parts(config.dim, t, c);
            }
            TrainedModel::Vectors(table)
        }
        Variant::Word2dm | Variant::MsWord2dm => {
            let mut table = SenseTable::init(v, config.dim, config.senses, &mut rng);
            if config.threads == 1 {
                run_sequential(
                    &mut table,
                    corpus,
                    &shared,
                    &mut rng,
                    &mut objectives,
                    progress,
                )?;
            } else {
                let block = config.dim * config.senses;
                let atomic =
                    AtomicTables::new(block, config.dim, &table.sense_data, &table.context);
                run_parallel(&atomic, corpus, &shared, &mut objectives, progress)?;
                let (s, c) = atomic.into_parts();
                table = SenseTable::from_parts(config.dim, config.senses, s, c);
            }
            TrainedModel::Senses(table)
        }
    };
    Ok(TrainOutput {
        model,
        epoch_objectives: objectives,
    })
}

struct Shared<'a> {
    config: &'a TrainConfig,
    noise: &'a NegativeSampler,
    subsampler: Option<&'a Subsampler>,
    total: u64,
}

#[derive(Default)]
struct Tally {
    objective: f64,
    steps: u64,
}

struct Worker {
    scratch: Scratch,
    kept: Vec<u32>,
    context: Vec<u32>,
    negatives: Vec<u32>,
}

impl Worker {
    fn new() -> Self {
        Self {
            scratch: Scratch::default(),
            kept: Vec::new(),
            context: Vec::new(),
            negatives: Vec::new(),
        }
    }

    fn sentence<P: ParamAccess, R: Rng>(
        &mut self,
        params: &mut P,
        sentence: &[u32],
        lr: f64,
        shared: &Shared<'_>,
        rng: &mut R,
        tally: &mut Tally,
    ) {
        let cfg = shared.config;
        self.kept.clear();
        match shared.subsampler {
            Some(s) => self
                .kept
                .extend(sentence.iter().copied().filter(|&id| s.keep(id, rng))),
            None => self.kept.extend_from_slice(sentence),
        }
        for pos in 0..self.kept.len() {
            let target = self.kept[pos];
            self.context.clear();
            self.context
                .extend(window_around(&self.kept, pos, cfg.window));
            if self.context.is_empty() {
                continue;
            }
            match cfg.variant {
                Variant::Sgns => {
                    for ci in 0..self.context.len() {
                        let c = self.context[ci];
                        self.draw_negatives(shared, c, rng);
                        tally.objective += sgns::sgns_update(
                            params,
                            target,
                            c,
                            &self.negatives,
                            lr,
                            &mut self.scratch,
                        );
                        tally.steps += 1;
                    }
                }
                Variant::MsWord2dm => {
                    self.draw_negatives(shared, target, rng);
                    if let Some(step) = multisense::ms_update(
                        params,
                        target,
                        &self.context,
                        &self.negatives,
                        lr,
                        cfg.sense_metric,
                        cfg.context_agg,
                        &mut self.scratch,
                    ) {
                        tally.objective += step.objective;
                        tally.steps += 1;
                    }
                }
                Variant::Word2dm => {
                    self.draw_negatives(shared, target, rng);
                    if let Some(obj) = multisense::word2dm_update(
                        params,
                        target,
                        &self.context,
                        &self.negatives,
                        lr,
                        cfg.context_agg,
                        &mut self.scratch,
                    ) {
                        tally.objective += obj;
                        tally.steps += 1;
                    }
                }
            }
        }
    }

    /// Draws `K` noise words, dropping any that equal `exclude`.
    fn draw_negatives<R: Rng>(&mut self, shared: &Shared<'_>, exclude: u32, rng: &mut R) {
        self.negatives.clear();
        for _ in 0..shared.config.negatives {
            let n = shared.noise.sample(rng);
            if n != exclude {
                self.negatives.push(n);
            }
        }
    }
}

fn run_sequential<P: ParamAccess>(
    params: &mut P,
    corpus: &Corpus,
    shared: &Shared<'_>,
    rng: &mut ChaCha8Rng,
    objectives: &mut Vec<f64>,
    progress: &mut dyn FnMut(usize, f64),
) -> std::result::Result<(), TrainError> {
    let mut worker = Worker::new();
    let mut done = 0u64;
    for epoch in 1..=shared.config.epochs {
        let mut tally = Tally::default();
        for sentence in corpus.sentences() {
            let lr = shared.config.learning_rate(done, shared.total);
            worker.sentence(params, sentence, lr, shared, rng, &mut tally);
            done += sentence.len() as u64;
        }
        finish_epoch(epoch, &tally, objectives, progress)?;
    }
    Ok(())
}

fn run_parallel(
    tables: &AtomicTables,
    corpus: &Corpus,
    shared: &Shared<'_>,
    objectives: &mut Vec<f64>,
    progress: &mut dyn FnMut(usize, f64),
) -> std::result::Result<(), TrainError> {
    let threads = shared.config.threads;
    let done = AtomicU64::new(0);
    for epoch in 1..=shared.config.epochs {
        let tallies: Vec<Tally> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|w| {
                    let done = &done;
                    scope.spawn(move || {
                        let seed = shared.config.seed
                            ^ ((epoch * threads + w) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        let mut view = tables.view();
                        let mut worker = Worker::new();
                        let mut tally = Tally::default();
                        for sentence in corpus.sentences().iter().skip(w).step_by(threads) {
                            let lr = shared
                                .config
                                .learning_rate(done.load(Ordering::Relaxed), shared.total);
                            worker.sentence(&mut view, sentence, lr, shared, &mut rng, &mut tally);
                            done.fetch_add(sentence.len() as u64, Ordering::Relaxed);
                        }
                        tally
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect()
        });
        let tally = tallies.into_iter().fold(Tally::default(), |a, b| Tally {
            objective: a.objective + b.objective,
            steps: a.steps + b.steps,
        });
        finish_epoch(epoch, &tally, objectives, progress)?;
    }
    Ok(())
}

fn finish_epoch(
    epoch: usize,
    tally: &Tally,
    objectives: &mut Vec<f64>,
    progress: &mut dyn FnMut(usize, f64),
) -> std::result::Result<(), TrainError> {
    if tally.steps == 0 {
        return Err(TrainError::EmptyCorpus);
    }
    let mean = tally.objective / tally.steps as f64;
    objectives.push(mean);
    progress(epoch, mean);
    Ok(())
}

/// Density matrices `BBᵀ` for every word of the table.
pub fn density_store(table: &SenseTable, vocab: &Vocabulary) -> Result<DensityStore> {
    let mut store = DensityStore::new(table.dim());
    for (id, token) in vocab.tokens().enumerate() {
        let m = finalize_density(table, id as u32)?;
        store.insert(token, m)?;
    }
    Ok(store)
}

pub const B1_FORMAT: &str = "b1";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct B1Manifest {
    pub format: String,
    pub dim: usize,
    pub senses: usize,
    pub words: Vec<String>,
}

/// Writes the sense matrices (`d×m`, row-major, f64 little-endian) with a `b1` manifest.
pub fn save_sense_table(
    table: &SenseTable,
    vocab: &Vocabulary,
    manifest_path: &Path,
) -> Result<()> {
    let manifest = B1Manifest {
        format: B1_FORMAT.to_string(),
        dim: table.dim(),
        senses: table.senses(),
        words: vocab.tokens().map(str::to_string).collect(),
    };
    let mut blob = Vec::with_capacity(table.sense_data.len() * 8);
    for id in 0..vocab.len() as u32 {
        let b = table.sense_matrix(id);
        let rows = b.as_matrix().transpose();
        io::f64s_to_le(rows.iter().copied(), Dtype::F64, &mut blob);
    }
    io::write_atomic(&io::blob_path(manifest_path), &blob)?;
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    io::write_atomic(manifest_path, &json)
}

/// Reads a `b1` table; context vectors are not stored and come back as zeros.
pub fn load_sense_table(manifest_path: &Path) -> Result<(SenseTable, Vec<String>)> {
    let manifest: B1Manifest = serde_json::from_str(&io::read_to_string(manifest_path)?)
        .map_err(|e| Error::format(manifest_path, e.to_string()))?;
    if manifest.format != B1_FORMAT {
        return Err(Error::format(
            manifest_path,
            format!("expected format `b1`, found `{}`", manifest.format),
        ));
    }
    let (d, m) = (manifest.dim, manifest.senses);
    if d == 0 || m == 0 {
        return Err(Error::format(
            manifest_path,
            "dim and senses must be positive",
        ));
    }
    let blob_path = io::blob_path(manifest_path);
    let values = io::le_to_f64s(&io::read_bytes(&blob_path)?, Dtype::F64);
    if values.len() != manifest.words.len() * d * m {
        return Err(Error::format(
            &blob_path,
            "blob size does not match manifest",
        ));
    }
    let mut sense_data = Vec::with_capacity(values.len());
    for chunk in values.chunks_exact(d * m) {
        let b = nalgebra::DMatrix::from_row_slice(d, m, chunk);
        sense_data.extend_from_slice(b.as_slice());
    }
    let context = vec![0.0; manifest.words.len() * d];
    Ok((
        SenseTable::from_parts(d, m, sense_data, context),
        manifest.words,
    ))
}
