use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use densem::compose::{ComposeConfig, Method, OperatorSide, Role, Token};
use densem::io::Dtype;
use densem::senses::{ContextMode, KBounds, ReduceMethod};
use densem::train::{ContextAgg, SenseMetric, TrainConfig, Variant};
use densem::SimMode;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "densem",
    version,
    about = "Density-matrix word meanings: train, compose, evaluate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Commands,
}

#[derive(Debug, Subcommand)]
pub enum Commands {
    /// Count tokens of a corpus and write `token<TAB>count` lines.
    Vocab(VocabArgs),
    /// Train vectors or density matrices on a corpus.
    Train(TrainArgs),
    /// Build density matrices by clustering context vectors.
    Context2dm(Context2dmArgs),
    /// Build density matrices from contextual token vectors.
    Contextual2dm(Contextual2dmArgs),
    /// Compose one fragment and print its spectrum.
    Compose(ComposeArgs),
    /// Score a triple dataset and write reports.
    Eval(EvalArgs),
    /// Compare verb and composed entropies per method.
    Entropy(EntropyArgs),
    /// Print a word's eigenvalue spectrum and entropy.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct VocabArgs {
    /// Corpus file, one sentence per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output vocabulary file.
    #[arg(long)]
    pub out: PathBuf,
    /// Drop tokens seen fewer times than this.
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Corpus file, one sentence per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output model directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Existing vocabulary file; built from the corpus when absent.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Minimum count when building the vocabulary.
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// Model variant: sgns, word2dm or ms_word2dm.
    #[arg(long, default_value = "ms_word2dm")]
    pub variant: Variant,
    /// Embedding dimension.
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    /// Sense columns per word (matrix variants).
    #[arg(long, default_value_t = 5)]
    pub senses: usize,
    /// Negative samples per update.
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    /// Context window radius.
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Passes over the corpus.
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    /// Initial learning rate.
    #[arg(long, default_value_t = 0.025)]
    pub lr_start: f64,
    /// Final learning rate.
    #[arg(long, default_value_t = 0.0001)]
    pub lr_end: f64,
    /// Sense selection metric: cosine or euclidean.
    #[arg(long, default_value = "cosine")]
    pub metric: SenseMetric,
    /// Context aggregate: sum or mean.
    #[arg(long, default_value = "sum")]
    pub context_agg: ContextAgg,
    /// Subsampling threshold, or `off`.
    #[arg(long, default_value = "1e-5")]
    pub subsample: String,
    /// Exponent of the noise distribution.
    #[arg(long, default_value_t = 0.75)]
    pub noise_power: f64,
    /// Random seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; 1 is deterministic.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Storage precision of the matrix blob: f32 or f64.
    #[arg(long, default_value = "f64")]
    pub dtype: String,
}

#[derive(Debug, Args)]
pub struct Context2dmArgs {
    /// Corpus file, one sentence per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Word vectors in text format.
    #[arg(long)]
    pub vectors: PathBuf,
    /// Output model directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated words; every vector word found in the corpus when absent.
    #[arg(long, value_delimiter = ',')]
    pub words: Vec<String>,
    /// Context window radius.
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Fewest clusters.
    #[arg(long, default_value_t = 2)]
    pub k_min: usize,
    /// Most clusters.
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    /// Context instances: types or occurrences.
    #[arg(long, default_value = "types")]
    pub context_mode: ContextMode,
    /// Storage precision of the matrix blob: f32 or f64.
    #[arg(long, default_value = "f64")]
    pub dtype: String,
}

#[derive(Debug, Args)]
pub struct Contextual2dmArgs {
    /// JSONL file of `{word, vector}` token instances.
    #[arg(long)]
    pub instances: PathBuf,
    /// Output model directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Reduction: pca or svd.
    #[arg(long, default_value = "pca")]
    pub method: ReduceMethod,
    /// Reduced dimension.
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    /// Storage precision of the matrix blob: f32 or f64.
    #[arg(long, default_value = "f64")]
    pub dtype: String,
}

#[derive(Debug, Args)]
pub struct ComposeFlags {
    /// Operator side for fuzz and phaser: verb or noun.
    #[arg(long)]
    pub operator_side: Option<OperatorSide>,
    /// Include function words in composition.
    #[arg(long)]
    pub include_function_words: bool,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// Model directory or dm1 manifest.
    #[arg(long)]
    pub model: PathBuf,
    /// Composition method: add, mult, fuzz, phaser or verb_only.
    #[arg(long)]
    pub method: Method,
    #[command(flatten)]
    pub flags: ComposeFlags,
    /// Tokens as `lemma:role` (roles: subj, verb, obj, adj, function).
    #[arg(long, num_args = 1.., required = true)]
    pub tokens: Vec<String>,
    /// Write the composed matrix to this dm1 manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Triple dataset (JSONL).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Model directory, dm1 manifest or vector file.
    #[arg(long, required_unless_present = "scores", conflicts_with = "scores")]
    pub model: Option<PathBuf>,
    /// Precomputed similarities, CSV `id,sim_apt,sim_inapt`.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Comma-separated methods: add, mult, fuzz, phaser, verb_only.
    #[arg(long, value_delimiter = ',', default_value = "fuzz")]
    pub method: Vec<Method>,
    #[command(flatten)]
    pub flags: ComposeFlags,
    /// Similarity: trace or cosine.
    #[arg(long, default_value = "trace")]
    pub sim: SimMode,
    /// Full JSON report.
    #[arg(long)]
    pub report: PathBuf,
    /// One CSV row per method and form.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Name recorded in reports; defaults to the model path's file name.
    #[arg(long)]
    pub model_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Triple dataset (JSONL).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Model directory or dm1 manifest.
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "add,mult,fuzz,phaser")]
    pub method: Vec<Method>,
    #[command(flatten)]
    pub flags: ComposeFlags,
    /// Write the table as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Model directory or dm1 manifest.
    #[arg(long)]
    pub model: PathBuf,
    /// Word to inspect.
    #[arg(long)]
    pub word: String,
    /// Eigenvalues to print.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

/// A validated command with every input resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum RunPlan {
    Vocab {
        corpus: PathBuf,
        out: PathBuf,
        min_count: u64,
    },
    Train {
        corpus: PathBuf,
        out: PathBuf,
        vocab: Option<PathBuf>,
        min_count: u64,
        config: TrainConfig,
        dtype: Dtype,
    },
    Context2dm {
        corpus: PathBuf,
        vectors: PathBuf,
        out: PathBuf,
        words: Vec<String>,
        window: usize,
        bounds: KBounds,
        mode: ContextMode,
        dtype: Dtype,
    },
    Contextual2dm {
        instances: PathBuf,
        out: PathBuf,
        method: ReduceMethod,
        dim: usize,
        dtype: Dtype,
    },
    Compose {
        model: PathBuf,
        config: ComposeConfig,
        tokens: Vec<Token>,
        out: Option<PathBuf>,
    },
    Eval {
        dataset: PathBuf,
        source: EvalSource,
        configs: Vec<ComposeConfig>,
        sim: SimMode,
        report: PathBuf,
        csv: Option<PathBuf>,
        model_id: String,
    },
    Entropy {
        dataset: PathBuf,
        model: PathBuf,
        configs: Vec<ComposeConfig>,
        out: Option<PathBuf>,
    },
    Inspect {
        model: PathBuf,
        word: String,
        top: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalSource {
    Model(PathBuf),
    Scores(PathBuf),
}

fn usage(msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("error: {msg}"))
}

fn existing(path: &Path) -> Result<PathBuf, CliError> {
    if path.exists() {
        Ok(path.to_path_buf())
    } else {
        Err(CliError::MissingInput(path.to_path_buf()))
    }
}

fn dtype(s: &str) -> Result<Dtype, CliError> {
    match s {
        "f32" => Ok(Dtype::F32),
        "f64" => Ok(Dtype::F64),
        other => Err(usage(format!(
            "invalid value '{other}' for '--dtype': expected f32 or f64"
        ))),
    }
}

fn compose_configs(
    methods: &[Method],
    flags: &ComposeFlags,
) -> Result<Vec<ComposeConfig>, CliError> {
    if methods.is_empty() {
        return Err(usage("at least one --method is required"));
    }
    if flags.operator_side.is_some() && !methods.iter().any(|m| m.uses_operator_side()) {
        let names: Vec<&str> = methods.iter().map(|m| m.name()).collect();
        return Err(usage(format!(
            "--operator-side only applies to fuzz and phaser, not --method {}",
            names.join(",")
        )));
    }
    let mut out: Vec<ComposeConfig> = Vec::new();
    for &m in methods {
        let cfg = ComposeConfig {
            method: m,
            operator_side: flags.operator_side.unwrap_or_default(),
            include_function_words: flags.include_function_words,
        };
        if !out.contains(&cfg) {
            out.push(cfg);
        }
    }
    Ok(out)
}

fn parse_token(spec: &str) -> Result<Token, CliError> {
    let (lemma, role) = spec
        .rsplit_once(':')
        .ok_or_else(|| usage(format!("token `{spec}` must look like lemma:role")))?;
    let role = match role {
        "subj" => Role::Subj,
        "verb" => Role::Verb,
        "obj" => Role::Obj,
        "adj" => Role::Adj,
        "function" => Role::Function,
        other => return Err(usage(format!("unknown role `{other}` in `{spec}`"))),
    };
    if lemma.is_empty() {
        return Err(usage(format!("token `{spec}` has an empty lemma")));
    }
    Ok(Token::new(lemma, lemma, role))
}

fn default_model_id(path: &Path) -> String {
    let trimmed = path
        .components()
        .filter(|c| !matches!(c, std::path::Component::CurDir))
        .collect::<PathBuf>();
    trimmed
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".to_string())
}

/// Parses `argv` (program name first) into a validated plan.
pub fn parse_invocation<I, T>(argv: I) -> Result<RunPlan, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::from_clap)?;
    match cli.command {
        Commands::Vocab(a) => Ok(RunPlan::Vocab {
            corpus: existing(&a.corpus)?,
            out: a.out,
            min_count: a.min_count,
        }),
        Commands::Train(a) => {
            let subsample = match a.subsample.as_str() {
                "off" | "none" => None,
                s => Some(
                    s.parse::<f64>()
                        .map_err(|_| usage(format!("invalid --subsample `{s}`")))?,
                ),
            };
            let config = TrainConfig {
                variant: a.variant,
                dim: a.dim,
                senses: a.senses,
                negatives: a.negatives,
                window: a.window,
                epochs: a.epochs,
                lr_start: a.lr_start,
                lr_end: a.lr_end,
                sense_metric: a.metric,
                context_agg: a.context_agg,
                subsample,
                noise_power: a.noise_power,
                seed: a.seed,
                threads: a.threads,
            };
            config.validate().map_err(|e| usage(e.to_string()))?;
            Ok(RunPlan::Train {
                corpus: existing(&a.corpus)?,
                out: a.out,
                vocab: a.vocab.as_deref().map(existing).transpose()?,
                min_count: a.min_count,
                config,
                dtype: dtype(&a.dtype)?,
            })
        }
        Commands::Context2dm(a) => {
            if a.window == 0 {
                return Err(usage("--window must be positive"));
            }
            if a.k_min == 0 || a.k_min > a.k_max {
                return Err(usage("--k-min must be positive and at most --k-max"));
            }
            Ok(RunPlan::Context2dm {
                corpus: existing(&a.corpus)?,
                vectors: existing(&a.vectors)?,
                out: a.out,
                words: a.words,
                window: a.window,
                bounds: KBounds {
                    min: a.k_min,
                    max: a.k_max,
                },
                mode: a.context_mode,
                dtype: dtype(&a.dtype)?,
            })
        }
        Commands::Contextual2dm(a) => {
            if a.dim == 0 {
                return Err(usage("--dim must be positive"));
            }
            Ok(RunPlan::Contextual2dm {
                instances: existing(&a.instances)?,
                out: a.out,
                method: a.method,
                dim: a.dim,
                dtype: dtype(&a.dtype)?,
            })
        }
        Commands::Compose(a) => {
            let config = compose_configs(&[a.method], &a.flags)?.remove(0);
            let tokens = a
                .tokens
                .iter()
                .map(|t| parse_token(t))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(RunPlan::Compose {
                model: existing(&a.model)?,
                config,
                tokens,
                out: a.out,
            })
        }
        Commands::Eval(a) => {
            let source = match (a.model, a.scores) {
                (Some(m), None) => EvalSource::Model(existing(&m)?),
                (None, Some(s)) => EvalSource::Scores(existing(&s)?),
                _ => return Err(usage("exactly one of --model and --scores is required")),
            };
            let configs = match source {
                EvalSource::Model(_) => compose_configs(&a.method, &a.flags)?,
                EvalSource::Scores(_) => Vec::new(),
            };
            let model_id = a.model_id.unwrap_or_else(|| match &source {
                EvalSource::Model(p) | EvalSource::Scores(p) => default_model_id(p),
            });
            Ok(RunPlan::Eval {
                dataset: existing(&a.dataset)?,
                source,
                configs,
                sim: a.sim,
                report: a.report,
                csv: a.csv,
                model_id,
            })
        }
        Commands::Entropy(a) => Ok(RunPlan::Entropy {
            dataset: existing(&a.dataset)?,
            model: existing(&a.model)?,
            configs: compose_configs(&a.method, &a.flags)?,
            out: a.out,
        }),
        Commands::Inspect(a) => Ok(RunPlan::Inspect {
            model: existing(&a.model)?,
            word: a.word,
            top: a.top,
        }),
    }
}
