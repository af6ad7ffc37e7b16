use std::io::Write;
use std::path::{Path, PathBuf};

use densem::compose::{ComposeConfig, Fragment, Lexicon, Token};
use densem::corpus::{read_sentences, Corpus, Vocabulary};
use densem::eval::{
    evaluate, import_scores, load_triples, report_csv, scores_from_external, EntropyRow,
    Evaluation, VectorModel,
};
use densem::io::{self, Dtype};
use densem::senses::{
    collect_contexts, context2dm, contextual2dm_with, read_contextual, Reducer, SenseError,
};
use densem::train::{density_store, save_sense_table, train, TrainConfig, TrainedModel};
use densem::{compose_fragment, DensityStore, SimMode, WordVectors};
use serde::Serialize;

use crate::args::{EvalSource, RunPlan};
use crate::CliError;

pub const VOCAB_FILE: &str = "vocab.tsv";
pub const TRAIN_LOG_FILE: &str = "train.json";
pub const VECTORS_FILE: &str = "vectors.txt";
pub const SENSES_FILE: &str = "senses.json";
pub const DM_FILE: &str = "dm.json";

type CliResult<T> = Result<T, CliError>;

enum Model {
    Matrices(DensityStore),
    Vectors(WordVectors),
}

fn load_model(path: &Path) -> CliResult<Model> {
    let (dm, vectors) = if path.is_dir() {
        (path.join(DM_FILE), path.join(VECTORS_FILE))
    } else if path.extension().is_some_and(|e| e == "json") {
        (path.to_path_buf(), PathBuf::new())
    } else {
        (PathBuf::new(), path.to_path_buf())
    };
    if dm.is_file() {
        Ok(Model::Matrices(DensityStore::load(&dm)?))
    } else if vectors.is_file() {
        Ok(Model::Vectors(WordVectors::load(&vectors)?))
    } else {
        Err(CliError::Data(format!(
            "{}: no {DM_FILE} or {VECTORS_FILE} found",
            path.display()
        )))
    }
}

fn load_store(path: &Path) -> CliResult<DensityStore> {
    match load_model(path)? {
        Model::Matrices(s) => Ok(s),
        Model::Vectors(_) => Err(CliError::Data(format!(
            "{}: this command needs density matrices, found word vectors",
            path.display()
        ))),
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
    bytes.push(b'\n');
    Ok(io::write_atomic(path, &bytes)?)
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> CliResult<()> {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => { say($out, format_args!($($arg)*)) };
}

#[derive(Serialize)]
struct TrainLog<'a> {
    config: &'a TrainConfig,
    vocab_size: usize,
    tokens: usize,
    epoch_objectives: &'a [f64],
}

/// Runs a validated plan. Every artifact is written atomically.
pub fn execute(plan: &RunPlan, out: &mut dyn Write) -> CliResult<()> {
    match plan {
        RunPlan::Vocab {
            corpus,
            out: path,
            min_count,
        } => {
            let sentences = read_sentences(corpus)?;
            let vocab = Vocabulary::build(sentences.iter().flatten(), *min_count)
                .map_err(densem::Error::from)?;
            vocab.save(path)?;
            say!(
                out,
                "vocabulary: {} types, {} tokens -> {}",
                vocab.len(),
                vocab.total_count(),
                path.display()
            )
        }
        RunPlan::Train {
            corpus,
            out: dir,
            vocab,
            min_count,
            config,
            dtype,
        } => run_train(
            corpus,
            dir,
            vocab.as_deref(),
            *min_count,
            config,
            *dtype,
            out,
        ),
        RunPlan::Context2dm {
            corpus,
            vectors,
            out: dir,
            words,
            window,
            bounds,
            mode,
            dtype,
        } => {
            let sentences = read_sentences(corpus)?;
            let vectors = WordVectors::load(vectors)?;
            let explicit = !words.is_empty();
            let targets: Vec<String> = if explicit {
                words.clone()
            } else {
                let seen: std::collections::BTreeSet<&str> = sentences
                    .iter()
                    .flatten()
                    .map(String::as_str)
                    .filter(|w| vectors.contains(w))
                    .collect();
                seen.into_iter().map(str::to_string).collect()
            };
            let mut store = DensityStore::new(vectors.dim());
            let mut skipped = 0usize;
            for word in &targets {
                let ctx = match collect_contexts(&sentences, &vectors, word, *window, *mode) {
                    Ok(c) => c,
                    Err(SenseError::NoOccurrences(_) | SenseError::NoContexts(_)) if !explicit => {
                        skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(densem::Error::from(e).into()),
                };
                let dm = context2dm(&ctx, *bounds).map_err(densem::Error::from)?;
                store
                    .insert(word.clone(), dm)
                    .map_err(densem::Error::from)?;
            }
            if store.is_empty() {
                return Err(CliError::Data("no word had usable contexts".into()));
            }
            create_dir(dir)?;
            let path = dir.join(DM_FILE);
            store.save(&path, *dtype)?;
            say!(
                out,
                "context2dm: {} matrices (d={}), {} skipped -> {}",
                store.len(),
                store.dim(),
                skipped,
                path.display()
            )
        }
        RunPlan::Contextual2dm {
            instances,
            out: dir,
            method,
            dim,
            dtype,
        } => {
            let by_word = read_contextual(instances)?;
            let all: Vec<_> = by_word.values().flatten().cloned().collect();
            let reducer = Reducer::fit(&all, *method, *dim).map_err(densem::Error::from)?;
            let mut store = DensityStore::new(*dim);
            for (word, vs) in &by_word {
                let dm = contextual2dm_with(&reducer, vs).map_err(densem::Error::from)?;
                store
                    .insert(word.clone(), dm)
                    .map_err(densem::Error::from)?;
            }
            create_dir(dir)?;
            let path = dir.join(DM_FILE);
            store.save(&path, *dtype)?;
            say!(
                out,
                "contextual2dm: {} matrices (d={}) from {} instances -> {}",
                store.len(),
                dim,
                all.len(),
                path.display()
            )
        }
        RunPlan::Compose {
            model,
            config,
            tokens,
            out: path,
        } => run_compose(model, config, tokens, path.as_deref(), out),
        RunPlan::Eval {
            dataset,
            source,
            configs,
            sim,
            report,
            csv,
            model_id,
        } => {
            let triples = load_triples(dataset)?;
            let evaluation = match source {
                EvalSource::Scores(p) => {
                    scores_from_external(&triples, &import_scores(p)?, model_id)
                }
                EvalSource::Model(p) => match load_model(p)? {
                    Model::Matrices(store) => {
                        evaluate(&triples, &store, model_id, configs, *sim, sim.name())?
                    }
                    Model::Vectors(v) => evaluate(
                        &triples,
                        &VectorModel(&v),
                        model_id,
                        configs,
                        SimMode::Cosine,
                        "vector_cosine",
                    )?,
                },
            };
            write_json(report, &evaluation)?;
            if let Some(csv) = csv {
                io::write_atomic(csv, report_csv(&evaluation.reports).as_bytes())?;
            }
            summarize(&evaluation, out)?;
            say!(out, "report -> {}", report.display())
        }
        RunPlan::Entropy {
            dataset,
            model,
            configs,
            out: path,
        } => {
            let triples = load_triples(dataset)?;
            let store = load_store(model)?;
            let evaluation = evaluate(
                &triples,
                &store,
                "",
                configs,
                SimMode::Trace,
                SimMode::Trace.name(),
            )?;
            let rows: Vec<EntropyRow> = evaluation.reports.iter().map(EntropyRow::from).collect();
            say!(
                out,
                "method\toperator_side\tform\tn\tentropy_verb\tentropy_composed\tratio"
            )?;
            let f = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
            for r in &rows {
                say!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.method,
                    r.operator_side.as_deref().unwrap_or("-"),
                    r.form,
                    r.n_used,
                    f(r.mean_entropy_verb),
                    f(r.mean_entropy_composed),
                    f(r.entropy_ratio)
                )?;
            }
            if let Some(path) = path {
                write_json(path, &rows)?;
            }
            Ok(())
        }
        RunPlan::Inspect { model, word, top } => {
            let store = load_store(model)?;
            let m = store
                .get(word)
                .ok_or_else(|| CliError::Data(format!("`{word}` is not in {}", model.display())))?;
            let eig = m.eigen();
            say!(out, "word: {word}")?;
            say!(out, "dim: {}", m.dim())?;
            say!(out, "entropy: {:.6}", m.entropy())?;
            let mut values: Vec<f64> = eig.eigenvalues.to_vec();
            values.sort_by(|a, b| b.total_cmp(a));
            let shown: Vec<String> = values
                .iter()
                .take(*top)
                .map(|v| format!("{v:.6}"))
                .collect();
            say!(out, "eigenvalues: {}", shown.join(" "))
        }
    }
}

fn run_train(
    corpus_path: &Path,
    dir: &Path,
    vocab_path: Option<&Path>,
    min_count: u64,
    config: &TrainConfig,
    dtype: Dtype,
    out: &mut dyn Write,
) -> CliResult<()> {
    let sentences = read_sentences(corpus_path)?;
    let vocab = match vocab_path {
        Some(p) => Vocabulary::load(p)?,
        None => {
            Vocabulary::build(sentences.iter().flatten(), min_count).map_err(densem::Error::from)?
        }
    };
    let corpus = Corpus::encode(&sentences, &vocab);
    let mut stderr = std::io::stderr();
    let trained = train(&corpus, &vocab, config, &mut |epoch, objective| {
        let _ = writeln!(stderr, "{epoch}\t{objective}");
    })
    .map_err(densem::Error::from)?;

    create_dir(dir)?;
    vocab.save(&dir.join(VOCAB_FILE))?;
    let written = match &trained.model {
        TrainedModel::Vectors(table) => {
            WordVectors::from_table(table, &vocab).save(&dir.join(VECTORS_FILE))?;
            vec![VECTORS_FILE]
        }
        TrainedModel::Senses(table) => {
            save_sense_table(table, &vocab, &dir.join(SENSES_FILE))?;
            density_store(table, &vocab)?.save(&dir.join(DM_FILE), dtype)?;
            vec![SENSES_FILE, DM_FILE]
        }
    };
    let log = TrainLog {
        config,
        vocab_size: vocab.len(),
        tokens: corpus.token_count(),
        epoch_objectives: &trained.epoch_objectives,
    };
    write_json(&dir.join(TRAIN_LOG_FILE), &log)?;
    let last = trained.epoch_objectives.last().copied().unwrap_or(f64::NAN);
    say!(
        out,
        "trained {} on {} tokens ({} types), final mean objective {last:.6}; wrote {} in {}",
        config.variant.name(),
        corpus.token_count(),
        vocab.len(),
        written.join(", "),
        dir.display()
    )
}

fn run_compose(
    model: &Path,
    config: &ComposeConfig,
    tokens: &[Token],
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<()> {
    let store = load_store(model)?;
    let fragment = Fragment::new(tokens.to_vec());
    let reduction = Lexicon::default()
        .check(&fragment)
        .map_err(densem::Error::from)?;
    let composed = compose_fragment(&fragment, &store, config).map_err(densem::Error::from)?;
    let residual: Vec<String> = reduction.residual.iter().map(ToString::to_string).collect();
    say!(out, "fragment: {}", fragment.text())?;
    say!(
        out,
        "grammatical: {} (reduces to {})",
        reduction.grammatical,
        residual.join(" ")
    )?;
    say!(out, "method: {}", config.method)?;
    say!(out, "entropy: {:.6}", composed.entropy())?;
    let mut values: Vec<f64> = composed.eigen().eigenvalues.to_vec();
    values.sort_by(|a, b| b.total_cmp(a));
    let shown: Vec<String> = values.iter().take(10).map(|v| format!("{v:.6}")).collect();
    say!(out, "eigenvalues: {}", shown.join(" "))?;
    if let Some(path) = path {
        let mut single = DensityStore::new(composed.dim());
        single
            .insert(fragment.text(), composed)
            .map_err(densem::Error::from)?;
        single.save(path, Dtype::F64)?;
        say!(out, "composed matrix -> {}", path.display())?;
    }
    Ok(())
}

fn summarize(evaluation: &Evaluation, out: &mut dyn Write) -> CliResult<()> {
    let f = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
    for r in &evaluation.reports {
        let side = r
            .operator_side
            .as_deref()
            .map(|s| format!(" ({s} operator)"))
            .unwrap_or_default();
        say!(
            out,
            "{} {}{} [{}]: rho {} accuracy {} pairs {}/{} excluded {}",
            r.form,
            r.method,
            side,
            r.sim,
            f(r.rho),
            f(r.accuracy),
            r.n_pairs_used,
            r.n_pairs_total,
            r.n_excluded
        )?;
    }
    Ok(())
}
