use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::score::{score_model, Exclusion, Scores, SentenceModel, TripleScore};
use super::stats::{change_matrix, paraphrase_accuracy, spearman_rho, ChangeMatrix};
use super::Triple;
use crate::compose::{ComposeConfig, Form, Method};
use crate::error::{Error, Result};
use crate::io;
use crate::linalg::SimMode;

/// Entropies at or below this count as zero when forming ratios.
const ZERO_ENTROPY: f64 = 1e-12;

/// Composed over verb entropy: `1` when both are zero, `None` when only the verb's is.
pub fn entropy_ratio(verb: f64, composed: f64) -> Option<f64> {
    match (verb <= ZERO_ENTROPY, composed <= ZERO_ENTROPY) {
        (true, true) => Some(1.0),
        (true, false) => None,
        _ => Some(composed / verb),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub method: String,
    pub operator_side: Option<String>,
    pub include_function_words: bool,
    pub sim: String,
    pub form: String,
    pub n_triples: usize,
    pub n_pairs_total: usize,
    pub n_pairs_used: usize,
    pub n_excluded: usize,
    /// Pooled over apt and inapt pairs; `None` when undefined.
    pub rho: Option<f64>,
    pub rho_apt: Option<f64>,
    pub rho_inapt: Option<f64>,
    pub accuracy: Option<f64>,
    pub mean_entropy_verb: Option<f64>,
    pub mean_entropy_composed: Option<f64>,
    pub entropy_ratio: Option<f64>,
    pub change_matrix: Option<ChangeMatrix>,
    pub excluded: Vec<Exclusion>,
    pub scores: Vec<TripleScore>,
}

/// Reports for every method and form of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub reports: Vec<EvalReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub method: String,
    pub operator_side: Option<String>,
    pub form: String,
    pub n_used: usize,
    pub mean_entropy_verb: Option<f64>,
    pub mean_entropy_composed: Option<f64>,
    pub entropy_ratio: Option<f64>,
}

impl From<&EvalReport> for EntropyRow {
    fn from(r: &EvalReport) -> Self {
        Self {
            method: r.method.clone(),
            operator_side: r.operator_side.clone(),
            form: r.form.clone(),
            n_used: r.n_pairs_used / 2,
            mean_entropy_verb: r.mean_entropy_verb,
            mean_entropy_composed: r.mean_entropy_composed,
            entropy_ratio: r.entropy_ratio,
        }
    }
}

fn mean(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let mut n = 0usize;
    let mut sum = 0.0;
    for x in xs {
        sum += x?;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

struct Labels {
    model: String,
    method: String,
    operator_side: Option<String>,
    include_function_words: bool,
    sim: String,
}

fn build_report(
    labels: &Labels,
    form: &str,
    n_triples: usize,
    scores: &Scores,
    baseline: Option<&Scores>,
) -> EvalReport {
    let rows = &scores.rows;
    let mut sims = Vec::with_capacity(rows.len() * 2);
    let mut human = Vec::with_capacity(rows.len() * 2);
    for r in rows {
        sims.extend([r.sim_apt, r.sim_inapt]);
        human.extend([r.human_apt, r.human_inapt]);
    }
    let apt: (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r.sim_apt, r.human_apt)).unzip();
    let inapt: (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r.sim_inapt, r.human_inapt)).unzip();
    let mean_entropy_verb = mean(rows.iter().map(|r| r.entropy_verb));
    let mean_entropy_composed = mean(rows.iter().map(|r| r.entropy_composed));
    EvalReport {
        model: labels.model.clone(),
        method: labels.method.clone(),
        operator_side: labels.operator_side.clone(),
        include_function_words: labels.include_function_words,
        sim: labels.sim.clone(),
        form: form.to_string(),
        n_triples,
        n_pairs_total: 2 * n_triples,
        n_pairs_used: 2 * rows.len(),
        n_excluded: scores.excluded.len(),
        rho: spearman_rho(&sims, &human).ok(),
        rho_apt: spearman_rho(&apt.0, &apt.1).ok(),
        rho_inapt: spearman_rho(&inapt.0, &inapt.1).ok(),
        accuracy: paraphrase_accuracy(rows).ok(),
        mean_entropy_verb,
        mean_entropy_composed,
        entropy_ratio: mean_entropy_verb
            .zip(mean_entropy_composed)
            .and_then(|(v, c)| entropy_ratio(v, c)),
        change_matrix: baseline.and_then(|b| change_matrix(rows, &b.rows).ok()),
        excluded: scores.excluded.clone(),
        scores: rows.clone(),
    }
}

fn split_by_form(triples: &[Triple]) -> Vec<(Form, Vec<Triple>)> {
    let forms: BTreeSet<Form> = triples.iter().map(|t| t.form).collect();
    forms
        .into_iter()
        .map(|f| (f, triples.iter().filter(|t| t.form == f).cloned().collect()))
        .collect()
}

/// Scores each configuration against the triples, one report per
/// configuration and dataset form, with a verb-only baseline for the change matrix.
pub fn evaluate<M: SentenceModel>(
    triples: &[Triple],
    model: &M,
    model_id: &str,
    configs: &[ComposeConfig],
    sim: SimMode,
    sim_label: &str,
) -> Result<Evaluation> {
    let mut reports = Vec::new();
    for (form, subset) in split_by_form(triples) {
        let include = configs.first().is_some_and(|c| c.include_function_words);
        let base_cfg = ComposeConfig {
            include_function_words: include,
            ..ComposeConfig::new(Method::VerbOnly)
        };
        let baseline = score_model(&subset, model, &base_cfg, sim)?;
        for cfg in configs {
            let scores = if *cfg == base_cfg {
                baseline.clone()
            } else {
                score_model(&subset, model, cfg, sim)?
            };
            let labels = Labels {
                model: model_id.to_string(),
                method: cfg.method.name().to_string(),
                operator_side: cfg
                    .method
                    .uses_operator_side()
                    .then(|| cfg.operator_side.name().to_string()),
                include_function_words: cfg.include_function_words,
                sim: sim_label.to_string(),
            };
            reports.push(build_report(
                &labels,
                form.name(),
                subset.len(),
                &scores,
                Some(&baseline),
            ));
        }
    }
    Ok(Evaluation { reports })
}

#[derive(Debug, Deserialize)]
struct ExternalRow {
    id: String,
    sim_apt: f64,
    sim_inapt: f64,
}

/// Reads precomputed similarities from a CSV with header `id,sim_apt,sim_inapt`.
pub fn import_scores(path: &Path) -> Result<HashMap<String, (f64, f64)>> {
    let text = io::read_to_string(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = HashMap::new();
    for (i, rec) in reader.deserialize::<ExternalRow>().enumerate() {
        let row = rec.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
        if !row.sim_apt.is_finite() || !row.sim_inapt.is_finite() {
            return Err(Error::parse(path, i + 2, "non-finite similarity"));
        }
        if out
            .insert(row.id.clone(), (row.sim_apt, row.sim_inapt))
            .is_some()
        {
            return Err(Error::parse(
                path,
                i + 2,
                format!("duplicate id `{}`", row.id),
            ));
        }
    }
    Ok(out)
}

/// Reports for externally computed similarities; triples without a score are
/// excluded as `missing_score`.
pub fn scores_from_external(
    triples: &[Triple],
    external: &HashMap<String, (f64, f64)>,
    model_id: &str,
) -> Evaluation {
    let labels = Labels {
        model: model_id.to_string(),
        method: "external".into(),
        operator_side: None,
        include_function_words: false,
        sim: "external".into(),
    };
    let reports = split_by_form(triples)
        .into_iter()
        .map(|(form, subset)| {
            let mut scores = Scores::default();
            for t in &subset {
                match external.get(&t.id) {
                    Some(&(a, i)) => scores.rows.push(TripleScore {
                        id: t.id.clone(),
                        form: t.form,
                        sim_apt: a,
                        sim_inapt: i,
                        human_apt: t.human.apt,
                        human_inapt: t.human.inapt,
                        entropy_verb: None,
                        entropy_composed: None,
                    }),
                    None => scores.excluded.push(Exclusion {
                        id: t.id.clone(),
                        reason: "missing_score".into(),
                    }),
                }
            }
            build_report(&labels, form.name(), subset.len(), &scores, None)
        })
        .collect();
    Evaluation { reports }
}

/// One CSV row per report.
pub fn report_csv(reports: &[EvalReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "model",
        "method",
        "operator_side",
        "sim",
        "form",
        "n_used",
        "n_total",
        "n_excluded",
        "rho",
        "accuracy",
        "entropy_verb",
        "entropy_composed",
        "entropy_ratio",
    ])
    .expect("writing to memory");
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in reports {
        w.write_record([
            r.model.clone(),
            r.method.clone(),
            r.operator_side.clone().unwrap_or_default(),
            r.sim.clone(),
            r.form.clone(),
            r.n_pairs_used.to_string(),
            r.n_pairs_total.to_string(),
            r.n_excluded.to_string(),
            opt(r.rho),
            opt(r.accuracy),
            opt(r.mean_entropy_verb),
            opt(r.mean_entropy_composed),
            opt(r.entropy_ratio),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is utf-8")
}
