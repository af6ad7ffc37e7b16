use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::CommandFactory;
use densem::compose::{Method, OperatorSide};
use densem::eval::Evaluation;
use densem::train::{SenseMetric, Variant};
use densem::{DensityStore, SimMode};
use densem_cli::{parse_invocation, Cli, CliError, EvalSource, RunPlan};
use tempfile::TempDir;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn argv<'a>(args: &[&'a str]) -> Vec<&'a str> {
    std::iter::once("densem")
        .chain(args.iter().copied())
        .collect()
}

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = densem_cli::run(argv(args), &mut out);
    (code, String::from_utf8(out).unwrap())
}

/// Scratch dir holding a corpus, a dataset and an empty model dir.
fn workspace() -> (TempDir, PathBuf, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    let dataset = dir.path().join("t.jsonl");
    let model = dir.path().join("m");
    std::fs::copy(fixtures().join("toy_corpus.txt"), &corpus).unwrap();
    std::fs::copy(fixtures().join("toy_dataset.jsonl"), &dataset).unwrap();
    std::fs::create_dir(&model).unwrap();
    (dir, corpus, dataset, model)
}

#[test]
fn train_plan_from_flags() {
    let (dir, corpus, _, _) = workspace();
    let out = dir.path().join("m2");
    let plan = parse_invocation(argv(&[
        "train",
        "--variant",
        "ms_word2dm",
        "--senses",
        "10",
        "--metric",
        "euclidean",
        "--dim",
        "50",
        "--corpus",
        s(&corpus),
        "--out",
        s(&out),
    ]))
    .unwrap();
    let RunPlan::Train {
        config,
        out: got_out,
        ..
    } = plan
    else {
        panic!("{plan:?}")
    };
    assert_eq!(config.variant, Variant::MsWord2dm);
    assert_eq!((config.senses, config.dim, config.threads), (10, 50, 1));
    assert_eq!(config.sense_metric, SenseMetric::Euclidean);
    assert_eq!(got_out, out);
}

#[test]
fn operator_side_conflicts_with_add() {
    let (_dir, _, _, model) = workspace();
    let err = parse_invocation(argv(&[
        "compose",
        "--model",
        s(&model),
        "--method",
        "add",
        "--operator-side",
        "noun",
        "--tokens",
        "dog:subj",
        "run:verb",
    ]))
    .unwrap_err();
    assert!(matches!(err, CliError::Usage(_)), "{err:?}");
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn eval_plan_with_noun_operator_fuzz() {
    let (dir, _, dataset, model) = workspace();
    let report = dir.path().join("r.json");
    let plan = parse_invocation(argv(&[
        "eval",
        "--dataset",
        s(&dataset),
        "--model",
        s(&model),
        "--method",
        "fuzz",
        "--operator-side",
        "noun",
        "--sim",
        "trace",
        "--report",
        s(&report),
    ]))
    .unwrap();
    let RunPlan::Eval {
        source,
        configs,
        sim,
        report: r,
        model_id,
        ..
    } = plan
    else {
        panic!("{plan:?}")
    };
    assert_eq!(source, EvalSource::Model(model));
    assert_eq!(configs.len(), 1);
    assert_eq!(configs[0].method, Method::Fuzz);
    assert_eq!(configs[0].operator_side, OperatorSide::Noun);
    assert_eq!(sim, SimMode::Trace);
    assert_eq!(r, report);
    assert_eq!(model_id, "m");
}

#[test]
fn every_subcommand_documents_every_flag() {
    let cmd = Cli::command();
    for sub in cmd.get_subcommands() {
        let name = sub.get_name().to_string();
        let (code, help) = run(&[&name, "--help"]);
        assert_eq!(code, 0, "{name} --help");
        for arg in sub.get_arguments() {
            if let Some(long) = arg.get_long() {
                assert!(
                    help.contains(&format!("--{long}")),
                    "{name}: --{long} missing from help"
                );
                if long != "help" && long != "version" {
                    assert!(
                        arg.get_help().is_some(),
                        "{name}: --{long} has no description"
                    );
                }
            }
        }
    }
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn unknown_flags_and_missing_inputs() {
    let (dir, corpus, _, _) = workspace();
    let out = dir.path().join("v.tsv");
    assert_eq!(
        run(&["vocab", "--corpus", s(&corpus), "--out", s(&out), "--bogus"]).0,
        1
    );
    assert_eq!(run(&["vocab", "--out", s(&out)]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(
        run(&[
            "vocab",
            "--corpus",
            s(&dir.path().join("absent.txt")),
            "--out",
            s(&out)
        ])
        .0,
        2
    );
    assert!(!out.exists());
}

#[test]
fn toy_pipeline_end_to_end() {
    let start = Instant::now();
    let (dir, corpus, dataset, _) = workspace();
    let model = dir.path().join("model");
    let report = dir.path().join("report.json");
    let train = [
        "train",
        "--corpus",
        s(&corpus),
        "--out",
        s(&model),
        "--variant",
        "ms_word2dm",
        "--dim",
        "20",
        "--senses",
        "5",
        "--window",
        "2",
        "--subsample",
        "off",
        "--seed",
        "1",
    ];
    assert_eq!(run(&train).0, 0);
    let (code, summary) = run(&[
        "eval",
        "--dataset",
        s(&dataset),
        "--model",
        s(&model),
        "--method",
        "add,mult,fuzz,phaser",
        "--report",
        s(&report),
    ]);
    assert_eq!(code, 0);
    assert!(!summary.is_empty());
    let ev: Evaluation = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(ev.reports.len(), 4);
    assert!(ev
        .reports
        .iter()
        .all(|r| r.n_excluded == 0 && r.n_pairs_used == 24));

    let (code, out) = run(&["inspect", "--model", s(&model), "--word", "grasp"]);
    assert_eq!(code, 0);
    assert!(out.contains("grasp"));
    assert_eq!(
        run(&["inspect", "--model", s(&model), "--word", "zzz"]).0,
        2
    );
    let (code, out) = run(&["entropy", "--dataset", s(&dataset), "--model", s(&model)]);
    assert_eq!(code, 0);
    assert!(out.contains("phaser"));
    let (code, out) = run(&[
        "compose",
        "--model",
        s(&model),
        "--method",
        "phaser",
        "--tokens",
        "student:subj",
        "grasp:verb",
        "idea:obj",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn missing_lemma_is_reported_not_fatal() {
    let (dir, corpus, dataset, _) = workspace();
    let model = dir.path().join("model");
    assert_eq!(
        run(&[
            "train",
            "--corpus",
            s(&corpus),
            "--out",
            s(&model),
            "--dim",
            "8",
            "--senses",
            "2",
            "--epochs",
            "1"
        ])
        .0,
        0
    );
    let full = DensityStore::load(&model.join("dm.json")).unwrap();
    let mut pruned = DensityStore::new(full.dim());
    for (w, m) in full.iter().filter(|(w, _)| *w != "idea") {
        pruned.insert(w, m.clone()).unwrap();
    }
    let store = dir.path().join("pruned.json");
    pruned.save(&store, densem::io::Dtype::F64).unwrap();
    let report = dir.path().join("r.json");
    let (code, _) = run(&[
        "eval",
        "--dataset",
        s(&dataset),
        "--model",
        s(&store),
        "--report",
        s(&report),
    ]);
    assert_eq!(code, 0);
    let ev: Evaluation = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(ev.reports[0].n_excluded, 1);
    assert_eq!(ev.reports[0].excluded[0].reason, "oov:idea");
}

#[test]
fn vector_models_train_and_evaluate() {
    let (dir, corpus, dataset, _) = workspace();
    let model = dir.path().join("vec");
    let report = dir.path().join("r.json");
    assert_eq!(
        run(&[
            "train",
            "--corpus",
            s(&corpus),
            "--out",
            s(&model),
            "--variant",
            "sgns",
            "--dim",
            "8",
            "--epochs",
            "1"
        ])
        .0,
        0
    );
    assert!(model.join("vectors.txt").exists());
    let (code, _) = run(&[
        "eval",
        "--dataset",
        s(&dataset),
        "--model",
        s(&model),
        "--method",
        "add,mult",
        "--report",
        s(&report),
    ]);
    assert_eq!(code, 0);
    let (code, _) = run(&[
        "eval",
        "--dataset",
        s(&dataset),
        "--model",
        s(&model),
        "--method",
        "fuzz",
        "--report",
        s(&report),
    ]);
    assert_ne!(code, 0);
}

#[test]
fn sense_induction_commands_write_stores() {
    let (dir, corpus, _, _) = workspace();
    let vec = dir.path().join("vec");
    assert_eq!(
        run(&[
            "train",
            "--corpus",
            s(&corpus),
            "--out",
            s(&vec),
            "--variant",
            "sgns",
            "--dim",
            "8",
            "--epochs",
            "1"
        ])
        .0,
        0
    );
    let ctx = dir.path().join("ctx");
    let (code, out) = run(&[
        "context2dm",
        "--corpus",
        s(&corpus),
        "--vectors",
        s(&vec.join("vectors.txt")),
        "--out",
        s(&ctx),
        "--words",
        "grasp,idea",
    ]);
    assert_eq!(code, 0, "{out}");
    let store = DensityStore::load(&ctx.join("dm.json")).unwrap();
    assert_eq!(store.words(), ["grasp", "idea"]);

    let instances = dir.path().join("inst.jsonl");
    let mut lines = String::new();
    for i in 0..6 {
        let x = i as f64;
        lines += &format!(
            "{{\"word\":\"bank\",\"vector\":[{},{},0.5]}}\n",
            1.0 + x,
            if i % 2 == 0 { 1.0 } else { -1.0 }
        );
        lines += &format!(
            "{{\"word\":\"river\",\"vector\":[0.2,{},{}]}}\n",
            x,
            2.0 - x
        );
    }
    std::fs::write(&instances, lines).unwrap();
    let cdir = dir.path().join("contextual");
    let (code, out) = run(&[
        "contextual2dm",
        "--instances",
        s(&instances),
        "--out",
        s(&cdir),
        "--method",
        "svd",
        "--dim",
        "2",
    ]);
    assert_eq!(code, 0, "{out}");
    let store = DensityStore::load(&cdir.join("dm.json")).unwrap();
    assert_eq!((store.len(), store.dim()), (2, 2));
    assert_eq!(
        run(&[
            "contextual2dm",
            "--instances",
            s(&instances),
            "--out",
            s(&cdir),
            "--dim",
            "9"
        ])
        .0,
        2,
        "d_out above the input dimension"
    );
}
