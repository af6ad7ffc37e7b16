use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use densem::compose::{add, fuzz, mult, phaser, pregroup_reduce, PregroupType};
use densem::corpus::{Corpus, Vocabulary};
use densem::synthetic::planted_ambiguity_corpus;
use densem::train::{ms_gradient, sgns_gradient, train, ContextAgg, TrainConfig, Variant};
use densem::DensityMatrix;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
    let b = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    DensityMatrix::from_matrix(&b * b.transpose()).unwrap()
}

fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn operators(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut group = c.benchmark_group("compose");
    for d in [10, 50, 100] {
        let (a, b) = (random_density(&mut rng, d), random_density(&mut rng, d));
        group.bench_with_input(BenchmarkId::new("add", d), &d, |bn, _| {
            bn.iter(|| add(black_box(&a), &b))
        });
        group.bench_with_input(BenchmarkId::new("mult", d), &d, |bn, _| {
            bn.iter(|| mult(black_box(&a), &b))
        });
        group.bench_with_input(BenchmarkId::new("fuzz", d), &d, |bn, _| {
            bn.iter(|| fuzz(black_box(&a), &b))
        });
        group.bench_with_input(BenchmarkId::new("phaser", d), &d, |bn, _| {
            bn.iter(|| phaser(black_box(&a), &b))
        });
        group.bench_with_input(BenchmarkId::new("entropy", d), &d, |bn, _| {
            bn.iter(|| black_box(&a).entropy())
        });
    }
    group.finish();
}

fn gradients(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d = 100;
    let t = random_vec(&mut rng, d);
    let ctx: Vec<Vec<f64>> = (0..10).map(|_| random_vec(&mut rng, d)).collect();
    let negs: Vec<Vec<f64>> = (0..5).map(|_| random_vec(&mut rng, d)).collect();
    let ctx_refs: Vec<&[f64]> = ctx.iter().map(Vec::as_slice).collect();
    let neg_refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
    c.bench_function("sgns_gradient d=100 k=5", |b| {
        b.iter(|| sgns_gradient(black_box(&t), &ctx[0], &neg_refs))
    });
    c.bench_function("ms_gradient d=100 ctx=10 k=5", |b| {
        b.iter(|| ms_gradient(black_box(&t), &ctx_refs, ContextAgg::Sum, &neg_refs))
    });
}

fn training(c: &mut Criterion) {
    let sentences = planted_ambiguity_corpus(1, 20_000);
    let vocab = Vocabulary::build(sentences.iter().flatten(), 1).unwrap();
    let corpus = Corpus::encode(&sentences, &vocab);
    let mut group = c.benchmark_group("train 20k tokens");
    group.sample_size(10);
    for variant in [Variant::Sgns, Variant::MsWord2dm] {
        let config = TrainConfig {
            variant,
            dim: 20,
            senses: 5,
            epochs: 1,
            subsample: None,
            ..TrainConfig::default()
        };
        group.bench_function(format!("{variant:?}"), |b| {
            b.iter(|| train(&corpus, &vocab, &config, &mut |_, _| {}))
        });
    }
    group.finish();
}

fn pregroup(c: &mut Criterion) {
    let types: Vec<PregroupType> = ["n^l", "n", "n", "n^r s n^l", "n^l", "n", "n"]
        .iter()
        .cycle()
        .take(21)
        .map(|t| t.parse().unwrap())
        .collect();
    c.bench_function("pregroup_reduce 21 words", |b| {
        b.iter(|| pregroup_reduce(black_box(&types)))
    });
}

criterion_group!(benches, operators, gradients, training, pregroup);
criterion_main!(benches);
