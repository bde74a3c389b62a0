//! Sequential vs rayon execution of the batch operations.
//!
//! `cargo bench -p absa-core --bench parallel`

use std::collections::BTreeMap;

use absa_core::augment::{target_swap, AspectCategoryMap};
use absa_core::baseline::train_tagger;
use absa_core::ensemble::median_ensemble;
use absa_core::tagging::{encode_corpus, AlignmentPolicy};
use absa_core::toy::{generate, ASPECTS};
use absa_core::Exec;
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn bench(c: &mut Criterion) {
    let corpus = generate(2000, 1);
    let seqs = encode_corpus(&corpus, AlignmentPolicy::Expand, Exec::Sequential).unwrap();
    let taggers: Vec<_> = (0..5)
        .map(|s| train_tagger(&seqs[..200], 3, s).unwrap())
        .collect();
    let preds: Vec<_> = taggers
        .iter()
        .enumerate()
        .map(|(i, t)| {
            t.ate_prediction(&format!("m{i}"), &corpus, Exec::default())
                .unwrap()
        })
        .collect();
    let map = AspectCategoryMap::new(BTreeMap::from([(
        "all".to_string(),
        ASPECTS.iter().map(|(t, _)| t.to_string()).collect(),
    )]))
    .unwrap();

    let mut g = c.benchmark_group("batch");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("encode_corpus", name), &exec, |b, &e| {
            b.iter(|| encode_corpus(black_box(&corpus), AlignmentPolicy::Expand, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("median_ensemble", name), &exec, |b, &e| {
            b.iter(|| median_ensemble(black_box(&preds), e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("target_swap", name), &exec, |b, &e| {
            b.iter(|| target_swap(black_box(&corpus), &map, 3, 0, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("tagger_predict", name), &exec, |b, &e| {
            b.iter(|| taggers[0].ate_records("m0", black_box(&corpus), e))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
