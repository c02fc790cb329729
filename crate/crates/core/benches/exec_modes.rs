//! Sequential vs data-parallel execution of the hot loops.

use std::hint::black_box;

use brmotif_core::background::{scramble_with, ScrambleMode};
use brmotif_core::corpus::{planted_corpus, CorpusSpec};
use brmotif_core::engine::{count_kmers_with, discover_with, EngineConfig};
use brmotif_core::subsample::{generate_replicates_with, SubsampleSpec};
use brmotif_core::Exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn corpus() -> brmotif_core::corpus::Corpus {
    planted_corpus(&CorpusSpec {
        sequences: 200,
        length: 500,
        seed: 1,
        ..Default::default()
    })
}

fn bench_count(c: &mut Criterion) {
    let corpus = corpus();
    let mut group = c.benchmark_group("count_kmers_k12");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| count_kmers_with(black_box(&corpus.target), 12, true, exec))
        });
    }
    group.finish();
}

fn bench_discover(c: &mut Criterion) {
    let corpus = corpus();
    let cfg = EngineConfig::default();
    let mut group = c.benchmark_group("discover_100kbp");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| discover_with(black_box(&corpus.target), &corpus.background, &cfg, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_replicates(c: &mut Criterion) {
    let corpus = corpus();
    let spec = SubsampleSpec::new(25, 8, 3).unwrap();
    let mut group = c.benchmark_group("replicates_8x25pct");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| generate_replicates_with(black_box(&corpus.target), &spec, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_scramble(c: &mut Criterion) {
    let corpus = corpus();
    let mut group = c.benchmark_group("scramble_dinucleotide");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| scramble_with(black_box(&corpus.target), 7, ScrambleMode::Dinucleotide, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_count, bench_discover, bench_replicates, bench_scramble);
criterion_main!(benches);
