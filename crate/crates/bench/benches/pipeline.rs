use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use relprop::bayes::SubsetScorer;
use relprop::fixture::{t1, T1_MAX_LENGTH, T1_MIN_SUPPORT};
use relprop::grasp::{grasp_fs, GraspConfig};
use relprop::miner::{mine, MiningConfig};
use relprop::parse::parse_query;
use relprop::propmat::build_matrix;
use relprop::subsume::MatchIndex;
use relprop_bench::graph_dataset;

fn subsumption(c: &mut Criterion) {
    let (d, _) = graph_dataset(200, 10, 16, 7);
    let index = MatchIndex::from_examples(d.examples());
    let q = parse_query("red(K,A), edge(K,A,B), edge(K,B,A), edge(K,B,C)").unwrap();
    let cq = index.compile(&q);
    c.bench_function("subsume/200 graphs, 4 atoms", |b| {
        b.iter(|| (0..index.len()).filter(|&k| index.matches(black_box(&cq), k)).count())
    });
}

fn mining(c: &mut Criterion) {
    let (d, bias) = t1();
    let cfg = MiningConfig { min_support: T1_MIN_SUPPORT, max_length: T1_MAX_LENGTH, bias };
    c.bench_function("mine/t1", |b| b.iter(|| mine(black_box(&d), &cfg).unwrap()));

    let (d, bias) = graph_dataset(100, 8, 12, 3);
    let cfg = MiningConfig { min_support: 0.2, max_length: 3, bias };
    c.bench_function("mine/graphs len 3", |b| b.iter(|| mine(black_box(&d), &cfg).unwrap()));
}

fn selection(c: &mut Criterion) {
    let (d, bias) = t1();
    let f = mine(&d, &MiningConfig { min_support: T1_MIN_SUPPORT, max_length: T1_MAX_LENGTH, bias }).unwrap();
    let m = build_matrix(&d, &f);
    let cfg = GraspConfig { maxiter: 100, seed: 1, ..GraspConfig::default() };
    c.bench_function("grasp/t1 100 iterations", |b| b.iter(|| grasp_fs(black_box(&m), &cfg).unwrap()));

    let (d, bias) = graph_dataset(200, 8, 12, 5);
    let f = mine(&d, &MiningConfig { min_support: 0.1, max_length: 3, bias }).unwrap();
    let m = build_matrix(&d, &f);
    let scorer = SubsetScorer::new(&m, 1.0).unwrap();
    let subset: Vec<usize> = (0..m.cols()).step_by(3).collect();
    c.bench_function("err/graphs subset", |b| b.iter(|| scorer.err(black_box(&subset)).unwrap()));
    let cfg = GraspConfig { maxiter: 10, seed: 1, ..GraspConfig::default() };
    c.bench_function("grasp/graphs 10 iterations", |b| b.iter(|| grasp_fs(black_box(&m), &cfg).unwrap()));
}

criterion_group!(benches, subsumption, mining, selection);
criterion_main!(benches);
