//! Parallel against sequential evaluation: whole corpus runs with one worker
//! or one per core, and the generalization of a long refuted trace on a
//! one-thread pool or the global pool.
//!
//! `cargo bench -p traceai-core` compares both inside the parallel build;
//! with `--no-default-features` every batch is sequential.

use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use traceai::expr::Statement;
use traceai::frontend::{compile, parse_statement};
use traceai::harness::{corpus_files, run_files, BenchOptions, Setting};
use traceai::linsolve::Solver;
use traceai::refine::{analyze_trace, automaton_from_sequence, TraceAnalysis};

const P1: &str = "var x, y;
x := 0; y := 42;
while (x < 100) {
  x := x + 1;
  while (y <= 0) { y := 42; }
}
assert(x == 100 && y == 42);";

fn cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn corpus(c: &mut Criterion) {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let files = corpus_files(&dir).unwrap();
    let settings = vec![Setting::parse("comp").unwrap()];
    let mut group = c.benchmark_group("corpus_comp");
    group.sample_size(10);
    for (name, jobs) in [("sequential", 1), ("parallel", cores())] {
        let opts = BenchOptions {
            jobs,
            ..BenchOptions::default()
        };
        group.bench_with_input(BenchmarkId::new(name, jobs), &opts, |b, opts| {
            b.iter(|| run_files(&files, &settings, opts))
        });
    }
    group.finish();
}

/// The running example's trace through `k` iterations of the outer loop.
fn unrolled(k: usize) -> Vec<Statement> {
    let mut w = vec!["x := 0; y := 42"];
    for _ in 0..k {
        w.extend(["assume(x < 100)", "x := x + 1", "assume(y > 0)"]);
    }
    w.extend(["assume(x >= 100)", "assume(x != 100 || y != 42)"]);
    w.iter().map(|s| parse_statement(s).unwrap()).collect()
}

fn sequence_automaton(c: &mut Criterion) {
    let alphabet = compile(P1).unwrap().alphabet();
    let solver = Solver::default();
    let trace = unrolled(12);
    let TraceAnalysis::Infeasible(seq) = analyze_trace(&trace, &solver) else {
        panic!("trace is feasible")
    };
    let mut group = c.benchmark_group("sequence_automaton");
    group.sample_size(20);
    for (name, threads) in [("sequential", 1), ("parallel", cores())] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        group.bench_function(BenchmarkId::new(name, threads), |b| {
            b.iter(|| pool.install(|| automaton_from_sequence(&trace, &seq, &alphabet, &solver)))
        });
    }
    group.finish();
}

criterion_group!(benches, corpus, sequence_automaton);
criterion_main!(benches);
