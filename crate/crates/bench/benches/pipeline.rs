//! Criterion benchmarks for the hot paths: max-flow labeling, neighborhood
//! construction, and full line-scene runs.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use gcransac::engine::{build_problem_graph, run_with_method, Method};
use gcransac::geometry::{ModelKind, Settings};
use gcransac::harness::{gen_line_scene, LineStyle};
use gcransac::maxflow::EnergyGraph;
use gcransac::neighborhood::build_neighborhood;
use gcransac::DataPoint;

fn random_chain_graph(nodes: usize, seed: u64) -> EnergyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graph = EnergyGraph::new(nodes);
    for p in 0..nodes {
        graph.add_term1(p, rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
    }
    for p in 0..nodes.saturating_sub(1) {
        let c01: f64 = rng.random_range(0.1..1.0);
        let c10: f64 = rng.random_range(0.1..1.0);
        let c00 = rng.random_range(0.0..=(c01 + c10));
        let c11 = rng.random_range(0.0..=(c01 + c10 - c00));
        graph.add_term2(p, p + 1, c00, c01, c10, c11).unwrap();
    }
    graph
}

fn bench_min_cut(c: &mut Criterion) {
    let graph = random_chain_graph(1000, 7);
    c.bench_function("min_cut_chain_1000", |b| {
        b.iter(|| black_box(&graph).min_cut())
    });
}

fn bench_neighborhood(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let points: Vec<DataPoint> = (0..2000)
        .map(|_| {
            DataPoint::correspondence(
                rng.random_range(0.0..600.0),
                rng.random_range(0.0..600.0),
                rng.random_range(0.0..600.0),
                rng.random_range(0.0..600.0),
            )
        })
        .collect();
    c.bench_function("build_neighborhood_2000x4d", |b| {
        b.iter(|| build_neighborhood(black_box(&points), 20.0).unwrap())
    });
}

fn bench_problem_graph(c: &mut Criterion) {
    let scene = gen_line_scene(LineStyle::Straight, 2.0, 500, 5);
    let settings = Settings {
        epsilon: 4.0,
        ..Settings::default()
    };
    let neighborhood = build_neighborhood(&scene.points, settings.radius).unwrap();
    c.bench_function("problem_graph_and_cut_600pts", |b| {
        b.iter_batched(
            || (),
            |_| {
                let graph = build_problem_graph(
                    black_box(&scene.points),
                    &scene.ground_truth,
                    &neighborhood,
                    &settings,
                )
                .unwrap();
                graph.min_cut()
            },
            BatchSize::SmallInput,
        )
    });
}

fn bench_full_run(c: &mut Criterion) {
    let scene = gen_line_scene(LineStyle::Straight, 2.0, 100, 11);
    let settings = Settings {
        epsilon: 4.0,
        seed: 17,
        ..Settings::default()
    };
    c.bench_function("run_line_sigma2_100outliers", |b| {
        b.iter(|| {
            run_with_method(
                black_box(&scene.points),
                ModelKind::Line2D,
                &settings,
                Method::GraphCut,
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_min_cut,
    bench_neighborhood,
    bench_problem_graph,
    bench_full_run
);
criterion_main!(benches);
