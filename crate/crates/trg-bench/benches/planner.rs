//! Criterion benchmarks for graph construction, maintenance, and search.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use trg_core::manage::update_cycle;
use trg_core::plan::plan;
use trg_core::sim::{generate_terrain, TerrainSpec};
use trg_core::{build_trg, LocalUpdateParams, PlanQuery, TrgParams};

fn bench_terrain() -> trg_core::ElevationMap {
    let spec = TerrainSpec {
        size_m: [20.0, 20.0],
        resolution_m: 0.1,
        relief_m: 0.6,
        roughness: 0.5,
        features: Vec::new(),
        seed: 9,
    };
    generate_terrain(&spec).unwrap()
}

fn bench_build(c: &mut Criterion) {
    let map = bench_terrain();
    let params = TrgParams::default();
    c.bench_function("build_trg_20m", |b| {
        b.iter(|| build_trg(black_box(&map), [10.0, 10.0], &params, 3).unwrap())
    });
}

fn bench_plan(c: &mut Criterion) {
    let map = bench_terrain();
    let params = TrgParams::default();
    let graph = build_trg(&map, [10.0, 10.0], &params, 3).unwrap();
    let query = PlanQuery::new([2.0, 2.0], [18.0, 18.0], 3.0);
    c.bench_function("plan_20m_balanced", |b| {
        b.iter(|| plan(black_box(&graph), &map, &params, &query).unwrap())
    });
}

fn bench_update_cycle(c: &mut Criterion) {
    let map = bench_terrain();
    let params = TrgParams::default();
    let local = LocalUpdateParams::default();
    let graph = build_trg(&map, [10.0, 10.0], &params, 3).unwrap();
    c.bench_function("update_cycle_20m", |b| {
        b.iter_batched(
            || graph.clone(),
            |mut g| update_cycle(&mut g, black_box(&map), [10.0, 10.0], &params, &local, 4),
            criterion::BatchSize::LargeInput,
        )
    });
}

criterion_group!(benches, bench_build, bench_plan, bench_update_cycle);
criterion_main!(benches);
