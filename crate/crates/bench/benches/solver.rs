use criterion::{criterion_group, criterion_main, Criterion};
use gut_core::bench::{initial_world, ScenarioConfig};
use gut_core::gut::{build_pursuit_gut, decide, GutConfig};
use gut_core::matgame::{mixed_nash, BimatrixGame};
use std::hint::black_box;

fn games(c: &mut Criterion) {
    let bos = BimatrixGame::new(
        vec![vec![2.0, 0.0], vec![0.0, 1.0]],
        vec![vec![1.0, 0.0], vec![0.0, 2.0]],
    )
    .unwrap();
    c.bench_function("mixed_nash 2x2", |b| {
        b.iter(|| mixed_nash(black_box(&bos)).unwrap())
    });

    let rps = BimatrixGame::new(
        vec![
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
            vec![-1.0, 1.0, 0.0],
        ],
        vec![
            vec![0.0, 1.0, -1.0],
            vec![-1.0, 0.0, 1.0],
            vec![1.0, -1.0, 0.0],
        ],
    )
    .unwrap();
    c.bench_function("mixed_nash 3x3", |b| {
        b.iter(|| mixed_nash(black_box(&rps)).unwrap())
    });

    let cfg = ScenarioConfig {
        pursuer_count: 5,
        ..ScenarioConfig::default()
    };
    let world = initial_world(&cfg, 1).unwrap();
    let tree = build_pursuit_gut(&GutConfig::default()).unwrap();
    let params = cfg.utility_params();
    c.bench_function("decide 5v1", |b| {
        b.iter(|| decide(&tree, black_box(&world), &params, 0.6).unwrap())
    });
}

criterion_group!(benches, games);
criterion_main!(benches);
