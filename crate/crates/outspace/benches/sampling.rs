use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use outspace::folding::greedy_folding_path;
use outspace::par::{self, Mode};
use outspace::random::{random_optimal_map, rng};
use outspace::subfactor::{behrstock, BehrstockConfig};

fn folding_batch(c: &mut Criterion) {
    let maps: Vec<_> = (0..32u64).map(|s| random_optimal_map(3, 6, &mut rng(s))).collect();
    let mut group = c.benchmark_group("greedy_paths");
    group.sample_size(10);
    for mode in [Mode::Sequential, Mode::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &m| {
            b.iter(|| par::map(m, &maps, |phi| greedy_folding_path(phi).map(|p| p.events().len()).unwrap_or(0)))
        });
    }
    group.finish();
}

fn behrstock_small(c: &mut Criterion) {
    let cfg = BehrstockConfig { samples: 20, pool: 600, ..BehrstockConfig::default() };
    let mut group = c.benchmark_group("behrstock");
    group.sample_size(10);
    for mode in [Mode::Sequential, Mode::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &m| {
            b.iter(|| behrstock(&cfg, m).expect("report").triples.len())
        });
    }
    group.finish();
}

criterion_group!(benches, folding_batch, behrstock_small);
criterion_main!(benches);
