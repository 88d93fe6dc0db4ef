use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bemap::graph::{generate_synthetic, khop_group_counts, SyntheticSpec};
use bemap::sampling::{compute_balance_table, NormMode, Sampler, SamplerMode};
use bemap::theory::{verify_theorem1, Theorem1Config};
use bemap::Exec;

const EXECS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn sampling(c: &mut Criterion) {
    let g = generate_synthetic(&SyntheticSpec::biased(5000, 1)).unwrap();
    let table = compute_balance_table(&g, 2, 1.0, Exec::default()).unwrap();
    let sampler = Sampler::new(&g, SamplerMode::Bemap, 0.25, NormMode::Row, Some(&table)).unwrap();
    let mut group = c.benchmark_group("sample_epoch");
    for (name, exec) in EXECS {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            let mut epoch = 0;
            b.iter(|| {
                epoch += 1;
                sampler.sample_epoch(7, epoch, exec)
            })
        });
    }
    group.finish();

    let mut group = c.benchmark_group("khop_group_counts");
    for (name, exec) in EXECS {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| khop_group_counts(&g, 2, exec))
        });
    }
    group.finish();
}

fn theory(c: &mut Criterion) {
    let cfg = Theorem1Config {
        trials: 64,
        ..Theorem1Config::default()
    };
    let mut group = c.benchmark_group("theorem1_trials");
    group.sample_size(10);
    for (name, exec) in EXECS {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| verify_theorem1(&cfg, 3, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sampling, theory);
criterion_main!(benches);
