use criterion::{criterion_group, criterion_main, Criterion};
use kdsum::bandwidth::{mscv_objective, select_bandwidths, OptimizerOptions};
use kdsum::{gen_sim, BandwidthVector, BoundsConfig, KernelSelection, SimSpec};

fn mscv(c: &mut Criterion) {
    let (ds, _) = gen_sim(&SimSpec::new(6, 1)).unwrap();
    let bw =
        BandwidthVector::new(vec![0.3, 0.3, 0.5, 0.2, 0.2], &ds, &BoundsConfig::default()).unwrap();
    c.bench_function("objective/sim6", |b| {
        b.iter(|| mscv_objective(&ds, &bw, KernelSelection::GAUSSIAN).unwrap())
    });

    let opts = OptimizerOptions {
        restarts: 0,
        ..Default::default()
    };
    let mut group = c.benchmark_group("select");
    group.sample_size(10);
    group.bench_function("sim6/single-start", |b| {
        b.iter(|| select_bandwidths(&ds, KernelSelection::GAUSSIAN, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, mscv);
criterion_main!(benches);
