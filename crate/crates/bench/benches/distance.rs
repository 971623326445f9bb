use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kdsum::baselines::{baseline_matrix, BaselineKind};
use kdsum::similarity::{build_matrix, SimilarityConfig};
use kdsum::{gen_sim, BandwidthVector, BoundsConfig, KernelSelection, SimSpec};

fn distance(c: &mut Criterion) {
    let mut group = c.benchmark_group("matrix");
    for per_cluster in [50, 200] {
        let spec = SimSpec {
            sim: 6,
            seed: 1,
            sizes: Some(vec![per_cluster, per_cluster]),
        };
        let (ds, _) = gen_sim(&spec).unwrap();
        let bw = BandwidthVector::new(vec![0.3, 0.3, 0.5, 0.2, 0.2], &ds, &BoundsConfig::default())
            .unwrap();
        let cfg = SimilarityConfig::new(&ds, KernelSelection::GAUSSIAN, bw).unwrap();
        group.bench_with_input(BenchmarkId::new("kdsum", ds.n()), &ds, |b, ds| {
            b.iter(|| build_matrix(ds, &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gower", ds.n()), &ds, |b, ds| {
            b.iter(|| baseline_matrix(ds, BaselineKind::Gower, None).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, distance);
criterion_main!(benches);
