use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dbar_core::cauchy::{domain_mask, pompeiu, pompeiu_on_grid, QuadratureConfig};
use dbar_core::domain::CompactDomain;
use dbar_core::expr::ComplexExpr;
use dbar_core::field::SampledField;
use dbar_core::{Execution, C64};

fn field(h: f64, exec: Execution) -> SampledField {
    let mask = domain_mask(&CompactDomain::unit_disk(), h).unwrap();
    SampledField::from_expr(mask, &ComplexExpr::parse("mul(exp(z), zbar)").unwrap(), exec).unwrap()
}

fn grid_transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("pompeiu_fft");
    group.sample_size(10);
    for h in [1.0 / 64.0, 1.0 / 128.0] {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let f = field(h, exec);
            let cfg = QuadratureConfig::default().with_execution(exec);
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), 1.0 / h), &f, |b, f| {
                b.iter(|| pompeiu_on_grid(f, &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn direct_sum(c: &mut Criterion) {
    let mut group = c.benchmark_group("pompeiu_direct");
    group.sample_size(10);
    let targets: Vec<C64> = (0..256).map(|k| C64::from_polar(0.9 * (k as f64 / 256.0).sqrt(), 2.4 * k as f64)).collect();
    for exec in [Execution::Sequential, Execution::Parallel] {
        let f = field(1.0 / 64.0, exec);
        let cfg = QuadratureConfig::default().with_execution(exec);
        group.bench_function(format!("{exec:?}"), |b| b.iter(|| pompeiu(&f, &targets, &cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, grid_transform, direct_sum);
criterion_main!(benches);
