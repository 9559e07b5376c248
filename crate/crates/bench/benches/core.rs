use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use suplab_core::atkin_lehner::al_reduce;
use suplab_core::census::{enumerate_window, parabolic_sum, EnumWindow};
use suplab_core::pretrace::geometric_h;
use suplab_core::qseries::{eta_expand, load_form, petersson_norm, EtaQuotient};
use suplab_core::scan::{scan_sup, ScanGrid, ScanRect};
use suplab_core::HPoint;

fn census(c: &mut Criterion) {
    let z = HPoint::new(0.23, 0.41).unwrap();
    let w = EnumWindow::new(z, 6, 7, 30.0).unwrap();
    c.bench_function("enumerate_window N=6 l=7 delta=30", |b| b.iter(|| enumerate_window(black_box(&w)).unwrap()));
    c.bench_function("parabolic_sum N=5 l=4 k=4 tol=1e-8", |b| {
        b.iter(|| parabolic_sum(black_box(z), 5, 4, 4, 1e-8).unwrap())
    });
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("geometric_h N=5 k=4 delta=20", |b| b.iter(|| geometric_h(black_box(z), 5, 4, 20.0).unwrap()));
    g.finish();
}

fn reduction(c: &mut Criterion) {
    let z = HPoint::new(-3.7, 1e-3).unwrap();
    c.bench_function("al_reduce N=30 y=1e-3", |b| b.iter(|| al_reduce(black_box(z), 30).unwrap()));
}

fn forms(c: &mut Criterion) {
    let delta = EtaQuotient::parse("1:24").unwrap();
    c.bench_function("eta_expand delta M=2000", |b| b.iter(|| eta_expand(black_box(&delta), 2000).unwrap()));
    let f = load_form("5.4", 2000).unwrap();
    let z = HPoint::new(0.1, 0.05).unwrap();
    c.bench_function("eval 5.4 y=0.05 tol=1e-12", |b| b.iter(|| f.eval(black_box(z), 1e-12).unwrap()));
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("petersson_norm 5.4 tol=1e-6", |b| b.iter(|| petersson_norm(black_box(&f), 1e-6).unwrap()));
    let grid = ScanGrid { nx: 32, ny: 32, ..ScanGrid::default() };
    g.bench_function("scan_sup 5.4 grid=32x32", |b| {
        b.iter(|| scan_sup(black_box(&f), &grid, &ScanRect::reduced(5), Some(1.0)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, census, reduction, forms);
criterion_main!(benches);
