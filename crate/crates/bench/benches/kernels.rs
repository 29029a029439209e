use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use squeezelab::bergman::{build_evaluator, gram_matrix, KernelOptions};
use squeezelab::finsler::{bracket, FinslerOptions};
use squeezelab::{CDirection, CPoint, Domain};

fn gram(c: &mut Criterion) {
    let disc = Domain::unit_disc();
    c.bench_function("gram_disc_deg12_20k", |b| {
        b.iter(|| gram_matrix(&disc, 12, 20_000, 42).unwrap())
    });
    let ball = Domain::unit_ball(2);
    c.bench_function("gram_ball_deg6_20k", |b| {
        b.iter(|| gram_matrix(&ball, 6, 20_000, 42).unwrap())
    });
}

fn kernel(c: &mut Criterion) {
    let ball = Domain::unit_ball(2);
    let ev = build_evaluator(
        &ball,
        &KernelOptions {
            degree: 8,
            count: 50_000,
            seed: 42,
        },
    )
    .unwrap();
    let z = CPoint::from_slice(&[Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.2)]);
    let v = CDirection::real(&[0.6, 0.8]);
    c.bench_function("kernel_diag_ball_deg8", |b| b.iter(|| ev.kernel_diag(&z).unwrap()));
    c.bench_function("bergman_metric_ball_deg8", |b| b.iter(|| ev.metric(&z, &v).unwrap()));
}

fn finsler(c: &mut Criterion) {
    let e = Domain::ellipsoid(&[1.0, 4.0]).unwrap();
    let x = CPoint::real(&[0.2, -0.1]);
    let v = CDirection::real(&[0.0, 1.0]);
    let opts = FinslerOptions {
        degree: 3,
        budget: 50,
        starts: 2,
        ..FinslerOptions::default()
    };
    let mut g = c.benchmark_group("finsler");
    g.sample_size(10);
    g.bench_function("bracket_ellipsoid_deg3", |b| {
        b.iter(|| bracket(&e, &x, &v, &opts).unwrap())
    });
    g.finish();
}

criterion_group!(benches, gram, kernel, finsler);
criterion_main!(benches);
