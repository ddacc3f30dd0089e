use bnlab_core::ball::{shoot, solve_ball};
use bnlab_core::config::ProblemConfig;
use bnlab_core::sobolev::{make_setup, radial_rayleigh_minimum, RayleighGrid};
use bnlab_core::verifier::{quotient_sequence, Experiment};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn rayleigh(c: &mut Criterion) {
    let mut group = c.benchmark_group("rayleigh_minimum");
    group.sample_size(10);
    for n in [3usize, 6, 8] {
        let setup = make_setup(n, 2.0).unwrap();
        let grid = RayleighGrid::for_setup(&setup);
        group.bench_with_input(BenchmarkId::from_parameter(n), &setup, |b, s| {
            b.iter(|| radial_rayleigh_minimum(black_box(s), &grid).unwrap())
        });
    }
    group.finish();
}

fn bubbles(c: &mut Criterion) {
    let exp = Experiment::new(&ProblemConfig::reference_cusp6()).unwrap();
    let bubble = exp.bubble(exp.sequence.len() - 1).unwrap();
    let theta = exp.weight_exponent();
    c.bench_function("radial_integrals", |b| b.iter(|| black_box(&bubble).radial_integrals().unwrap()));
    c.bench_function("weighted_gradient_integral", |b| {
        b.iter(|| black_box(&bubble).weighted_gradient_integral(theta).unwrap())
    });
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(20);
    group.bench_function("quotient_sequence", |b| b.iter(|| quotient_sequence(black_box(&exp), 1.0).unwrap()));
    group.finish();
}

fn shooting(c: &mut Criterion) {
    let mut group = c.benchmark_group("shoot");
    for s in [1.0, 1e3, 1e6] {
        group.bench_with_input(BenchmarkId::new("n5", s), &s, |b, &s| b.iter(|| shoot(5, 10.0, black_box(s)).unwrap()));
    }
    group.finish();
    let mut group = c.benchmark_group("solve_ball");
    group.sample_size(10);
    group.bench_function("n3_half_lambda1", |b| {
        b.iter(|| solve_ball(3, black_box(0.5 * std::f64::consts::PI.powi(2))).unwrap())
    });
    group.finish();
}

criterion_group!(benches, rayleigh, bubbles, shooting);
criterion_main!(benches);
