use criterion::{black_box, criterion_group, criterion_main, Criterion};

use fraccrn::simulator::{derivatives, integrate, SimConfig, State};
use fraccrn::trainer::Perceptron;
use fraccrn_bench::{dataset1_config, sigmoid_crn};

fn bench_derivatives(c: &mut Criterion) {
    let cc = sigmoid_crn(0.7);
    let s = State::initial(&cc.network);
    c.bench_function("derivatives/sigmoid", |b| b.iter(|| derivatives(black_box(&cc.network), black_box(&s))));
}

fn bench_integrate(c: &mut Criterion) {
    let cc = sigmoid_crn(0.7);
    let cfg = SimConfig { t_max: 50.0, ..SimConfig::default() };
    c.bench_function("integrate/sigmoid", |b| b.iter(|| integrate(black_box(&cc.network), &cfg).unwrap()));
}

fn bench_epoch(c: &mut Criterion) {
    let cfg = dataset1_config();
    let mut p = Perceptron::new(&cfg).unwrap();
    let mut group = c.benchmark_group("trainer");
    group.sample_size(10);
    group.bench_function("epoch/perceptron4", |b| b.iter(|| p.run_epoch(black_box(&cfg.w0)).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_derivatives, bench_integrate, bench_epoch);
criterion_main!(benches);
