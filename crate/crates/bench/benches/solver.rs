//! Hot-path benchmarks: the step kernel, projections, and the per-iteration
//! accumulator updates that dominate long-horizon runs.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psg_core::{
    make_l1_distance, psg_step, run, AveragingAccumulator, BoundAccumulator, FeasibleSet,
    RunOptions, SolverState, StepSchedule, StridePolicy, Vector,
};

fn bench_step_kernel(c: &mut Criterion) {
    let n = 100;
    let p = make_l1_distance(n, &Vector::zeros(n), -1.0, 1.0).unwrap();
    let sched = StepSchedule::sqrt_decay(p.radius, p.lipschitz).unwrap();
    c.bench_function("psg_step_100x_n100", |b| {
        b.iter(|| {
            let mut state = SolverState::new(&p, Vector::from_element(n, 1.0)).unwrap();
            for s in 1..=100 {
                psg_step(&mut state, &p, sched.eta(s).unwrap()).unwrap();
            }
            black_box(state.f_current())
        })
    });
}

fn bench_simplex_projection(c: &mut Criterion) {
    let n = 1000;
    let set = FeasibleSet::simplex(n, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let y = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    c.bench_function("simplex_project_n1000", |b| {
        b.iter(|| black_box(set.project(black_box(&y)).unwrap()))
    });
}

fn bench_bound_accumulator(c: &mut Criterion) {
    let sched = StepSchedule::sqrt_decay(1.0, 1.0).unwrap();
    let etas: Vec<f64> = (1..=1000).map(|s| sched.eta(s).unwrap()).collect();
    let mut group = c.benchmark_group("bound_accumulator_1000_pushes");
    for k in [0.0, -1.0, 0.5] {
        group.bench_function(format!("k={k}"), |b| {
            b.iter(|| {
                let mut acc = BoundAccumulator::new(1.0, 1.0, k).unwrap();
                let mut last = 0.0;
                for &eta in &etas {
                    last = acc.push(eta).unwrap();
                }
                black_box(last)
            })
        });
    }
    group.finish();
}

fn bench_averaging_update(c: &mut Criterion) {
    let n = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xs: Vec<Vector> = (0..1000)
        .map(|_| Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)))
        .collect();
    c.bench_function("averaging_update_1000x_n100", |b| {
        b.iter(|| {
            let mut acc = AveragingAccumulator::new(1.0, n).unwrap();
            for (s, x) in xs.iter().enumerate() {
                acc.update(x, 1.0 / ((s + 1) as f64).sqrt()).unwrap();
            }
            black_box(acc.average().norm())
        })
    });
}

fn bench_full_run(c: &mut Criterion) {
    let p = make_l1_distance(10, &Vector::zeros(10), -1.0, 1.0).unwrap();
    let sched = StepSchedule::sqrt_decay(p.radius, p.lipschitz).unwrap();
    let opts = RunOptions {
        start: Some(Vector::from_element(10, 1.0)),
        check_invariants: false,
        stride: StridePolicy::Auto,
    };
    c.bench_function("run_n10_h1000_3ks", |b| {
        b.iter(|| black_box(run(&p, &sched, &[-1.0, 0.0, 1.0], 1000, &opts).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_step_kernel,
    bench_simplex_projection,
    bench_bound_accumulator,
    bench_averaging_update,
    bench_full_run
);
criterion_main!(benches);
