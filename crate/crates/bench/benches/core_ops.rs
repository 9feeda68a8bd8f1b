use criterion::{black_box, criterion_group, criterion_main, Criterion};

use qguess::bounds::{bound_l, bound_l_cond, bound_l_star};
use qguess::entropy::{relative_ab_cond, AlphaBeta};
use qguess::guessing::{optimal_strategy_joint, q_moment};
use qguess::minimax::solve_minimax;
use qguess::verify::brute_force_optimal;
use qguess::SolverConfig;

use qguess_bench::{joint_8x4, joint_pair_4x2, params, pmf64, small_family};

fn bench_escort_and_power_sums(c: &mut Criterion) {
    let p = pmf64();
    c.bench_function("escort_64_q20", |b| b.iter(|| black_box(&p).escort(black_box(20.0))));
    c.bench_function("power_sum_64_qm20", |b| {
        b.iter(|| black_box(&p).log_power_sum(black_box(-20.0)))
    });
    c.bench_function("bound_l_64", |b| {
        let pr = params(-2.0, 1.0);
        b.iter(|| bound_l(black_box(&p), &pr))
    });
}

fn bench_strategies_and_moments(c: &mut Criterion) {
    let j = joint_8x4();
    let pr = params(2.0, 1.5);
    c.bench_function("optimal_strategy_8x4", |b| {
        b.iter(|| optimal_strategy_joint(black_box(&j), 2.0))
    });
    let g = optimal_strategy_joint(&j, 2.0);
    c.bench_function("q_moment_8x4", |b| b.iter(|| q_moment(black_box(&g), &j, &pr).unwrap()));
    c.bench_function("bound_l_cond_8x4", |b| b.iter(|| bound_l_cond(black_box(&j), &pr)));
}

fn bench_mismatch(c: &mut Criterion) {
    let (pj, qj) = joint_pair_4x2();
    let pr = params(1.0, 1.0);
    let ab = AlphaBeta::new(0.5, 1.0).unwrap();
    c.bench_function("bound_l_star_4x2", |b| {
        b.iter(|| bound_l_star(black_box(&pj), &qj, &pr).unwrap())
    });
    c.bench_function("relative_ab_cond_4x2", |b| {
        b.iter(|| relative_ab_cond(black_box(&pj), &qj, ab).unwrap())
    });
}

fn bench_oracles_and_solver(c: &mut Criterion) {
    let j = joint_8x4();
    let pr = params(1.0, 1.0);
    c.bench_function("brute_force_5x2", |b| {
        let small = qguess::verify::sample_joint(406, 0, 5, 2);
        b.iter(|| brute_force_optimal(black_box(&small), &pr).unwrap())
    });
    let _ = j;
    let fam = small_family();
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.bench_function("solve_minimax_3x1_pair", |b| {
        let cfg = SolverConfig { restarts: 2, ..SolverConfig::default() };
        b.iter(|| solve_minimax(black_box(&fam), &pr, &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_escort_and_power_sums,
    bench_strategies_and_moments,
    bench_mismatch,
    bench_oracles_and_solver
);
criterion_main!(benches);
