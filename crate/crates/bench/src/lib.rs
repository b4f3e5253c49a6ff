//! Benchmark fixtures and groups for the core algorithms.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion};
use nalgebra::{DMatrix, DVector};
use relayopt_core::conic::{self, Cone, ConicProblem, DEFAULT_MAX_ITER, DEFAULT_TOL};
use relayopt_core::mechanism::{expected_payoff, selection_probability, vcg_transfers};
use relayopt_core::model::{effective_channels, sample_channels};
use relayopt_core::optimizer::{alternating_optimize, select_relays, solve_beamforming};
use relayopt_core::SystemParams;

/// Feasible, bounded SOCP: `min cᵀx` over `‖x - x0‖ ≤ r` intersected with
/// a random slab `|aᵀx| ≤ 1`.
pub fn ball_socp(n: usize) -> ConicProblem {
    let val = |i: usize| ((i as f64 * 0.618_033_988_7).fract() - 0.5) * 2.0;
    let c = DVector::from_fn(n, |i, _| val(i + 1));
    let a = DVector::from_fn(n, |i, _| val(3 * i + 7));
    let mut g = DMatrix::zeros(n + 3, n);
    let mut h = DVector::zeros(n + 3);
    g.row_mut(0).copy_from(&a.transpose());
    h[0] = 1.0;
    g.row_mut(1).copy_from(&(-&a).transpose());
    h[1] = 1.0;
    h[2] = 2.0;
    for i in 0..n {
        g[(3 + i, i)] = -1.0;
    }
    ConicProblem::new(c, g, h, vec![Cone::NonNeg(2), Cone::SecondOrder(n + 1)])
}

pub fn mechanism(c: &mut Criterion) {
    let values: Vec<f64> = (0..64).map(|i| ((i * 37) % 101) as f64).collect();
    c.bench_function("vcg_transfers/64", |b| b.iter(|| vcg_transfers(black_box(&values), 8)));
    c.bench_function("selection_probability/n32_k8", |b| {
        b.iter(|| selection_probability(black_box(1.3), 32, 8))
    });
    c.bench_function("expected_payoff/4096", |b| {
        b.iter(|| expected_payoff(black_box(1.2), 1.0, 1.0, 8, 3, 4096, 1))
    });
}

pub fn conic_solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("socp");
    for n in [4, 8, 16] {
        let p = ball_socp(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| conic::solve(black_box(p), DEFAULT_TOL, DEFAULT_MAX_ITER))
        });
    }
    group.finish();
}

pub fn optimizer(c: &mut Criterion) {
    let ch = sample_channels(3, 8).unwrap();
    let mut group = c.benchmark_group("optimizer");
    group.sample_size(10);
    for k in [3, 4] {
        let mut params = SystemParams::from_db(8, k, 10.0);
        params.beta_grid = 11;
        let (_, req) = select_relays(&ch.reports(), &params).unwrap();
        let p = params.p_max / (k as f64 + 2.0);
        let eff = effective_channels(&ch, &req.selected, p, p, params.sigma2).unwrap();
        group.bench_with_input(BenchmarkId::new("beamforming", k), &k, |b, _| {
            b.iter(|| solve_beamforming(black_box(&eff), &params, p, p, &req.u))
        });
        group.bench_with_input(BenchmarkId::new("alternating", k), &k, |b, _| {
            b.iter(|| alternating_optimize(black_box(&ch), &req.selected, &params, &req.u))
        });
    }
    group.finish();
}
