//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p relayopt-core --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use relayopt_core::conic::{self, violation, Cone, ConicProblem, ConicSolution, Feasibility, Status, DEFAULT_TOL};
use relayopt_core::mechanism::{expected_payoff, payoff_curve, run_auction, selection_probability};
use relayopt_core::model::{battery_power, effective_channels, harvested_power, link_snrs, sample_channels};
use relayopt_core::optimizer::{
    alternating_optimize, beamforming_basis, build_relay_socp, relay_only, select_relays, solve_beamforming, SocpKind,
};
use relayopt_core::{CVector, Complex64, Error, SystemParams, Termination};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn criterion_1() -> Outcome {
    let truth = [22.0, 18.0, 15.0, 12.0, 8.0];
    let lie = [22.0, 18.0, 15.0, 22.0, 8.0];
    let start = Instant::now();
    let honest = run_auction(&truth, &truth, 3).unwrap();
    let skewed = run_auction(&lie, &truth, 3).unwrap();
    let elapsed = start.elapsed();

    let mut winners = honest.winners.clone();
    winners.sort_unstable();
    let mut ok = winners == [0, 1, 2];
    ok &= honest.transfers == [-12.0, -12.0, -12.0, 0.0, 0.0];
    ok &= honest.utilities == [10.0, 6.0, 3.0, 0.0, 0.0];
    let mut winners = skewed.winners.clone();
    winners.sort_unstable();
    ok &= winners == [0, 1, 3];
    ok &= winners.iter().all(|&i| skewed.transfers[i] == -15.0);
    ok &= skewed.utilities == [7.0, 3.0, 0.0, -3.0, 0.0];
    ok &= skewed.utilities.iter().sum::<f64>() == 7.0;
    let timely = within(elapsed, Duration::from_millis(1));
    outcome(ok && timely, format!("exact match {ok}, {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let v = [1.1101, 1.4321, 0.4567, 0.3690, 0.8421];
    let expected = [0.6534, 0.9754, 0.0, 0.0, 0.3854];
    let honest = run_auction(&v, &v, 3).unwrap();
    let mut ok = honest.utilities.iter().zip(expected).all(|(u, e)| (u - e).abs() <= 1e-12);
    let eps = 1e-9;
    // Truthful winners start earning once they bid past 0.4567.
    for i in [0, 1, 4] {
        let curve = payoff_curve(&v, i, &[0.4567 - eps, 0.4567 + eps], 3).unwrap();
        ok &= curve[0].1 == 0.0 && (curve[1].1 - expected[i]).abs() <= 1e-12;
    }
    // The two losers are selected only by bidding past 0.8421.
    for i in [2, 3] {
        let below = run_auction(&with(&v, i, 0.8421 - eps), &v, 3).unwrap();
        let above = run_auction(&with(&v, i, 0.8421 + eps), &v, 3).unwrap();
        ok &= !below.is_winner(i) && above.is_winner(i) && !above.is_winner(4);
        ok &= (above.utilities[i] - (v[i] - 0.8421)).abs() <= 1e-12;
    }
    outcome(ok, format!("payoffs {:?}", honest.utilities.iter().map(|u| format!("{u:.4}")).collect::<Vec<_>>()))
}

fn with(v: &[f64], i: usize, x: f64) -> Vec<f64> {
    let mut w = v.to_vec();
    w[i] = x;
    w
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut checks, mut violations) = (0usize, 0usize);
    for _ in 0..1000 {
        let n = rng.random_range(5..=8);
        let k = rng.random_range(3..n);
        let truth: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
        let top = truth.iter().cloned().fold(0.0, f64::max);
        let honest = run_auction(&truth, &truth, k).unwrap();
        for i in 0..n {
            for g in 0..50 {
                let report = 2.0 * top * g as f64 / 49.0;
                let lied = run_auction(&with(&truth, i, report), &truth, k).unwrap();
                checks += 1;
                if honest.utilities[i] < lied.utilities[i] - 1e-12 {
                    violations += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        violations == 0 && within(elapsed, Duration::from_secs(10)),
        format!("{violations} violations in {checks} misreports, {elapsed:.2?}"),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let values = [1.1101, 1.4321, 0.4567, 0.3690, 0.8421];
    let step = 3.0 / 99.0;
    let grid: Vec<f64> = (0..100).map(|g| g as f64 * step).collect();
    let mut worst = 0.0f64;
    for (i, &x) in values.iter().enumerate() {
        let means: Vec<f64> = grid
            .iter()
            .map(|&r| expected_payoff(r, x, 1.0, 5, 3, 100_000, 40 + i as u64).unwrap().mean)
            .collect();
        let best = (0..grid.len()).fold(0, |b, g| if means[g] > means[b] { g } else { b });
        worst = worst.max((grid[best] - x).abs() / step);
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1.0 && within(elapsed, Duration::from_secs(60)),
        format!("worst argmax offset {worst:.2} grid steps, {elapsed:.2?}"),
    )
}

fn criterion_5() -> Outcome {
    let (n, k, samples) = (5, 3, 100_000);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut ok = true;
    for g in 0..=12 {
        let x = 0.25 * g as f64;
        let p = selection_probability(x, n, k).unwrap();
        let wins = (0..samples)
            .filter(|_| (0..n - 1).filter(|_| Distribution::<f64>::sample(&Exp1, &mut rng) > x).count() < k)
            .count();
        let hat = wins as f64 / samples as f64;
        let se = (p * (1.0 - p) / samples as f64).sqrt();
        ok &= (hat - p).abs() <= 3.0 * se;
        if se > 0.0 {
            worst = worst.max((hat - p).abs() / se);
        }
    }
    outcome(ok, format!("largest deviation {worst:.2} standard errors"))
}

// ---- criterion 6 ----

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Feasible, bounded SOCP: random cone blocks around an interior point plus
/// a bounding ball, with optional equalities through the same point.
fn random_socp(rng: &mut ChaCha8Rng) -> ConicProblem {
    let n = rng.random_range(2..=20);
    let x0 = DVector::from_fn(n, |_, _| gaussian(rng));
    let mut cones = Vec::new();
    let orthant = rng.random_range(0..=n);
    if orthant > 0 {
        cones.push(Cone::NonNeg(orthant));
    }
    for _ in 0..rng.random_range(1..=4) {
        cones.push(Cone::SecondOrder(rng.random_range(2..=6)));
    }
    let rows: usize = cones.iter().map(|c| c.dim()).sum();
    let mut g = DMatrix::from_fn(rows, n, |_, _| gaussian(rng));
    let mut s0 = DVector::zeros(rows);
    let mut off = 0;
    for c in &cones {
        match *c {
            Cone::NonNeg(d) => {
                for r in 0..d {
                    s0[off + r] = rng.random_range(0.1..2.0);
                }
            }
            Cone::SecondOrder(d) => {
                let mut tail = 0.0f64;
                for r in 1..d {
                    s0[off + r] = gaussian(rng);
                    tail += s0[off + r] * s0[off + r];
                }
                s0[off] = tail.sqrt() + rng.random_range(0.1..2.0);
            }
        }
        off += c.dim();
    }
    let mut h = &g * &x0 + s0;
    // ‖x‖ ≤ R
    let radius = x0.norm() + rng.random_range(1.0..3.0);
    let mut ball = DMatrix::zeros(n + 1, n);
    for i in 0..n {
        ball[(i + 1, i)] = -1.0;
    }
    g = DMatrix::from_fn(rows + n + 1, n, |r, c| if r < rows { g[(r, c)] } else { ball[(r - rows, c)] });
    h = DVector::from_fn(rows + n + 1, |r, _| if r < rows { h[r] } else if r == rows { radius } else { 0.0 });
    cones.push(Cone::SecondOrder(n + 1));

    let c = DVector::from_fn(n, |_, _| gaussian(rng));
    let p = ConicProblem::new(c, g, h, cones);
    if rng.random_bool(0.3) {
        let m = rng.random_range(1..=n / 2 + 1).min(n - 1).max(1);
        let a = DMatrix::from_fn(m, n, |_, _| gaussian(rng));
        let b = &a * &x0;
        p.with_equalities(a, b)
    } else {
        p
    }
}

/// Worst KKT residual of an optimal point, recomputed from the data.
fn kkt_residual(p: &ConicProblem, s: &ConicSolution) -> f64 {
    let pres = (&p.g * &s.x + &s.s - &p.h).norm() / (1.0 + p.h.norm());
    let eres = (&p.a * &s.x - &p.b).norm() / (1.0 + p.b.norm());
    let dres = (p.g.tr_mul(&s.z) + p.a.tr_mul(&s.y) + &p.c).norm() / (1.0 + p.c.norm());
    let pobj = p.c.dot(&s.x);
    let dobj = -p.h.dot(&s.z) - p.b.dot(&s.y);
    let gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
    let comp = s.s.dot(&s.z).abs() / (1.0 + pobj.abs());
    let cone = violation(&p.cones, &s.s).max(violation(&p.cones, &s.z));
    [pres, eres, dres, gap, comp, cone].into_iter().fold(0.0, f64::max)
}

/// Best vertex of `{x : G x ≤ h}` by solving every square active set.
fn lp_vertex_oracle(c: &DVector<f64>, g: &DMatrix<f64>, h: &DVector<f64>) -> Option<f64> {
    let (m, n) = g.shape();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let sub = DMatrix::from_fn(n, n, |r, k| g[(idx[r], k)]);
        let rhs = DVector::from_fn(n, |r, _| h[idx[r]]);
        if let Some(x) = sub.lu().solve(&rhs) {
            if x.iter().all(|v| v.is_finite()) && (h - g * &x).min() >= -1e-9 {
                let val = c.dot(&x);
                best = Some(best.map_or(val, |b: f64| b.min(val)));
            }
        }
        // next combination
        let mut i = n;
        while i > 0 && idx[i - 1] == m - n + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return best;
        }
        idx[i - 1] += 1;
        for j in i..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn random_lp(rng: &mut ChaCha8Rng) -> (DVector<f64>, DMatrix<f64>, DVector<f64>) {
    let n = 4;
    let extra = rng.random_range(2..=6);
    let x0 = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let m = extra + 2 * n;
    let g = DMatrix::from_fn(m, n, |r, c| {
        if r < extra {
            gaussian(rng)
        } else if (r - extra) / 2 == c {
            if (r - extra) % 2 == 0 { 1.0 } else { -1.0 }
        } else {
            0.0
        }
    });
    let h = DVector::from_fn(m, |r, _| {
        if r < extra {
            (g.row(r) * &x0)[0] + rng.random_range(0.0..1.0)
        } else {
            3.0
        }
    });
    let c = DVector::from_fn(n, |_, _| gaussian(rng));
    (c, g, h)
}

/// `‖x‖ ≤ r` intersected with `a·x ≥ d`, `‖a‖ = 1`: feasible exactly when
/// `d ≤ r`.
fn ball_cut(n: usize, a: &DVector<f64>, r: f64, d: f64) -> ConicProblem {
    let mut g = DMatrix::zeros(n + 2, n);
    let mut h = DVector::zeros(n + 2);
    h[0] = r;
    for i in 0..n {
        g[(i + 1, i)] = -1.0;
        g[(n + 1, i)] = -a[i];
    }
    h[n + 1] = -d;
    ConicProblem::new(DVector::zeros(n), g, h, vec![Cone::SecondOrder(n + 1), Cone::NonNeg(1)])
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut socp_fail = 0;
    let mut worst_kkt = 0.0f64;
    for _ in 0..150 {
        let p = random_socp(&mut rng);
        let sol = conic::solve(&p, DEFAULT_TOL, 100).unwrap();
        let kkt = kkt_residual(&p, &sol);
        worst_kkt = worst_kkt.max(kkt);
        if sol.status != Status::Optimal || kkt > 1e-7 {
            socp_fail += 1;
        }
    }
    let mut lp_fail = 0;
    let mut worst_lp = 0.0f64;
    for _ in 0..30 {
        let (c, g, h) = random_lp(&mut rng);
        let oracle = lp_vertex_oracle(&c, &g, &h).unwrap();
        let sol = conic::solve_lp(&c, &g, &h, &DMatrix::zeros(0, 4), &DVector::zeros(0), DEFAULT_TOL).unwrap();
        let err = (sol.obj - oracle).abs();
        worst_lp = worst_lp.max(err);
        if sol.status != Status::Optimal || err > 1e-7 {
            lp_fail += 1;
        }
    }
    let mut band_fail = 0;
    let band = 2.0 * DEFAULT_TOL;
    for _ in 0..20 {
        let n = rng.random_range(2..=6);
        let a = DVector::from_fn(n, |_, _| gaussian(&mut rng)).normalize();
        let r = rng.random_range(0.1..0.5);
        let inside = conic::feasibility(&ball_cut(n, &a, r, r - band), DEFAULT_TOL).unwrap();
        let outside = conic::feasibility(&ball_cut(n, &a, r, r + band), DEFAULT_TOL).unwrap();
        let inside_ok = matches!(&inside, Feasibility::Feasible(x) if x.norm() <= r + band && a.dot(x) >= r - 2.0 * band);
        if !inside_ok || outside.is_feasible() {
            band_fail += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        socp_fail + lp_fail + band_fail == 0 && within(elapsed, Duration::from_secs(30)),
        format!(
            "SOCP failures {socp_fail}/150 (worst KKT {worst_kkt:.1e}), LP mismatches {lp_fail}/30 (worst {worst_lp:.1e}), \
             boundary misses {band_fail}/20, {elapsed:.2?}"
        ),
    )
}

// ---- criterion 7 ----

/// Largest stored-power floor over scalar weights `f̄ = m e^{jφ}` on a
/// magnitude/phase grid, refined around the smallest feasible magnitude.
fn grid_oracle(
    eff: &relayopt_core::EffectiveChannels,
    basis: &CVector,
    params: &SystemParams,
    p1: f64,
    p2: f64,
    beta: f64,
    r0: f64,
) -> Option<f64> {
    let t1 = (2.0 * beta * r0).exp2() - 1.0;
    let t2 = (2.0 * (1.0 - beta) * r0).exp2() - 1.0;
    let feasible = |f: &CVector| {
        let (g1, g2) = link_snrs(f, eff, p1, p2, params.sigma2).unwrap();
        let power = (0..f.len()).all(|j| f[j].norm_sqr() * eff.rs[j] <= params.p_r * (1.0 + 1e-12));
        power && g1 >= t1 * (1.0 - 1e-9) && g2 >= t2 * (1.0 - 1e-9)
    };
    let floor = |f: &CVector| {
        (0..f.len())
            .map(|j| {
                let i = eff.selected[j];
                eff.rs[j] * (params.xi[i] * (1.0 - params.rho[i]) - f[j].norm_sqr())
            })
            .fold(f64::INFINITY, f64::min)
    };
    let m_max = (0..basis.len())
        .map(|j| (params.p_r / (eff.rs[j] * basis[j].norm_sqr())).sqrt())
        .fold(f64::INFINITY, f64::min);
    let mut best: Option<f64> = None;
    for q in 0..72 {
        let phase = Complex64::from_polar(1.0, 2.0 * PI * q as f64 / 72.0);
        let at = |m: f64| basis * (phase * m);
        // Rates grow with the magnitude and the floor shrinks, so the best
        // point per phase is the smallest feasible magnitude.
        let steps = 400;
        let Some(first) = (0..=steps).map(|s| m_max * s as f64 / steps as f64).find(|&m| feasible(&at(m))) else {
            continue;
        };
        let (mut lo, mut hi) = ((first - m_max / steps as f64).max(0.0), first);
        for _ in 0..3 {
            let fine = (0..=200).map(|s| lo + (hi - lo) * s as f64 / 200.0).find(|&m| feasible(&at(m))).unwrap_or(hi);
            lo = (fine - (hi - lo) / 200.0).max(0.0);
            hi = fine;
        }
        let val = floor(&at(hi));
        best = Some(best.map_or(val, |b: f64| b.max(val)));
    }
    best
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let results: Vec<(usize, usize, usize, f64)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let ch = sample_channels(7000 + seed, 8).unwrap();
            let (mut bad, mut flagged, mut checked, mut worst_gap) = (0, 0, 0, 0.0f64);
            for k in [3, 4] {
                let params = SystemParams::from_db(8, k, 10.0);
                let (_, req) = select_relays(&ch.reports(), &params).unwrap();
                let p = params.p_max / (k as f64 + 2.0);
                let eff = effective_channels(&ch, &req.selected, p, p, params.sigma2).unwrap();
                let bf = match solve_beamforming(&eff, &params, p, p, &req.u) {
                    Ok(bf) => bf,
                    Err(Error::HarvestInfeasible { relay, required, available }) => {
                        // Only acceptable when the demand really exceeds the supply.
                        let j = req.selected.iter().position(|&i| i == relay).unwrap();
                        let cap = harvested_power(relay, p, p, &ch, params.rho[relay], params.xi[relay], params.sigma2).unwrap();
                        if !(required > cap && (available - cap).abs() < 1e-9 && req.u[j] == required) {
                            bad += 1;
                        }
                        flagged += 1;
                        continue;
                    }
                    Err(_) => {
                        bad += 1;
                        continue;
                    }
                };
                checked += 1;
                let zf = (0..2).map(|c| bf.f.dotc(&eff.hbar_e.column(c)).norm()).fold(0.0, f64::max);
                let mut ok = zf <= 1e-8;
                for (j, &i) in req.selected.iter().enumerate() {
                    ok &= params.p_r - bf.f[j].norm_sqr() * eff.rs[j] >= -1e-6;
                    let ph = harvested_power(i, p, p, &ch, params.rho[i], params.xi[i], params.sigma2).unwrap();
                    ok &= ph - req.u[j] >= -1e-6;
                    ok &= battery_power(i, bf.f[j], &ch, p, p, &params).unwrap() >= bf.nu - 1e-9;
                }
                if k == 3 {
                    let basis = beamforming_basis(&eff).unwrap();
                    let prob =
                        build_relay_socp(SocpKind::MaxStoredPower, bf.beta, bf.r0, &eff, &basis, &params, p, p, &req.u).unwrap();
                    let sol = conic::solve(&prob, DEFAULT_TOL, 100).unwrap();
                    let col = basis.basis.column(0).into_owned();
                    match grid_oracle(&eff, &col, &params, p, p, bf.beta, bf.r0) {
                        Some(oracle) if sol.status == Status::Optimal => {
                            let gap = (-sol.obj - oracle).abs();
                            worst_gap = worst_gap.max(gap);
                            ok &= gap <= 1e-3;
                        }
                        _ => ok = false,
                    }
                }
                if !ok {
                    bad += 1;
                }
            }
            (bad, flagged, checked, worst_gap)
        })
        .collect();
    let bad: usize = results.iter().map(|r| r.0).sum();
    let flagged: usize = results.iter().map(|r| r.1).sum();
    let checked: usize = results.iter().map(|r| r.2).sum();
    let worst = results.iter().map(|r| r.3).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    outcome(
        bad == 0,
        format!(
            "{checked} solutions audited, {flagged} unsatisfiable harvest demands reported, {bad} failures, \
             worst grid-oracle gap {worst:.1e}, {elapsed:.2?}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let runs: Vec<Option<(bool, bool, usize)>> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let ch = sample_channels(8000 + seed, 5).unwrap();
            let params = SystemParams::from_db(5, 3, 10.0);
            let (_, req) = select_relays(&ch.reports(), &params).ok()?;
            let sol = alternating_optimize(&ch, &req.selected, &params, &req.u).ok()?;
            let monotone = sol.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9);
            let converged = sol.termination == Termination::Converged && sol.iterations <= 20;
            Some((monotone, converged, sol.iterations))
        })
        .collect();
    let elapsed = start.elapsed();
    let solved = runs.iter().flatten().count();
    let monotone = runs.iter().flatten().all(|r| r.0);
    let converged = runs.iter().flatten().filter(|r| r.1).count();
    let max_iter = runs.iter().flatten().map(|r| r.2).max().unwrap_or(0);
    outcome(
        monotone && converged >= 95 && within(elapsed, Duration::from_secs(300)),
        format!(
            "{solved}/100 seeds solved, traces monotone {monotone}, {converged} converged within 20 cycles \
             (max {max_iter}), {elapsed:.2?}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let cases: Vec<(u64, usize, u32)> = (0..10u64)
        .flat_map(|seed| [3usize, 4].into_iter().flat_map(move |k| (0..=10).map(move |db| (seed, k, db))))
        .collect();
    let results: Vec<Option<(f64, f64, bool)>> = cases
        .par_iter()
        .map(|&(seed, k, db)| {
            let ch = sample_channels(9000 + seed, 8).unwrap();
            let params = SystemParams::from_db(8, k, db as f64);
            let (_, req) = select_relays(&ch.reports(), &params).ok()?;
            let joint = alternating_optimize(&ch, &req.selected, &params, &req.u).ok()?;
            let fixed = relay_only(&ch, &req.selected, &params, &req.u).ok()?;
            // The first trace entry is the relay-only point only when it was admissible.
            let shared_start = (joint.trace[0] - fixed.trace[0]).abs() < 1e-12;
            Some((joint.secrecy_rate, fixed.secrecy_rate, shared_start))
        })
        .collect();
    let elapsed = start.elapsed();
    let solved = results.iter().flatten().count();
    let losses: Vec<(f64, bool)> =
        results.iter().flatten().map(|(j, f, s)| (f - j, *s)).filter(|(d, _)| *d > 1e-6).collect();
    let worst = losses.iter().map(|l| l.0).fold(0.0, f64::max);
    let off_start = losses.iter().filter(|l| !l.1).count();
    let mean_gain = results.iter().flatten().map(|(j, f, _)| j - f).sum::<f64>() / solved.max(1) as f64;
    outcome(
        losses.is_empty() && solved == cases.len(),
        format!(
            "{solved}/{} cases solved, joint below relay-only in {} (worst by {worst:.3} bps/Hz, {off_start} from inadmissible starting powers), mean gain {mean_gain:.3} bps/Hz, {elapsed:.2?}",
            cases.len(),
            losses.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("worked auction example", criterion_1),
        ("payoff thresholds", criterion_2),
        ("truthfulness", criterion_3),
        ("expected-payoff maximizer", criterion_4),
        ("selection probability vs Monte Carlo", criterion_5),
        ("conic solver soundness", criterion_6),
        ("beamforming validity", criterion_7),
        ("alternating convergence", criterion_8),
        ("joint vs relay-only", criterion_9),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let id = n + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let result = run();
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {id}: {name}: {}", result.detail);
        if !result.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        if std::env::var_os("ACCEPTANCE_STRICT").is_some() {
            std::process::exit(1);
        }
    }
}
