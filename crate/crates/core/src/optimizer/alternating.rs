//! Alternating power / beamforming loop.

use super::{solve_beamforming, solve_power_lp, BeamformingSolution, JointSolution, Termination};
use crate::error::{Error, Result};
use crate::model::{battery_power, capacity, effective_channels, link_snrs, rates, ChannelRealization, PowerInit, SystemParams};
use crate::numerics::CVector;

/// `C1 + C2 + min_i P_b,i` at relay weights `f` and powers `(p1, p2)`.
pub fn joint_objective(
    f: &CVector,
    ch: &ChannelRealization,
    selected: &[usize],
    params: &SystemParams,
    p1: f64,
    p2: f64,
) -> Result<f64> {
    let eff = effective_channels(ch, selected, p1, p2, params.sigma2)?;
    let (g1, g2) = link_snrs(f, &eff, p1, p2, params.sigma2)?;
    let mut floor = f64::INFINITY;
    for (j, &i) in selected.iter().enumerate() {
        floor = floor.min(battery_power(i, f[j], ch, p1, p2, params)?);
    }
    Ok(capacity(g1) + capacity(g2) + floor)
}

fn initial_powers(params: &SystemParams, k: usize) -> (f64, f64) {
    match params.power_init {
        PowerInit::Fraction => {
            let p = params.p_max / (k as f64 + 2.0);
            (p, p)
        }
        PowerInit::Max => (params.p_max, params.p_max),
        PowerInit::Given { p1, p2 } => (p1, p2),
    }
}

fn check_inputs(selected: &[usize], params: &SystemParams, u: &[f64]) -> Result<()> {
    params.validate()?;
    if selected.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "null-space beamforming needs at least 3 relays, got {}",
            selected.len()
        )));
    }
    if u.len() != selected.len() {
        return Err(Error::DimensionMismatch(format!("{} demands for {} relays", u.len(), selected.len())));
    }
    if params.max_outer_iter == 0 {
        return Err(Error::InvalidParameter("iteration cap must be positive".into()));
    }
    Ok(())
}

/// Whether `(p1, p2)` meets the leakage cap and every harvest demand.
fn powers_admissible(ch: &ChannelRealization, selected: &[usize], params: &SystemParams, u: &[f64], p1: f64, p2: f64) -> bool {
    let leak = ch.h1e.norm_sqr() * p1 + ch.h2e.norm_sqr() * p2;
    let cap = params.sigma2 * ((2.0 * params.r_e).exp2() - 1.0);
    if leak > cap + 1e-9 {
        return false;
    }
    selected.iter().zip(u).all(|(&i, &ui)| {
        let received = p1 * ch.h1r[i].norm_sqr() + p2 * ch.h2r[i].norm_sqr() + params.sigma2;
        params.xi[i] * (1.0 - params.rho[i]) * received >= ui - 1e-9
    })
}

#[derive(Clone)]
struct Point {
    bf: BeamformingSolution,
    p1: f64,
    p2: f64,
    value: f64,
}

fn evaluate(ch: &ChannelRealization, selected: &[usize], params: &SystemParams, u: &[f64], p1: f64, p2: f64) -> Result<Point> {
    let eff = effective_channels(ch, selected, p1, p2, params.sigma2)?;
    let bf = solve_beamforming(&eff, params, p1, p2, u)?;
    let value = joint_objective(&bf.f, ch, selected, params, p1, p2)?;
    Ok(Point { bf, p1, p2, value })
}

fn secrecy(ch: &ChannelRealization, selected: &[usize], params: &SystemParams, point: &Point) -> Result<f64> {
    Ok(rates(&point.bf.f, ch, selected, point.p1, point.p2, params.sigma2)?.secrecy())
}

/// Keeps whichever accepted point has the higher secrecy rate.
fn keep_best(
    best: &mut Option<(f64, Point)>,
    ch: &ChannelRealization,
    selected: &[usize],
    params: &SystemParams,
    point: &Point,
) -> Result<()> {
    let s = secrecy(ch, selected, params, point)?;
    if best.as_ref().is_none_or(|(b, _)| s > *b) {
        *best = Some((s, point.clone()));
    }
    Ok(())
}

fn finish(
    ch: &ChannelRealization,
    selected: &[usize],
    params: &SystemParams,
    point: Point,
    trace: Vec<f64>,
    iterations: usize,
    termination: Termination,
) -> Result<JointSolution> {
    let mut nu = f64::INFINITY;
    for (j, &i) in selected.iter().enumerate() {
        nu = nu.min(battery_power(i, point.bf.f[j], ch, point.p1, point.p2, params)?);
    }
    let r = rates(&point.bf.f, ch, selected, point.p1, point.p2, params.sigma2)?;
    Ok(JointSolution {
        selected: selected.to_vec(),
        f: point.bf.f,
        p1: point.p1,
        p2: point.p2,
        nu,
        r0: point.bf.r0,
        beta: point.bf.beta,
        secrecy_rate: r.secrecy(),
        rates: r,
        trace,
        iterations,
        termination,
    })
}

/// Halves the power step from `prev` towards `next` until the objective
/// no longer drops. Returns the improved point, or the smallest drop seen.
fn backtrack(
    ch: &ChannelRealization,
    selected: &[usize],
    params: &SystemParams,
    u: &[f64],
    prev: &Point,
    next: Point,
) -> Result<std::result::Result<Point, f64>> {
    let mut shortfall = prev.value - next.value;
    let mut t = 1.0;
    for _ in 0..BACKTRACK_STEPS {
        t *= 0.5;
        let p1 = prev.p1 + t * (next.p1 - prev.p1);
        let p2 = prev.p2 + t * (next.p2 - prev.p2);
        let trial = evaluate(ch, selected, params, u, p1, p2)?;
        if trial.value >= prev.value {
            return Ok(Ok(trial));
        }
        shortfall = shortfall.min(prev.value - trial.value);
    }
    Ok(Err(shortfall))
}

const BACKTRACK_STEPS: usize = 8;

/// Alternates the power LP and the beamforming search from the initial
/// powers in `params.power_init`.
///
/// When a cycle would lower the objective, the power step is shortened;
/// if that fails too the loop stops at the previous point, so the trace
/// never decreases. The returned point is the accepted iterate with the
/// highest secrecy rate, which need not be the last one.
pub fn alternating_optimize(
    ch: &ChannelRealization,
    selected: &[usize],
    params: &SystemParams,
    u: &[f64],
) -> Result<JointSolution> {
    check_inputs(selected, params, u)?;
    let (p1, p2) = initial_powers(params, selected.len());
    let start = evaluate(ch, selected, params, u, p1, p2)?;
    let mut weights = start.bf.f.clone();
    let mut trace = Vec::new();
    let mut best = None;
    let mut current = if powers_admissible(ch, selected, params, u, p1, p2) {
        trace.push(start.value);
        keep_best(&mut best, ch, selected, params, &start)?;
        Some(start)
    } else {
        log::debug!("initial powers ({p1}, {p2}) violate the leakage or harvest limits");
        None
    };

    for iter in 1..=params.max_outer_iter {
        let lp = solve_power_lp(&weights, ch, selected, params, u)?;
        let next = evaluate(ch, selected, params, u, lp.p1, lp.p2)?;
        log::trace!("cycle {iter}: p=({:.4}, {:.4}) objective {:.6}", lp.p1, lp.p2, next.value);
        let next = match current.take() {
            Some(prev) if next.value < prev.value => match backtrack(ch, selected, params, u, &prev, next)? {
                Ok(better) => {
                    current = Some(prev);
                    better
                }
                Err(shortfall) => {
                    let termination = if shortfall < params.tol_outer {
                        Termination::Converged
                    } else {
                        Termination::Stalled
                    };
                    let (_, out) = best.unwrap_or((0.0, prev));
                    return finish(ch, selected, params, out, trace, iter, termination);
                }
            },
            prev => {
                current = prev;
                next
            }
        };
        let delta = current.as_ref().map(|p| next.value - p.value);
        trace.push(next.value);
        keep_best(&mut best, ch, selected, params, &next)?;
        weights = next.bf.f.clone();
        if delta.is_some_and(|d| d < params.tol_outer) {
            let (_, out) = best.expect("an accepted point");
            return finish(ch, selected, params, out, trace, iter, Termination::Converged);
        }
        current = Some(next);
    }
    let (_, out) = best.expect("at least one cycle is accepted");
    finish(ch, selected, params, out, trace, params.max_outer_iter, Termination::MaxIterations)
}

/// Beamforming alone at the initial powers of `params.power_init`.
pub fn relay_only(ch: &ChannelRealization, selected: &[usize], params: &SystemParams, u: &[f64]) -> Result<JointSolution> {
    check_inputs(selected, params, u)?;
    let (p1, p2) = initial_powers(params, selected.len());
    let point = evaluate(ch, selected, params, u, p1, p2)?;
    let trace = vec![point.value];
    finish(ch, selected, params, point, trace, 0, Termination::Converged)
}
