//! Source powers for fixed relay weights.

use nalgebra::{DMatrix, DVector};

use crate::conic::{self, ConicProblem, Cone, Status, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::model::{effective_channels, ChannelRealization, EffectiveChannels, SystemParams};
use crate::numerics::CVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSolution {
    pub p1: f64,
    pub p2: f64,
    pub nu: f64,
    /// `μ1 p1 + μ2 p2 + ν` at the optimum.
    pub objective: f64,
}

/// Per-watt SNR gains `(μ1, μ2)`: the link SNRs are `μ1 p1` (into source 2)
/// and `μ2 p2` (into source 1).
pub fn power_gains(f: &CVector, eff: &EffectiveChannels, sigma2: f64) -> Result<(f64, f64)> {
    if f.len() != eff.len() {
        return Err(Error::DimensionMismatch(format!("{} weights for {} relays", f.len(), eff.len())));
    }
    let noise = |h: &CVector| -> f64 { f.iter().zip(h.iter()).map(|(a, b)| a.norm_sqr() * b.norm_sqr()).sum() };
    let mu1 = f.dotc(&eff.h12).norm_sqr() / (sigma2 * (1.0 + noise(&eff.h2)));
    let mu2 = f.dotc(&eff.h21).norm_sqr() / (sigma2 * (1.0 + noise(&eff.h1)));
    Ok((mu1, mu2))
}

/// LP over `(p1, p2, ν)` maximizing `μ1 p1 + μ2 p2 + ν`, written as
/// `min cᵀx  s.t.  G x ≤ h`.
///
/// Rows, in order: first-slot leakage cap, one harvest row per relay, one
/// relay-power row per relay with a non-zero weight, one storage row per
/// relay, then `-p ≤ 0` and `p ≤ P_max` for both sources.
pub fn build_power_lp(
    f: &CVector,
    ch: &ChannelRealization,
    selected: &[usize],
    params: &SystemParams,
    u: &[f64],
) -> Result<ConicProblem> {
    if u.len() != selected.len() {
        return Err(Error::DimensionMismatch(format!("{} demands for {} relays", u.len(), selected.len())));
    }
    // Gains do not depend on the powers; evaluate at unit power.
    let eff = effective_channels(ch, selected, 1.0, 1.0, params.sigma2)?;
    let (mu1, mu2) = power_gains(f, &eff, params.sigma2)?;
    let s2 = params.sigma2;

    let mut rows: Vec<[f64; 3]> = Vec::new();
    let mut h = Vec::new();
    // Leakage to the eavesdropper during the first slot.
    rows.push([ch.h1e.norm_sqr(), ch.h2e.norm_sqr(), 0.0]);
    h.push(s2 * ((2.0 * params.r_e).exp2() - 1.0));

    for (j, &i) in selected.iter().enumerate() {
        let c = params.xi[i] * (1.0 - params.rho[i]);
        let (a1, a2) = (ch.h1r[i].norm_sqr(), ch.h2r[i].norm_sqr());
        rows.push([-c * a1, -c * a2, 0.0]);
        h.push(c * s2 - u[j]);
    }
    for (j, &i) in selected.iter().enumerate() {
        let w = f[j].norm_sqr();
        if w > 0.0 {
            let (a1, a2) = (ch.h1r[i].norm_sqr(), ch.h2r[i].norm_sqr());
            rows.push([w * a1, w * a2, 0.0]);
            h.push(params.p_r - w * s2);
        }
    }
    for (j, &i) in selected.iter().enumerate() {
        let c = params.xi[i] * (1.0 - params.rho[i]) - f[j].norm_sqr();
        let (a1, a2) = (ch.h1r[i].norm_sqr(), ch.h2r[i].norm_sqr());
        rows.push([-c * a1, -c * a2, 1.0]);
        h.push(c * s2);
    }
    for v in 0..2 {
        let mut lower = [0.0; 3];
        lower[v] = -1.0;
        rows.push(lower);
        h.push(0.0);
        let mut upper = [0.0; 3];
        upper[v] = 1.0;
        rows.push(upper);
        h.push(params.p_max);
    }

    let p = rows.len();
    let g = DMatrix::from_fn(p, 3, |r, c| rows[r][c]);
    let c = DVector::from_vec(vec![-mu1, -mu2, -1.0]);
    Ok(ConicProblem::new(c, g, DVector::from_vec(h), vec![Cone::NonNeg(p)]))
}

pub fn solve_power_lp(
    f: &CVector,
    ch: &ChannelRealization,
    selected: &[usize],
    params: &SystemParams,
    u: &[f64],
) -> Result<PowerSolution> {
    let prob = build_power_lp(f, ch, selected, params, u)?;
    let sol = conic::solve_lp(&prob.c, &prob.g, &prob.h, &prob.a, &prob.b, DEFAULT_TOL)?;
    match sol.status {
        Status::Optimal => {}
        Status::PrimalInfeasible => return Err(Error::PowerInfeasible),
        other => return Err(Error::Solver(format!("power LP ended with {other:?}"))),
    }
    let clamp = |v: f64| v.clamp(0.0, params.p_max);
    Ok(PowerSolution {
        p1: clamp(sol.x[0]),
        p2: clamp(sol.x[1]),
        nu: sol.x[2],
        objective: -sol.obj,
    })
}
