//! Constraint checks replayed on optimizer output.

use anyhow::{ensure, Result};
use relayopt_core::model::{effective_channels, secrecy_sum_rate};
use relayopt_core::{ChannelRealization, JointSolution, SystemParams};

const SLACK: f64 = 1e-6;

/// Checks zero-forcing, the power budgets, the harvest demands `u` and the
/// trace, and that the reported secrecy rate matches a recomputation.
/// The leakage cap is checked only when `leakage` is set, since the
/// relay-only scheme keeps its starting powers whatever they leak.
pub fn check_solution(
    sol: &JointSolution,
    ch: &ChannelRealization,
    params: &SystemParams,
    u: &[f64],
    leakage: bool,
) -> Result<()> {
    let (p1, p2) = (sol.p1, sol.p2);
    ensure!(
        (-SLACK..=params.p_max + SLACK).contains(&p1) && (-SLACK..=params.p_max + SLACK).contains(&p2),
        "source powers ({p1}, {p2}) outside [0, {}]",
        params.p_max
    );
    let eff = effective_channels(ch, &sol.selected, p1, p2, params.sigma2)?;
    for col in eff.hbar_e.column_iter() {
        let leak = sol.f.dotc(&col.into_owned()).norm();
        ensure!(leak <= 1e-8 * (1.0 + sol.f.norm()), "relay signal reaches the eavesdropper ({leak:e})");
    }
    for (j, &i) in sol.selected.iter().enumerate() {
        let received = p1 * ch.h1r[i].norm_sqr() + p2 * ch.h2r[i].norm_sqr() + params.sigma2;
        let sent = sol.f[j].norm_sqr() * received;
        ensure!(sent <= params.p_r * (1.0 + SLACK) + SLACK, "relay {i} transmits {sent} > {}", params.p_r);
        let harvested = params.xi[i] * (1.0 - params.rho[i]) * received;
        ensure!(harvested >= u[j] - SLACK, "relay {i} harvests {harvested} < {}", u[j]);
    }
    if leakage {
        let leak = ch.h1e.norm_sqr() * p1 + ch.h2e.norm_sqr() * p2;
        let cap = params.sigma2 * ((2.0 * params.r_e).exp2() - 1.0);
        ensure!(leak <= cap + SLACK, "first-slot leakage {leak} above {cap}");
    }
    ensure!(sol.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9), "objective trace decreases");
    let secrecy = secrecy_sum_rate(&sol.f, ch, &sol.selected, p1, p2, params.sigma2)?;
    ensure!(
        (secrecy - sol.secrecy_rate).abs() <= 1e-9,
        "secrecy rate {} does not match recomputed {secrecy}",
        sol.secrecy_rate
    );
    Ok(())
}
