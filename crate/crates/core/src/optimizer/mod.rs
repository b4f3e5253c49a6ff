//! Joint source-power and relay-beamforming design for the selected relays.
//!
//! Relay weights are restricted to the null space of the eavesdropper's
//! second-slot channels, `f = B f̄`. For fixed source powers the weights
//! come from a sequence of SOCPs (a grid over the rate split `β`, bisection
//! over the sum-rate target `r₀`); for fixed weights the source powers come
//! from an LP. [`alternating_optimize`] alternates the two.

mod alternating;
mod beamforming;
mod power;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mechanism::{relay_valuations, run_auction, AuctionOutcome};
use crate::model::{EffectiveChannels, Rates, RelayReport, SystemParams};
use crate::numerics::{CMatrix, CVector};

pub use alternating::{alternating_optimize, joint_objective, relay_only};
pub use beamforming::{beamforming_basis, bisect_rate, build_relay_socp, solve_beamforming, BeamformingSolution, SocpKind};
pub use power::{build_power_lp, power_gains, solve_power_lp, PowerSolution};

/// Harvested power each selected relay demands as its auction payoff.
#[derive(Debug, Clone, PartialEq)]
pub struct HarvestRequirements {
    /// Relay indices, in auction order.
    pub selected: Vec<usize>,
    /// Required harvested power per selected relay (W).
    pub u: Vec<f64>,
    /// Relays whose payoff was negative and was raised to zero.
    pub floored: Vec<usize>,
}

impl HarvestRequirements {
    /// No requirements at all.
    pub fn zero(selected: &[usize]) -> Self {
        Self {
            selected: selected.to_vec(),
            u: vec![0.0; selected.len()],
            floored: Vec::new(),
        }
    }
}

/// How the alternating loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Successive objectives differ by less than the tolerance.
    Converged,
    /// A cycle lowered the objective even with a shortened power step; the
    /// previous point is kept.
    Stalled,
    /// Iteration cap reached.
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSolution {
    pub selected: Vec<usize>,
    /// Relay weights, one per selected relay.
    pub f: CVector,
    pub p1: f64,
    pub p2: f64,
    /// Smallest stored power over the selected relays (W).
    pub nu: f64,
    /// Sum-rate target reached by beamforming at the returned powers (bps/Hz).
    pub r0: f64,
    pub beta: f64,
    pub rates: Rates,
    /// `[C1 + C2 − Ce]⁺` at the returned point (bps/Hz).
    pub secrecy_rate: f64,
    /// Objective after each accepted point. The returned point is the
    /// accepted one with the highest secrecy rate.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
}

/// Per-winner harvest demand: `π_i` times the relay's VCG utility when the
/// auction runs on valuations at full source power, floored at zero.
pub fn harvest_requirements(
    reports: &[RelayReport],
    outcome: &AuctionOutcome,
    params: &SystemParams,
) -> Result<HarvestRequirements> {
    if reports.len() != params.n || outcome.utilities.len() != params.n {
        return Err(Error::DimensionMismatch(format!(
            "{} reports and {} utilities for {} relays",
            reports.len(),
            outcome.utilities.len(),
            params.n
        )));
    }
    let mut u = Vec::with_capacity(outcome.winners.len());
    let mut floored = Vec::new();
    for &i in &outcome.winners {
        let demand = params.pi[i] * outcome.utilities[i];
        if demand < 0.0 {
            floored.push(i);
        }
        u.push(demand.max(0.0));
    }
    Ok(HarvestRequirements {
        selected: outcome.winners.clone(),
        u,
        floored,
    })
}

/// Runs the auction on truthful reports and derives the harvest demands.
pub fn select_relays(reports: &[RelayReport], params: &SystemParams) -> Result<(AuctionOutcome, HarvestRequirements)> {
    let values = relay_valuations(reports, params);
    let outcome = run_auction(&values, &values, params.k)?;
    let req = harvest_requirements(reports, &outcome, params)?;
    Ok((outcome, req))
}

/// Upper bound on any achievable sum-rate target at powers `(p1, p2)`:
/// twice the larger of the two one-way rates obtained by dropping the unit
/// term in the SNR denominators.
pub fn rate_upper_bound(eff: &EffectiveChannels, params: &SystemParams, p1: f64, p2: f64) -> f64 {
    // hᴴ C⁺ h with C = diag(|a|²) and h = a ⊙ b reduces to Σ_{a_k ≠ 0} |b_k|².
    let quotient = |a: &CVector, b: &CVector| -> f64 {
        a.iter()
            .zip(b.iter())
            .filter(|(ak, _)| ak.norm_sqr() > 0.0)
            .map(|(_, bk)| bk.norm_sqr())
            .sum()
    };
    let r1 = 0.5 * (1.0 + p2 / params.sigma2 * quotient(&eff.h1, &eff.h2)).log2();
    let r2 = 0.5 * (1.0 + p1 / params.sigma2 * quotient(&eff.h2, &eff.h1)).log2();
    2.0 * r1.max(r2)
}

/// Null-space basis with columns rotated so that `Bᴴ h21` is real and
/// non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedBasis {
    pub basis: CMatrix,
    /// `Bᴴ h21` after rotation (equal to `Bᴴ h12`).
    pub gain: DVector<f64>,
}

/// Rotates each basis column by a unit phase so that the projected
/// compound channel becomes real. `|fᴴ h21|` is unchanged for every `f̄`
/// up to the same rotation.
pub fn phase_align(eff: &EffectiveChannels, basis: &CMatrix) -> Result<AlignedBasis> {
    if basis.nrows() != eff.len() {
        return Err(Error::DimensionMismatch("basis rows must match the selection".into()));
    }
    let a = basis.adjoint() * &eff.h21;
    let mut rotated = basis.clone();
    for (k, ak) in a.iter().enumerate() {
        if ak.norm() > 0.0 {
            // Column k scaled by e^{jθ} turns a_k into e^{-jθ} a_k.
            let phase = Complex64::from_polar(1.0, ak.arg());
            let col = basis.column(k) * phase;
            rotated.set_column(k, &col);
        }
    }
    let gain = (rotated.adjoint() * &eff.h21).map(|v| v.re);
    Ok(AlignedBasis { basis: rotated, gain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{effective_channels, sample_channels};
    use crate::numerics::null_space_basis;
    use crate::numerics::testing::rng;
    use rand::Rng;

    #[test]
    fn requirements_follow_utilities() {
        let mut params = SystemParams::new(5, 3, 10.0);
        params.pi = vec![1.0; 5];
        let values = [22.0, 18.0, 15.0, 12.0, 8.0];
        let reports = vec![
            RelayReport {
                h1: Complex64::new(1.0, 0.0),
                h2: Complex64::new(1.0, 0.0),
                he: Complex64::new(0.0, 0.0),
            };
            5
        ];
        let outcome = run_auction(&values, &values, 3).unwrap();
        let req = harvest_requirements(&reports, &outcome, &params).unwrap();
        assert_eq!(req.selected, vec![0, 1, 2]);
        assert_eq!(req.u, vec![10.0, 6.0, 3.0]);
        assert!(req.floored.is_empty());

        let lie = [22.0, 18.0, 15.0, 22.0, 8.0];
        let outcome = run_auction(&lie, &values, 3).unwrap();
        let req = harvest_requirements(&reports, &outcome, &params).unwrap();
        assert_eq!(req.selected, vec![0, 3, 1]);
        assert_eq!(req.u, vec![7.0, 0.0, 3.0]);
        assert_eq!(req.floored, vec![3]);
    }

    #[test]
    fn requirements_scale_with_price() {
        let mut params = SystemParams::new(5, 3, 10.0);
        params.pi = vec![2.0, 0.5, 1.0, 1.0, 1.0];
        let values = [22.0, 18.0, 15.0, 12.0, 8.0];
        let reports = sample_channels(1, 5).unwrap().reports();
        let outcome = run_auction(&values, &values, 3).unwrap();
        let req = harvest_requirements(&reports, &outcome, &params).unwrap();
        assert_eq!(req.u, vec![20.0, 3.0, 3.0]);
    }

    #[test]
    fn rate_bound_examples() {
        let params = SystemParams::new(3, 3, 1.0);
        let ch = sample_channels(2, 3).unwrap();
        let mut zero = ch.clone();
        zero.h1r.fill(Complex64::new(0.0, 0.0));
        zero.h2r.fill(Complex64::new(0.0, 0.0));
        let eff = effective_channels(&zero, &[0, 1, 2], 1.0, 1.0, 1.0).unwrap();
        assert_eq!(rate_upper_bound(&eff, &params, 1.0, 1.0), 0.0);

        // One active relay: 2 · ½ log₂(1 + p |h1 h2|² / (σ² |h1|²)).
        let mut single = ch.clone();
        single.h1r[1] = Complex64::new(0.0, 0.0);
        single.h1r[2] = Complex64::new(0.0, 0.0);
        let (a, b) = (single.h1r[0].norm_sqr(), single.h2r[0].norm_sqr());
        single.h2r[1] = Complex64::new(0.0, 0.0);
        single.h2r[2] = Complex64::new(0.0, 0.0);
        let eff = effective_channels(&single, &[0, 1, 2], 2.0, 2.0, 1.0).unwrap();
        let expected = (1.0 + 2.0 * a * b / a).log2().max((1.0 + 2.0 * a * b / b).log2());
        assert!((rate_upper_bound(&eff, &params, 2.0, 2.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn rate_bound_dominates_link_rates() {
        let params = SystemParams::new(6, 4, 10.0);
        let mut r = rng(3);
        for seed in 0..20 {
            let ch = sample_channels(seed, 6).unwrap();
            let eff = effective_channels(&ch, &[0, 1, 2, 3], 3.0, 4.0, 1.0).unwrap();
            let bound = rate_upper_bound(&eff, &params, 3.0, 4.0);
            for _ in 0..50 {
                let f = crate::numerics::testing::random_cvector(&mut r, 4) * Complex64::new(r.random_range(0.1..100.0), 0.0);
                let (g1, g2) = crate::model::link_snrs(&f, &eff, 3.0, 4.0, 1.0).unwrap();
                let sum = crate::model::capacity(g1) + crate::model::capacity(g2);
                assert!(sum <= bound);
            }
        }
    }

    #[test]
    fn phase_alignment() {
        let ch = sample_channels(4, 6).unwrap();
        let eff = effective_channels(&ch, &[0, 2, 3, 5], 1.0, 1.0, 1.0).unwrap();
        let basis = null_space_basis(&eff.hbar_e).unwrap();
        let aligned = phase_align(&eff, &basis).unwrap();
        let a = aligned.basis.adjoint() * &eff.h21;
        for (ak, gk) in a.iter().zip(aligned.gain.iter()) {
            assert!(ak.im.abs() <= 1e-12);
            assert!((ak.re - gk).abs() <= 1e-12 && *gk >= 0.0);
        }
        assert!((aligned.basis.adjoint() * &aligned.basis - CMatrix::identity(2, 2)).iter().all(|v| v.norm() < 1e-10));
        assert!((eff.hbar_e.adjoint() * &aligned.basis).iter().all(|v| v.norm() < 1e-10));

        // A basis that is already aligned is left alone.
        let again = phase_align(&eff, &aligned.basis).unwrap();
        assert!((&again.basis - &aligned.basis).iter().all(|v| v.norm() < 1e-12));
    }
}
