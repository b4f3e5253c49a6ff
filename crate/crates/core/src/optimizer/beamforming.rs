//! Relay weights for fixed source powers.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{phase_align, rate_upper_bound, AlignedBasis};
use crate::conic::{self, Cone, ConicProblem, Feasibility, Status, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::model::{EffectiveChannels, SystemParams};
use crate::numerics::{complex_matrix_to_real, null_space_basis, real_to_complex, CVector};

/// Which variant of the relay SOCP to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SocpKind {
    /// Rate and relay-power cones only, over `f̄`.
    Feasibility,
    /// Adds the stored-power slack `ν` and maximizes it.
    MaxStoredPower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    /// Relay weights `B f̄`.
    pub f: CVector,
    /// Coordinates in the aligned null-space basis.
    pub fbar: CVector,
    /// Smallest stored power over the selected relays at `f` (W).
    pub nu: f64,
    pub r0: f64,
    pub beta: f64,
}

/// Phase-aligned orthonormal basis of the weights that null both
/// second-slot leakage terms.
pub fn beamforming_basis(eff: &EffectiveChannels) -> Result<AlignedBasis> {
    if eff.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "null-space beamforming needs K >= 3, got K={}",
            eff.len()
        )));
    }
    let basis = null_space_basis(&eff.hbar_e)?;
    phase_align(eff, &basis)
}

/// `η` factors of the two rate cones, `None` when a positive target is
/// requested from a silent source.
fn rate_factors(beta: f64, r0: f64, p1: f64, p2: f64, sigma2: f64) -> Option<(f64, f64)> {
    let t1 = (2.0 * beta * r0).exp2() - 1.0;
    let t2 = (2.0 * (1.0 - beta) * r0).exp2() - 1.0;
    let factor = |t: f64, p: f64| match (t > 0.0, p > 0.0) {
        (false, _) => Some(0.0),
        (true, true) => Some(sigma2 * t / p),
        (true, false) => None,
    };
    Some((factor(t1, p2)?, factor(t2, p1)?))
}

fn check_harvest(eff: &EffectiveChannels, params: &SystemParams, u: &[f64]) -> Result<()> {
    if u.len() != eff.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} harvest demands for {} relays",
            u.len(),
            eff.len()
        )));
    }
    for (j, &i) in eff.selected.iter().enumerate() {
        let available = params.xi[i] * (1.0 - params.rho[i]) * eff.rs[j];
        if available < u[j] {
            return Err(Error::HarvestInfeasible {
                relay: i,
                required: u[j],
                available,
            });
        }
    }
    Ok(())
}

/// Appends the cone `‖u‖ ≤ t` with `t = q·x + t0`, `u = M x + m0`.
struct Builder {
    rows: Vec<DVector<f64>>,
    h: Vec<f64>,
    cones: Vec<Cone>,
    n: usize,
}

impl Builder {
    fn soc(&mut self, t: (DVector<f64>, f64), u: Vec<(DVector<f64>, f64)>) {
        self.cones.push(Cone::SecondOrder(1 + u.len()));
        for (coef, offset) in std::iter::once(t).chain(u) {
            self.rows.push(-coef);
            self.h.push(offset);
        }
    }

    fn row(&self, real_row: nalgebra::RowDVector<f64>) -> DVector<f64> {
        let mut v = DVector::zeros(self.n);
        v.rows_mut(0, real_row.len()).copy_from(&real_row.transpose());
        v
    }
}

/// Assembles the relay SOCP for rate split `beta` and target `r0`.
///
/// Variables are `[Re f̄; Im f̄]`, followed by `ν` for
/// [`SocpKind::MaxStoredPower`]. Constraints: both directional rates reach
/// their share of `r0`, every relay stays within `p_r`, and (with `ν`) every
/// relay stores at least `ν`.
#[allow(clippy::too_many_arguments)]
pub fn build_relay_socp(
    kind: SocpKind,
    beta: f64,
    r0: f64,
    eff: &EffectiveChannels,
    basis: &AlignedBasis,
    params: &SystemParams,
    p1: f64,
    p2: f64,
    u: &[f64],
) -> Result<ConicProblem> {
    let k = eff.len();
    if k < 3 || basis.basis.nrows() != k {
        return Err(Error::InvalidParameter("need K >= 3 and a matching basis".into()));
    }
    if !(0.0..=1.0).contains(&beta) || !(r0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta={beta} r0={r0} out of range")));
    }
    check_harvest(eff, params, u)?;
    let (eta1, eta2) = rate_factors(beta, r0, p1, p2, params.sigma2)
        .ok_or_else(|| Error::InvalidParameter("positive rate target with a silent source".into()))?;

    let d = basis.basis.ncols();
    let with_nu = kind == SocpKind::MaxStoredPower;
    let n = 2 * d + usize::from(with_nu);
    let br = complex_matrix_to_real(&basis.basis);
    let mut b = Builder {
        rows: Vec::new(),
        h: Vec::new(),
        cones: Vec::new(),
        n,
    };

    // √η ‖[diag(|h|) f; 1]‖ ≤ gainᵀ Re f̄
    let mut gain = DVector::zeros(n);
    gain.rows_mut(0, d).copy_from(&basis.gain);
    for (eta, h) in [(eta1, &eff.h1), (eta2, &eff.h2)] {
        if eta == 0.0 {
            continue;
        }
        let se = eta.sqrt();
        let mut u_rows = Vec::with_capacity(2 * k + 1);
        for r in 0..2 * k {
            u_rows.push((b.row(br.row(r) * (se * h[r % k].norm())), 0.0));
        }
        u_rows.push((DVector::zeros(n), se));
        b.soc((gain.clone(), 0.0), u_rows);
    }

    for (j, &i) in eff.selected.iter().enumerate() {
        let re = b.row(br.row(j).into_owned());
        let im = b.row(br.row(k + j).into_owned());
        b.soc(
            (DVector::zeros(n), (params.p_r / eff.rs[j]).sqrt()),
            vec![(re.clone(), 0.0), (im.clone(), 0.0)],
        );
        if with_nu {
            // |f_j|² ≤ w with w = ξ(1−ρ) − ν/R_jj, as ‖(2 f_j, w − 1)‖ ≤ w + 1.
            let c = params.xi[i] * (1.0 - params.rho[i]);
            let mut nu_coef = DVector::zeros(n);
            nu_coef[n - 1] = -1.0 / eff.rs[j];
            b.soc(
                (nu_coef.clone(), c + 1.0),
                vec![(re * 2.0, 0.0), (im * 2.0, 0.0), (nu_coef, c - 1.0)],
            );
        }
    }

    let p = b.rows.len();
    let g = DMatrix::from_fn(p, n, |r, c| b.rows[r][c]);
    let mut c = DVector::zeros(n);
    if with_nu {
        c[n - 1] = -1.0;
    }
    Ok(ConicProblem::new(c, g, DVector::from_vec(b.h), b.cones))
}

fn fbar_from(x: &DVector<f64>, d: usize) -> CVector {
    real_to_complex(&x.rows(0, 2 * d).into_owned())
}

/// Largest feasible `r₀` (to `params.r0_tol`) for a fixed split, with the
/// feasible `f̄` found there.
#[allow(clippy::too_many_arguments)]
pub fn bisect_rate(
    beta: f64,
    eff: &EffectiveChannels,
    basis: &AlignedBasis,
    params: &SystemParams,
    p1: f64,
    p2: f64,
    u: &[f64],
    r_max: f64,
) -> Result<(f64, CVector)> {
    let d = basis.basis.ncols();
    let probe = |r0: f64| -> Result<Option<CVector>> {
        if rate_factors(beta, r0, p1, p2, params.sigma2).is_none() {
            return Ok(None);
        }
        let prob = build_relay_socp(SocpKind::Feasibility, beta, r0, eff, basis, params, p1, p2, u)?;
        Ok(match conic::feasibility(&prob, DEFAULT_TOL)? {
            Feasibility::Feasible(x) => Some(fbar_from(&x, d)),
            Feasibility::Infeasible => None,
        })
    };
    let mut best = CVector::zeros(d);
    if let Some(f) = probe(r_max)? {
        return Ok((r_max, f));
    }
    let (mut lo, mut hi) = (0.0, r_max);
    while hi - lo > params.r0_tol {
        let mid = 0.5 * (lo + hi);
        match probe(mid)? {
            Some(f) => {
                lo = mid;
                best = f;
            }
            None => hi = mid,
        }
    }
    Ok((lo, best))
}

fn stored_power_floor(f: &CVector, eff: &EffectiveChannels, params: &SystemParams) -> f64 {
    eff.selected
        .iter()
        .enumerate()
        .map(|(j, &i)| eff.rs[j] * (params.xi[i] * (1.0 - params.rho[i]) - f[j].norm_sqr()))
        .fold(f64::INFINITY, f64::min)
}

/// Best relay weights at source powers `(p1, p2)`: for every split on the
/// grid, bisect the sum-rate target and then maximize the stored-power
/// floor `ν` at that target. Returns the split maximizing `r₀ + ν`.
pub fn solve_beamforming(
    eff: &EffectiveChannels,
    params: &SystemParams,
    p1: f64,
    p2: f64,
    u: &[f64],
) -> Result<BeamformingSolution> {
    let basis = beamforming_basis(eff)?;
    check_harvest(eff, params, u)?;
    let r_max = rate_upper_bound(eff, params, p1, p2);
    let steps = params.beta_grid.max(2) - 1;
    let candidates: Vec<BeamformingSolution> = (0..=steps)
        .into_par_iter()
        .map(|s| {
            let beta = s as f64 / steps as f64;
            let (r0, feasible_fbar) = bisect_rate(beta, eff, &basis, params, p1, p2, u, r_max)?;
            let prob = build_relay_socp(SocpKind::MaxStoredPower, beta, r0, eff, &basis, params, p1, p2, u)?;
            let sol = conic::solve(&prob, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            let fbar = if sol.status == Status::Optimal {
                fbar_from(&sol.x, basis.basis.ncols())
            } else {
                log::debug!("stored-power SOCP ended {:?} at beta={beta}, keeping the feasible point", sol.status);
                feasible_fbar
            };
            let f = &basis.basis * &fbar;
            Ok(BeamformingSolution {
                nu: stored_power_floor(&f, eff, params),
                f,
                fbar,
                r0,
                beta,
            })
        })
        .collect::<Result<_>>()?;

    let better = |a: &BeamformingSolution, b: &BeamformingSolution| {
        let (sa, sb) = (a.r0 + a.nu, b.r0 + b.nu);
        if (sa - sb).abs() > 1e-12 {
            return sa > sb;
        }
        if a.r0 != b.r0 {
            return a.r0 > b.r0;
        }
        a.beta < b.beta
    };
    let mut best = candidates[0].clone();
    for c in &candidates[1..] {
        if better(c, &best) {
            best = c.clone();
        }
    }
    Ok(best)
}
