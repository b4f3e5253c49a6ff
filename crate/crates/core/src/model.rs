//! Two-way amplify-and-forward relay network with power-splitting relays and
//! a single-antenna eavesdropper.
//!
//! Channel vectors are indexed by relay over the full population of `N`
//! relays; quantities that only concern the selected relays (effective
//! channels, beamforming weights) are indexed by position in the selection.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{det_2x2_hermitian_form, CMatrix, CVector};

/// How the alternating optimizer initializes the source powers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PowerInit {
    /// `p1 = p2 = P_max / (K + 2)`.
    #[default]
    Fraction,
    /// `p1 = p2 = P_max`.
    Max,
    /// Explicit starting powers (W).
    Given { p1: f64, p2: f64 },
}

/// Physical and algorithmic parameters of one network instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Number of candidate relays.
    pub n: usize,
    /// Number of relays to select.
    pub k: usize,
    /// Source power budget (W).
    pub p_max: f64,
    /// Per-relay transmit power budget (W).
    pub p_r: f64,
    /// Noise variance (W).
    pub sigma2: f64,
    /// Power-splitting fraction routed to forwarding, per relay.
    pub rho: Vec<f64>,
    /// Energy conversion efficiency, per relay.
    pub xi: Vec<f64>,
    /// Harvested power paid per unit secrecy rate (W per bps/Hz), per relay.
    pub pi: Vec<f64>,
    /// Cap on the eavesdropper's first-slot rate (bps/Hz).
    pub r_e: f64,
    /// Stopping tolerance of the alternating loop.
    pub tol_outer: f64,
    /// Number of rate-split samples over `[0, 1]`.
    pub beta_grid: usize,
    /// Bisection tolerance on the sum-rate target (bps/Hz).
    pub r0_tol: f64,
    /// Iteration cap of the alternating loop.
    pub max_outer_iter: usize,
    pub power_init: PowerInit,
}

impl SystemParams {
    /// Parameters with the usual simulation defaults: unit noise, `ρ = 0.5`,
    /// `ξ = 1`, `π = 1`, `r_e = 1`, relay budget `P_max / (K + 2)`.
    pub fn new(n: usize, k: usize, p_max: f64) -> Self {
        Self {
            n,
            k,
            p_max,
            p_r: p_max / (k as f64 + 2.0),
            sigma2: 1.0,
            rho: vec![0.5; n],
            xi: vec![1.0; n],
            pi: vec![1.0; n],
            r_e: 1.0,
            tol_outer: 1e-3,
            beta_grid: 21,
            r0_tol: 1e-3,
            max_outer_iter: 50,
            power_init: PowerInit::Fraction,
        }
    }

    /// Source power budget given in dB relative to 1 W.
    pub fn from_db(n: usize, k: usize, p_max_db: f64) -> Self {
        Self::new(n, k, db_to_watts(p_max_db))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.k < 3 || self.k > self.n {
            return bad(format!(
                "need 3 <= K <= N for null-space beamforming, got K={} N={}",
                self.k, self.n
            ));
        }
        if [self.rho.len(), self.xi.len(), self.pi.len()] != [self.n; 3] {
            return bad("rho, xi and pi must have one entry per relay".into());
        }
        if !(self.p_max > 0.0 && self.p_r > 0.0 && self.sigma2 > 0.0) {
            return bad("powers and noise variance must be positive".into());
        }
        if self.rho.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad("rho must lie in [0, 1]".into());
        }
        if self.xi.iter().any(|x| !(*x > 0.0 && *x <= 1.0)) {
            return bad("xi must lie in (0, 1]".into());
        }
        if self.pi.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return bad("pi must be non-negative".into());
        }
        if !(self.r_e >= 0.0 && self.tol_outer > 0.0 && self.r0_tol > 0.0) {
            return bad("r_e must be >= 0 and tolerances > 0".into());
        }
        if self.beta_grid < 2 {
            return bad("beta grid needs at least two points".into());
        }
        if let PowerInit::Given { p1, p2 } = self.power_init {
            if !(0.0..=self.p_max).contains(&p1) || !(0.0..=self.p_max).contains(&p2) {
                return bad(format!("initial powers ({p1}, {p2}) outside [0, P_max]"));
            }
        }
        Ok(())
    }
}

pub fn db_to_watts(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One draw of every channel in the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Source 1 to relays.
    pub h1r: CVector,
    /// Source 2 to relays.
    pub h2r: CVector,
    /// Relays to eavesdropper.
    pub hre: CVector,
    /// Source 1 to eavesdropper.
    pub h1e: Complex64,
    /// Source 2 to eavesdropper.
    pub h2e: Complex64,
}

/// The channel triple a relay reports to the mechanism designer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayReport {
    pub h1: Complex64,
    pub h2: Complex64,
    pub he: Complex64,
}

impl ChannelRealization {
    pub fn relay_count(&self) -> usize {
        self.h1r.len()
    }

    pub fn report(&self, i: usize) -> RelayReport {
        RelayReport {
            h1: self.h1r[i],
            h2: self.h2r[i],
            he: self.hre[i],
        }
    }

    pub fn reports(&self) -> Vec<RelayReport> {
        (0..self.relay_count()).map(|i| self.report(i)).collect()
    }

    /// Every channel multiplied by the same unit-modulus phase.
    pub fn rotated(&self, phase: f64) -> Self {
        let r = Complex64::from_polar(1.0, phase);
        Self {
            h1r: self.h1r.map(|v| v * r),
            h2r: self.h2r.map(|v| v * r),
            hre: self.hre.map(|v| v * r),
            h1e: self.h1e * r,
            h2e: self.h2e * r,
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        let count = self.relay_count();
        if i >= count {
            return Err(Error::IndexOutOfRange { index: i, count });
        }
        Ok(())
    }
}

fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws i.i.d. `CN(0, 1)` channels for `n` relays from a caller-owned RNG.
pub fn sample_channels_with(rng: &mut impl Rng, n: usize) -> Result<ChannelRealization> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one relay".into()));
    }
    let h1r = CVector::from_fn(n, |_, _| complex_gaussian(rng));
    let h2r = CVector::from_fn(n, |_, _| complex_gaussian(rng));
    let hre = CVector::from_fn(n, |_, _| complex_gaussian(rng));
    let h1e = complex_gaussian(rng);
    let h2e = complex_gaussian(rng);
    Ok(ChannelRealization {
        h1r,
        h2r,
        hre,
        h1e,
        h2e,
    })
}

/// Deterministic channel draw for a seed.
pub fn sample_channels(seed: u64, n: usize) -> Result<ChannelRealization> {
    sample_channels_with(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

/// Total received power at a relay before splitting: `p1|h1|² + p2|h2|² + σ²`.
fn received_power(h1: Complex64, h2: Complex64, p1: f64, p2: f64, sigma2: f64) -> f64 {
    p1 * h1.norm_sqr() + p2 * h2.norm_sqr() + sigma2
}

/// Power harvested by relay `i`: `ξ(1 − ρ)(p1|h1|² + p2|h2|² + σ²)`.
pub fn harvested_power(
    i: usize,
    p1: f64,
    p2: f64,
    ch: &ChannelRealization,
    rho_i: f64,
    xi_i: f64,
    sigma2: f64,
) -> Result<f64> {
    ch.check_index(i)?;
    if p1 < 0.0 || p2 < 0.0 {
        return Err(Error::InvalidParameter("source powers must be >= 0".into()));
    }
    Ok(xi_i * (1.0 - rho_i) * received_power(ch.h1r[i], ch.h2r[i], p1, p2, sigma2))
}

/// Net power relay `i` stores after forwarding with weight `f_i`; negative
/// when the relay must draw on its own battery.
pub fn battery_power(
    i: usize,
    f_i: Complex64,
    ch: &ChannelRealization,
    p1: f64,
    p2: f64,
    params: &SystemParams,
) -> Result<f64> {
    let harvested = harvested_power(i, p1, p2, ch, params.rho[i], params.xi[i], params.sigma2)?;
    let forwarded = f_i.norm_sqr() * received_power(ch.h1r[i], ch.h2r[i], p1, p2, params.sigma2);
    Ok(harvested - forwarded)
}

/// Channels seen through the selected relays.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannels {
    /// Relay indices, in selection order.
    pub selected: Vec<usize>,
    /// `h1r`, `h2r`, `hre` restricted to the selection.
    pub h1: CVector,
    pub h2: CVector,
    pub hre: CVector,
    /// Compound channel into source 1 (`diag(h1) h2`).
    pub h21: CVector,
    /// Compound channel into source 2 (`diag(h2) h1`).
    pub h12: CVector,
    /// Forwarded relay noise seen at source 1 and 2 (`diag(|h1|²)`, `diag(|h2|²)`).
    pub cn1: CMatrix,
    pub cn2: CMatrix,
    /// Eavesdropper's second-slot channels `[diag(hre) h1, diag(hre) h2]`.
    pub hbar_e: CMatrix,
    /// Diagonal of the relay received-power matrix at the given source powers.
    pub rs: DVector<f64>,
}

impl EffectiveChannels {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn rs_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.rs.map(|v| Complex64::new(v, 0.0)))
    }
}

fn validate_selection(ch: &ChannelRealization, selected: &[usize]) -> Result<()> {
    if selected.is_empty() {
        return Err(Error::InvalidParameter("empty relay selection".into()));
    }
    let mut seen = vec![false; ch.relay_count()];
    for &i in selected {
        ch.check_index(i)?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(())
}

pub fn effective_channels(
    ch: &ChannelRealization,
    selected: &[usize],
    p1: f64,
    p2: f64,
    sigma2: f64,
) -> Result<EffectiveChannels> {
    validate_selection(ch, selected)?;
    let k = selected.len();
    let pick = |v: &CVector| CVector::from_fn(k, |j, _| v[selected[j]]);
    let h1 = pick(&ch.h1r);
    let h2 = pick(&ch.h2r);
    let hre = pick(&ch.hre);

    let h21 = h1.component_mul(&h2);
    let h12 = h2.component_mul(&h1);
    let diag_sq = |v: &CVector| CMatrix::from_diagonal(&v.map(|x| Complex64::new(x.norm_sqr(), 0.0)));
    let cn1 = diag_sq(&h1);
    let cn2 = diag_sq(&h2);

    let mut hbar_e = CMatrix::zeros(k, 2);
    hbar_e.set_column(0, &hre.component_mul(&h1));
    hbar_e.set_column(1, &hre.component_mul(&h2));

    let rs = DVector::from_fn(k, |j, _| received_power(h1[j], h2[j], p1, p2, sigma2));

    Ok(EffectiveChannels {
        selected: selected.to_vec(),
        h1,
        h2,
        hre,
        h21,
        h12,
        cn1,
        cn2,
        hbar_e,
        rs,
    })
}

fn diag_form(f: &CVector, diag_of: &CVector) -> f64 {
    f.iter()
        .zip(diag_of.iter())
        .map(|(fk, hk)| fk.norm_sqr() * hk.norm_sqr())
        .sum()
}

/// SNRs of the `S2 → S1` and `S1 → S2` links for relay weights `f`.
pub fn link_snrs(f: &CVector, eff: &EffectiveChannels, p1: f64, p2: f64, sigma2: f64) -> Result<(f64, f64)> {
    if f.len() != eff.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} selected relays",
            f.len(),
            eff.len()
        )));
    }
    let gamma1 = p2 * f.dotc(&eff.h21).norm_sqr() / (sigma2 * (diag_form(f, &eff.h1) + 1.0));
    let gamma2 = p1 * f.dotc(&eff.h12).norm_sqr() / (sigma2 * (diag_form(f, &eff.h2) + 1.0));
    Ok((gamma1, gamma2))
}

/// `½ log₂(1 + γ)`: two slots per exchange.
pub fn capacity(snr: f64) -> f64 {
    0.5 * (1.0 + snr).log2()
}

/// Eavesdropper rate over both slots, including second-slot leakage through
/// the relays.
pub fn eavesdropper_capacity_full(
    f: &CVector,
    ch: &ChannelRealization,
    selected: &[usize],
    p1: f64,
    p2: f64,
    sigma2: f64,
) -> Result<f64> {
    let eff = effective_channels(ch, selected, p1, p2, sigma2)?;
    if f.len() != eff.len() {
        return Err(Error::DimensionMismatch("weight vector length".into()));
    }
    let (s1, s2) = (Complex64::new(p1.sqrt(), 0.0), Complex64::new(p2.sqrt(), 0.0));
    let leak1 = f.dotc(&eff.hbar_e.column(0));
    let leak2 = f.dotc(&eff.hbar_e.column(1));
    let he = CMatrix::from_row_slice(2, 2, &[s1 * ch.h1e, s2 * ch.h2e, s1 * leak1, s2 * leak2]);

    // Relay noise reaches E through |hre|² weighted by |f|².
    let relay_noise = diag_form(f, &eff.hre);
    let cov = CMatrix::from_diagonal(&CVector::from_vec(vec![
        Complex64::new(sigma2, 0.0),
        Complex64::new(sigma2 * (1.0 + relay_noise), 0.0),
    ]));
    let det = det_2x2_hermitian_form(&he, &cov)?;
    Ok((0.5 * det.log2()).max(0.0))
}

/// Eavesdropper rate when the relays null their second-slot leakage.
pub fn eavesdropper_capacity_nullspace(p1: f64, p2: f64, h1e: Complex64, h2e: Complex64, sigma2: f64) -> f64 {
    capacity((p1 * h1e.norm_sqr() + p2 * h2e.norm_sqr()) / sigma2)
}

/// Per-link and eavesdropper rates of one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub c1: f64,
    pub c2: f64,
    pub ce: f64,
}

impl Rates {
    pub fn sum(&self) -> f64 {
        self.c1 + self.c2
    }

    pub fn secrecy(&self) -> f64 {
        (self.c1 + self.c2 - self.ce).max(0.0)
    }
}

pub fn rates(
    f: &CVector,
    ch: &ChannelRealization,
    selected: &[usize],
    p1: f64,
    p2: f64,
    sigma2: f64,
) -> Result<Rates> {
    let eff = effective_channels(ch, selected, p1, p2, sigma2)?;
    let (g1, g2) = link_snrs(f, &eff, p1, p2, sigma2)?;
    Ok(Rates {
        c1: capacity(g1),
        c2: capacity(g2),
        ce: eavesdropper_capacity_full(f, ch, selected, p1, p2, sigma2)?,
    })
}

/// `[C1 + C2 − Ce]⁺` with the full two-slot eavesdropper rate.
pub fn secrecy_sum_rate(
    f: &CVector,
    ch: &ChannelRealization,
    selected: &[usize],
    p1: f64,
    p2: f64,
    sigma2: f64,
) -> Result<f64> {
    Ok(rates(f, ch, selected, p1, p2, sigma2)?.secrecy())
}

/// Two-way secrecy rate a single relay could support on its own, with an
/// amplification factor that meets the relay budget `p_r` exactly.
/// First-slot leakage is not part of the valuation.
pub fn siso_secrecy_valuation(g: &RelayReport, p1: f64, p2: f64, p_r: f64, sigma2: f64) -> f64 {
    let a = g.h1.norm_sqr();
    let b = g.h2.norm_sqr();
    let alpha2 = 1.0 / received_power(g.h1, g.h2, p1, p2, sigma2);
    let gain = alpha2 * p_r;
    let t1 = gain * p1 * a * b / (sigma2 * (gain * a + 1.0));
    let t2 = gain * p2 * b * a / (sigma2 * (gain * b + 1.0));
    0.5 * ((1.0 + t1).log2() + (1.0 + t2).log2())
}
