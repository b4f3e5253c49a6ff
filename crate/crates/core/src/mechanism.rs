//! Sealed-bid K-winner VCG auction used to pick the forwarding relays.
//!
//! Valuations are real and non-negative. Selection and payments use the
//! reported values; utilities credit the true values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{siso_secrecy_valuation, RelayReport, SystemParams};

/// Result of one auction round.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    /// Winner indices sorted by reported value, highest first.
    pub winners: Vec<usize>,
    /// Payment received by each bidder; winners get `-clearing_price`.
    pub transfers: Vec<f64>,
    /// True value plus transfer for winners, zero for losers.
    pub utilities: Vec<f64>,
    /// The (K+1)-st highest reported value.
    pub clearing_price: f64,
}

impl AuctionOutcome {
    pub fn is_winner(&self, i: usize) -> bool {
        self.winners.contains(&i)
    }

    pub fn welfare(&self) -> f64 {
        self.utilities.iter().sum()
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

fn check_profile(values: &[f64], k: usize) -> Result<()> {
    if k == 0 || k >= values.len() {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= K < N, got K={k} N={}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidParameter("values must be finite and >= 0".into()));
    }
    Ok(())
}

/// Indices ordered by value descending, ties by lowest index.
fn ranking(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// The K bidders with the largest values.
pub fn vcg_select(values: &[f64], k: usize) -> Result<Vec<usize>> {
    check_profile(values, k)?;
    let mut order = ranking(values);
    order.truncate(k);
    Ok(order)
}

/// Uniform-price VCG transfers: every winner pays the highest losing bid.
pub fn vcg_transfers(values: &[f64], k: usize) -> Result<Vec<f64>> {
    check_profile(values, k)?;
    let order = ranking(values);
    let price = values[order[k]];
    let mut t = vec![0.0; values.len()];
    for &i in &order[..k] {
        t[i] = -price;
    }
    Ok(t)
}

/// Runs the auction on `reported` and credits `truth`.
pub fn run_auction(reported: &[f64], truth: &[f64], k: usize) -> Result<AuctionOutcome> {
    if reported.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} reports for {} true values",
            reported.len(),
            truth.len()
        )));
    }
    check_profile(reported, k)?;
    let order = ranking(reported);
    let clearing_price = reported[order[k]];
    let winners = order[..k].to_vec();
    let mut transfers = vec![0.0; reported.len()];
    let mut utilities = vec![0.0; reported.len()];
    for &i in &winners {
        transfers[i] = -clearing_price;
        utilities[i] = truth[i] - clearing_price;
    }
    Ok(AuctionOutcome {
        winners,
        transfers,
        utilities,
        clearing_price,
    })
}

pub fn vcg_utilities(reported: &[f64], truth: &[f64], k: usize) -> Result<Vec<f64>> {
    Ok(run_auction(reported, truth, k)?.utilities)
}

/// Valuation of every relay from its reported channels, with both sources
/// at full power.
pub fn relay_valuations(reports: &[RelayReport], params: &SystemParams) -> Vec<f64> {
    reports
        .iter()
        .map(|g| siso_secrecy_valuation(g, params.p_max, params.p_max, params.p_r, params.sigma2))
        .collect()
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Probability that a bid of `x` wins against `n - 1` independent Exp(1)
/// rival values, i.e. that fewer than `k` rivals exceed it.
pub fn selection_probability(x: f64, n: usize, k: usize) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("bid must be >= 0, got {x}")));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("need 1 <= K < N, got K={k} N={n}")));
    }
    let above = (-x).exp();
    let below = -(-x).exp_m1();
    let rivals = n - 1;
    let p: f64 = (0..k)
        .map(|j| binomial(rivals, j) * above.powi(j as i32) * below.powi((rivals - j) as i32))
        .sum();
    Ok(p.clamp(0.0, 1.0))
}

/// Utility of bidder 0 bidding `reported` against `rivals`, which are
/// reordered in place.
fn own_utility(reported: f64, truth: f64, rivals: &mut [f64], k: usize) -> f64 {
    // Bidder 0 wins ties, so it loses only when k rivals bid strictly more.
    let above = rivals.iter().filter(|&&r| r > reported).count();
    if above >= k {
        return 0.0;
    }
    // With bidder 0 among the winners, the price is the k-th highest rival.
    let (_, kth, _) = rivals.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    truth - *kth
}

const CHUNK: usize = 4096;

/// Monte Carlo expected payoff of a bidder (index 0) that reports
/// `x_reported` while holding value `x_true`, against `n - 1` Exp(1)
/// rivals. Deterministic for a given seed regardless of thread count.
pub fn expected_payoff(
    x_reported: f64,
    x_true: f64,
    pi_i: f64,
    n: usize,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<PayoffEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("need 1 <= K < N, got K={k} N={n}")));
    }
    if !(x_reported >= 0.0 && x_true >= 0.0) {
        return Err(Error::InvalidParameter("values must be >= 0".into()));
    }
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut rivals = vec![0.0; n - 1];
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..count {
                for r in rivals.iter_mut() {
                    *r = Exp1.sample(&mut rng);
                }
                let u = pi_i * own_utility(x_reported, x_true, &mut rivals, k);
                sum += u;
                sq += u * u;
            }
            (sum, sq)
        })
        .collect();
    let (sum, sq) = partial.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let m = samples as f64;
    let mean = sum / m;
    let var = if samples > 1 {
        ((sq - m * mean * mean) / (m - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(PayoffEstimate {
        mean,
        stderr: (var / m).sqrt(),
        samples,
    })
}

/// Payoff of bidder `i` for each report in `grid`, all other bidders
/// truthful.
pub fn payoff_curve(true_values: &[f64], i: usize, grid: &[f64], k: usize) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty report grid".into()));
    }
    if i >= true_values.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            count: true_values.len(),
        });
    }
    let mut reported = true_values.to_vec();
    grid.iter()
        .map(|&x| {
            reported[i] = x;
            Ok((x, run_auction(&reported, true_values, k)?.utilities[i]))
        })
        .collect()
}
