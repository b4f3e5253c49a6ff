//! Experiment runners. Each produces one CSV table.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use relayopt_core::mechanism::{expected_payoff, payoff_curve, run_auction};
use relayopt_core::model::sample_channels;
use relayopt_core::optimizer::{alternating_optimize, relay_only, select_relays};
use relayopt_core::{ChannelRealization, JointSolution, SystemParams};

use crate::audit::check_solution;
use crate::config::{Experiment, ExperimentConfig};

/// A CSV table held as formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner()?)
    }
}

/// What one run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub path: PathBuf,
    pub table: Table,
    /// Instances dropped because the optimizer found them infeasible.
    pub skipped: usize,
    /// Rows recomputed by `--verify`.
    pub verified: usize,
    /// Lines for the terminal.
    pub summary: Vec<String>,
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Rows replayed by the verifier: every hundredth, starting with the first.
fn verify_rows(rows: usize) -> impl Iterator<Item = usize> {
    (0..rows).step_by(100)
}

pub fn run(cfg: &ExperimentConfig, out_dir: &Path, verify: bool) -> Result<Report> {
    cfg.validate()?;
    let mut report = match cfg.experiment {
        Experiment::VcgDemo => vcg_demo(cfg, verify)?,
        Experiment::Exaggeration => exaggeration(cfg, verify)?,
        Experiment::PayoffCurve => payoff_curves(cfg, verify)?,
        Experiment::ExpectedPayoff => expected_payoffs(cfg, verify)?,
        Experiment::PowerSweep => power_sweep(cfg, verify)?,
        Experiment::Baselines => baselines(cfg, verify)?,
        Experiment::Convergence => convergence(cfg, verify)?,
    };
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    report.path = out_dir.join(&cfg.output);
    std::fs::write(&report.path, report.table.to_csv()?).with_context(|| format!("writing {}", report.path.display()))?;
    Ok(report)
}

fn report(table: Table, skipped: usize, verified: usize, summary: Vec<String>) -> Report {
    Report {
        path: PathBuf::new(),
        table,
        skipped,
        verified,
        summary,
    }
}

fn auction_rows(table: &mut Table, case: Option<&str>, reported: &[f64], truth: &[f64], k: usize) -> Result<f64> {
    let out = run_auction(reported, truth, k)?;
    for (i, &x) in reported.iter().enumerate() {
        let mut row = case.map(|c| vec![c.to_string()]).unwrap_or_default();
        row.extend([
            i.to_string(),
            num(x),
            out.is_winner(i).to_string(),
            num(out.transfers[i]),
            num(out.utilities[i]),
        ]);
        table.push(row);
    }
    Ok(out.welfare())
}

/// Independent replay of the uniform-price rule for one bidder.
fn check_auction_row(reported: &[f64], truth: &[f64], k: usize, i: usize, transfer: f64, utility: f64) -> Result<()> {
    let mut sorted = reported.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let price = sorted[k];
    let rank = reported.iter().enumerate().filter(|&(j, &v)| v > reported[i] || (v == reported[i] && j < i)).count();
    let (t, u) = if rank < k { (-price, truth[i] - price) } else { (0.0, 0.0) };
    ensure!(t == transfer && u == utility, "bidder {i}: expected transfer {t} utility {u}, got {transfer} {utility}");
    Ok(())
}

fn vcg_demo(cfg: &ExperimentConfig, verify: bool) -> Result<Report> {
    let mut table = Table::new(&["relay", "value", "winner", "transfer", "utility"]);
    let welfare = auction_rows(&mut table, None, &cfg.values, &cfg.values, cfg.k)?;
    let mut verified = 0;
    if verify {
        for r in verify_rows(table.rows.len()) {
            let row = &table.rows[r];
            check_auction_row(&cfg.values, &cfg.values, cfg.k, r, row[3].parse()?, row[4].parse()?)?;
            verified += 1;
        }
    }
    let mut summary = vec![format!("{:>5} {:>10} {:>6} {:>10} {:>10}", "relay", "value", "winner", "transfer", "utility")];
    summary.extend(
        table
            .rows
            .iter()
            .map(|r| format!("{:>5} {:>10} {:>6} {:>10} {:>10}", r[0], r[1], r[2], r[3], r[4])),
    );
    summary.push(format!("welfare {welfare}"));
    Ok(report(table, 0, verified, summary))
}

fn exaggeration(cfg: &ExperimentConfig, verify: bool) -> Result<Report> {
    let mut table = Table::new(&["case", "relay", "reported", "winner", "transfer", "utility"]);
    let mut lying = cfg.values.clone();
    lying[cfg.relay] = cfg.report;
    let honest = auction_rows(&mut table, Some("truthful"), &cfg.values, &cfg.values, cfg.k)?;
    let exaggerated = auction_rows(&mut table, Some("exaggerated"), &lying, &cfg.values, cfg.k)?;
    let mut verified = 0;
    if verify {
        let n = cfg.values.len();
        for r in verify_rows(table.rows.len()) {
            let row = &table.rows[r];
            let reported = if r < n { &cfg.values } else { &lying };
            check_auction_row(reported, &cfg.values, cfg.k, r % n, row[4].parse()?, row[5].parse()?)?;
            verified += 1;
        }
    }
    let summary = vec![
        format!("truthful welfare {honest}"),
        format!("relay {} reports {}: welfare {exaggerated}", cfg.relay, cfg.report),
    ];
    Ok(report(table, 0, verified, summary))
}

/// Uniform grid over `[0, 1.25 max]` plus the values themselves, so the
/// jumps of every curve fall on grid points.
fn report_grid(values: &[f64], points: usize) -> Vec<f64> {
    let top = 1.25 * values.iter().cloned().fold(0.0, f64::max);
    let mut grid: Vec<f64> = (0..points).map(|j| top * j as f64 / (points - 1) as f64).collect();
    grid.extend_from_slice(values);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Reports at which a payoff curve changes value.
pub fn curve_jumps(curve: &[(f64, f64)]) -> Vec<f64> {
    curve.windows(2).filter(|w| w[0].1 != w[1].1).map(|w| w[1].0).collect()
}

fn payoff_curves(cfg: &ExperimentConfig, verify: bool) -> Result<Report> {
    let grid = report_grid(&cfg.values, cfg.grid_points);
    let mut table = Table::new(&["relay", "reported", "payoff"]);
    let mut summary = Vec::new();
    let mut verified = 0;
    for i in 0..cfg.values.len() {
        let curve = payoff_curve(&cfg.values, i, &grid, cfg.k)?;
        for &(x, p) in &curve {
            table.push(vec![i.to_string(), num(x), num(p)]);
        }
        let jumps: Vec<String> = curve_jumps(&curve).iter().map(|x| num(*x)).collect();
        summary.push(format!("relay {i} (value {}): payoff changes at {}", cfg.values[i], jumps.join(", ")));
    }
    if verify {
        let m = grid.len();
        for r in verify_rows(table.rows.len()) {
            let (i, x) = (r / m, grid[r % m]);
            let mut reported = cfg.values.clone();
            reported[i] = x;
            let payoff: f64 = table.rows[r][2].parse()?;
            let out = run_auction(&reported, &cfg.values, cfg.k)?;
            ensure!(out.utilities[i] == payoff, "row {r}: payoff {payoff} but auction gives {}", out.utilities[i]);
            verified += 1;
        }
    }
    Ok(report(table, 0, verified, summary))
}

/// Averages the estimates of all seeds at one report.
fn pooled_payoff(cfg: &ExperimentConfig, reported: f64) -> Result<(f64, f64)> {
    let est: Vec<_> = cfg
        .seeds
        .iter()
        .map(|&s| expected_payoff(reported, cfg.true_value, cfg.pi, cfg.n, cfg.k, cfg.samples, s))
        .collect::<relayopt_core::Result<_>>()?;
    let m = est.len() as f64;
    let mean = est.iter().map(|e| e.mean).sum::<f64>() / m;
    let stderr = est.iter().map(|e| e.stderr * e.stderr).sum::<f64>().sqrt() / m;
    Ok((mean, stderr))
}

fn expected_payoffs(cfg: &ExperimentConfig, verify: bool) -> Result<Report> {
    let top = 3.0 * cfg.true_value.max(1.0);
    let grid: Vec<f64> = (0..cfg.grid_points).map(|j| top * j as f64 / (cfg.grid_points - 1) as f64).collect();
    let mut table = Table::new(&["reported", "mean_payoff", "stderr"]);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for &x in &grid {
        let (mean, se) = pooled_payoff(cfg, x)?;
        if mean > best.0 {
            best = (mean, x);
        }
        table.push(vec![num(x), num(mean), num(se)]);
    }
    let mut verified = 0;
    if verify {
        for r in verify_rows(table.rows.len()) {
            let (mean, se) = pooled_payoff(cfg, grid[r])?;
            ensure!(num(mean) == table.rows[r][1] && num(se) == table.rows[r][2], "row {r} does not replay");
            ensure!(se >= 0.0, "row {r}: negative standard error");
            verified += 1;
        }
    }
    let summary = vec![format!(
        "true value {}: best report on the grid {} (mean payoff {})",
        cfg.true_value, best.1, best.0
    )];
    Ok(report(table, 0, verified, summary))
}

/// One network instance: channels, selection and demands at a power budget.
struct Instance {
    ch: ChannelRealization,
    params: SystemParams,
    selected: Vec<usize>,
    u: Vec<f64>,
}

fn instance(cfg: &ExperimentConfig, seed: u64, db: f64) -> Result<Instance> {
    let ch = sample_channels(seed, cfg.n)?;
    let params = cfg.system_params(db);
    let (_, req) = select_relays(&ch.reports(), &params)?;
    Ok(Instance {
        ch,
        params,
        selected: req.selected,
        u: req.u,
    })
}

/// Joint and relay-only solutions, or `None` when either is infeasible.
fn solve_pair(cfg: &ExperimentConfig, seed: u64, db: f64) -> Result<Option<(Instance, JointSolution, JointSolution)>> {
    let inst = instance(cfg, seed, db)?;
    let joint = alternating_optimize(&inst.ch, &inst.selected, &inst.params, &inst.u);
    let fixed = relay_only(&inst.ch, &inst.selected, &inst.params, &inst.u);
    match (joint, fixed) {
        (Ok(j), Ok(f)) => Ok(Some((inst, j, f))),
        (Err(e), _) | (_, Err(e)) => {
            log::warn!("seed {seed} at {db} dB skipped: {e}");
            Ok(None)
        }
    }
}

fn check_pair(inst: &Instance, joint: &JointSolution, fixed: &JointSolution) -> Result<()> {
    check_solution(joint, &inst.ch, &inst.params, &inst.u, true).context("joint")?;
    check_solution(fixed, &inst.ch, &inst.params, &inst.u, false).context("relay-only")?;
    Ok(())
}

type Pair = Option<(Instance, JointSolution, JointSolution)>;

fn sweep(cfg: &ExperimentConfig) -> Result<Vec<(f64, u64, Pair)>> {
    let cases: Vec<(f64, u64)> = cfg.p_max_db.iter().flat_map(|&db| cfg.seeds.iter().map(move |&s| (db, s))).collect();
    cases
        .par_iter()
        .map(|&(db, s)| Ok((db, s, solve_pair(cfg, s, db)?)))
        .collect()
}

fn power_sweep(cfg: &ExperimentConfig, verify: bool) -> Result<Report> {
    let results = sweep(cfg)?;
    let mut table = Table::new(&["P_max_dB", "scheme", "secrecy_rate"]);
    let mut skipped = 0;
    let mut summary = Vec::new();
    for &db in &cfg.p_max_db {
        let solved: Vec<_> = results.iter().filter(|r| r.0 == db).filter_map(|r| r.2.as_ref()).collect();
        skipped += cfg.seeds.len() - solved.len();
        if solved.is_empty() {
            summary.push(format!("{db} dB: every seed infeasible"));
            continue;
        }
        let m = solved.len() as f64;
        let joint = solved.iter().map(|s| s.1.secrecy_rate).sum::<f64>() / m;
        let fixed = solved.iter().map(|s| s.2.secrecy_rate).sum::<f64>() / m;
        table.push(vec![num(db), "joint".into(), num(joint)]);
        table.push(vec![num(db), "relay-only".into(), num(fixed)]);
        summary.push(format!("{db} dB: joint {joint:.4}, relay-only {fixed:.4} over {} seeds", solved.len()));
    }
    let mut verified = 0;
    if verify {
        for r in verify_rows(table.rows.len()) {
            let db: f64 = table.rows[r][0].parse()?;
            for &seed in &cfg.seeds {
                if let Some((inst, joint, fixed)) = solve_pair(cfg, seed, db)? {
                    check_pair(&inst, &joint, &fixed).with_context(|| format!("seed {seed} at {db} dB"))?;
                }
            }
            verified += 1;
        }
    }
    Ok(report(table, skipped, verified, summary))
}

fn baselines(cfg: &ExperimentConfig, verify: bool) -> Result<Report> {
    let results = sweep(cfg)?;
    let mut table = Table::new(&["seed", "P_max_dB", "scheme", "secrecy_rate"]);
    let mut skipped = 0;
    let mut sources = Vec::new();
    let mut below = 0;
    for (db, seed, pair) in &results {
        let Some((_, joint, fixed)) = pair else {
            skipped += 1;
            continue;
        };
        if joint.secrecy_rate < fixed.secrecy_rate - 1e-6 {
            below += 1;
        }
        for (scheme, sol) in [("joint", joint), ("relay-only", fixed)] {
            table.push(vec![seed.to_string(), num(*db), scheme.into(), num(sol.secrecy_rate)]);
            sources.push((*db, *seed));
        }
    }
    let mut verified = 0;
    if verify {
        for r in verify_rows(table.rows.len()) {
            let (db, seed) = sources[r];
            let Some((inst, joint, fixed)) = solve_pair(cfg, seed, db)? else {
                bail!("seed {seed} at {db} dB no longer solves");
            };
            check_pair(&inst, &joint, &fixed).with_context(|| format!("seed {seed} at {db} dB"))?;
            let sol = if table.rows[r][2] == "joint" { &joint } else { &fixed };
            ensure!(num(sol.secrecy_rate) == table.rows[r][3], "row {r} does not replay");
            verified += 1;
        }
    }
    let summary = vec![format!("joint below relay-only in {below} of {} instances", results.len() - skipped)];
    Ok(report(table, skipped, verified, summary))
}

fn convergence_run(cfg: &ExperimentConfig, seed: u64) -> Result<Option<(Instance, JointSolution)>> {
    let inst = instance(cfg, seed, cfg.p_max_db[0])?;
    match alternating_optimize(&inst.ch, &inst.selected, &inst.params, &inst.u) {
        Ok(sol) => Ok(Some((inst, sol))),
        Err(e) => {
            log::warn!("seed {seed} skipped: {e}");
            Ok(None)
        }
    }
}

fn convergence(cfg: &ExperimentConfig, verify: bool) -> Result<Report> {
    let runs: Vec<(u64, Option<(Instance, JointSolution)>)> = cfg
        .seeds
        .par_iter()
        .map(|&s| Ok((s, convergence_run(cfg, s)?)))
        .collect::<Result<_>>()?;
    let mut table = Table::new(&["seed", "iteration", "objective"]);
    let mut sources = Vec::new();
    let mut skipped = 0;
    let mut converged = 0;
    for (seed, run) in &runs {
        let Some((_, sol)) = run else {
            skipped += 1;
            continue;
        };
        if sol.termination == relayopt_core::Termination::Converged && sol.iterations <= 20 {
            converged += 1;
        }
        for (it, v) in sol.trace.iter().enumerate() {
            table.push(vec![seed.to_string(), it.to_string(), num(*v)]);
            sources.push((*seed, it));
        }
    }
    let mut verified = 0;
    if verify {
        for r in verify_rows(table.rows.len()) {
            let (seed, it) = sources[r];
            let Some((inst, sol)) = convergence_run(cfg, seed)? else {
                bail!("seed {seed} no longer solves");
            };
            check_solution(&sol, &inst.ch, &inst.params, &inst.u, true).with_context(|| format!("seed {seed}"))?;
            ensure!(num(sol.trace[it]) == table.rows[r][2], "row {r} does not replay");
            verified += 1;
        }
    }
    let summary = vec![format!(
        "{converged} of {} runs converged within 20 cycles",
        runs.len() - skipped
    )];
    Ok(report(table, skipped, verified, summary))
}
