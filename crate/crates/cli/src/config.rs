//! Line-oriented `key = value` experiment configuration.

use std::collections::BTreeSet;
use std::fmt::{self, Write};
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use relayopt_core::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    VcgDemo,
    PayoffCurve,
    Exaggeration,
    ExpectedPayoff,
    PowerSweep,
    Convergence,
    Baselines,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::VcgDemo,
        Experiment::PayoffCurve,
        Experiment::Exaggeration,
        Experiment::ExpectedPayoff,
        Experiment::PowerSweep,
        Experiment::Convergence,
        Experiment::Baselines,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::VcgDemo => "vcg-demo",
            Experiment::PayoffCurve => "payoff-curve",
            Experiment::Exaggeration => "exaggeration",
            Experiment::ExpectedPayoff => "expected-payoff",
            Experiment::PowerSweep => "power-sweep",
            Experiment::Convergence => "convergence",
            Experiment::Baselines => "baselines",
        }
    }

    /// Whether the experiment runs the beamforming optimizer.
    pub fn optimizes(self) -> bool {
        matches!(self, Experiment::PowerSweep | Experiment::Convergence | Experiment::Baselines)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| anyhow!("unknown experiment `{s}`"))
    }
}

/// Valuations of the worked auction example.
pub const EXAMPLE_VALUES: [f64; 5] = [22.0, 18.0, 15.0, 12.0, 8.0];
/// Valuation vector of the payoff-curve simulation.
pub const CURVE_VALUES: [f64; 5] = [1.1101, 1.4321, 0.4567, 0.3690, 0.8421];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub k: usize,
    /// Source power budgets to sweep, in dB.
    pub p_max_db: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Monte Carlo samples per point.
    pub samples: usize,
    /// CSV file name, relative to the output directory.
    pub output: String,
    /// Valuations for the auction experiments.
    pub values: Vec<f64>,
    /// Relay whose report is varied (0-based).
    pub relay: usize,
    /// Report used by the exaggerating relay.
    pub report: f64,
    /// Points in the report grid.
    pub grid_points: usize,
    /// True value for the expected-payoff experiment.
    pub true_value: f64,
    /// Relay power budget in W; `None` means `P_max / (K + 2)`.
    pub p_r: Option<f64>,
    pub sigma2: f64,
    pub rho: f64,
    pub xi: f64,
    pub pi: f64,
    pub r_e: f64,
    pub tol_outer: f64,
    pub beta_grid: usize,
    pub max_outer_iter: usize,
}

impl ExperimentConfig {
    /// Defaults for `experiment` before any key is applied.
    pub fn defaults(experiment: Experiment) -> Self {
        let values = match experiment {
            Experiment::PayoffCurve => CURVE_VALUES.to_vec(),
            _ => EXAMPLE_VALUES.to_vec(),
        };
        let n = match experiment {
            Experiment::Convergence => 5,
            Experiment::VcgDemo | Experiment::PayoffCurve | Experiment::Exaggeration => values.len(),
            _ => 8,
        };
        let p_max_db = match experiment {
            Experiment::PowerSweep | Experiment::Baselines => (0..=10).map(f64::from).collect(),
            _ => vec![10.0],
        };
        Self {
            experiment,
            n,
            k: 3,
            p_max_db,
            seeds: vec![0],
            samples: 20_000,
            output: format!("{experiment}.csv"),
            values,
            relay: 3,
            report: 22.0,
            grid_points: 101,
            true_value: 1.0,
            p_r: None,
            sigma2: 1.0,
            rho: 0.5,
            xi: 1.0,
            pi: 1.0,
            r_e: 1.0,
            tol_outer: 1e-3,
            beta_grid: 21,
            max_outer_iter: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            bail!("seeds must not be empty");
        }
        if self.output.is_empty() {
            bail!("output must not be empty");
        }
        match self.experiment {
            Experiment::VcgDemo | Experiment::PayoffCurve | Experiment::Exaggeration => {
                if self.values.len() != self.n {
                    bail!("values has {} entries but n = {}", self.values.len(), self.n);
                }
                if self.k == 0 || self.k >= self.n {
                    bail!("need 1 <= k < n, got k={} n={}", self.k, self.n);
                }
                if self.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    bail!("values must be finite and >= 0");
                }
                if self.experiment == Experiment::Exaggeration && self.relay >= self.n {
                    bail!("relay {} out of range for n = {}", self.relay, self.n);
                }
                if self.experiment == Experiment::PayoffCurve && self.grid_points < 2 {
                    bail!("grid_points must be at least 2");
                }
            }
            Experiment::ExpectedPayoff => {
                if self.k == 0 || self.k >= self.n {
                    bail!("need 1 <= k < n, got k={} n={}", self.k, self.n);
                }
                if self.samples == 0 || self.grid_points < 2 {
                    bail!("samples must be positive and grid_points at least 2");
                }
                if !(self.true_value.is_finite() && self.true_value >= 0.0) {
                    bail!("true_value must be finite and >= 0");
                }
            }
            Experiment::PowerSweep | Experiment::Convergence | Experiment::Baselines => {
                if self.p_max_db.is_empty() {
                    bail!("p_max_db must not be empty");
                }
                for db in &self.p_max_db {
                    self.system_params(*db).validate().with_context(|| format!("at {db} dB"))?;
                }
            }
        }
        Ok(())
    }

    /// Network parameters at one source power budget.
    pub fn system_params(&self, p_max_db: f64) -> SystemParams {
        let mut p = SystemParams::from_db(self.n, self.k, p_max_db);
        if let Some(p_r) = self.p_r {
            p.p_r = p_r;
        }
        p.sigma2 = self.sigma2;
        p.rho = vec![self.rho; self.n];
        p.xi = vec![self.xi; self.n];
        p.pi = vec![self.pi; self.n];
        p.r_e = self.r_e;
        p.tol_outer = self.tol_outer;
        p.beta_grid = self.beta_grid;
        p.max_outer_iter = self.max_outer_iter;
        p
    }

    /// Canonical text form: every key, one per line, in a fixed order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let seeds = self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
        let p_r = self.p_r.map_or("auto".to_string(), |v| format!("{v:?}"));
        let _ = writeln!(out, "experiment = {}", self.experiment);
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "k = {}", self.k);
        let _ = writeln!(out, "p_max_db = {}", list(&self.p_max_db));
        let _ = writeln!(out, "seeds = {seeds}");
        let _ = writeln!(out, "samples = {}", self.samples);
        let _ = writeln!(out, "output = {}", self.output);
        let _ = writeln!(out, "values = {}", list(&self.values));
        let _ = writeln!(out, "relay = {}", self.relay);
        let _ = writeln!(out, "report = {:?}", self.report);
        let _ = writeln!(out, "grid_points = {}", self.grid_points);
        let _ = writeln!(out, "true_value = {:?}", self.true_value);
        let _ = writeln!(out, "p_r = {p_r}");
        let _ = writeln!(out, "sigma2 = {:?}", self.sigma2);
        let _ = writeln!(out, "rho = {:?}", self.rho);
        let _ = writeln!(out, "xi = {:?}", self.xi);
        let _ = writeln!(out, "pi = {:?}", self.pi);
        let _ = writeln!(out, "r_e = {:?}", self.r_e);
        let _ = writeln!(out, "tol_outer = {:?}", self.tol_outer);
        let _ = writeln!(out, "beta_grid = {}", self.beta_grid);
        let _ = writeln!(out, "max_outer_iter = {}", self.max_outer_iter);
        out
    }
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| anyhow!("invalid value `{value}` for `{key}`"))
}

fn float_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| scalar(key, t))
        .collect()
}

/// Comma-separated seeds; `a..b` expands to the half-open range.
fn seed_list(value: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for item in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (scalar("seeds", a.trim())?, scalar("seeds", b.trim())?);
                if a >= b {
                    bail!("empty seed range `{item}`");
                }
                seeds.extend(a..b);
            }
            None => seeds.push(scalar("seeds", item)?),
        }
    }
    Ok(seeds)
}

/// Parses configuration text. `experiment` must appear; every other key
/// falls back to the experiment's default.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut entries = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {lineno}: expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            bail!("line {lineno}: duplicate key `{key}`");
        }
        entries.push((lineno, key, value));
    }
    let experiment = match entries.iter().find(|e| e.1 == "experiment") {
        Some(&(lineno, _, v)) => v.parse::<Experiment>().with_context(|| format!("line {lineno}"))?,
        None => bail!("missing required key `experiment`"),
    };
    let mut cfg = ExperimentConfig::defaults(experiment);
    let mut n_given = false;
    for &(lineno, key, value) in &entries {
        let ctx = || format!("line {lineno}");
        match key {
            "experiment" => {}
            "n" => {
                cfg.n = scalar(key, value).with_context(ctx)?;
                n_given = true;
            }
            "k" => cfg.k = scalar(key, value).with_context(ctx)?,
            "p_max_db" => cfg.p_max_db = float_list(key, value).with_context(ctx)?,
            "seeds" => cfg.seeds = seed_list(value).with_context(ctx)?,
            "samples" => cfg.samples = scalar(key, value).with_context(ctx)?,
            "output" => cfg.output = value.to_string(),
            "values" => cfg.values = float_list(key, value).with_context(ctx)?,
            "relay" => cfg.relay = scalar(key, value).with_context(ctx)?,
            "report" => cfg.report = scalar(key, value).with_context(ctx)?,
            "grid_points" => cfg.grid_points = scalar(key, value).with_context(ctx)?,
            "true_value" => cfg.true_value = scalar(key, value).with_context(ctx)?,
            "p_r" => cfg.p_r = if value == "auto" { None } else { Some(scalar(key, value).with_context(ctx)?) },
            "sigma2" => cfg.sigma2 = scalar(key, value).with_context(ctx)?,
            "rho" => cfg.rho = scalar(key, value).with_context(ctx)?,
            "xi" => cfg.xi = scalar(key, value).with_context(ctx)?,
            "pi" => cfg.pi = scalar(key, value).with_context(ctx)?,
            "r_e" => cfg.r_e = scalar(key, value).with_context(ctx)?,
            "tol_outer" => cfg.tol_outer = scalar(key, value).with_context(ctx)?,
            "beta_grid" => cfg.beta_grid = scalar(key, value).with_context(ctx)?,
            "max_outer_iter" => cfg.max_outer_iter = scalar(key, value).with_context(ctx)?,
            other => bail!("line {lineno}: unknown key `{other}`"),
        }
    }
    // The auction experiments size the network from their value vector.
    let auction = matches!(experiment, Experiment::VcgDemo | Experiment::PayoffCurve | Experiment::Exaggeration);
    if auction && !n_given {
        cfg.n = cfg.values.len();
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config_str(&text).with_context(|| format!("in {}", path.display()))
}
