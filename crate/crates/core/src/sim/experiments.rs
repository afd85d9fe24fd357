//! The three curve experiments.
//!
//! * [`run_shrinker_curves`]: optimal and `q = t` shrinkers and their
//!   asymptotic losses as functions of the observed singular value.
//! * [`run_ratio_sweep`]: relative errors and their ratio along
//!   `t = γ^{1/4} + 1/20`, optionally with Monte Carlo columns.
//! * [`run_blp_convergence`]: operator-norm errors of the best linear
//!   predictor and both shrinkers for fixed `p` and growing `n`.

use std::fmt;
use std::str::FromStr;

use faer::Mat;

use super::model::{sample_spiked, FactorLaw, SignalModel, SpikedModelConfig};
use super::replicates::{mean, run_replicates, shrinkage_error, RankRule};
use super::rng::substream_seed;
use super::table::CurveTable;
use crate::asymptotics::{component_from_sigma, invert_sigma, AspectRatio, ComponentAsymptotics};
use crate::error::{Error, Result};
use crate::linalg::{factored_norms, hcat, svd_of};
use crate::parallel::map_indexed;
use crate::shrinker::{
    error_ratio, gd_loss, optimal_loss, optimal_q_from_sigma, BlockParams, ShrinkerKind,
};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_200_604;

/// Offset of the swept spike above the detection threshold.
pub const RATIO_SWEEP_OFFSET: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    ShrinkerCurves,
    RatioSweep,
    BlpConvergence,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ShrinkerCurves => "curves",
            Experiment::RatioSweep => "ratio-sweep",
            Experiment::BlpConvergence => "blp-convergence",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "curves" => Ok(Experiment::ShrinkerCurves),
            "ratio-sweep" => Ok(Experiment::RatioSweep),
            "blp-convergence" => Ok(Experiment::BlpConvergence),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

/// Description of one experiment run. Only the fields an experiment reads
/// matter to it; the rest keep their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Monte Carlo replicates per grid point. Zero disables the Monte Carlo
    /// columns of the ratio sweep; the shrinker curves are purely analytic.
    pub replicates: usize,
    /// σ-grid, γ-grid or n-grid depending on the experiment. `None` selects
    /// the experiment default.
    pub grid: Option<Vec<f64>>,
    /// Aspect ratio of the shrinker curves.
    pub gamma: f64,
    /// Row count for the Monte Carlo experiments.
    pub p: usize,
    /// Spike strength of the convergence experiment.
    pub strength: f64,
    pub factor_law: FactorLaw,
    pub deterministic_signal: bool,
    pub seed: u64,
}

/// Config keys accepted by [`ExperimentConfig::set`], mirroring CLI flags.
pub const CONFIG_KEYS: &[&str] = &[
    "seed",
    "replicates",
    "grid",
    "gamma",
    "p",
    "t",
    "factor-law",
    "deterministic-signal",
];

impl ExperimentConfig {
    pub fn shrinker_curves() -> Self {
        ExperimentConfig {
            experiment: Experiment::ShrinkerCurves,
            replicates: 0,
            grid: None,
            gamma: 0.5,
            p: 50,
            strength: 1.1,
            factor_law: FactorLaw::Gaussian,
            deterministic_signal: false,
            seed: DEFAULT_SEED,
        }
    }

    pub fn ratio_sweep() -> Self {
        ExperimentConfig {
            experiment: Experiment::RatioSweep,
            ..Self::shrinker_curves()
        }
    }

    /// Desk-scale convergence run: `p = 50`, 200 replicates.
    pub fn blp_convergence() -> Self {
        ExperimentConfig {
            experiment: Experiment::BlpConvergence,
            replicates: 200,
            ..Self::shrinker_curves()
        }
    }

    /// Full scale: `p = 100`, 4000 replicates.
    pub fn blp_convergence_full_scale() -> Self {
        ExperimentConfig {
            p: 100,
            replicates: 4000,
            ..Self::blp_convergence()
        }
    }

    pub fn for_experiment(experiment: Experiment) -> Self {
        match experiment {
            Experiment::ShrinkerCurves => Self::shrinker_curves(),
            Experiment::RatioSweep => Self::ratio_sweep(),
            Experiment::BlpConvergence => Self::blp_convergence(),
        }
    }

    pub fn default_grid(&self) -> Vec<f64> {
        match self.experiment {
            Experiment::ShrinkerCurves => {
                let edge = 1.0 + self.gamma.max(0.0).sqrt();
                (0..100).map(|i| edge + 0.01 + 0.04 * i as f64).collect()
            }
            Experiment::RatioSweep => (1..=20).map(|i| i as f64 * 0.05).collect(),
            Experiment::BlpConvergence => vec![100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0],
        }
    }

    pub fn effective_grid(&self) -> Vec<f64> {
        self.grid.clone().unwrap_or_else(|| self.default_grid())
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("invalid {what} '{value}' for key '{key}'"));
        match key {
            "seed" => self.seed = value.parse().map_err(|_| bad("u64"))?,
            "replicates" => self.replicates = value.parse().map_err(|_| bad("count"))?,
            "grid" => self.grid = Some(parse_grid(value)?),
            "gamma" => self.gamma = value.parse().map_err(|_| bad("real"))?,
            "p" => self.p = value.parse().map_err(|_| bad("count"))?,
            "t" => self.strength = value.parse().map_err(|_| bad("real"))?,
            "factor-law" => self.factor_law = value.parse()?,
            "deterministic-signal" => {
                self.deterministic_signal = value.parse().map_err(|_| bad("boolean"))?
            }
            _ => {
                return Err(Error::Config(format!(
                    "unknown key '{key}' (known: {})",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Settings echoed into table metadata, in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let grid: Vec<String> = self
            .effective_grid()
            .iter()
            .map(|g| format!("{g}"))
            .collect();
        let mut out = vec![
            ("experiment".to_string(), self.experiment.name().to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("replicates".to_string(), self.replicates.to_string()),
            ("grid".to_string(), grid.join(",")),
        ];
        match self.experiment {
            Experiment::ShrinkerCurves => out.push(("gamma".into(), format!("{}", self.gamma))),
            Experiment::RatioSweep => out.push(("p".into(), self.p.to_string())),
            Experiment::BlpConvergence => {
                out.push(("p".into(), self.p.to_string()));
                out.push(("t".into(), format!("{}", self.strength)));
            }
        }
        if self.experiment != Experiment::ShrinkerCurves {
            out.push(("factor-law".into(), self.factor_law.name().into()));
            out.push((
                "deterministic-signal".into(),
                self.deterministic_signal.to_string(),
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.effective_grid();
        if grid.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        if grid.iter().any(|g| !g.is_finite()) {
            return Err(Error::Config("grid has non-finite points".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("grid must be strictly increasing".into()));
        }
        match self.experiment {
            Experiment::ShrinkerCurves => {
                let gamma =
                    AspectRatio::new(self.gamma).map_err(|e| Error::Config(e.to_string()))?;
                if let Some(&g) = grid.iter().find(|&&s| s <= gamma.bulk_edge()) {
                    return Err(Error::Domain(format!(
                        "grid point {g} is not above the bulk edge {}",
                        gamma.bulk_edge()
                    )));
                }
            }
            Experiment::RatioSweep => {
                if let Some(&g) = grid.iter().find(|&&g| !(g > 0.0 && g <= 1.0)) {
                    return Err(Error::Config(format!(
                        "gamma grid point {g} is outside (0, 1]"
                    )));
                }
                if self.replicates > 0 && self.p < 2 {
                    return Err(Error::Config(format!(
                        "p must be at least 2, got {}",
                        self.p
                    )));
                }
            }
            Experiment::BlpConvergence => {
                if self.replicates == 0 {
                    return Err(Error::Config("replicates must be at least 1".into()));
                }
                if self.p < 2 {
                    return Err(Error::Config(format!(
                        "p must be at least 2, got {}",
                        self.p
                    )));
                }
                if !(self.strength.is_finite() && self.strength > 0.0) {
                    return Err(Error::Config(format!(
                        "t must be positive, got {}",
                        self.strength
                    )));
                }
                if let Some(&g) = grid
                    .iter()
                    .find(|&&g| g.fract() != 0.0 || g < self.p as f64)
                {
                    return Err(Error::Config(format!(
                        "n grid point {g} must be an integer of at least p = {}",
                        self.p
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parses a comma-separated list of reals.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad grid value '{s}'")))
        })
        .collect()
}

/// Parses flat `key=value` config text; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value, got '{line}'", i + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn new_table(cfg: &ExperimentConfig, columns: &[&str]) -> CurveTable {
    let mut table = CurveTable::new(columns.iter().copied());
    table.add_metadata("generator", concat!("opshrink ", env!("CARGO_PKG_VERSION")));
    for (k, v) in cfg.echo() {
        table.add_metadata(k, v);
    }
    table
}

fn check_kind(cfg: &ExperimentConfig, expected: Experiment) -> Result<()> {
    if cfg.experiment != expected {
        return Err(Error::Config(format!(
            "config describes '{}', not '{}'",
            cfg.experiment, expected
        )));
    }
    cfg.validate()
}

/// Columns: `sigma, q_optimal, q_gd, loss_optimal, loss_gd`. Analytic.
pub fn run_shrinker_curves(cfg: &ExperimentConfig) -> Result<CurveTable> {
    check_kind(cfg, Experiment::ShrinkerCurves)?;
    let gamma = AspectRatio::new(cfg.gamma)?;
    let mut table = new_table(
        cfg,
        &["sigma", "q_optimal", "q_gd", "loss_optimal", "loss_gd"],
    );
    for sigma in cfg.effective_grid() {
        let a = component_from_sigma(sigma, gamma)?;
        let block = BlockParams::from_asymptotics(&a)?;
        table.push_row(vec![
            sigma,
            optimal_q_from_sigma(sigma, gamma)?,
            invert_sigma(sigma, gamma)?,
            optimal_loss(&block),
            gd_loss(&block),
        ])?;
    }
    Ok(table)
}

/// Columns: `gamma, t, rel_err_optimal, rel_err_gd, ratio`, plus
/// `n, mc_rel_err_optimal, mc_rel_err_gd` when replicates are requested.
pub fn run_ratio_sweep(cfg: &ExperimentConfig) -> Result<CurveTable> {
    check_kind(cfg, Experiment::RatioSweep)?;
    let monte_carlo = cfg.replicates > 0;
    let mut columns = vec!["gamma", "t", "rel_err_optimal", "rel_err_gd", "ratio"];
    if monte_carlo {
        columns.extend(["n", "mc_rel_err_optimal", "mc_rel_err_gd"]);
    }
    let mut table = new_table(cfg, &columns);
    if monte_carlo {
        table.add_metadata("mc_rank", "1 (fixed; q = 0 at or below the bulk edge)");
    }
    for (i, g) in cfg.effective_grid().into_iter().enumerate() {
        let gamma = AspectRatio::new(g)?;
        let t = gamma.detection_threshold() + RATIO_SWEEP_OFFSET;
        let block = BlockParams::from_asymptotics(&ComponentAsymptotics::from_strength(t, gamma)?)?;
        let mut row = vec![
            g,
            t,
            optimal_loss(&block) / t,
            gd_loss(&block) / t,
            error_ratio(gamma, t)?,
        ];
        if monte_carlo {
            let n = ((cfg.p as f64 / g).round() as usize).max(cfg.p);
            let mut model =
                SpikedModelConfig::new(cfg.p, n, vec![t], substream_seed(cfg.seed, i as u64));
            model.factor_law = cfg.factor_law;
            model.deterministic_signal = cfg.deterministic_signal;
            let out = run_replicates(
                &model,
                cfg.replicates,
                &[ShrinkerKind::Optimal, ShrinkerKind::OracleTruth],
                RankRule::Fixed(1),
            )?;
            row.push(n as f64);
            row.push(mean(out.iter().map(|o| o.losses[0])) / t);
            row.push(mean(out.iter().map(|o| o.losses[1])) / t);
        }
        table.push_row(row)?;
    }
    Ok(table)
}

/// Per-replicate errors of the convergence experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlpReplicate {
    pub err_blp: f64,
    pub err_optimal: f64,
    pub err_gd: f64,
    /// `‖X̂^{q*} − X̂^{BLP}‖_F`.
    pub gap_optimal_blp: f64,
}

/// Replicates of the convergence experiment at one `n`, in replicate order.
pub fn blp_replicates(
    cfg: &ExperimentConfig,
    grid_index: usize,
    n: usize,
) -> Result<Vec<BlpReplicate>> {
    let point_seed = substream_seed(cfg.seed, grid_index as u64);
    let mut model = SpikedModelConfig::new(cfg.p, n, vec![cfg.strength], point_seed)
        .with_signal_model(SignalModel::IidColumns);
    model.factor_law = cfg.factor_law;
    model.deterministic_signal = cfg.deterministic_signal;
    model.validate()?;
    map_indexed(cfg.replicates, |j| {
        blp_replicate(
            &model
                .clone()
                .with_seed(substream_seed(point_seed, j as u64)),
        )
    })
}

fn blp_replicate(model: &SpikedModelConfig) -> Result<BlpReplicate> {
    let sample = sample_spiked(model)?;
    let (p, n) = (model.p, model.n);
    let t = model.strengths[0];
    let gamma = AspectRatio::from_shape(p, n)?;
    let svd = svd_of(sample.y.as_ref())?;
    let sigma = svd.singular_values[0];
    let q_opt = optimal_q_from_sigma(sigma, gamma)?;
    let q_gd = if sigma > gamma.bulk_edge() {
        invert_sigma(sigma, gamma)?
    } else {
        0.0
    };

    let signal_left = sample.weighted_left();
    let err_optimal = shrinkage_error(&svd, &[q_opt], &signal_left, &sample.right)?;
    let err_gd = shrinkage_error(&svd, &[q_gd], &signal_left, &sample.right)?;

    // BLP = w·u·(Yᵀu)ᵀ with w = t²/(t²+1).
    let w = t * t / (t * t + 1.0);
    let u = sample.left.as_ref();
    let coords = sample.y.transpose() * u;
    let blp_right = Mat::from_fn(n, 1, |j, _| w * coords[(j, 0)]);
    let blp_minus_signal = Mat::from_fn(n, 1, |j, _| blp_right[(j, 0)] - t * sample.right[(j, 0)]);
    let err_blp = factored_norms(u, blp_minus_signal.as_ref())?.operator;

    let est_left = Mat::from_fn(p, 1, |i, _| q_opt * svd.left_vectors[(i, 0)]);
    let neg_u = Mat::from_fn(p, 1, |i, _| -u[(i, 0)]);
    let left = hcat(&[est_left.as_ref(), neg_u.as_ref()]);
    let right = hcat(&[svd.right_vectors.subcols(0, 1), blp_right.as_ref()]);
    let gap_optimal_blp = factored_norms(left.as_ref(), right.as_ref())?.frobenius;

    Ok(BlpReplicate {
        err_blp,
        err_optimal,
        err_gd,
        gap_optimal_blp,
    })
}

/// Columns: `n, err_blp, err_optimal, err_gd, gap_optimal_blp, frac_gd_worse`.
///
/// Errors are operator norms of the `1/√n`-scaled matrices averaged over
/// replicates; `frac_gd_worse` is the share of replicates where the `q = t̂`
/// shrinker loses to the optimal one on the same data.
pub fn run_blp_convergence(cfg: &ExperimentConfig) -> Result<CurveTable> {
    check_kind(cfg, Experiment::BlpConvergence)?;
    let mut table = new_table(
        cfg,
        &[
            "n",
            "err_blp",
            "err_optimal",
            "err_gd",
            "gap_optimal_blp",
            "frac_gd_worse",
        ],
    );
    table.add_metadata(
        "error_metric",
        "operator norm of the 1/sqrt(n)-scaled matrix, mean over replicates",
    );
    for (i, g) in cfg.effective_grid().into_iter().enumerate() {
        let n = g as usize;
        let reps = blp_replicates(cfg, i, n)?;
        let worse = reps.iter().filter(|r| r.err_gd > r.err_optimal).count();
        table.push_row(vec![
            g,
            mean(reps.iter().map(|r| r.err_blp)),
            mean(reps.iter().map(|r| r.err_optimal)),
            mean(reps.iter().map(|r| r.err_gd)),
            mean(reps.iter().map(|r| r.gap_optimal_blp)),
            worse as f64 / reps.len() as f64,
        ])?;
    }
    Ok(table)
}

/// Dispatches on [`ExperimentConfig::experiment`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<CurveTable> {
    match cfg.experiment {
        Experiment::ShrinkerCurves => run_shrinker_curves(cfg),
        Experiment::RatioSweep => run_ratio_sweep(cfg),
        Experiment::BlpConvergence => run_blp_convergence(cfg),
    }
}
