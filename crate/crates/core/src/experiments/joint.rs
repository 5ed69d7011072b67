use serde::{Deserialize, Serialize};

use super::config::{resolve_constants, ExperimentConfig, ResolvedConstants};
use super::sampling::{check_work, field_maxima};
use super::stats::{binomial_se, ks_statistic};
use crate::error::Result;
use crate::fieldsim::{mixture_shift, FieldSimulator};
use crate::limits::{limit_cdf_marginal, norm_constants, Level, LimitQuery, NormalizingConstants};
use crate::model::{rho, Regime};
use crate::report::{csv_line, fmt_real};

/// Empirical and limiting joint law at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointPoint {
    pub x: f64,
    pub y: f64,
    pub empirical_joint: f64,
    pub theoretical: f64,
    pub abs_err: f64,
    /// P̂(continuous ≤ x), P̂(grid ≤ y).
    pub empirical_continuous: f64,
    pub empirical_grid: f64,
    /// |P̂(A∩B) − P̂(A)P̂(B)| and its binomial standard error at P̂(A)P̂(B).
    pub dependence: f64,
    pub dependence_se: f64,
}

impl JointPoint {
    pub const CSV_HEADER: &'static str =
        "x,y,empirical_joint,theoretical,abs_err,empirical_continuous,empirical_grid,dependence,dependence_se";

    pub fn csv_row(&self) -> String {
        csv_line(
            &[
                self.x,
                self.y,
                self.empirical_joint,
                self.theoretical,
                self.abs_err,
                self.empirical_continuous,
                self.empirical_grid,
                self.dependence,
                self.dependence_se,
            ]
            .map(fmt_real),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub points: Vec<JointPoint>,
    /// KS distance of the normalised continuous maximum to its limit law.
    pub ks_marginal_continuous: f64,
    /// Same for the normalised grid maximum.
    pub ks_marginal_grid: f64,
    /// KS distance of the normalised continuous maximum to the plain Gumbel
    /// law; differs from `ks_marginal_continuous` only when r > 0.
    pub ks_continuous_vs_gumbel: f64,
    pub reps: u64,
    pub seed: u64,
    pub regime: String,
    /// Set when r > 0: the field is the finite-horizon mixture √(1−ρ)·Y + √ρ·U.
    pub mixture_model: bool,
    pub rho: f64,
    pub normalizing: NormalizingConstants,
    pub constants: ResolvedConstants,
    /// Normalised (continuous, grid) maxima per replication.
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
}

/// Simulates the normalised pair (a_T(M − b), a_T(M^p − b′)) `cfg.reps` times
/// and compares its joint law with the limit for the grid's regime.
pub fn run_joint_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    cfg.grid.check_at(&cfg.model, &cfg.horizon)?;
    let constants = resolve_constants(cfg)?;
    let nc = norm_constants(&cfg.horizon, &cfg.model, &cfg.grid, &constants.centering(), cfg.centering)?;
    let weight = rho(&cfg.model, &cfg.horizon)?;

    let (dx, dy) = cfg.fine_spacing();
    let (sx, sy) = cfg.strides()?;
    let sim = FieldSimulator::new(&cfg.model, &cfg.horizon, dx, dy)?;
    check_work(cfg.reps, &sim, cfg.work_cap)?;
    let maxima = field_maxima(&sim, cfg.seed, cfg.reps, &[(1, 1), (sx, sy)]);

    // The common shift moves both maxima alike: max(√(1−ρ)Y + √ρU) = √(1−ρ)·max Y + √ρU.
    let damp = (1.0 - weight).sqrt();
    let samples: Vec<(f64, f64)> = maxima
        .iter()
        .enumerate()
        .map(|(rep, m)| {
            let shift = if weight > 0.0 { weight.sqrt() * mixture_shift(cfg.seed, rep as u64) } else { 0.0 };
            let (mc, md) = (damp * m[0] + shift, damp * m[1] + shift);
            (nc.normalize(mc, Level::Continuous), nc.normalize(md, Level::Grid))
        })
        .collect();

    let r = cfg.model.r;
    let n = cfg.reps as f64;
    let points = cfg
        .eval_points
        .iter()
        .enumerate()
        .map(|(k, &(x, y))| {
            let count = |f: &dyn Fn(&(f64, f64)) -> bool| samples.iter().filter(|s| f(s)).count() as f64 / n;
            let pa = count(&|s| s.0 <= x);
            let pb = count(&|s| s.1 <= y);
            let pab = count(&|s| s.0 <= x && s.1 <= y);
            let query = LimitQuery { x, y, r, regime: cfg.grid.regime, joint: constants.joint.as_ref().map(|j| j[k]) };
            let theoretical = query.evaluate()?.value;
            Ok(JointPoint {
                x,
                y,
                empirical_joint: pab,
                theoretical,
                abs_err: (pab - theoretical).abs(),
                empirical_continuous: pa,
                empirical_grid: pb,
                dependence: (pab - pa * pb).abs(),
                dependence_se: binomial_se(pa * pb, cfg.reps),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let marginal = |x: f64| limit_cdf_marginal(x, r).map(|v| v.value).unwrap_or(f64::NAN);
    let cont: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let grid: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let gumbel = |x: f64| (-(-x).exp()).exp();

    Ok(ExperimentResult {
        points,
        ks_marginal_continuous: ks_statistic(&cont, marginal)?,
        ks_marginal_grid: ks_statistic(&grid, marginal)?,
        ks_continuous_vs_gumbel: ks_statistic(&cont, gumbel)?,
        reps: cfg.reps,
        seed: cfg.seed,
        regime: cfg.grid.regime.name().to_string(),
        mixture_model: weight > 0.0,
        rho: weight,
        normalizing: nc,
        constants,
        samples,
    })
}

/// Runs the same configuration along a ladder of square horizons, keeping the
/// grid spacing (sparse and dense grids) or the scaled spacing (Pickands grids).
pub fn run_horizon_ladder(cfg: &ExperimentConfig, horizons: &[f64]) -> Result<Vec<ExperimentResult>> {
    horizons
        .iter()
        .map(|&t| {
            let mut c = cfg.clone();
            c.horizon = crate::model::Horizon::square(t)?;
            if let Regime::Pickands { a1, a2 } = cfg.grid.regime {
                c.grid = crate::model::GridSpec::pickands_at(&cfg.model, &c.horizon, a1, a2);
            }
            run_joint_experiment(&c)
        })
        .collect()
}
