use serde::{Deserialize, Serialize};

use super::config::{stride, DEFAULT_EXPERIMENT_WORK_CAP};
use super::sampling::{check_work, field_maxima};
use super::stats::binomial_se;
use crate::error::{Error, Result};
use crate::fieldsim::FieldSimulator;
use crate::model::{CovarianceModel, Horizon};
use crate::report::{csv_line, fmt_real};

fn default_work_cap() -> u128 {
    DEFAULT_EXPERIMENT_WORK_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseStudyConfig {
    pub model: CovarianceModel,
    #[serde(rename = "box")]
    pub box_size: [f64; 2],
    pub u: f64,
    /// Grid spacings, in the order they are refined.
    pub a_list: Vec<f64>,
    pub fine_dx: f64,
    pub reps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_work_cap")]
    pub work_cap: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseRow {
    pub a: f64,
    pub stride: usize,
    pub p_fine: f64,
    pub p_grid: f64,
    /// P̂(grid max ≤ u) − P̂(fine max ≤ u), ≥ 0 on coupled samples.
    pub diff: f64,
    pub se: f64,
}

impl DenseRow {
    pub const CSV_HEADER: &'static str = "a,stride,p_fine,p_grid,diff,se";

    pub fn csv_row(&self) -> String {
        csv_line(&[
            fmt_real(self.a),
            self.stride.to_string(),
            fmt_real(self.p_fine),
            fmt_real(self.p_grid),
            fmt_real(self.diff),
            fmt_real(self.se),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseStudy {
    pub rows: Vec<DenseRow>,
    /// Each diff is at most the previous one plus 2 binomial standard errors.
    pub non_increasing: bool,
}

/// How much the grid maximum undershoots the fine maximum at level `u` as
/// the grid is refined. Every grid is a sub-lattice of the same samples.
pub fn dense_difference_study(cfg: &DenseStudyConfig) -> Result<DenseStudy> {
    cfg.model.validate()?;
    if cfg.reps == 0 || cfg.a_list.is_empty() {
        return Err(Error::invalid("reps and a_list must be non-empty"));
    }
    let bx = Horizon { t1: cfg.box_size[0], t2: cfg.box_size[1] };
    let sim = FieldSimulator::new(&cfg.model.weak_part(), &bx, cfg.fine_dx, cfg.fine_dx)?;
    check_work(cfg.reps, &sim, cfg.work_cap)?;
    let strides: Vec<usize> = cfg.a_list.iter().map(|&a| stride(a, cfg.fine_dx)).collect::<Result<_>>()?;
    let mut all = vec![(1, 1)];
    all.extend(strides.iter().map(|&s| (s, s)));
    let maxima = field_maxima(&sim, cfg.seed, cfg.reps, &all);

    let n = cfg.reps as f64;
    let p_fine = maxima.iter().filter(|m| m[0] <= cfg.u).count() as f64 / n;
    let rows: Vec<DenseRow> = cfg
        .a_list
        .iter()
        .zip(&strides)
        .enumerate()
        .map(|(k, (&a, &s))| {
            let p_grid = maxima.iter().filter(|m| m[k + 1] <= cfg.u).count() as f64 / n;
            // Counted directly so the difference is exact, not a difference of rounded ratios.
            let gap = maxima.iter().filter(|m| m[k + 1] <= cfg.u && m[0] > cfg.u).count() as f64 / n;
            DenseRow { a, stride: s, p_fine, p_grid, diff: gap, se: binomial_se(gap, cfg.reps) }
        })
        .collect();
    let non_increasing = rows.windows(2).all(|w| w[1].diff <= w[0].diff + 2.0 * w[0].se.max(w[1].se));
    Ok(DenseStudy { rows, non_increasing })
}
