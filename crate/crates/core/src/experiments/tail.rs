use serde::{Deserialize, Serialize};

use super::config::{stride, DEFAULT_EXPERIMENT_WORK_CAP};
use super::sampling::{check_work, field_maxima};
use super::stats::wilson_interval;
use crate::error::{Error, Result};
use crate::fieldsim::FieldSimulator;
use crate::limits::{tail_prediction_continuous, tail_prediction_sparse_grid};
use crate::model::{CovarianceModel, GridSpec, Horizon};
use crate::report::{csv_line, fmt_real};
use crate::special::pickands_closed_form;

/// Fewer exceedances than this at some level flag the row.
pub const MIN_HITS: u64 = 50;

fn default_work_cap() -> u128 {
    DEFAULT_EXPERIMENT_WORK_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailCheckConfig {
    pub model: CovarianceModel,
    #[serde(rename = "box")]
    pub box_size: [f64; 2],
    pub u_list: Vec<f64>,
    pub fine_dx: f64,
    pub fine_dy: f64,
    pub reps: u64,
    #[serde(default)]
    pub seed: u64,
    /// H_{α₁}, H_{α₂}; closed forms are used when omitted.
    #[serde(default)]
    pub h: Option<[f64; 2]>,
    /// Also check the grid maximum against the sparse-grid prediction.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_work_cap")]
    pub work_cap: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    Continuous,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub kind: TailKind,
    pub u: f64,
    pub hits: u64,
    pub reps: u64,
    pub empirical_p: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub predicted_p: f64,
    pub ratio: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub too_few_hits: bool,
}

impl TailRow {
    pub const CSV_HEADER: &'static str =
        "kind,u,hits,reps,empirical_p,ci_lo,ci_hi,predicted_p,ratio,ratio_lo,ratio_hi,too_few_hits";

    pub fn csv_row(&self) -> String {
        let kind = match self.kind {
            TailKind::Continuous => "continuous",
            TailKind::Grid => "grid",
        };
        let mut f = vec![kind.to_string(), fmt_real(self.u), self.hits.to_string(), self.reps.to_string()];
        f.extend(
            [self.empirical_p, self.ci_lo, self.ci_hi, self.predicted_p, self.ratio, self.ratio_lo, self.ratio_hi]
                .map(fmt_real),
        );
        f.push(self.too_few_hits.to_string());
        csv_line(&f)
    }

    fn new(kind: TailKind, u: f64, hits: u64, reps: u64, predicted_p: f64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(hits, reps);
        let empirical_p = hits as f64 / reps as f64;
        TailRow {
            kind,
            u,
            hits,
            reps,
            empirical_p,
            ci_lo,
            ci_hi,
            predicted_p,
            ratio: empirical_p / predicted_p,
            ratio_lo: ci_lo / predicted_p,
            ratio_hi: ci_hi / predicted_p,
            too_few_hits: hits < MIN_HITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTable {
    pub rows: Vec<TailRow>,
    pub too_few_hits: bool,
}

/// Exceedance probabilities of the box maximum against the high-level tail
/// asymptotics, one row per level (and per grid level when a grid is given).
pub fn tail_ratio_check(cfg: &TailCheckConfig) -> Result<TailTable> {
    cfg.model.validate()?;
    if cfg.reps == 0 {
        return Err(Error::invalid("reps must be positive"));
    }
    if cfg.u_list.is_empty() {
        return Err(Error::invalid("u_list is empty"));
    }
    let h = match cfg.h {
        Some(h) => h,
        None => {
            let [a1, a2] = cfg.model.alphas();
            match (pickands_closed_form(a1), pickands_closed_form(a2)) {
                (Some(h1), Some(h2)) => [h1, h2],
                _ => return Err(Error::invalid("Pickands constants must be given for alpha outside {1, 2}")),
            }
        }
    };
    let bx = Horizon { t1: cfg.box_size[0], t2: cfg.box_size[1] };
    let weak = cfg.model.weak_part();
    let sim = FieldSimulator::new(&weak, &bx, cfg.fine_dx, cfg.fine_dy)?;
    check_work(cfg.reps, &sim, cfg.work_cap)?;
    let mut strides = vec![(1, 1)];
    if let Some(g) = &cfg.grid {
        g.validate()?;
        strides.push((stride(g.p1, cfg.fine_dx)?, stride(g.p2, cfg.fine_dy)?));
    }
    let maxima = field_maxima(&sim, cfg.seed, cfg.reps, &strides);
    let hits = |k: usize, u: f64| maxima.iter().filter(|m| m[k] > u).count() as u64;

    let mut rows = Vec::new();
    for &u in &cfg.u_list {
        let pred = tail_prediction_continuous(&weak, cfg.box_size, u, h)?;
        rows.push(TailRow::new(TailKind::Continuous, u, hits(0, u), cfg.reps, pred));
    }
    if let Some(g) = &cfg.grid {
        for &u in &cfg.u_list {
            let pred = tail_prediction_sparse_grid(g, cfg.box_size, u);
            rows.push(TailRow::new(TailKind::Grid, u, hits(1, u), cfg.reps, pred));
        }
    }
    let too_few_hits = rows.iter().any(|r| r.too_few_hits);
    Ok(TailTable { rows, too_few_hits })
}
