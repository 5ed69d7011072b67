use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{CenteringBase, CenteringConstants};
use crate::model::{CovarianceModel, GridSpec, Horizon, Regime};
use crate::pickands::{self, JointSpec, Options, CONTINUOUS_DT};
use crate::special::pickands_closed_form;

/// Default cap on `reps × lattice points` for one experiment.
pub const DEFAULT_EXPERIMENT_WORK_CAP: u128 = 1_000_000_000_000;

/// Fine lattice points per grid step when the proxy spacing is derived.
pub const DEFAULT_PROXY_REFINEMENT: f64 = 8.0;

fn default_work_cap() -> u128 {
    DEFAULT_EXPERIMENT_WORK_CAP
}

fn default_eval_points() -> Vec<(f64, f64)> {
    vec![(0.0, 0.0)]
}

/// Pickands constants supplied by the caller. Anything missing is taken from
/// the closed forms (α ∈ {1, 2}) or estimated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSpec {
    #[serde(default)]
    pub h: Option<[f64; 2]>,
    #[serde(default)]
    pub ha: Option<[f64; 2]>,
    /// Joint constant at the shifted arguments, one per evaluation point.
    #[serde(default)]
    pub joint: Option<Vec<f64>>,
}

/// How missing constants are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PickandsProtocol {
    pub lambda: f64,
    pub reps: u64,
}

impl Default for PickandsProtocol {
    fn default() -> Self {
        PickandsProtocol { lambda: 64.0, reps: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: CovarianceModel,
    pub horizon: Horizon,
    pub grid: GridSpec,
    /// Spacing of the lattice standing in for the continuum; defaults to p/8.
    #[serde(default)]
    pub fine_dx: Option<f64>,
    #[serde(default)]
    pub fine_dy: Option<f64>,
    pub reps: u64,
    #[serde(default = "default_eval_points")]
    pub eval_points: Vec<(f64, f64)>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_work_cap")]
    pub work_cap: u128,
    /// Permit a proxy lattice coarser than p/8 (e.g. grid = lattice).
    #[serde(default)]
    pub allow_coarse_proxy: bool,
    #[serde(default)]
    pub centering: CenteringBase,
    #[serde(default)]
    pub constants: ConstantsSpec,
    #[serde(default)]
    pub pickands: PickandsProtocol,
}

impl ExperimentConfig {
    /// A config with defaults for everything but the essentials.
    pub fn new(model: CovarianceModel, horizon: Horizon, grid: GridSpec, reps: u64) -> Self {
        ExperimentConfig {
            model,
            horizon,
            grid,
            fine_dx: None,
            fine_dy: None,
            reps,
            eval_points: default_eval_points(),
            seed: 0,
            work_cap: DEFAULT_EXPERIMENT_WORK_CAP,
            allow_coarse_proxy: false,
            centering: CenteringBase::default(),
            constants: ConstantsSpec::default(),
            pickands: PickandsProtocol::default(),
        }
    }

    /// Proxy lattice spacing `(dx, dy)`.
    pub fn fine_spacing(&self) -> (f64, f64) {
        (
            self.fine_dx.unwrap_or(self.grid.p1 / DEFAULT_PROXY_REFINEMENT),
            self.fine_dy.unwrap_or(self.grid.p2 / DEFAULT_PROXY_REFINEMENT),
        )
    }

    /// Index strides of the grid inside the proxy lattice.
    pub fn strides(&self) -> Result<(usize, usize)> {
        let (dx, dy) = self.fine_spacing();
        Ok((stride(self.grid.p1, dx)?, stride(self.grid.p2, dy)?))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.horizon.validate()?;
        self.grid.validate()?;
        if self.reps == 0 {
            return Err(Error::invalid("reps must be positive"));
        }
        let (dx, dy) = self.fine_spacing();
        let (sx, sy) = self.strides()?;
        if !self.allow_coarse_proxy && (sx < 8 || sy < 8) {
            return Err(Error::invalid(format!(
                "proxy lattice ({dx}, {dy}) must be at most p/8; set allow_coarse_proxy to override"
            )));
        }
        if let Some(j) = &self.constants.joint {
            if j.len() != self.eval_points.len() {
                return Err(Error::invalid("one joint constant per evaluation point is required"));
            }
        }
        Ok(())
    }
}

/// `p / d` as an integer, or an error if `d` does not divide `p`.
pub fn stride(p: f64, d: f64) -> Result<usize> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::invalid(format!("lattice spacing {d} must be positive")));
    }
    let s = p / d;
    let k = s.round();
    if k < 1.0 || (s - k).abs() > 1e-9 * s {
        return Err(Error::invalid(format!("grid spacing {p} is not a multiple of the lattice spacing {d}")));
    }
    Ok(k as usize)
}

/// Constants actually used, with where each came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConstants {
    pub h: [f64; 2],
    pub ha: Option<[f64; 2]>,
    pub joint: Option<Vec<f64>>,
    pub source: Vec<String>,
}

impl ResolvedConstants {
    pub fn centering(&self) -> CenteringConstants {
        CenteringConstants { h: self.h, ha: self.ha }
    }
}

/// Explicit values first, then closed forms, then Monte Carlo.
pub fn resolve_constants(cfg: &ExperimentConfig) -> Result<ResolvedConstants> {
    let opts = Options::default();
    let proto = cfg.pickands;
    let mut source = Vec::new();
    let alphas = cfg.model.alphas();

    let h = match cfg.constants.h {
        Some(h) => {
            source.push("h: explicit".to_string());
            h
        }
        None => {
            let mut h = [0.0; 2];
            for (i, &alpha) in alphas.iter().enumerate() {
                h[i] = match pickands_closed_form(alpha) {
                    Some(v) => {
                        source.push(format!("h{}: closed form", i + 1));
                        v
                    }
                    None => {
                        source.push(format!("h{}: estimated (lambda {}, dt {CONTINUOUS_DT})", i + 1, proto.lambda));
                        pickands::estimate_H_alpha(alpha, proto.lambda, CONTINUOUS_DT, proto.reps, cfg.seed, &opts)?.value
                    }
                };
            }
            h
        }
    };

    let Regime::Pickands { a1, a2 } = cfg.grid.regime else {
        return Ok(ResolvedConstants { h, ha: cfg.constants.ha, joint: None, source });
    };
    let ha = match cfg.constants.ha {
        Some(ha) => {
            source.push("ha: explicit".to_string());
            ha
        }
        None => {
            source.push(format!("ha: estimated (lambda {})", proto.lambda));
            let mut ha = [0.0; 2];
            for (i, (&alpha, a)) in alphas.iter().zip([a1, a2]).enumerate() {
                ha[i] = pickands::estimate_H_a_alpha(alpha, a, proto.lambda, None, proto.reps, cfg.seed, &opts)?.value;
            }
            ha
        }
    };
    let joint = match &cfg.constants.joint {
        Some(j) => {
            source.push("joint: explicit".to_string());
            j.clone()
        }
        None => {
            source.push(format!("joint: estimated (lambda {})", proto.lambda));
            let spec = JointSpec {
                alpha1: alphas[0],
                alpha2: alphas[1],
                a1,
                a2,
                lambda1: proto.lambda,
                lambda2: proto.lambda,
                dt1: a1 / DEFAULT_PROXY_REFINEMENT,
                dt2: a2 / DEFAULT_PROXY_REFINEMENT,
            };
            let (lh, lha) = ((h[0] * h[1]).ln(), (ha[0] * ha[1]).ln());
            let points: Vec<(f64, f64)> = cfg.eval_points.iter().map(|&(x, y)| (lh + x, lha + y)).collect();
            pickands::estimate_joint_constant(&spec, &points, proto.reps, cfg.seed, &opts)?
                .iter()
                .map(|e| e.value)
                .collect()
        }
    };
    Ok(ResolvedConstants { h, ha: Some(ha), joint: Some(joint), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        let m = CovarianceModel::new(2.0, 2.0, 0.0).unwrap();
        let g = GridSpec { p1: 2.0, p2: 2.0, regime: Regime::Sparse };
        ExperimentConfig::new(m, Horizon::square(32.0).unwrap(), g, 10)
    }

    #[test]
    fn default_proxy_is_one_eighth() {
        let c = base();
        assert_eq!(c.fine_spacing(), (0.25, 0.25));
        assert_eq!(c.strides().unwrap(), (8, 8));
        c.validate().unwrap();
    }

    #[test]
    fn coarse_proxy_needs_opt_in() {
        let mut c = base();
        c.fine_dx = Some(0.5);
        c.fine_dy = Some(0.5);
        assert!(c.validate().is_err());
        c.allow_coarse_proxy = true;
        c.validate().unwrap();
    }

    #[test]
    fn stride_must_divide() {
        assert_eq!(stride(1.0, 0.25).unwrap(), 4);
        assert!(stride(1.0, 0.3).is_err());
        assert!(stride(0.1, 0.25).is_err());
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let c = base();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&s).unwrap(), c);
        let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
        v["bogus"] = serde_json::json!(1);
        assert!(serde_json::from_value::<ExperimentConfig>(v).is_err());
    }

    #[test]
    fn closed_form_constants() {
        let r = resolve_constants(&base()).unwrap();
        assert_eq!(r.h, [pickands_closed_form(2.0).unwrap(); 2]);
        assert!(r.joint.is_none());
    }
}
