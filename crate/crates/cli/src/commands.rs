use gaussmax::experiments::{
    dense_difference_study, run_horizon_ladder, run_joint_experiment, tail_ratio_check, DenseRow, DenseStudyConfig,
    ExperimentConfig, ExperimentResult, JointPoint, TailCheckConfig, TailRow,
};
use gaussmax::fieldsim::{simulate_strong_field, write_gfld};
use gaussmax::limits::LimitQuery;
use gaussmax::pickands::{
    self, estimate_H_a_alpha, estimate_H_alpha, estimate_joint_constant, Estimator, JointSpec, Options,
    PickandsEstimate, CONTINUOUS_DT,
};
use gaussmax::report::{csv_line, fmt_real};
use gaussmax::{CovarianceModel, GridSpec, Horizon, Regime};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::*;
use crate::config::{self, set};
use crate::repro;
use crate::{CliError, Output};

fn model_flags(root: &mut Value, m: &ModelArgs) {
    set(root, &["model", "alpha1"], m.alpha.or(m.alpha1));
    set(root, &["model", "alpha2"], m.alpha.or(m.alpha2));
    set(root, &["model", "r"], m.r);
}

fn regime_name(r: RegimeArg) -> &'static str {
    match r {
        RegimeArg::Sparse => "sparse",
        RegimeArg::Pickands => "pickands",
        RegimeArg::Dense => "dense",
    }
}

fn table(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

// simulate-field

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFieldConfig {
    pub model: CovarianceModel,
    pub horizon: Horizon,
    pub dx: f64,
    #[serde(default)]
    pub dy: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: FieldFormatName,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldFormatName {
    #[default]
    Csv,
    Gfld,
}

const SIMULATE_FIELD_SCHEMA: &str = r#"{"model": {"alpha1": 1, "alpha2": 1, "r": 0}, "horizon": {"T1": 16, "T2": 16},
 "dx": 0.25, "dy": 0.25, "seed": 0, "format": "csv" | "gfld"}"#;

pub fn simulate_field(mut root: Value, a: &SimulateFieldArgs, seed: Option<u64>) -> Result<Output, CliError> {
    model_flags(&mut root, &a.model);
    set(&mut root, &["horizon", "T1"], a.t.or(a.t1));
    set(&mut root, &["horizon", "T2"], a.t.or(a.t2));
    set(&mut root, &["dx"], a.dx);
    set(&mut root, &["dy"], a.dy);
    set(&mut root, &["seed"], seed);
    set(
        &mut root,
        &["format"],
        a.format.map(|f| match f {
            FieldFormat::Csv => FieldFormatName::Csv,
            FieldFormat::Gfld => FieldFormatName::Gfld,
        }),
    );
    let cfg: SimulateFieldConfig = config::parse(root, SIMULATE_FIELD_SCHEMA)?;
    let sample = simulate_strong_field(&cfg.model, &cfg.horizon, cfg.dx, cfg.dy.unwrap_or(cfg.dx), cfg.seed)?;
    let mut out = Output::new("simulate-field", &cfg, cfg.seed);
    match cfg.format {
        FieldFormatName::Csv => {
            let rows = sample.values.indexed_iter().map(|((i, j), &v)| {
                csv_line(&[i.to_string(), j.to_string(), fmt_real(i as f64 * sample.dx), fmt_real(j as f64 * sample.dy), fmt_real(v)])
            });
            out.table("simulate-field.csv", table("i,j,x,y,value", rows));
        }
        FieldFormatName::Gfld => {
            let mut bytes = Vec::new();
            write_gfld(&sample, &mut bytes)?;
            out.binary("field.gfld", bytes);
        }
    }
    Ok(out)
}

// estimate-pickands

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatePickandsConfig {
    pub alpha: f64,
    #[serde(default)]
    pub alpha2: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub a1: Option<f64>,
    #[serde(default)]
    pub a2: Option<f64>,
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub y: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub dt: Option<f64>,
    pub reps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default = "default_pickands_cap")]
    pub work_cap: u128,
}

fn default_pickands_cap() -> u128 {
    pickands::DEFAULT_WORK_CAP
}

/// Window used when neither `lambda` nor `lambdas` is given.
pub const DEFAULT_LAMBDA: f64 = 64.0;

const ESTIMATE_PICKANDS_SCHEMA: &str = r#"{"alpha": 2, "alpha2": 2, "a": 0.5 | "a1": 0.5, "a2": 0.5, "x": 0, "y": 0,
 "lambda": 64 | "lambdas": [16, 32, 64, 128], "dt": 0.015625, "reps": 10000, "seed": 0,
 "estimator": "shift_averaged" | "naive", "work_cap": 50000000000}"#;

pub fn estimate_pickands(mut root: Value, a: &EstimatePickandsArgs, seed: Option<u64>) -> Result<Output, CliError> {
    for (key, v) in [
        ("alpha", a.alpha),
        ("alpha2", a.alpha2),
        ("a", a.a),
        ("a1", a.a1),
        ("a2", a.a2),
        ("x", a.x),
        ("y", a.y),
        ("lambda", a.lambda),
        ("dt", a.dt),
    ] {
        set(&mut root, &[key], v);
    }
    set(&mut root, &["lambdas"], a.lambdas.clone());
    set(&mut root, &["reps"], a.reps);
    set(&mut root, &["seed"], seed);
    set(
        &mut root,
        &["estimator"],
        a.estimator.map(|e| match e {
            EstimatorArg::ShiftAveraged => Estimator::ShiftAveraged,
            EstimatorArg::Naive => Estimator::Naive,
        }),
    );
    let cfg: EstimatePickandsConfig = config::parse(root, ESTIMATE_PICKANDS_SCHEMA)?;
    let lambdas = match (&cfg.lambdas, cfg.lambda) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either lambda or lambdas, not both".into())),
        (Some(l), None) if l.is_empty() => return Err(CliError::Usage("lambdas is empty".into())),
        (Some(l), None) => l.clone(),
        (None, l) => vec![l.unwrap_or(DEFAULT_LAMBDA)],
    };
    let opts = Options { estimator: cfg.estimator, work_cap: cfg.work_cap };
    let joint = cfg.a1.is_some() || cfg.a2.is_some();
    if joint && cfg.a.is_some() {
        return Err(CliError::Usage("give a for the discrete constant or a1/a2 for the joint one".into()));
    }

    let mut estimates = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let est = if joint {
            let a1 = cfg.a1.or(cfg.a2).expect("joint has a spacing");
            let a2 = cfg.a2.unwrap_or(a1);
            let spec = JointSpec {
                alpha1: cfg.alpha,
                alpha2: cfg.alpha2.unwrap_or(cfg.alpha),
                a1,
                a2,
                lambda1: lambda,
                lambda2: lambda,
                dt1: cfg.dt.unwrap_or(a1 / 8.0),
                dt2: cfg.dt.unwrap_or(a2 / 8.0),
            };
            estimate_joint_constant(&spec, &[(cfg.x, cfg.y)], cfg.reps, cfg.seed, &opts)?.remove(0)
        } else if let Some(grid) = cfg.a {
            estimate_H_a_alpha(cfg.alpha, grid, lambda, cfg.dt, cfg.reps, cfg.seed, &opts)?
        } else {
            estimate_H_alpha(cfg.alpha, lambda, cfg.dt.unwrap_or(CONTINUOUS_DT), cfg.reps, cfg.seed, &opts)?
        };
        estimates.push(est);
    }

    let ext = if estimates.len() >= 3 { Some(pickands::extrapolate(&estimates)?) } else { None };
    let last = estimates.len() - 1;
    let rows = estimates
        .iter()
        .enumerate()
        .map(|(i, e)| e.csv_row(if i == last { ext.map(|x| x.converged) } else { None }));
    let mut out = Output::new("estimate-pickands", &cfg, cfg.seed);
    out.table("estimate-pickands.csv", table(PickandsEstimate::CSV_HEADER, rows));
    if let Some(x) = ext {
        out.extra("extrapolation", &x);
        if !x.converged {
            out.soft_flag(format!("Pickands ladder did not converge: drift {} exceeds band {}", fmt_real(x.drift), fmt_real(x.band)));
        }
    }
    Ok(out)
}

// eval-limit

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalLimitConfig {
    pub regime: String,
    #[serde(default)]
    pub r: f64,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub joint: Option<f64>,
}

const EVAL_LIMIT_SCHEMA: &str =
    r#"{"regime": "sparse" | "pickands" | "dense", "r": 0, "x": 0, "y": 1, "joint": 1.2 (pickands only)}"#;

pub fn eval_limit(mut root: Value, a: &EvalLimitArgs) -> Result<Output, CliError> {
    set(&mut root, &["regime"], a.regime.map(regime_name));
    set(&mut root, &["r"], a.r);
    set(&mut root, &["x"], a.x);
    set(&mut root, &["y"], a.y);
    set(&mut root, &["joint"], a.joint);
    let cfg: EvalLimitConfig = config::parse(root, EVAL_LIMIT_SCHEMA)?;
    let regime = match cfg.regime.as_str() {
        "sparse" => Regime::Sparse,
        "dense" => Regime::Dense,
        // Only the label is used; the spacing enters through the joint constant.
        "pickands" => Regime::Pickands { a1: f64::NAN, a2: f64::NAN },
        other => return Err(CliError::Usage(format!("unknown regime {other:?}\nexpected:\n{EVAL_LIMIT_SCHEMA}"))),
    };
    if cfg.joint.is_some() && !matches!(regime, Regime::Pickands { .. }) {
        return Err(CliError::Usage("joint is only used by the pickands regime".into()));
    }
    let q = LimitQuery { x: cfg.x, y: cfg.y, r: cfg.r, regime, joint: cfg.joint };
    let v = q.evaluate()?;
    let mut out = Output::new("eval-limit", &cfg, 0);
    out.table("eval-limit.csv", table(LimitQuery::CSV_HEADER, [q.csv_row(&v)]));
    Ok(out)
}

// run-experiment

const RUN_EXPERIMENT_SCHEMA: &str = r#"{"model": {"alpha1": 2, "alpha2": 2, "r": 0}, "horizon": {"T1": 64, "T2": 64},
 "grid": {"p1": 2, "p2": 2, "regime": "sparse" | "dense" | "pickands", "a1": .., "a2": .. (pickands)},
 "fine_dx": 0.25, "fine_dy": 0.25, "reps": 2000, "eval_points": [[0, 0]], "seed": 0,
 "work_cap": 1000000000000, "allow_coarse_proxy": false, "centering": "two_log_area" | "as_printed",
 "constants": {"h": [..], "ha": [..], "joint": [..]}, "pickands": {"lambda": 64, "reps": 2000},
 "horizons": [32, 64, 128] (optional ladder)}"#;

/// Fills `grid.p1/p2` of a Pickands grid from `a1/a2` at the configured horizon.
fn derive_pickands_spacing(root: &mut Value) -> Result<(), CliError> {
    let grid = root.get("grid").cloned().unwrap_or(Value::Null);
    if grid.get("regime").and_then(Value::as_str) != Some("pickands") || grid.get("p1").is_some() {
        return Ok(());
    }
    let model: CovarianceModel = config::parse(root.get("model").cloned().unwrap_or(Value::Null), RUN_EXPERIMENT_SCHEMA)?;
    let horizon: Horizon = config::parse(root.get("horizon").cloned().unwrap_or(Value::Null), RUN_EXPERIMENT_SCHEMA)?;
    let (Some(a1), Some(a2)) = (grid.get("a1").and_then(Value::as_f64), grid.get("a2").and_then(Value::as_f64)) else {
        return Err(CliError::Usage(format!("pickands grid needs a1 and a2\nexpected:\n{RUN_EXPERIMENT_SCHEMA}")));
    };
    let g = GridSpec::pickands_at(&model, &horizon, a1, a2);
    set(root, &["grid", "p1"], Some(g.p1));
    set(root, &["grid", "p2"], Some(g.p2));
    Ok(())
}

pub fn run_experiment(mut root: Value, a: &RunExperimentArgs, seed: Option<u64>) -> Result<Output, CliError> {
    model_flags(&mut root, &a.model);
    let mut horizons: Option<Vec<f64>> = match config::take(&mut root, "horizons") {
        Some(v) => Some(config::parse(v, RUN_EXPERIMENT_SCHEMA)?),
        None => None,
    };
    if a.horizons.is_some() {
        horizons = a.horizons.clone();
    }
    if let (None, Some(h)) = (a.t, &horizons) {
        // The first rung fixes the horizon used to check the configuration.
        set(&mut root, &["horizon", "T1"], h.first().copied());
        set(&mut root, &["horizon", "T2"], h.first().copied());
    }
    set(&mut root, &["horizon", "T1"], a.t);
    set(&mut root, &["horizon", "T2"], a.t);
    if let Some(r) = a.regime {
        set(&mut root, &["grid", "regime"], Some(regime_name(r)));
        if r != RegimeArg::Pickands {
            if let Some(g) = root.get_mut("grid").and_then(Value::as_object_mut) {
                g.remove("a1");
                g.remove("a2");
            }
        }
    }
    set(&mut root, &["grid", "p1"], a.p);
    set(&mut root, &["grid", "p2"], a.p);
    if a.a.is_some() {
        set(&mut root, &["grid", "a1"], a.a);
        set(&mut root, &["grid", "a2"], a.a);
        if a.p.is_none() {
            if let Some(g) = root.get_mut("grid").and_then(Value::as_object_mut) {
                g.remove("p1");
                g.remove("p2");
            }
        }
    }
    derive_pickands_spacing(&mut root)?;
    set(&mut root, &["fine_dx"], a.fine_dx);
    set(&mut root, &["fine_dy"], a.fine_dx);
    set(&mut root, &["reps"], a.reps);
    set(&mut root, &["seed"], seed);
    if a.allow_coarse_proxy {
        set(&mut root, &["allow_coarse_proxy"], Some(true));
    }
    let cfg: ExperimentConfig = config::parse(root, RUN_EXPERIMENT_SCHEMA)?;

    let (results, edges): (Vec<ExperimentResult>, Vec<(f64, f64)>) = match &horizons {
        Some(h) if h.is_empty() => return Err(CliError::Usage("horizons is empty".into())),
        Some(h) => (run_horizon_ladder(&cfg, h)?, h.iter().map(|&t| (t, t)).collect()),
        None => (vec![run_joint_experiment(&cfg)?], vec![(cfg.horizon.t1, cfg.horizon.t2)]),
    };

    let mut manifest_cfg = serde_json::to_value(&cfg).expect("config serialises");
    set(&mut manifest_cfg, &["horizons"], horizons.clone());
    let mut out = Output::new("run-experiment", &manifest_cfg, cfg.seed);
    let points = results.iter().zip(&edges).flat_map(|(res, &(t1, t2))| {
        res.points.iter().map(move |p| format!("{},{},{}", fmt_real(t1), fmt_real(t2), p.csv_row()))
    });
    out.table("run-experiment.csv", table(&format!("T1,T2,{}", JointPoint::CSV_HEADER), points));
    let summary = results.iter().zip(&edges).map(|(res, &(t1, t2))| {
        csv_line(&[
            fmt_real(t1),
            fmt_real(t2),
            res.regime.clone(),
            res.reps.to_string(),
            fmt_real(res.rho),
            res.mixture_model.to_string(),
            fmt_real(res.ks_marginal_continuous),
            fmt_real(res.ks_marginal_grid),
            fmt_real(res.ks_continuous_vs_gumbel),
        ])
    });
    out.table(
        "run-experiment-summary.csv",
        table(
            "T1,T2,regime,reps,rho,mixture_model,ks_marginal_continuous,ks_marginal_grid,ks_continuous_vs_gumbel",
            summary,
        ),
    );
    let details: Vec<Value> = results
        .iter()
        .map(|r| serde_json::json!({"normalizing": r.normalizing, "constants": r.constants}))
        .collect();
    out.extra("runs", &details);
    Ok(out)
}

// tail-check

const TAIL_CHECK_SCHEMA: &str = r#"{"model": {"alpha1": 2, "alpha2": 2}, "box": [1, 1], "u_list": [2, 3, 3.5],
 "fine_dx": 0.0625, "fine_dy": 0.0625, "reps": 200000, "seed": 0, "h": [H1, H2] (optional),
 "grid": {"p1": 0.5, "p2": 0.5, "regime": "sparse"} (optional), "work_cap": 1000000000000}"#;

pub fn tail_check(mut root: Value, a: &TailCheckArgs, seed: Option<u64>) -> Result<Output, CliError> {
    model_flags(&mut root, &a.model);
    set(&mut root, &["box"], a.box_size.clone());
    set(&mut root, &["u_list"], a.u.clone());
    set(&mut root, &["fine_dx"], a.fine_dx);
    set(&mut root, &["fine_dy"], a.fine_dy.or(a.fine_dx));
    if root.get("fine_dy").is_none() {
        let dx = root.get("fine_dx").cloned();
        set(&mut root, &["fine_dy"], dx);
    }
    set(&mut root, &["reps"], a.reps);
    set(&mut root, &["seed"], seed);
    if let Some(p) = a.p {
        set(&mut root, &["grid"], Some(serde_json::json!({"p1": p, "p2": p, "regime": "sparse"})));
    }
    let cfg: TailCheckConfig = config::parse(root, TAIL_CHECK_SCHEMA)?;
    let t = tail_ratio_check(&cfg)?;
    let mut out = Output::new("tail-check", &cfg, cfg.seed);
    out.table("tail-check.csv", table(TailRow::CSV_HEADER, t.rows.iter().map(TailRow::csv_row)));
    if t.too_few_hits {
        out.soft_flag(format!("fewer than {} exceedances at some level", gaussmax::experiments::MIN_HITS));
    }
    Ok(out)
}

// dense-study

const DENSE_STUDY_SCHEMA: &str = r#"{"model": {"alpha1": 2, "alpha2": 2}, "box": [16, 16], "u": 3.5,
 "a_list": [1, 0.5, 0.25, 0.125, 0.0625], "fine_dx": 0.03125, "reps": 2000, "seed": 0, "work_cap": 1000000000000}"#;

pub fn dense_study(mut root: Value, a: &DenseStudyArgs, seed: Option<u64>) -> Result<Output, CliError> {
    model_flags(&mut root, &a.model);
    set(&mut root, &["box"], a.box_size.clone());
    set(&mut root, &["u"], a.u);
    set(&mut root, &["a_list"], a.a_list.clone());
    set(&mut root, &["fine_dx"], a.fine_dx);
    set(&mut root, &["reps"], a.reps);
    set(&mut root, &["seed"], seed);
    let cfg: DenseStudyConfig = config::parse(root, DENSE_STUDY_SCHEMA)?;
    let study = dense_difference_study(&cfg)?;
    let mut out = Output::new("dense-study", &cfg, cfg.seed);
    out.table("dense-study.csv", table(DenseRow::CSV_HEADER, study.rows.iter().map(DenseRow::csv_row)));
    out.extra("non_increasing", &study.non_increasing);
    Ok(out)
}

// repro

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproConfig {
    #[serde(default)]
    pub only: Option<Vec<u32>>,
}

const REPRO_SCHEMA: &str = r#"{"only": [1, 2, 9]}"#;

pub fn repro(mut root: Value, a: &ReproArgs) -> Result<Output, CliError> {
    set(&mut root, &["only"], a.only.clone());
    let cfg: ReproConfig = config::parse(root, REPRO_SCHEMA)?;
    let ids = cfg.only.clone().unwrap_or_else(|| repro::ALL.to_vec());
    if let Some(bad) = ids.iter().find(|i| !repro::ALL.contains(i)) {
        return Err(CliError::Usage(format!("no criterion {bad}; known: 1-9")));
    }
    let exe = std::env::current_exe().map_err(CliError::Io)?;
    let ctx = repro::Context { exe };
    let outcomes: Vec<repro::Outcome> = ids
        .iter()
        .map(|&id| {
            let o = repro::run(id, &ctx);
            eprintln!("{}", o.line());
            o
        })
        .collect();
    let mut out = Output::new("repro", &cfg, 0);
    out.table("repro.csv", table(repro::Outcome::CSV_HEADER, outcomes.iter().map(repro::Outcome::csv_row)));
    for o in outcomes.iter().filter(|o| !o.passed()) {
        out.soft_flag(format!("criterion {} failed", o.id));
    }
    Ok(out)
}
