//! Monte Carlo estimates of Pickands-type constants.
//!
//! All constants here are limits of `E G(Z)/λ` where `Z(t) = exp(√2 B(t) − |t|^α)`
//! on a finite lattice and `G` is positively 1-homogeneous (a maximum over some
//! index set, or the two-threshold functional of the joint constant).
//!
//! The plain estimator averages `G(Z)/λ` directly. Its per-path values have a
//! tail so heavy that at λ ≳ 100 the sample mean is dominated by events that a
//! desk-sized run never sees, and it lands far below the truth. The default
//! estimator instead averages over a uniformly chosen lattice anchor τ:
//!
//! ```text
//! E G(Z) = n · E[ G(e^W) / Σ_k e^{W(k)} ],   W(k) = √2 (B(k) − B(τ)) − |k − τ|^α
//! ```
//!
//! which is exact for every 1-homogeneous `G` (change of measure with density
//! `Z(τ)`) and has bounded per-path values. Both estimators target the same
//! finite-lattice quantity, and because all functionals of one path share τ and
//! the denominator, every pathwise ordering between them survives.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldsim::FbmSimulator;
use crate::parallel::{map_reps_with, mean_stderr};
use crate::report::{csv_line, fmt_real};
use crate::rng::{stream, StreamRole};
use crate::model::check_alpha;
use rand::Rng;

/// Default cap on `reps × lattice points`.
pub const DEFAULT_WORK_CAP: u128 = 50_000_000_000;

/// Window lengths of the default λ ladder.
pub const DEFAULT_LAMBDAS: [f64; 4] = [16.0, 32.0, 64.0, 128.0];

/// Lattice step used for continuous-only estimates. The lattice maximum
/// undershoots the continuous one by roughly `0.8·√dt` relative for α = 1, so
/// this is fixed in absolute terms rather than tied to λ.
pub const CONTINUOUS_DT: f64 = 1.0 / 1024.0;

/// Fraction dropped at each end for the trimmed-mean diagnostic.
pub const TRIM_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Anchor-averaged estimator (see module docs).
    #[default]
    ShiftAveraged,
    /// Plain `E G(Z)/λ`.
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimateKind {
    Continuous,
    DiscreteGrid { a: f64 },
    Joint { a1: f64, a2: f64, x: f64, y: f64 },
}

impl EstimateKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimateKind::Continuous => "continuous",
            EstimateKind::DiscreteGrid { .. } => "discrete",
            EstimateKind::Joint { .. } => "joint",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickandsEstimate {
    pub value: f64,
    pub stderr: f64,
    /// 10%-trimmed mean of the per-path values; a diagnostic only.
    pub trimmed_mean: f64,
    pub alpha: [f64; 2],
    pub lambda: [f64; 2],
    pub dt: [f64; 2],
    pub reps: u64,
    pub kind: EstimateKind,
}

impl PickandsEstimate {
    pub const CSV_HEADER: &'static str =
        "kind,alpha1,alpha2,a1,a2,x,y,lambda1,lambda2,dt,reps,value,stderr,converged";

    fn from_values(values: &[f64], kind: EstimateKind, alpha: [f64; 2], lambda: [f64; 2], dt: [f64; 2]) -> Self {
        let (value, stderr) = mean_stderr(values);
        PickandsEstimate {
            value,
            stderr,
            trimmed_mean: trimmed_mean(values, TRIM_FRACTION),
            alpha,
            lambda,
            dt,
            reps: values.len() as u64,
            kind,
        }
    }

    /// One CSV row; `converged` is left blank when no extrapolation was run.
    pub fn csv_row(&self, converged: Option<bool>) -> String {
        let joint = matches!(self.kind, EstimateKind::Joint { .. });
        let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
        let (a1, a2, x, y) = match self.kind {
            EstimateKind::Continuous => (None, None, None, None),
            EstimateKind::DiscreteGrid { a } => (Some(a), None, None, None),
            EstimateKind::Joint { a1, a2, x, y } => (Some(a1), Some(a2), Some(x), Some(y)),
        };
        csv_line(&[
            self.kind.name().to_string(),
            fmt_real(self.alpha[0]),
            if joint { fmt_real(self.alpha[1]) } else { String::new() },
            opt(a1),
            opt(a2),
            opt(x),
            opt(y),
            fmt_real(self.lambda[0]),
            if joint { fmt_real(self.lambda[1]) } else { String::new() },
            fmt_real(self.dt[0]),
            self.reps.to_string(),
            fmt_real(self.value),
            fmt_real(self.stderr),
            converged.map(|c| c.to_string()).unwrap_or_default(),
        ])
    }
}

/// Mean of the values left after dropping `frac` of the sample at each end.
pub fn trimmed_mean(values: &[f64], frac: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let cut = ((v.len() as f64) * frac).floor() as usize;
    let kept = &v[cut..v.len() - cut];
    kept.iter().sum::<f64>() / kept.len() as f64
}

/// Knobs shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub estimator: Estimator,
    pub work_cap: u128,
}

impl Default for Options {
    fn default() -> Self {
        Options { estimator: Estimator::default(), work_cap: DEFAULT_WORK_CAP }
    }
}

/// A 1D simulation lattice `{k·dt : 0 ≤ k < n}` covering `[0, λ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Lattice {
    alpha: f64,
    lambda: f64,
    dt: f64,
    n: usize,
}

impl Lattice {
    fn new(alpha: f64, lambda: f64, dt: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("window lambda = {lambda} must be positive")));
        }
        if !(dt > 0.0 && dt <= lambda / 16.0) {
            return Err(Error::invalid(format!("time step {dt} must lie in (0, lambda/16]")));
        }
        let n = (lambda / dt * (1.0 + 1e-12)).floor() as usize + 1;
        Ok(Lattice { alpha, lambda, dt, n })
    }

    /// Index stride of the grid `{k·a}`; `dt` has to divide `a`.
    fn stride(&self, a: f64) -> Result<usize> {
        if !(a > 0.0 && a <= self.lambda / 4.0) {
            return Err(Error::invalid(format!("grid spacing a = {a} must lie in (0, lambda/4]")));
        }
        let s = a / self.dt;
        let k = s.round();
        if k < 1.0 || (s - k).abs() > 1e-9 * s.max(1.0) {
            return Err(Error::invalid(format!("time step {} does not divide grid spacing {a}", self.dt)));
        }
        Ok(k as usize)
    }

    fn simulator(&self) -> Result<FbmSimulator> {
        FbmSimulator::new(self.alpha / 2.0, self.n, self.dt)
    }
}

fn check_budget(reps: u64, points: usize, cap: u128) -> Result<()> {
    if reps == 0 {
        return Err(Error::invalid("reps must be positive"));
    }
    let work = reps as u128 * points as u128;
    if work > cap {
        return Err(Error::BudgetExceeded { work, cap });
    }
    Ok(())
}

/// Summary of one drifted path: its maximum over the lattice and over each
/// requested grid, and `log Σ_k e^{W(k)}`.
#[derive(Debug, Clone, PartialEq)]
struct PathSummary {
    max: f64,
    grid_max: Vec<f64>,
    log_sum: f64,
}

/// `drift[j] = (j·dt)^α`, the deterministic part of the drift at lag `j`.
fn drift_table(lat: &Lattice) -> Vec<f64> {
    (0..lat.n).map(|j| (j as f64 * lat.dt).powf(lat.alpha)).collect()
}

fn summarize(path: &[f64], drift: &[f64], w: &mut Vec<f64>, strides: &[usize], anchor: Option<usize>) -> PathSummary {
    let sqrt2 = std::f64::consts::SQRT_2;
    let (origin, b0) = match anchor {
        Some(t) => (t, path[t]),
        None => (0, 0.0),
    };
    w.clear();
    w.extend(path.iter().enumerate().map(|(k, &b)| sqrt2 * (b - b0) - drift[k.abs_diff(origin)]));
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let grid_max = strides
        .iter()
        .map(|&s| w.iter().step_by(s).copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let log_sum = max + w.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
    PathSummary { max, grid_max, log_sum }
}

/// Per-path summaries for `reps` independent paths. Replication `2p` and
/// `2p + 1` share one FFT (real and imaginary parts).
fn path_summaries(
    lat: &Lattice,
    strides: &[usize],
    reps: u64,
    seed: u64,
    role: StreamRole,
    tilt: StreamRole,
    estimator: Estimator,
) -> Result<Vec<PathSummary>> {
    let sim = lat.simulator()?;
    let drift = drift_table(lat);
    let pairs = reps.div_ceil(2);
    let out = map_reps_with(pairs, || (Vec::<Complex64>::new(), Vec::new()), |(buf, w), p| {
        let mut rng = stream(seed, p, role);
        let (a, b) = sim.sample_pair(&mut rng, buf);
        [(2 * p, a), (2 * p + 1, b)].map(|(rep, path)| {
            let anchor = match estimator {
                Estimator::ShiftAveraged => Some(stream(seed, rep, tilt).gen_range(0..lat.n)),
                Estimator::Naive => None,
            };
            summarize(&path, &drift, w, strides, anchor)
        })
    });
    let mut flat: Vec<PathSummary> = out.into_iter().flatten().collect();
    flat.truncate(reps as usize);
    Ok(flat)
}

/// Per-path values of the continuous functional and of each grid functional,
/// on shared paths: `values[rep][0]` is the continuous one, `values[rep][1 + i]`
/// belongs to `grids[i]`. Their means are the estimates.
pub fn per_path_1d(
    alpha: f64,
    lambda: f64,
    dt: f64,
    grids: &[f64],
    reps: u64,
    seed: u64,
    opts: &Options,
) -> Result<Vec<Vec<f64>>> {
    let lat = Lattice::new(alpha, lambda, dt)?;
    let strides = grids.iter().map(|&a| lat.stride(a)).collect::<Result<Vec<_>>>()?;
    check_budget(reps, lat.n, opts.work_cap)?;
    let sums = path_summaries(&lat, &strides, reps, seed, StreamRole::Fbm, StreamRole::Tilt, opts.estimator)?;
    let scale = match opts.estimator {
        Estimator::ShiftAveraged => lat.n as f64 / lambda,
        Estimator::Naive => 1.0 / lambda,
    };
    let norm = |s: &PathSummary| match opts.estimator {
        Estimator::ShiftAveraged => s.log_sum,
        Estimator::Naive => 0.0,
    };
    Ok(sums
        .iter()
        .map(|s| {
            std::iter::once(s.max)
                .chain(s.grid_max.iter().copied())
                .map(|m| scale * (m - norm(s)).exp())
                .collect()
        })
        .collect())
}

/// Continuous estimate plus one discrete estimate per grid, all on the same paths.
pub fn estimate_paired(
    alpha: f64,
    lambda: f64,
    dt: f64,
    grids: &[f64],
    reps: u64,
    seed: u64,
    opts: &Options,
) -> Result<(PickandsEstimate, Vec<PickandsEstimate>)> {
    let rows = per_path_1d(alpha, lambda, dt, grids, reps, seed, opts)?;
    let column = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    let meta = ([alpha, alpha], [lambda, lambda], [dt, dt]);
    let cont = PickandsEstimate::from_values(&column(0), EstimateKind::Continuous, meta.0, meta.1, meta.2);
    let disc = grids
        .iter()
        .enumerate()
        .map(|(i, &a)| PickandsEstimate::from_values(&column(i + 1), EstimateKind::DiscreteGrid { a }, meta.0, meta.1, meta.2))
        .collect();
    Ok((cont, disc))
}

/// H_α(λ)/λ from the maximum over the `dt`-lattice of `[0, λ]`.
#[allow(non_snake_case)]
pub fn estimate_H_alpha(alpha: f64, lambda: f64, dt: f64, reps: u64, seed: u64, opts: &Options) -> Result<PickandsEstimate> {
    Ok(estimate_paired(alpha, lambda, dt, &[], reps, seed, opts)?.0)
}

/// H_{a,α}(λ)/λ from the maximum over `{k·a} ∩ [0, λ]`, simulated on a lattice
/// of step `dt` (default `a/8`) that refines the grid.
#[allow(non_snake_case)]
pub fn estimate_H_a_alpha(
    alpha: f64,
    a: f64,
    lambda: f64,
    dt: Option<f64>,
    reps: u64,
    seed: u64,
    opts: &Options,
) -> Result<PickandsEstimate> {
    let dt = dt.unwrap_or(a / 8.0);
    let (_, mut disc) = estimate_paired(alpha, lambda, dt, &[a], reps, seed, opts)?;
    Ok(disc.remove(0))
}

/// Parameters of the two-dimensional joint constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSpec {
    pub alpha1: f64,
    pub alpha2: f64,
    pub a1: f64,
    pub a2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub dt1: f64,
    pub dt2: f64,
}

/// Per-path maxima of the drifted sheet `√2 B₁(t₁) + √2 B₂(t₂) − t₁^α₁ − t₂^α₂`
/// over the fine lattice (`m_c`) and the grid (`m_d`), already reduced by the
/// log-normaliser, together with the scale turning `e^{…}` into a path value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointPath {
    pub m_c: f64,
    pub m_d: f64,
    pub scale: f64,
}

impl JointPath {
    /// Contribution `scale · exp(min(M_c − x, M_d − y))` of this path.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.scale * (self.m_c - x).min(self.m_d - y).exp()
    }
}

pub fn joint_paths(spec: &JointSpec, reps: u64, seed: u64, opts: &Options) -> Result<Vec<JointPath>> {
    let l1 = Lattice::new(spec.alpha1, spec.lambda1, spec.dt1)?;
    let l2 = Lattice::new(spec.alpha2, spec.lambda2, spec.dt2)?;
    let s1 = l1.stride(spec.a1)?;
    let s2 = l2.stride(spec.a2)?;
    check_budget(reps, l1.n + l2.n, opts.work_cap)?;
    let first = path_summaries(&l1, &[s1], reps, seed, StreamRole::Fbm, StreamRole::Tilt, opts.estimator)?;
    let second = path_summaries(&l2, &[s2], reps, seed, StreamRole::FbmSecond, StreamRole::Oracle, opts.estimator)?;
    let area = spec.lambda1 * spec.lambda2;
    Ok(first
        .iter()
        .zip(&second)
        .map(|(p, q)| {
            // The sheet is a sum, so its maxima are sums of the axis maxima and
            // its exponential sum is a product.
            let (norm, scale) = match opts.estimator {
                Estimator::ShiftAveraged => (p.log_sum + q.log_sum, (l1.n * l2.n) as f64 / area),
                Estimator::Naive => (0.0, 1.0 / area),
            };
            JointPath { m_c: p.max + q.max - norm, m_d: p.grid_max[0] + q.grid_max[0] - norm, scale }
        })
        .collect())
}

/// H^{x,y}(λ₁,λ₂)/(λ₁λ₂) at every `(x, y)` in `points`, all on the same paths.
pub fn estimate_joint_constant(
    spec: &JointSpec,
    points: &[(f64, f64)],
    reps: u64,
    seed: u64,
    opts: &Options,
) -> Result<Vec<PickandsEstimate>> {
    let paths = joint_paths(spec, reps, seed, opts)?;
    Ok(points
        .iter()
        .map(|&(x, y)| {
            let v: Vec<f64> = paths.iter().map(|p| p.value(x, y)).collect();
            PickandsEstimate::from_values(
                &v,
                EstimateKind::Joint { a1: spec.a1, a2: spec.a2, x, y },
                [spec.alpha1, spec.alpha2],
                [spec.lambda1, spec.lambda2],
                [spec.dt1, spec.dt2],
            )
        })
        .collect())
}

/// Outcome of the λ → ∞ stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub value: f64,
    pub stderr: f64,
    /// |v_k − v_{k−1}| for the last two windows.
    pub drift: f64,
    /// 3 × combined standard error + 5% of the last value.
    pub band: f64,
    pub converged: bool,
}

/// Reports the last window's value and whether it has settled.
pub fn extrapolate(estimates: &[PickandsEstimate]) -> Result<Extrapolation> {
    if estimates.len() < 3 {
        return Err(Error::invalid(format!("extrapolation needs at least 3 windows, got {}", estimates.len())));
    }
    let area = |e: &PickandsEstimate| e.lambda[0] * e.lambda[1];
    if estimates.windows(2).any(|w| area(&w[1]) <= area(&w[0])) {
        return Err(Error::invalid("windows must be strictly increasing"));
    }
    let last = &estimates[estimates.len() - 1];
    let prev = &estimates[estimates.len() - 2];
    let drift = (last.value - prev.value).abs();
    let band = 3.0 * last.stderr.hypot(prev.stderr) + 0.05 * last.value.abs();
    Ok(Extrapolation { value: last.value, stderr: last.stderr, drift, band, converged: drift <= band })
}

/// Estimates H_α over a λ ladder and applies [`extrapolate`].
#[allow(non_snake_case)]
pub fn estimate_H_alpha_ladder(
    alpha: f64,
    lambdas: &[f64],
    dt: f64,
    reps: u64,
    seed: u64,
    opts: &Options,
) -> Result<(Vec<PickandsEstimate>, Extrapolation)> {
    let est = lambdas
        .iter()
        .map(|&l| estimate_H_alpha(alpha, l, dt, reps, seed, opts))
        .collect::<Result<Vec<_>>>()?;
    let ext = extrapolate(&est)?;
    Ok((est, ext))
}
