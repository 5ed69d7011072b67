//! The acceptance suite: nine criteria, each split into parts that pass or
//! fail on their own. Parts known to be out of reach at the prescribed
//! budget are marked, so a run can tell a regression from a known gap.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use gaussmax::experiments::{
    dense_difference_study, run_horizon_ladder, run_joint_experiment, tail_ratio_check, DenseStudyConfig,
    ExperimentConfig, TailCheckConfig, TailKind,
};
use gaussmax::fieldsim::circulant::Workspace;
use gaussmax::fieldsim::FieldSimulator;
use gaussmax::limits::{limit_cdf_dense, limit_cdf_marginal, limit_cdf_pickands, limit_cdf_sparse};
use gaussmax::parallel::{map_reps_with, mean_stderr};
use gaussmax::pickands::{
    estimate_H_alpha, estimate_joint_constant, joint_paths, per_path_1d, JointSpec, Options, CONTINUOUS_DT,
};
use gaussmax::report::{csv_line, fmt_real};
use gaussmax::rng::{stream, StreamRole};
use gaussmax::special::pickands_closed_form;
use gaussmax::{covariance, CovarianceModel, GridSpec, Horizon, Regime};
use rand_distr::{Distribution, StandardNormal};

/// Criterion numbers in run order.
pub const ALL: [u32; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

/// Where the `gaussmax` binary lives (needed by the determinism check).
pub struct Context {
    pub exe: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub name: String,
    pub passed: bool,
    /// Known not to be reachable at the prescribed budget.
    pub unattainable: bool,
    pub detail: String,
}

impl Part {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Part { name: name.to_string(), passed, unattainable: false, detail }
    }

    fn unattainable(mut self) -> Self {
        self.unattainable = true;
        self
    }

    fn error(name: &str, e: impl std::fmt::Display) -> Self {
        Part::new(name, false, format!("error: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub parts: Vec<Part>,
    pub elapsed_s: f64,
}

impl Outcome {
    pub const CSV_HEADER: &'static str = "criterion,part,result,known_gap,detail";

    pub fn passed(&self) -> bool {
        self.parts.iter().all(|p| p.passed)
    }

    /// A failing part that is not a known gap.
    pub fn regressed(&self) -> bool {
        self.parts.iter().any(|p| !p.passed && !p.unattainable)
    }

    /// One summary line for humans.
    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let parts: Vec<String> = self
            .parts
            .iter()
            .map(|p| {
                let mark = match (p.passed, p.unattainable) {
                    (true, _) => "ok",
                    (false, true) => "fail, known gap",
                    (false, false) => "fail",
                };
                format!("{} [{mark}] {}", p.name, p.detail)
            })
            .collect();
        format!("criterion {} {status}: {} ({:.1} s) | {}", self.id, self.title, self.elapsed_s, parts.join(" | "))
    }

    /// Deterministic rows (no timings).
    pub fn csv_row(&self) -> String {
        self.parts
            .iter()
            .map(|p| {
                csv_line(&[
                    self.id.to_string(),
                    p.name.clone(),
                    if p.passed { "pass" } else { "fail" }.to_string(),
                    p.unattainable.to_string(),
                    format!("\"{}\"", p.detail.replace('"', "'")),
                ])
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Runs criterion `id`. Unknown ids panic.
pub fn run(id: u32, ctx: &Context) -> Outcome {
    let start = Instant::now();
    let (title, limit_s, mut parts): (&'static str, Option<f64>, Vec<Part>) = match id {
        1 => ("closed-form limit laws at r = 0", Some(1.0), closed_forms()),
        2 => ("mixture integrals against Monte Carlo", Some(30.0), mixture_oracle()),
        3 => ("Pickands constants H_1 and H_2", Some(600.0), pickands_constants()),
        4 => ("coupling inequalities and shift identity", None, coupling()),
        5 => ("lattice covariances of the simulator", Some(120.0), simulator_exactness()),
        6 => ("high-level tail asymptotics", Some(900.0), tail_asymptotics()),
        7 => ("regime phenomenology at r = 0", Some(3600.0), regimes()),
        8 => ("strong dependence limit", Some(1200.0), strong_dependence()),
        9 => ("determinism across thread counts", None, determinism(ctx)),
        _ => panic!("no criterion {id}"),
    };
    let elapsed_s = start.elapsed().as_secs_f64();
    if let Some(limit) = limit_s {
        parts.push(Part::new("runtime", elapsed_s < limit, format!("limit {limit} s")));
    }
    Outcome { id, title, parts, elapsed_s }
}

fn gumbel(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

fn closed_forms() -> Vec<Part> {
    let grid = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut worst = [0.0f64; 3];
    for &x in &grid {
        for &y in &grid {
            let checks = [
                limit_cdf_sparse(x, y, 0.0).map(|v| (v.value - gumbel(x) * gumbel(y)).abs()),
                limit_cdf_dense(x, y, 0.0).map(|v| (v.value - gumbel(x.min(y))).abs()),
                limit_cdf_marginal(x, 0.0).map(|v| (v.value - gumbel(x)).abs()),
            ];
            for (w, c) in worst.iter_mut().zip(checks) {
                match c {
                    Ok(err) => *w = w.max(err),
                    Err(e) => return vec![Part::error("closed forms", e)],
                }
            }
        }
    }
    ["sparse", "dense", "marginal"]
        .iter()
        .zip(worst)
        .map(|(name, w)| Part::new(name, w <= 1e-10, format!("max abs error {}", fmt_real(w))))
        .collect()
}

/// Joint constant used for the Pickands-grid law in the oracle check.
const ORACLE_JOINT: f64 = 0.8;

fn mixture_oracle() -> Vec<Part> {
    const DRAWS: usize = 1_000_000;
    let mut rng = stream(2, 0, StreamRole::Oracle);
    let z: Vec<f64> = (0..DRAWS).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut parts = Vec::new();
    for r in [0.2f64, 0.5, 1.0] {
        let s = (2.0 * r).sqrt();
        let shifts: Vec<f64> = z.iter().map(|&z| (s * z - r).exp()).collect();
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for (x, y) in [(0.0f64, 0.0f64), (1.0, -1.0)] {
            let (ex, ey) = ((-x).exp(), (-y).exp());
            let laws = [
                ("sparse", limit_cdf_sparse(x, y, r), ex + ey),
                ("pickands", limit_cdf_pickands(x, y, r, ORACLE_JOINT), ex + ey - ORACLE_JOINT),
                ("dense", limit_cdf_dense(x, y, r), (-x.min(y)).exp()),
                ("marginal", limit_cdf_marginal(x, r), ex),
            ];
            for (name, quad, mass) in laws {
                let quad = match quad {
                    Ok(v) => v.value,
                    Err(e) => return vec![Part::error(name, e)],
                };
                let g: Vec<f64> = shifts.iter().map(|&w| (-mass * w).exp()).collect();
                let (mc, se) = mean_stderr(&g);
                let k = (quad - mc).abs() / se;
                worst = worst.max(k);
                ok &= k <= 3.0;
            }
        }
        parts.push(Part::new(&format!("r={r}"), ok, format!("worst deviation {} s.e.", fmt_real(worst))));
    }
    parts
}

fn pickands_constants() -> Vec<Part> {
    [1.0, 2.0]
        .iter()
        .map(|&alpha| {
            let name = format!("H_{alpha}");
            let exact = pickands_closed_form(alpha).expect("closed form");
            match estimate_H_alpha(alpha, 128.0, CONTINUOUS_DT, 10_000, 3, &Options::default()) {
                Ok(e) => {
                    let rel = (e.value / exact - 1.0).abs();
                    Part::new(
                        &name,
                        rel <= 0.05,
                        format!(
                            "estimate {} (s.e. {}) vs {}, relative error {}",
                            fmt_real(e.value),
                            fmt_real(e.stderr),
                            fmt_real(exact),
                            fmt_real(rel)
                        ),
                    )
                }
                Err(e) => Part::error(&name, e),
            }
        })
        .collect()
}

fn coupling() -> Vec<Part> {
    let opts = Options::default();
    let mut parts = Vec::new();

    // Nested grids: each is a sub-lattice of the next and of the simulation lattice.
    let grids = [1.0, 0.5, 0.25, 0.0625];
    let mut violations = 0usize;
    let mut checked = 0usize;
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        match per_path_1d(alpha, 16.0, 1.0 / 64.0, &grids, 1000, 4, &opts) {
            Ok(rows) => {
                for row in rows {
                    for w in row.windows(2).skip(1) {
                        violations += usize::from(w[0] > w[1]);
                    }
                    violations += row[1..].iter().filter(|&&d| d > row[0]).count();
                    checked += 1;
                }
            }
            Err(e) => return vec![Part::error("ordering", e)],
        }
    }
    parts.push(Part::new("ordering", violations == 0, format!("{violations} violations over {checked} paths")));

    let spec = JointSpec { alpha1: 1.0, alpha2: 2.0, a1: 0.5, a2: 0.25, lambda1: 8.0, lambda2: 8.0, dt1: 1.0 / 16.0, dt2: 1.0 / 32.0 };
    let base = [(0.0, 0.0), (1.0, -0.5), (-0.7, 2.0)];
    let mut worst: f64 = 0.0;
    let paths = match joint_paths(&spec, 1000, 4, &opts) {
        Ok(p) => p,
        Err(e) => return vec![parts.remove(0), Part::error("shift identity", e)],
    };
    for c in [-1.5, 0.3, 2.5] {
        let shifted: Vec<(f64, f64)> = base.iter().map(|&(x, y)| (x + c, y + c)).collect();
        let (Ok(h0), Ok(h1)) = (
            estimate_joint_constant(&spec, &base, 1000, 4, &opts),
            estimate_joint_constant(&spec, &shifted, 1000, 4, &opts),
        ) else {
            return vec![parts.remove(0), Part::error("shift identity", "estimation failed")];
        };
        for (a, b) in h0.iter().zip(&h1) {
            let expect = (-c).exp() * a.value;
            worst = worst.max((b.value - expect).abs() / expect.abs());
        }
        for p in &paths {
            for &(x, y) in &base {
                let expect = (-c).exp() * p.value(x, y);
                if expect > 0.0 {
                    worst = worst.max((p.value(x + c, y + c) - expect).abs() / expect);
                }
            }
        }
    }
    parts.push(Part::new("shift identity", worst <= 1e-12, format!("max relative error {}", fmt_real(worst))));
    parts
}

fn simulator_exactness() -> Vec<Part> {
    const REPS: u64 = 2000;
    let model = CovarianceModel::new(1.0, 1.0, 0.0).expect("valid model");
    let d = 0.25;
    let h = Horizon { t1: 63.0 * d, t2: 63.0 * d };
    let sim = match FieldSimulator::new(&model, &h, d, d) {
        Ok(s) => s,
        Err(e) => return vec![Part::error("simulator", e)],
    };
    let (nx, ny) = sim.shape();
    assert_eq!((nx, ny), (64, 64));
    let lags: [(usize, usize); 5] = [(0, 0), (1, 0), (0, 1), (1, 1), (3, 2)];
    let lagged_mean = |v: &[f64], (lx, ly): (usize, usize)| {
        let mut s = 0.0;
        for i in 0..nx - lx {
            for j in 0..ny - ly {
                s += v[i * ny + j] * v[(i + lx) * ny + j + ly];
            }
        }
        s / ((nx - lx) * (ny - ly)) as f64
    };
    let init = || (Workspace::default(), vec![0.0; nx * ny], vec![0.0; nx * ny]);
    let per_pair = map_reps_with(REPS / 2, init, |(ws, a, b), p| {
        sim.sample_pair_into(5, p, ws, a, b);
        [lags.map(|l| lagged_mean(a, l)), lags.map(|l| lagged_mean(b, l))]
    });
    let per_rep: Vec<[f64; 5]> = per_pair.into_iter().flatten().collect();
    lags.iter()
        .enumerate()
        .map(|(k, &(lx, ly))| {
            let col: Vec<f64> = per_rep.iter().map(|r| r[k]).collect();
            let (mean, se) = mean_stderr(&col);
            let exact = covariance(&model, [lx as f64 * d, ly as f64 * d]);
            let z = (mean - exact).abs() / se;
            let name = if (lx, ly) == (0, 0) { "variance".to_string() } else { format!("lag ({lx},{ly})") };
            Part::new(
                &name,
                z <= 4.0,
                format!("{} vs {}, {} s.e.", fmt_real(mean), fmt_real(exact), fmt_real(z)),
            )
        })
        .collect()
}

fn tail_asymptotics() -> Vec<Part> {
    let model = CovarianceModel::new(2.0, 2.0, 0.0).expect("valid model");
    let seeds = [1u64, 2, 3];
    let mut in_band = 0;
    let mut closer = 0;
    let mut ratios = Vec::new();
    for &seed in &seeds {
        let cfg = TailCheckConfig {
            model,
            box_size: [1.0, 1.0],
            u_list: vec![2.0, 3.5],
            fine_dx: 1.0 / 16.0,
            fine_dy: 1.0 / 16.0,
            reps: 200_000,
            seed,
            h: None,
            grid: None,
            work_cap: u128::MAX,
        };
        let t = match tail_ratio_check(&cfg) {
            Ok(t) => t,
            Err(e) => return vec![Part::error("tail check", e)],
        };
        let ratio = |u: f64| t.rows.iter().find(|r| r.kind == TailKind::Continuous && r.u == u).expect("row").ratio;
        let (low, high) = (ratio(2.0), ratio(3.5));
        in_band += usize::from((0.6..=1.6).contains(&high));
        closer += usize::from((high - 1.0).abs() < (low - 1.0).abs());
        ratios.push(format!("seed {seed}: {} at u=2, {} at u=3.5", fmt_real(low), fmt_real(high)));
    }
    let detail = ratios.join("; ");
    vec![
        Part::new("band", in_band >= 2, format!("ratio at u=3.5 in [0.6, 1.6] for {in_band} of 3 seeds ({detail})"))
            .unattainable(),
        Part::new("closer to 1", closer >= 2, format!("{closer} of 3 seeds")),
    ]
}

fn regimes() -> Vec<Part> {
    let model = CovarianceModel::new(2.0, 2.0, 0.0).expect("valid model");
    let mut parts = Vec::new();

    let sparse = GridSpec { p1: 8.0, p2: 8.0, regime: Regime::Sparse };
    let mut cfg = ExperimentConfig::new(model, Horizon::square(256.0).expect("horizon"), sparse, 4000);
    cfg.seed = 7;
    parts.push(match run_joint_experiment(&cfg) {
        Ok(res) => {
            let p = res.points[0];
            Part::new(
                "sparse independence",
                p.dependence < 2.5 * p.dependence_se,
                format!("|dependence| {} vs 2.5 s.e. {}", fmt_real(p.dependence), fmt_real(2.5 * p.dependence_se)),
            )
        }
        Err(e) => Part::error("sparse independence", e),
    });

    let dense = DenseStudyConfig {
        model,
        box_size: [16.0, 16.0],
        u: 3.5,
        a_list: vec![1.0, 0.5, 0.25, 0.125, 0.0625],
        fine_dx: 1.0 / 32.0,
        reps: 2000,
        seed: 7,
        work_cap: u128::MAX,
    };
    parts.push(match dense_difference_study(&dense) {
        Ok(study) => {
            let diffs: Vec<f64> = study.rows.iter().map(|r| r.diff).collect();
            let monotone = diffs.windows(2).all(|w| w[1] <= w[0]);
            let last = *diffs.last().expect("rows");
            Part::new(
                "dense refinement",
                monotone && last < 0.02,
                format!("diffs {}", diffs.iter().map(|&d| fmt_real(d)).collect::<Vec<_>>().join(" ")),
            )
        }
        Err(e) => Part::error("dense refinement", e),
    });

    let grid = GridSpec { p1: 2.0, p2: 2.0, regime: Regime::Sparse };
    let mut cfg = ExperimentConfig::new(model, Horizon::square(32.0).expect("horizon"), grid, 2000);
    cfg.seed = 7;
    parts.push(match run_horizon_ladder(&cfg, &[32.0, 64.0, 128.0, 256.0]) {
        Ok(runs) => {
            let ks: Vec<f64> = runs.iter().map(|r| r.ks_marginal_continuous).collect();
            Part::new(
                "KS along T",
                ks.windows(2).all(|w| w[1] < w[0]),
                format!("KS {}", ks.iter().map(|&k| fmt_real(k)).collect::<Vec<_>>().join(" ")),
            )
            .unattainable()
        }
        Err(e) => Part::error("KS along T", e),
    });
    parts
}

fn strong_dependence() -> Vec<Part> {
    let model = CovarianceModel::new(2.0, 2.0, 0.5).expect("valid model");
    let grid = GridSpec { p1: 2.0, p2: 2.0, regime: Regime::Sparse };
    let mut wins = 0;
    let mut detail = Vec::new();
    for seed in 1..=5u64 {
        let mut cfg = ExperimentConfig::new(model, Horizon::square(256.0).expect("horizon"), grid, 2000);
        cfg.seed = seed;
        cfg.fine_dx = Some(0.25);
        cfg.fine_dy = Some(0.25);
        match run_joint_experiment(&cfg) {
            Ok(res) => {
                wins += usize::from(res.ks_marginal_continuous < res.ks_continuous_vs_gumbel);
                detail.push(format!(
                    "seed {seed}: {} vs {}",
                    fmt_real(res.ks_marginal_continuous),
                    fmt_real(res.ks_continuous_vs_gumbel)
                ));
            }
            Err(e) => return vec![Part::error("mixture limit", e)],
        }
    }
    vec![Part::new(
        "mixture limit",
        wins >= 4,
        format!("KS to the r=0.5 law below KS to Gumbel in {wins} of 5 seeds ({})", detail.join("; ")),
    )]
}

/// Small invocations of every subcommand.
pub const DETERMINISM_RUNS: &[&[&str]] = &[
    &["simulate-field", "--alpha", "1", "--t", "4", "--dx", "0.25", "--seed", "3"],
    &["simulate-field", "--alpha1", "2", "--alpha2", "1", "--r", "0.5", "--t", "6", "--dx", "0.5", "--seed", "3"],
    &["estimate-pickands", "--alpha", "1", "--lambda", "16", "--dt", "0.0625", "--reps", "400", "--seed", "3"],
    &["estimate-pickands", "--alpha", "1.5", "--a", "0.5", "--lambdas", "4,8,16", "--reps", "200", "--seed", "3"],
    &["estimate-pickands", "--alpha", "2", "--a1", "0.5", "--a2", "0.25", "--lambda", "8", "--reps", "200", "--seed", "3"],
    &["eval-limit", "--regime", "sparse", "--r", "0.5", "--x", "0", "--y", "1"],
    &["run-experiment", "--alpha", "2", "--t", "16", "--regime", "sparse", "--p", "2", "--reps", "200", "--seed", "3"],
    &["run-experiment", "--alpha", "2", "--horizons", "4,8", "--regime", "dense", "--p", "0.25", "--reps", "100",
      "--seed", "3", "--r", "0.3"],
    &["tail-check", "--alpha", "2", "--box", "1,1", "--u", "2,2.5", "--fine-dx", "0.125", "--p", "0.5", "--reps",
      "2000", "--seed", "3"],
    &["dense-study", "--alpha", "2", "--box", "4,4", "--u", "2.5", "--a-list", "1,0.5,0.25", "--fine-dx", "0.125",
      "--reps", "200", "--seed", "3"],
    &["repro", "--only", "1"],
];

fn determinism(ctx: &Context) -> Vec<Part> {
    let run = |args: &[&str], threads: &str| {
        Command::new(&ctx.exe).args(args).args(["--threads", threads]).output()
    };
    let mut same = 0;
    let mut failures = Vec::new();
    for args in DETERMINISM_RUNS {
        match (run(args, "1"), run(args, "3")) {
            (Ok(a), Ok(b)) if a.status.success() && b.status.success() && !a.stdout.is_empty() => {
                if a.stdout == b.stdout {
                    same += 1;
                } else {
                    failures.push(format!("{} differs", args.join(" ")));
                }
            }
            (Ok(a), _) if !a.status.success() => {
                failures.push(format!("{} failed: {}", args.join(" "), String::from_utf8_lossy(&a.stderr).trim()))
            }
            _ => failures.push(format!("{} did not run", args.join(" "))),
        }
    }
    let detail = if failures.is_empty() {
        format!("{same} of {} invocations byte-identical", DETERMINISM_RUNS.len())
    } else {
        failures.join("; ")
    };
    vec![Part::new("byte-identical CSV", failures.is_empty(), detail)]
}
