use gaussmax::experiments::field_maxima;
use gaussmax::fieldsim::{simulate_fbm, simulate_strong_field, FbmSimulator, FieldSimulator};
use gaussmax::parallel::{mean_stderr, with_threads};
use gaussmax::rng::{stream, StreamRole};
use gaussmax::{covariance, CovarianceModel, Horizon};

#[test]
fn fbm_increment_variances_follow_the_power_law() {
    let (n, dt) = (257, 1.0 / 64.0);
    for hurst in [0.25, 0.5, 0.9] {
        let sim = FbmSimulator::new(hurst, n, dt).unwrap();
        let mut buf = Vec::new();
        let mut at_end = Vec::new();
        let mut at_quarter = Vec::new();
        for rep in 0..2000 {
            let (a, b) = sim.sample_pair(&mut stream(11, rep, StreamRole::Fbm), &mut buf);
            for p in [a, b] {
                assert_eq!(p[0], 0.0);
                at_end.push(p[n - 1] * p[n - 1]);
                at_quarter.push((p[n - 1] - p[3 * (n - 1) / 4]).powi(2));
            }
        }
        // Var B(t) = t^{2H}; stationary increments give the same law for B(t) − B(s).
        for (values, t) in [(&at_end, 4.0f64), (&at_quarter, 1.0)] {
            let (m, se) = mean_stderr(values);
            let exact = t.powf(2.0 * hurst);
            assert!((m - exact).abs() < 4.0 * se, "H={hurst} t={t}: {m} vs {exact} (se {se})");
        }
    }
}

#[test]
fn fbm_is_reproducible_by_seed() {
    let a = simulate_fbm(0.7, 100, 0.1, 3).unwrap();
    let b = simulate_fbm(0.7, 100, 0.1, 3).unwrap();
    let c = simulate_fbm(0.7, 100, 0.1, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.values, c.values);
}

#[test]
fn gaussian_covariance_field_matches_lags() {
    let model = CovarianceModel::new(2.0, 1.5, 0.0).unwrap();
    let d = 0.5;
    let sim = FieldSimulator::new(&model, &Horizon { t1: 8.0, t2: 8.0 }, d, d).unwrap();
    let (nx, ny) = sim.shape();
    let lags = [(0usize, 0usize), (1, 0), (0, 1), (2, 3)];
    let mut per_rep: Vec<Vec<f64>> = vec![Vec::new(); lags.len()];
    for pair in 0..1000 {
        for s in sim.sample_pair(21, pair) {
            for (k, &(lx, ly)) in lags.iter().enumerate() {
                let mut acc = 0.0;
                for i in 0..nx - lx {
                    for j in 0..ny - ly {
                        acc += s.values[[i, j]] * s.values[[i + lx, j + ly]];
                    }
                }
                per_rep[k].push(acc / ((nx - lx) * (ny - ly)) as f64);
            }
        }
    }
    for (k, &(lx, ly)) in lags.iter().enumerate() {
        let (m, se) = mean_stderr(&per_rep[k]);
        let exact = covariance(&model, [lx as f64 * d, ly as f64 * d]);
        assert!((m - exact).abs() < 4.0 * se, "lag ({lx},{ly}): {m} vs {exact}");
    }
}

#[test]
fn mixture_field_has_unit_variance_and_common_shift() {
    let model = CovarianceModel::new(1.0, 1.0, 0.5).unwrap();
    let h = Horizon::square(8.0).unwrap();
    let rho = gaussmax::model::rho(&model, &h).unwrap();
    let (mut corner, mut far) = (Vec::new(), Vec::new());
    for seed in 0..3000 {
        let s = simulate_strong_field(&model, &h, 1.0, 1.0, seed).unwrap();
        let (a, b) = (s.values[[0, 0]], s.values[[8, 8]]);
        corner.push(a * a);
        // exp(−16) is negligible: the far pair is correlated only through U.
        far.push(a * b);
    }
    let (v, se) = mean_stderr(&corner);
    assert!((v - 1.0).abs() < 4.0 * se, "variance {v}");
    let (c, se) = mean_stderr(&far);
    let exact = rho + (1.0 - rho) * (-16.0f64).exp();
    assert!((c - exact).abs() < 4.0 * se, "far covariance {c} vs {exact}");
}

#[test]
fn maxima_do_not_depend_on_thread_count() {
    let model = CovarianceModel::new(1.5, 2.0, 0.0).unwrap();
    let sim = FieldSimulator::new(&model, &Horizon::square(6.0).unwrap(), 0.25, 0.25).unwrap();
    let run = |threads| with_threads(threads, || field_maxima(&sim, 9, 51, &[(1, 1), (4, 2)]));
    let one = run(1);
    assert_eq!(one.len(), 51);
    assert_eq!(one, run(3));
    for m in &one {
        assert!(m[1] <= m[0]);
    }
}
