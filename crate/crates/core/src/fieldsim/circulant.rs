//! Circulant embedding of stationary covariances on regular lattices.
//!
//! A lattice of `n` points is embedded into a circle of `m = 2(n - 1)` points
//! (doubled on failure). The circulant's eigenvalues come from one FFT of its
//! first row; synthesising with complex Gaussian weights and transforming back
//! gives two independent exact samples, one in the real part and one in the
//! imaginary part.
//!
//! [`Circulant2d::compact`] uses a smaller circle when the covariance has
//! died out (below [`NEGLIGIBLE_COVARIANCE`] relative) well inside the
//! lattice: the torus then reproduces every lattice covariance to that
//! accuracy, at a fraction of the cost for short-range models.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Negative eigenvalues down to `-PSD_REL_TOL * max` are rounding noise and
/// get clamped to zero.
pub const PSD_REL_TOL: f64 = 1e-10;

/// How many times the embedding may be doubled before giving up.
pub const DEFAULT_MAX_DOUBLINGS: u32 = 4;

/// Covariances below this fraction of the variance count as zero in
/// [`Circulant2d::compact`]; it is under the rounding of the variance itself.
pub const NEGLIGIBLE_COVARIANCE: f64 = 1e-17;

/// Longest lag probed when looking for the end of the correlation range.
const MAX_RANGE_PROBE: usize = 1 << 20;

fn minimal_size(n: usize) -> usize {
    (2 * n.saturating_sub(1)).max(1)
}

/// Smallest integer ≥ `n` with no prime factor above 5.
fn smooth_size(n: usize) -> usize {
    (n.max(1)..)
        .find(|&k| {
            let mut r = k;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("smooth numbers are unbounded")
}

/// Circle length for `n` points when lags from `support` on are negligible.
fn compact_size(n: usize, support: usize) -> usize {
    let minimal = minimal_size(n);
    if support + 1 >= n {
        return minimal;
    }
    smooth_size(n + support).min(minimal)
}

fn psd_check(eig: &mut [f64]) -> std::result::Result<(), (f64, f64)> {
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let rel = if max > 0.0 { min / max } else { f64::NEG_INFINITY };
    if max <= 0.0 || min < -PSD_REL_TOL * max {
        return Err((min, rel));
    }
    for v in eig.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues of the circulant whose first row is `c` (real, symmetric).
pub fn circulant_eigenvalues(c: &[f64]) -> Vec<f64> {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(c.len());
    let mut buf: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// Embedding of a 1D stationary sequence `lag ↦ cov(lag)`, lags in lattice units.
pub struct Circulant1d {
    n: usize,
    m: usize,
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Circulant1d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Circulant1d").field("n", &self.n).field("m", &self.m).finish()
    }
}

impl Circulant1d {
    pub fn new<F: Fn(usize) -> f64>(cov: F, n: usize, max_doublings: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("lattice must have at least one point"));
        }
        let mut tried = Vec::new();
        let mut worst = (0.0, 0.0);
        // A prime factor in the circle length sends the FFT down a much slower
        // path, e.g. 2·(2^17 − 1) for a 2^17-step fBm.
        let base = smooth_size(minimal_size(n));
        for k in 0..=max_doublings {
            let m = base << k;
            tried.push((m, 1));
            let c: Vec<f64> = (0..m).map(|j| cov(j.min(m - j))).collect();
            let mut eig = circulant_eigenvalues(&c);
            match psd_check(&mut eig) {
                Ok(()) => {
                    let scale = eig.iter().map(|&l| (l / m as f64).sqrt()).collect();
                    let fft = FftPlanner::new().plan_fft_forward(m);
                    return Ok(Circulant1d { n, m, scale, fft });
                }
                Err(e) => worst = e,
            }
        }
        Err(Error::EmbeddingNotPsd { min_eigenvalue: worst.0, relative: worst.1, sizes_tried: tried })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn embedding_size(&self) -> usize {
        self.m
    }

    /// Eigenvalues after clamping.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.scale.iter().map(|s| s * s * self.m as f64).collect()
    }

    /// Two independent samples of length `n`.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut Vec<Complex64>) -> (Vec<f64>, Vec<f64>) {
        buf.clear();
        buf.extend(self.scale.iter().map(|&s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        }));
        self.fft.process(buf);
        let head = &buf[..self.n];
        (head.iter().map(|z| z.re).collect(), head.iter().map(|z| z.im).collect())
    }
}

/// Embedding of a 2D stationary covariance `(lag₁, lag₂) ↦ cov` on an
/// `nx × ny` lattice into an `mx × my` block circulant.
pub struct Circulant2d {
    nx: usize,
    ny: usize,
    mx: usize,
    my: usize,
    /// sqrt(λ / (mx·my)), row-major over (k₁, k₂).
    scale: Vec<f64>,
    fft_x: Arc<dyn Fft<f64>>,
    fft_y: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Circulant2d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Circulant2d")
            .field("n", &(self.nx, self.ny))
            .field("m", &(self.mx, self.my))
            .finish()
    }
}

/// Reusable buffers for [`Circulant2d::sample_pair_into`].
#[derive(Default)]
pub struct Workspace {
    grid: Vec<Complex64>,
    cols: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Circulant2d {
    /// Embedding into the minimal `2(nx−1) × 2(ny−1)` torus.
    pub fn new<F: Fn(usize, usize) -> f64>(cov: F, nx: usize, ny: usize, max_doublings: u32) -> Result<Self> {
        Self::with_base(cov, nx, ny, (minimal_size(nx), minimal_size(ny)), max_doublings)
    }

    /// Embedding into the smallest torus that leaves every pair of lattice
    /// points at least the covariance's effective range apart around the
    /// circle. Falls back to the minimal torus for long-range covariances.
    pub fn compact<F: Fn(usize, usize) -> f64>(cov: F, nx: usize, ny: usize, max_doublings: u32) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("lattice must have at least one point per axis"));
        }
        let cutoff = NEGLIGIBLE_COVARIANCE * cov(0, 0).abs();
        let mut support = (0, 0);
        for i in 0..nx {
            for j in 0..ny {
                if cov(i, j).abs() > cutoff {
                    support.0 = support.0.max(i + 1);
                    support.1 = support.1.max(j + 1);
                }
            }
        }
        let base = (compact_size(nx, support.0), compact_size(ny, support.1));
        let edge = (support.0 + 1 >= nx, support.1 + 1 >= ny);
        if !(edge.0 || edge.1) {
            return Self::with_base(cov, nx, ny, base, max_doublings);
        }
        match Self::with_base(&cov, nx, ny, base, 0) {
            Err(Error::EmbeddingNotPsd { sizes_tried: mut tried, .. }) if max_doublings > 0 => {
                // The correlation range r exceeds the lattice. A circle of
                // length 2r already holds every non-negligible lag both ways
                // round, where blind doubling often overshoots.
                let reach = |axis: usize, n: usize| {
                    let lag = |k: usize| if axis == 0 { cov(k, 0) } else { cov(0, k) };
                    (n..MAX_RANGE_PROBE).find(|&k| lag(k).abs() <= cutoff)
                };
                let widen = |on: bool, axis: usize, n: usize, b: usize| match on {
                    true => reach(axis, n).map(|r| smooth_size((n + r).max(2 * r)).max(b)),
                    false => Some(b),
                };
                let (Some(wx), Some(wy)) = (widen(edge.0, 0, nx, base.0), widen(edge.1, 1, ny, base.1)) else {
                    return Self::with_base(cov, nx, ny, base, max_doublings);
                };
                match Self::with_base(&cov, nx, ny, (wx, wy), max_doublings - 1) {
                    Err(Error::EmbeddingNotPsd { min_eigenvalue, relative, sizes_tried }) => {
                        tried.extend(sizes_tried);
                        Err(Error::EmbeddingNotPsd { min_eigenvalue, relative, sizes_tried: tried })
                    }
                    other => other,
                }
            }
            other => other,
        }
    }

    fn with_base<F: Fn(usize, usize) -> f64>(
        cov: F,
        nx: usize,
        ny: usize,
        base: (usize, usize),
        max_doublings: u32,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("lattice must have at least one point per axis"));
        }
        let mut planner = FftPlanner::new();
        let mut tried = Vec::new();
        let mut worst = (0.0, 0.0);
        for k in 0..=max_doublings {
            let (mx, my) = (base.0 << k, base.1 << k);
            tried.push((mx, my));
            let mut grid: Vec<Complex64> = Vec::with_capacity(mx * my);
            for j1 in 0..mx {
                let d1 = j1.min(mx - j1);
                for j2 in 0..my {
                    grid.push(Complex64::new(cov(d1, j2.min(my - j2)), 0.0));
                }
            }
            let fft_x = planner.plan_fft_forward(mx);
            let fft_y = planner.plan_fft_forward(my);
            fft2(&mut grid, mx, my, &*fft_x, &*fft_y);
            let mut eig: Vec<f64> = grid.iter().map(|z| z.re).collect();
            match psd_check(&mut eig) {
                Ok(()) => {
                    let norm = (mx * my) as f64;
                    let scale = eig.iter().map(|&l| (l / norm).sqrt()).collect();
                    return Ok(Circulant2d { nx, ny, mx, my, scale, fft_x, fft_y });
                }
                Err(e) => worst = e,
            }
        }
        Err(Error::EmbeddingNotPsd { min_eigenvalue: worst.0, relative: worst.1, sizes_tried: tried })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn embedding_shape(&self) -> (usize, usize) {
        (self.mx, self.my)
    }

    /// Clamped eigenvalues, row-major `mx × my`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let norm = (self.mx * self.my) as f64;
        self.scale.iter().map(|s| s * s * norm).collect()
    }

    /// Writes two independent `nx × ny` samples (row-major) into `a` and `b`.
    pub fn sample_pair_into<R: Rng + ?Sized>(&self, rng: &mut R, ws: &mut Workspace, a: &mut [f64], b: &mut [f64]) {
        let (nx, ny, mx, my) = (self.nx, self.ny, self.mx, self.my);
        assert_eq!(a.len(), nx * ny);
        assert_eq!(b.len(), nx * ny);
        ws.grid.clear();
        ws.grid.extend(self.scale.iter().map(|&s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        }));
        // Rows (contiguous, length my) first, then only the ny columns we keep.
        let need = self.fft_y.get_inplace_scratch_len().max(self.fft_x.get_inplace_scratch_len());
        ws.scratch.resize(need, Complex64::default());
        self.fft_y.process_with_scratch(&mut ws.grid, &mut ws.scratch);
        ws.cols.clear();
        ws.cols.reserve(ny * mx);
        for j in 0..ny {
            ws.cols.extend((0..mx).map(|i| ws.grid[i * my + j]));
        }
        self.fft_x.process_with_scratch(&mut ws.cols, &mut ws.scratch);
        for j in 0..ny {
            let col = &ws.cols[j * mx..j * mx + nx];
            for (i, z) in col.iter().enumerate() {
                a[i * ny + j] = z.re;
                b[i * ny + j] = z.im;
            }
        }
    }
}

fn fft2(grid: &mut [Complex64], mx: usize, my: usize, fft_x: &dyn Fft<f64>, fft_y: &dyn Fft<f64>) {
    fft_y.process(grid);
    let mut col = vec![Complex64::default(); mx];
    for j in 0..my {
        for i in 0..mx {
            col[i] = grid[i * my + j];
        }
        fft_x.process(&mut col);
        for i in 0..mx {
            grid[i * my + j] = col[i];
        }
    }
}
