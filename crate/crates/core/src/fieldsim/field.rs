use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use super::circulant::{Circulant2d, Workspace, DEFAULT_MAX_DOUBLINGS};
use crate::error::{Error, Result};
use crate::model::{covariance, rho, CovarianceModel, Family, Horizon};
use crate::rng::{stream, StreamRole};

/// Default cap on lattice points per replication (a 4097 × 4097 lattice).
pub const DEFAULT_MAX_LATTICE_POINTS: usize = 4097 * 4097;

/// One realisation on the lattice `{(i·dx, j·dy)}`; `values[[i, j]]` sits at
/// `(i·dx, j·dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub values: Array2<f64>,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
    pub seed: u64,
    /// √ρ·U for mixture samples, 0 otherwise.
    pub common_shift: f64,
}

/// Number of lattice points covering `[0, t]` with spacing `d`.
pub fn lattice_len(t: f64, d: f64) -> usize {
    // Absorb rounding in t/d so that e.g. 256/0.25 gives 1025 points, not 1026.
    ((t / d) * (1.0 - 1e-12)).ceil() as usize + 1
}

/// Precomputed circulant embedding for one (model, horizon, spacing).
/// Sampling is cheap to repeat and independent of call order.
#[derive(Debug)]
pub struct FieldSimulator {
    model: CovarianceModel,
    dx: f64,
    dy: f64,
    embedding: Circulant2d,
}

impl FieldSimulator {
    pub fn new(model: &CovarianceModel, h: &Horizon, dx: f64, dy: f64) -> Result<Self> {
        Self::with_limits(model, h, dx, dy, DEFAULT_MAX_LATTICE_POINTS, DEFAULT_MAX_DOUBLINGS)
    }

    pub fn with_limits(
        model: &CovarianceModel,
        h: &Horizon,
        dx: f64,
        dy: f64,
        max_points: usize,
        max_doublings: u32,
    ) -> Result<Self> {
        model.validate()?;
        h.validate_edges()?;
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::invalid(format!("lattice spacings must be positive, got ({dx}, {dy})")));
        }
        let Family::SeparableExp = model.family;
        let nx = lattice_len(h.t1, dx);
        let ny = lattice_len(h.t2, dy);
        if nx.saturating_mul(ny) > max_points {
            return Err(Error::BudgetExceeded { work: (nx * ny) as u128, cap: max_points as u128 });
        }
        let weak = model.weak_part();
        let cov = |a: usize, b: usize| covariance(&weak, [a as f64 * dx, b as f64 * dy]);
        let embedding = Circulant2d::compact(cov, nx, ny, max_doublings)?;
        Ok(FieldSimulator { model: *model, dx, dy, embedding })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.embedding.shape()
    }

    pub fn embedding(&self) -> &Circulant2d {
        &self.embedding
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.dx, self.dy)
    }

    pub fn model(&self) -> &CovarianceModel {
        &self.model
    }

    /// Raw pair of weak-part samples for replication pair `pair`, row-major.
    pub fn sample_pair_into(&self, seed: u64, pair: u64, ws: &mut Workspace, a: &mut [f64], b: &mut [f64]) {
        let mut rng = stream(seed, pair, StreamRole::Field);
        self.embedding.sample_pair_into(&mut rng, ws, a, b);
    }

    /// Replications `2·pair` and `2·pair + 1` of the weak-part field.
    pub fn sample_pair(&self, seed: u64, pair: u64) -> [FieldSample; 2] {
        let (nx, ny) = self.shape();
        let mut a = vec![0.0; nx * ny];
        let mut b = vec![0.0; nx * ny];
        self.sample_pair_into(seed, pair, &mut Workspace::default(), &mut a, &mut b);
        let wrap = |v: Vec<f64>| FieldSample {
            values: Array2::from_shape_vec((nx, ny), v).expect("shape"),
            dx: self.dx,
            dy: self.dy,
            nx,
            ny,
            seed,
            common_shift: 0.0,
        };
        [wrap(a), wrap(b)]
    }
}

/// Common N(0,1) shift of replication `rep`.
pub fn mixture_shift(seed: u64, rep: u64) -> f64 {
    stream(seed, rep, StreamRole::Shift).sample(StandardNormal)
}

/// Exact stationary field with covariance `covariance(model, ·)` on
/// `[0, T₁] × [0, T₂]`.
pub fn simulate_field(model: &CovarianceModel, h: &Horizon, dx: f64, dy: f64, seed: u64) -> Result<FieldSample> {
    let sim = FieldSimulator::new(model, h, dx, dy)?;
    let [first, _] = sim.sample_pair(seed, 0);
    Ok(first)
}

/// Mixture field √(1−ρ)·Y + √ρ·U with ρ = ρ(T), Y the weak field, U ~ N(0,1).
pub fn simulate_strong_field(
    model: &CovarianceModel,
    h: &Horizon,
    dx: f64,
    dy: f64,
    seed: u64,
) -> Result<FieldSample> {
    let weight = rho(model, h)?;
    let mut sample = simulate_field(model, h, dx, dy, seed)?;
    if weight > 0.0 {
        let shift = weight.sqrt() * mixture_shift(seed, 0);
        let damp = (1.0 - weight).sqrt();
        sample.values.mapv_inplace(|v| damp * v + shift);
        sample.common_shift = shift;
    }
    Ok(sample)
}

/// Maximum over the sub-lattice `{0, sx, 2sx, …} × {0, sy, 2sy, …}`.
pub fn max_on_subgrid(sample: &FieldSample, stride_x: usize, stride_y: usize) -> f64 {
    max_on_subgrid_raw(sample.values.as_slice().expect("standard layout"), sample.nx, sample.ny, stride_x, stride_y)
}

/// [`max_on_subgrid`] on a row-major `nx × ny` buffer.
pub fn max_on_subgrid_raw(values: &[f64], nx: usize, ny: usize, stride_x: usize, stride_y: usize) -> f64 {
    assert!(stride_x >= 1 && stride_y >= 1, "strides must be positive");
    assert!(stride_x <= nx.max(1) && stride_y <= ny.max(1), "strides exceed lattice");
    let mut best = f64::NEG_INFINITY;
    for i in (0..nx).step_by(stride_x) {
        let row = &values[i * ny..(i + 1) * ny];
        for &v in row.iter().step_by(stride_y) {
            if v > best {
                best = v;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sample_from(values: Array2<f64>) -> FieldSample {
        let (nx, ny) = values.dim();
        FieldSample { values, dx: 1.0, dy: 1.0, nx, ny, seed: 0, common_shift: 0.0 }
    }

    #[test]
    fn lattice_len_is_exact_for_divisible_spans() {
        assert_eq!(lattice_len(256.0, 0.25), 1025);
        assert_eq!(lattice_len(1.0, 1.0 / 3.0), 4);
        assert_eq!(lattice_len(1.0, 0.3), 5);
    }

    #[test]
    fn stride_two_visits_origin_only() {
        let s = sample_from(array![[0.0, 1.0], [2.0, 3.0]]);
        assert_eq!(max_on_subgrid(&s, 2, 2), 0.0);
        assert_eq!(max_on_subgrid(&s, 1, 1), 3.0);
        assert_eq!(max_on_subgrid(&s, 1, 2), 2.0);
    }

    #[test]
    fn simulation_is_deterministic() {
        let m = CovarianceModel::new(1.0, 1.5, 0.0).unwrap();
        let h = Horizon::new(4.0, 3.0).unwrap();
        let a = simulate_field(&m, &h, 0.25, 0.5, 9).unwrap();
        let b = simulate_field(&m, &h, 0.25, 0.5, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.nx, a.ny), (17, 7));
        assert_ne!(a.values, simulate_field(&m, &h, 0.25, 0.5, 10).unwrap().values);
    }

    #[test]
    fn strong_field_with_zero_r_is_weak_field() {
        let m = CovarianceModel::new(1.0, 1.0, 0.0).unwrap();
        let h = Horizon::square(8.0).unwrap();
        let weak = simulate_field(&m, &h, 0.5, 0.5, 3).unwrap();
        let strong = simulate_strong_field(&m, &h, 0.5, 0.5, 3).unwrap();
        assert_eq!(strong.common_shift, 0.0);
        assert_eq!(weak, strong);
    }

    #[test]
    fn strong_field_is_affine_in_weak_field() {
        let m = CovarianceModel::new(1.0, 1.0, 0.5).unwrap();
        let h = Horizon::square(8.0).unwrap();
        let weak = simulate_field(&m, &h, 0.5, 0.5, 3).unwrap();
        let strong = simulate_strong_field(&m, &h, 0.5, 0.5, 3).unwrap();
        let w = rho(&m, &h).unwrap();
        assert_eq!(strong.common_shift, w.sqrt() * mixture_shift(3, 0));
        for (s, y) in strong.values.iter().zip(weak.values.iter()) {
            assert!((s - ((1.0 - w).sqrt() * y + strong.common_shift)).abs() < 1e-14);
        }
    }

    #[test]
    fn strong_field_propagates_horizon_error() {
        let m = CovarianceModel::new(1.0, 1.0, 10.0).unwrap();
        let h = Horizon::square(2.0).unwrap();
        assert!(matches!(simulate_strong_field(&m, &h, 0.5, 0.5, 0), Err(Error::HorizonTooSmall { .. })));
    }

    #[test]
    fn budget_is_enforced() {
        let m = CovarianceModel::new(1.0, 1.0, 0.0).unwrap();
        let h = Horizon::square(100.0).unwrap();
        assert!(matches!(
            FieldSimulator::with_limits(&m, &h, 0.5, 0.5, 1000, 0),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
