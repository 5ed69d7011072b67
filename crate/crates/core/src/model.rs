//! Covariance families, horizons, grid regimes and the strong-dependence
//! weight ρ(T).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Supported covariance families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Family {
    /// r(t) = exp(−|t₁|^α₁ − |t₂|^α₂).
    #[default]
    SeparableExp,
}

/// A stationary correlation function on ℝ² with local exponents (α₁, α₂)
/// and long-range dependence constant `r`.
///
/// The family itself is always weakly dependent; `r > 0` is realised by the
/// mixture field in [`crate::fieldsim`], never by the covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceModel {
    pub alpha1: f64,
    pub alpha2: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub family: Family,
}

impl CovarianceModel {
    pub fn new(alpha1: f64, alpha2: f64, r: f64) -> Result<Self> {
        let model = CovarianceModel { alpha1, alpha2, r, family: Family::SeparableExp };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        for &a in &[self.alpha1, self.alpha2] {
            check_alpha(a)?;
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::invalid(format!("dependence constant r = {} must be finite and >= 0", self.r)));
        }
        Ok(())
    }

    pub fn alphas(&self) -> [f64; 2] {
        [self.alpha1, self.alpha2]
    }

    /// Same local structure with `r = 0`.
    pub fn weak_part(&self) -> Self {
        CovarianceModel { r: 0.0, ..*self }
    }

    /// One-dimensional factor along `axis` (0 or 1) at lag `t`.
    pub fn axis_covariance(&self, axis: usize, t: f64) -> f64 {
        let alpha = self.alphas()[axis];
        match self.family {
            Family::SeparableExp => (-t.abs().powf(alpha)).exp(),
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// r(t) for the model's family.
pub fn covariance(model: &CovarianceModel, t: [f64; 2]) -> f64 {
    match model.family {
        Family::SeparableExp => (-(t[0].abs().powf(model.alpha1) + t[1].abs().powf(model.alpha2))).exp(),
    }
}

/// Observation window [0, T₁] × [0, T₂].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Horizon {
    #[serde(rename = "T1")]
    pub t1: f64,
    #[serde(rename = "T2")]
    pub t2: f64,
}

impl Horizon {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        let h = Horizon { t1, t2 };
        h.validate()?;
        Ok(h)
    }

    pub fn square(t: f64) -> Result<Self> {
        Self::new(t, t)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_edges()?;
        if self.t1 * self.t2 <= 1.0 {
            return Err(Error::invalid(format!("horizon area T1*T2 = {} must exceed 1", self.t1 * self.t2)));
        }
        Ok(())
    }

    /// Positive finite edges only; enough for simulating on a small box.
    pub fn validate_edges(&self) -> Result<()> {
        if !(self.t1 > 0.0 && self.t2 > 0.0 && self.t1.is_finite() && self.t2.is_finite()) {
            return Err(Error::invalid(format!("horizon edges must be positive, got {} x {}", self.t1, self.t2)));
        }
        Ok(())
    }

    /// log(T₁T₂).
    pub fn log_area(&self) -> f64 {
        (self.t1 * self.t2).ln()
    }
}

/// Asymptotic classification of a sampling grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    Sparse,
    Pickands { a1: f64, a2: f64 },
    Dense,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Sparse => "sparse",
            Regime::Pickands { .. } => "pickands",
            Regime::Dense => "dense",
        }
    }
}

/// Uniform grid (p₁ℕ) × (p₂ℕ) with its declared regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpecRepr", into = "GridSpecRepr")]
pub struct GridSpec {
    pub p1: f64,
    pub p2: f64,
    pub regime: Regime,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpecRepr {
    p1: f64,
    p2: f64,
    regime: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a2: Option<f64>,
}

impl TryFrom<GridSpecRepr> for GridSpec {
    type Error = Error;

    fn try_from(raw: GridSpecRepr) -> Result<Self> {
        let regime = match raw.regime.as_str() {
            "sparse" => Regime::Sparse,
            "dense" => Regime::Dense,
            "pickands" => match (raw.a1, raw.a2) {
                (Some(a1), Some(a2)) => Regime::Pickands { a1, a2 },
                _ => return Err(Error::invalid("pickands regime needs a1 and a2")),
            },
            other => return Err(Error::invalid(format!("unknown regime {other:?}"))),
        };
        if !matches!(regime, Regime::Pickands { .. }) && (raw.a1.is_some() || raw.a2.is_some()) {
            return Err(Error::invalid("a1/a2 are only meaningful for the pickands regime"));
        }
        let grid = GridSpec { p1: raw.p1, p2: raw.p2, regime };
        grid.validate()?;
        Ok(grid)
    }
}

impl From<GridSpec> for GridSpecRepr {
    fn from(g: GridSpec) -> Self {
        let (a1, a2) = match g.regime {
            Regime::Pickands { a1, a2 } => (Some(a1), Some(a2)),
            _ => (None, None),
        };
        GridSpecRepr { p1: g.p1, p2: g.p2, regime: g.regime.name().to_string(), a1, a2 }
    }
}

/// Below this value of D = p·(2 log T₁T₂)^{1/α} a finite-horizon grid counts as dense.
pub const DENSE_MAX_D: f64 = 1.0;
/// Above this value it counts as sparse.
pub const SPARSE_MIN_D: f64 = 4.0;
/// Relative tolerance between D and the declared `a` of a Pickands grid.
pub const PICKANDS_REL_TOL: f64 = 0.05;

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.p1 > 0.0 && self.p2 > 0.0 && self.p1.is_finite() && self.p2.is_finite()) {
            return Err(Error::invalid(format!("grid spacings must be positive, got ({}, {})", self.p1, self.p2)));
        }
        if let Regime::Pickands { a1, a2 } = self.regime {
            if !(a1 > 0.0 && a2 > 0.0) {
                return Err(Error::invalid("pickands constants a1, a2 must be positive"));
            }
        }
        Ok(())
    }

    /// Pickands grid p_i = a_i (2 log T₁T₂)^{−1/α_i} at horizon `h`.
    pub fn pickands_at(model: &CovarianceModel, h: &Horizon, a1: f64, a2: f64) -> Self {
        let l = 2.0 * h.log_area();
        GridSpec {
            p1: a1 * l.powf(-1.0 / model.alpha1),
            p2: a2 * l.powf(-1.0 / model.alpha2),
            regime: Regime::Pickands { a1, a2 },
        }
    }

    /// D_i = p_i (2 log T₁T₂)^{1/α_i} at horizon `h`.
    pub fn scaled_spacing(&self, model: &CovarianceModel, h: &Horizon) -> [f64; 2] {
        let l = 2.0 * h.log_area();
        [self.p1 * l.powf(1.0 / model.alpha1), self.p2 * l.powf(1.0 / model.alpha2)]
    }

    /// Finite-horizon consistency of the declared regime, using the
    /// thresholds [`SPARSE_MIN_D`], [`DENSE_MAX_D`] and [`PICKANDS_REL_TOL`].
    pub fn check_at(&self, model: &CovarianceModel, h: &Horizon) -> Result<()> {
        let d = self.scaled_spacing(model, h);
        let ok = match self.regime {
            Regime::Sparse => d.iter().all(|&di| di >= SPARSE_MIN_D),
            Regime::Dense => d.iter().all(|&di| di <= DENSE_MAX_D),
            Regime::Pickands { a1, a2 } => {
                ((d[0] - a1) / a1).abs() <= PICKANDS_REL_TOL && ((d[1] - a2) / a2).abs() <= PICKANDS_REL_TOL
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::RegimeMismatch(format!(
                "declared {} but D = ({:.4}, {:.4}) at T = ({}, {})",
                self.regime.name(),
                d[0],
                d[1],
                h.t1,
                h.t2
            )))
        }
    }
}

/// Horizons probed by [`classify_grid`]: T₁ = T₂ = 10², …, 10⁸.
pub const CLASSIFY_PROBES: [f64; 7] = [1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8];
/// Relative change of D between the last two probes below which the
/// sequence is taken to have reached its limit.
pub const CLASSIFY_REL_TOL: f64 = 1e-2;

/// Classifies a spacing rule `T ↦ (p₁, p₂)` by following
/// D_i(T) = p_i(T)(2 log T₁T₂)^{1/α_i} along [`CLASSIFY_PROBES`].
pub fn classify_grid<F>(p_rule: F, model: &CovarianceModel) -> Result<Regime>
where
    F: Fn(&Horizon) -> (f64, f64),
{
    model.validate()?;
    let mut seq = [Vec::new(), Vec::new()];
    for &t in &CLASSIFY_PROBES {
        let h = Horizon { t1: t, t2: t };
        let (p1, p2) = p_rule(&h);
        let g = GridSpec { p1, p2, regime: Regime::Sparse };
        g.validate()?;
        let d = g.scaled_spacing(model, &h);
        seq[0].push(d[0]);
        seq[1].push(d[1]);
    }
    let axes = [classify_axis(&seq[0])?, classify_axis(&seq[1])?];
    match axes {
        [AxisRegime::Sparse, AxisRegime::Sparse] => Ok(Regime::Sparse),
        [AxisRegime::Dense, AxisRegime::Dense] => Ok(Regime::Dense),
        [AxisRegime::Pickands(a1), AxisRegime::Pickands(a2)] => Ok(Regime::Pickands { a1, a2 }),
        _ => Err(Error::RegimeMismatch(format!("axes classify differently: {axes:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum AxisRegime {
    Sparse,
    Pickands(f64),
    Dense,
}

fn classify_axis(d: &[f64]) -> Result<AxisRegime> {
    let n = d.len();
    let rel = |k: usize| (d[k + 1] - d[k]) / d[k];
    if rel(n - 2).abs() < CLASSIFY_REL_TOL {
        return Ok(AxisRegime::Pickands(d[n - 1]));
    }
    let changes: Vec<f64> = (0..n - 1).map(rel).collect();
    if changes.iter().all(|&c| c > 0.0) {
        Ok(AxisRegime::Sparse)
    } else if changes.iter().all(|&c| c < 0.0) {
        Ok(AxisRegime::Dense)
    } else {
        Err(Error::OscillatingLimit { probes: d.to_vec() })
    }
}

/// ρ(T) = r / log(T₁T₂), the weight of the common shift in the mixture field.
pub fn rho(model: &CovarianceModel, h: &Horizon) -> Result<f64> {
    h.validate()?;
    if model.r == 0.0 {
        return Ok(0.0);
    }
    let log_area = h.log_area();
    if log_area <= model.r {
        return Err(Error::HorizonTooSmall { log_area, r: model.r });
    }
    Ok(model.r / log_area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn exp1() -> CovarianceModel {
        CovarianceModel::new(1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn covariance_at_origin_and_unit_lag() {
        assert_eq!(covariance(&exp1(), [0.0, 0.0]), 1.0);
        // mpmath: exp(-1)
        assert_relative_eq!(covariance(&exp1(), [1.0, 0.0]), 0.367_879_441_171_442_33, max_relative = 1e-15);
    }

    #[test]
    fn local_exponent_ratio_tends_to_one() {
        let m = CovarianceModel::new(1.5, 1.5, 0.0).unwrap();
        let mut last = f64::NAN;
        for k in 2..=6 {
            let t = 10f64.powi(-k);
            let s = 2.0 * t.powf(1.5);
            let ratio = (1.0 - covariance(&m, [t, t])) / s;
            if k >= 4 {
                assert!((ratio - 1.0).abs() < 1e-2, "k={k} ratio={ratio}");
            }
            if k > 2 {
                assert!((ratio - 1.0).abs() <= (last - 1.0).abs());
            }
            last = ratio;
        }
    }

    #[test]
    fn rejects_bad_alpha() {
        assert_eq!(CovarianceModel::new(0.0, 1.0, 0.0), Err(Error::InvalidAlpha(0.0)));
        assert_eq!(CovarianceModel::new(1.0, 2.5, 0.0), Err(Error::InvalidAlpha(2.5)));
        assert!(CovarianceModel::new(1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn classify_constant_spacing_is_sparse() {
        assert_eq!(classify_grid(|_| (0.5, 0.5), &exp1()).unwrap(), Regime::Sparse);
    }

    #[test]
    fn classify_pickands_rule() {
        let m = CovarianceModel::new(1.0, 2.0, 0.0).unwrap();
        let rule = |h: &Horizon| {
            let l = 2.0 * h.log_area();
            (l.powf(-1.0 / m.alpha1), l.powf(-1.0 / m.alpha2))
        };
        match classify_grid(rule, &m).unwrap() {
            Regime::Pickands { a1, a2 } => {
                assert_relative_eq!(a1, 1.0, max_relative = 1e-12);
                assert_relative_eq!(a2, 1.0, max_relative = 1e-12);
            }
            other => panic!("got {other:?}"),
        }
    }

    #[test]
    fn classify_scaled_pickands_rule() {
        let m = CovarianceModel::new(1.5, 0.5, 0.0).unwrap();
        let rule = |h: &Horizon| {
            let l = 2.0 * h.log_area();
            (3.0 * 0.7 * l.powf(-1.0 / 1.5), 3.0 * 1.3 * l.powf(-1.0 / 0.5))
        };
        match classify_grid(rule, &m).unwrap() {
            Regime::Pickands { a1, a2 } => {
                assert_relative_eq!(a1, 2.1, max_relative = 1e-12);
                assert_relative_eq!(a2, 3.9, max_relative = 1e-12);
            }
            other => panic!("got {other:?}"),
        }
    }

    #[test]
    fn classify_dense_rule() {
        let m = CovarianceModel::new(1.0, 2.0, 0.0).unwrap();
        let rule = |h: &Horizon| {
            let l = 2.0 * h.log_area();
            (l.powf(-2.0 / m.alpha1), l.powf(-2.0 / m.alpha2))
        };
        assert_eq!(classify_grid(rule, &m).unwrap(), Regime::Dense);
    }

    #[test]
    fn classify_oscillating_rule() {
        let rule = |h: &Horizon| {
            let l = 2.0 * h.log_area();
            let wobble = if (h.t1.log10().round() as i64) % 2 == 0 { 3.0 } else { 0.5 };
            (wobble / l, wobble / l)
        };
        assert!(matches!(classify_grid(rule, &exp1()), Err(Error::OscillatingLimit { .. })));
    }

    #[test]
    fn rho_values() {
        let h = Horizon::square(100.0).unwrap();
        assert_eq!(rho(&exp1(), &h).unwrap(), 0.0);
        let m = CovarianceModel::new(1.0, 1.0, 0.5).unwrap();
        // mpmath: 0.5 / log(1e4)
        assert_relative_eq!(rho(&m, &h).unwrap(), 0.054_286_810_237_906_48, max_relative = 1e-13);
        let big = CovarianceModel::new(1.0, 1.0, 10.0).unwrap();
        assert!(matches!(rho(&big, &Horizon::square(2.0).unwrap()), Err(Error::HorizonTooSmall { .. })));
    }

    #[test]
    fn grid_json_round_trip() {
        let json = r#"{"p1":0.5,"p2":0.25,"regime":"pickands","a1":1.0,"a2":2.0}"#;
        let g: GridSpec = serde_json::from_str(json).unwrap();
        assert_eq!(g.regime, Regime::Pickands { a1: 1.0, a2: 2.0 });
        let back: GridSpec = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<GridSpec>(r#"{"p1":0.5,"p2":0.5,"regime":"sparse","extra":1}"#).is_err());
        assert!(serde_json::from_str::<GridSpec>(r#"{"p1":0.5,"p2":0.5,"regime":"pickands"}"#).is_err());
    }

    #[test]
    fn model_json_keys() {
        let m: CovarianceModel =
            serde_json::from_str(r#"{"alpha1":1.0,"alpha2":2.0,"r":0.5,"family":"SeparableExp"}"#).unwrap();
        assert_eq!(m, CovarianceModel::new(1.0, 2.0, 0.5).unwrap());
        assert!(serde_json::from_str::<CovarianceModel>(r#"{"alpha1":1.0,"alpha2":2.0,"beta":1}"#).is_err());
    }

    #[test]
    fn check_at_thresholds() {
        let m = exp1();
        let h = Horizon::square(256.0).unwrap();
        let pick = GridSpec::pickands_at(&m, &h, 1.0, 1.0);
        assert!(pick.check_at(&m, &h).is_ok());
        let wrong = GridSpec { regime: Regime::Sparse, ..pick };
        assert!(matches!(wrong.check_at(&m, &h), Err(Error::RegimeMismatch(_))));
        let sparse = GridSpec { p1: 2.0, p2: 2.0, regime: Regime::Sparse };
        assert!(sparse.check_at(&m, &h).is_ok());
    }

    proptest! {
        #[test]
        fn covariance_is_even_and_bounded(a1 in 0.05f64..=2.0, a2 in 0.05f64..=2.0,
                                          t1 in -50.0f64..50.0, t2 in -50.0f64..50.0) {
            let m = CovarianceModel::new(a1, a2, 0.0).unwrap();
            let c = covariance(&m, [t1, t2]);
            prop_assert_eq!(c, covariance(&m, [-t1, t2]));
            prop_assert_eq!(c, covariance(&m, [t1, -t2]));
            prop_assert!(c <= 1.0 && c >= 0.0);
            if t1 != 0.0 || t2 != 0.0 {
                prop_assert!(c < 1.0);
            }
        }

        #[test]
        fn rho_decreases_with_area(r in 0.01f64..3.0, t in 30.0f64..1e4, f in 1.01f64..10.0) {
            let m = CovarianceModel::new(1.0, 1.0, r).unwrap();
            let a = rho(&m, &Horizon::square(t).unwrap()).unwrap();
            let b = rho(&m, &Horizon::square(t * f).unwrap()).unwrap();
            prop_assert!(b < a);
        }
    }
}
