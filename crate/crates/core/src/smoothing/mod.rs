//! Smoothing of cone vertices by radial conformal factors.
//!
//! Near a vertex of total angle `2πα` on a surface with faces of curvature
//! `κ` the metric is `λ(r)(dr² + r²dθ²)` with
//! `λ(r) = 4α²r^{2(α−1)} / (1 + κr^{2α})²`. The smoothed factor replaces
//! `∂_r log λ` inside the ball of radius `δ` by a blend `g_δ` that switches
//! off through the cutoff `φ_δ(r) = φ_{1/2,1}(r/δ)` on `(δ/2, δ)`:
//!
//! * flat mode: `g_δ = (∂_r log λ)·φ_δ`, so the cap is flat inside `δ/2`;
//! * hyperbolic mode: adds `(∂_r log λ̄)(1 − φ_δ)` with `λ̄ = 4/(1 − r²)²`;
//! * cbb mode: the flat blend applied to a vertex with `α < 1` and `κ ≤ 0`;
//! * spherical-cbb mode: the hyperbolic blend with `λ̄ = 4/(1 + r²)²`.
//!
//! Hyperbolic curvatures below −1 and spherical ones above 1 are reduced
//! to ±1 by rescaling lengths.

mod certify;
mod plan;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyhedral::SurfaceError;
use crate::quadrature;

pub use certify::{
    admissible_delta, cap_geometry, certify, profile, raw_profile, AdmissibleDelta, BindingConstraint, CapGeometry, Certificate, ProfileKind,
    RadialProfile, EXCESS_TOL, JUNCTION_TOL, TAIL_TOL,
};
pub use plan::{plan_surface_smoothing, SmoothingPlan, VertexPlan};

/// Default absolute tolerance for the radial quadratures.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmoothingError {
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("{mode:?} mode does not apply to alpha={alpha}, kappa={kappa}")]
    ModeMismatch { mode: Mode, alpha: f64, kappa: f64 },
    #[error("cutoff needs 0 < a < b, got a={a}, b={b}")]
    InvalidCutoff { a: f64, b: f64 },
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("no admissible delta: {0}")]
    NoAdmissibleDelta(String),
    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("cone defects do not match {mode:?} mode at vertices {vertices:?}")]
    MixedDefects { mode: Mode, vertices: Vec<usize> },
    #[error("faces around vertex {0} have different curvatures")]
    NonUniformKappa(usize),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// The metric near a cone vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeMetric {
    /// Total angle divided by `2π`.
    pub alpha: f64,
    pub kappa: f64,
    /// Chart radius on which the formula is valid.
    pub radius: f64,
}

impl ConeMetric {
    pub fn new(alpha: f64, kappa: f64, radius: f64) -> Result<Self, SmoothingError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(SmoothingError::InvalidCone(format!("alpha={alpha}")));
        }
        if !kappa.is_finite() {
            return Err(SmoothingError::InvalidCone(format!("kappa={kappa}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(SmoothingError::InvalidCone(format!("radius={radius}")));
        }
        if kappa < 0.0 && 1.0 + kappa * radius.powf(2.0 * alpha) <= 0.0 {
            return Err(SmoothingError::InvalidCone(format!("radius {radius} reaches the chart boundary")));
        }
        Ok(Self { alpha, kappa, radius })
    }

    /// Supremum of valid chart radii.
    pub fn chart_limit(alpha: f64, kappa: f64) -> f64 {
        if kappa < 0.0 {
            (-1.0 / kappa).powf(0.5 / alpha)
        } else {
            f64::INFINITY
        }
    }

    pub fn is_conical(&self) -> bool {
        self.alpha != 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Flat,
    Hyperbolic,
    Cbb,
    SphericalCbb,
}

impl Mode {
    /// Whether the mode bounds curvature from below.
    pub fn is_cbb(self) -> bool {
        matches!(self, Mode::Cbb | Mode::SphericalCbb)
    }

    pub fn is_experimental(self) -> bool {
        self == Mode::SphericalCbb
    }

    fn check(self, c: &ConeMetric) -> Result<(), SmoothingError> {
        let ok = match self {
            Mode::Flat => c.alpha >= 1.0 && c.kappa >= 0.0,
            Mode::Hyperbolic => c.alpha >= 1.0,
            Mode::Cbb => c.alpha <= 1.0 && c.kappa <= 0.0,
            Mode::SphericalCbb => c.alpha <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(SmoothingError::ModeMismatch { mode: self, alpha: c.alpha, kappa: c.kappa })
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "flat" => Ok(Mode::Flat),
            "hyperbolic" => Ok(Mode::Hyperbolic),
            "cbb" => Ok(Mode::Cbb),
            "spherical-cbb" => Ok(Mode::SphericalCbb),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParams {
    pub delta: f64,
    pub mode: Mode,
    pub tolerance: f64,
}

impl SmoothingParams {
    pub fn new(delta: f64, mode: Mode) -> Self {
        Self { delta, mode, tolerance: DEFAULT_TOLERANCE }
    }
}

fn check_radius(r: f64) -> Result<(), SmoothingError> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(SmoothingError::NonPositiveRadius(r))
    }
}

fn lambda(alpha: f64, kappa: f64, r: f64) -> f64 {
    let s = 1.0 + kappa * r.powf(2.0 * alpha);
    4.0 * alpha * alpha * r.powf(2.0 * (alpha - 1.0)) / (s * s)
}

fn log_derivs(alpha: f64, kappa: f64, r: f64) -> (f64, f64) {
    let s = kappa * r.powf(2.0 * alpha);
    let first = (2.0 * alpha - 2.0 - 2.0 * s * (1.0 + alpha)) / (r * (1.0 + s));
    let second = (-2.0 * (alpha - 1.0) + 4.0 * alpha * s * (1.0 / (1.0 + s) - 2.0 * alpha / ((1.0 + s) * (1.0 + s)))) / (r * r);
    (first, second)
}

/// `λ(r)` for the cone.
pub fn cone_factor(c: &ConeMetric, r: f64) -> Result<f64, SmoothingError> {
    check_radius(r)?;
    Ok(lambda(c.alpha, c.kappa, r))
}

/// First and second derivatives of `log λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDeriv {
    pub first: f64,
    pub second: f64,
}

pub fn log_deriv(c: &ConeMetric, r: f64) -> Result<LogDeriv, SmoothingError> {
    check_radius(r)?;
    let (first, second) = log_derivs(c.alpha, c.kappa, r);
    Ok(LogDeriv { first, second })
}

/// Value with first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Smooth step from 0 at `a` to 1 at `b`.
pub fn cutoff(a: f64, b: f64, r: f64) -> Result<Jet, SmoothingError> {
    if !(0.0 < a && a < b) {
        return Err(SmoothingError::InvalidCutoff { a, b });
    }
    Ok(cutoff_unchecked(a, b, r))
}

fn cutoff_unchecked(a: f64, b: f64, r: f64) -> Jet {
    if r <= a {
        return Jet { value: 0.0, d1: 0.0, d2: 0.0 };
    }
    if r >= b {
        return Jet { value: 1.0, d1: 0.0, d2: 0.0 };
    }
    // φ = σ(w) with w = 1/(b − r) − 1/(r − a) and σ the logistic function.
    let (u, v) = (r - a, b - r);
    let w = 1.0 / v - 1.0 / u;
    let (sigma, ds) = if w < 0.0 {
        let e = (w).exp();
        (e / (1.0 + e), e / ((1.0 + e) * (1.0 + e)))
    } else {
        let e = (-w).exp();
        (1.0 / (1.0 + e), e / ((1.0 + e) * (1.0 + e)))
    };
    if ds == 0.0 {
        return Jet { value: sigma, d1: 0.0, d2: 0.0 };
    }
    let w1 = 1.0 / (v * v) + 1.0 / (u * u);
    let w2 = 2.0 / (v * v * v) - 2.0 / (u * u * u);
    let dds = ds * (1.0 - 2.0 * sigma);
    Jet { value: sigma, d1: ds * w1, d2: dds * w1 * w1 + ds * w2 }
}

/// The smoothing kernel in normalized coordinates, where the hyperbolic
/// curvature is at least −1 and the spherical one at most 1.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    alpha: f64,
    kappa: f64,
    delta: f64,
    radius: f64,
    mode: Mode,
    tol: f64,
    /// Normalized radius is `t·r`.
    t: f64,
    /// Lengths of the normalized metric are `√scale` times the original.
    scale: f64,
    /// `λ(δ)·exp(−∫_{δ/2}^{δ} g)`, the factor at the inner junction.
    inner: f64,
    identity: bool,
}

impl Kernel {
    pub(crate) fn new(c: &ConeMetric, p: &SmoothingParams) -> Result<Self, SmoothingError> {
        p.mode.check(c)?;
        if !(p.delta > 0.0 && p.delta < c.radius) {
            return Err(SmoothingError::Inadmissible(format!("delta {} outside (0, {})", p.delta, c.radius)));
        }
        if p.tolerance.is_nan() || p.tolerance <= 0.0 {
            return Err(SmoothingError::Inadmissible(format!("tolerance {}", p.tolerance)));
        }
        let rescale = match p.mode {
            Mode::Hyperbolic => c.kappa < -1.0,
            Mode::SphericalCbb => c.kappa > 1.0,
            _ => false,
        };
        let (kappa, scale) = if rescale { (c.kappa.signum(), c.kappa.abs()) } else { (c.kappa, 1.0) };
        let t = scale.powf(0.5 / c.alpha);
        let mut k = Kernel {
            alpha: c.alpha,
            kappa,
            delta: p.delta * t,
            radius: c.radius * t,
            mode: p.mode,
            tol: p.tolerance,
            t,
            scale,
            inner: 0.0,
            identity: c.alpha == 1.0,
        };
        if p.mode == Mode::Hyperbolic && k.delta >= 1.0 {
            return Err(SmoothingError::Inadmissible(format!("normalized delta {} must be below 1", k.delta)));
        }
        if !k.identity {
            let half = k.delta / 2.0;
            let q = quadrature::integrate(|s| k.g(s), half, k.delta, k.tol);
            if !q.converged {
                return Err(SmoothingError::Quadrature { a: half / t, b: p.delta });
            }
            k.inner = lambda(k.alpha, k.kappa, k.delta) * (-q.value).exp();
        }
        Ok(k)
    }

    pub(crate) fn rescale_factor(&self) -> Option<f64> {
        (self.scale != 1.0).then_some(self.scale)
    }

    /// `(λ̄, ∂ log λ̄, ∂² log λ̄, K̄)` of the background blended in.
    fn background(&self, s: f64) -> Option<(f64, f64, f64, f64)> {
        match self.mode {
            Mode::Flat | Mode::Cbb => None,
            Mode::Hyperbolic => {
                let q = 1.0 - s * s;
                Some((4.0 / (q * q), 4.0 * s / q, 4.0 * (1.0 + s * s) / (q * q), -1.0))
            }
            Mode::SphericalCbb => {
                let q = 1.0 + s * s;
                Some((4.0 / (q * q), -4.0 * s / q, -4.0 * (1.0 - s * s) / (q * q), 1.0))
            }
        }
    }

    /// `φ_{1/2,1}(s/δ)`. The unscaled `φ_{δ/2,δ}` sharpens to a numerical
    /// step for small `δ` (its transition width is about `δ²/32`).
    fn phi(&self, s: f64) -> Jet {
        let j = cutoff_unchecked(0.5, 1.0, s / self.delta);
        Jet { value: j.value, d1: j.d1 / self.delta, d2: j.d2 / (self.delta * self.delta) }
    }

    /// `g_δ` in normalized coordinates.
    fn g(&self, s: f64) -> f64 {
        let (l, _) = log_derivs(self.alpha, self.kappa, s);
        let phi = self.phi(s).value;
        let mut g = l * phi;
        if let Some((_, lb, _, _)) = self.background(s) {
            g += lb * (1.0 - phi);
        }
        g
    }

    fn g_prime(&self, s: f64) -> f64 {
        let (l, l2) = log_derivs(self.alpha, self.kappa, s);
        let phi = self.phi(s);
        let mut d = l2 * phi.value + l * phi.d1;
        if let Some((_, lb, lb2, _)) = self.background(s) {
            d += lb2 * (1.0 - phi.value) - lb * phi.d1;
        }
        d
    }

    /// `λ_δ` in normalized coordinates.
    fn factor(&self, s: f64) -> Result<f64, SmoothingError> {
        if self.identity || s >= self.delta {
            return Ok(lambda(self.alpha, self.kappa, s));
        }
        let half = self.delta / 2.0;
        if s <= half {
            return Ok(match self.background(s) {
                None => self.inner,
                Some((lb, ..)) => self.inner * lb / self.background(half).unwrap().0,
            });
        }
        let q = quadrature::integrate(|x| self.g(x), s, self.delta, self.tol);
        if !q.converged {
            return Err(SmoothingError::Quadrature { a: s / self.t, b: self.delta / self.t });
        }
        Ok(lambda(self.alpha, self.kappa, self.delta) * (-q.value).exp())
    }

    /// `g_δ' + g_δ/s`, using `L' + L/s = −2κλ` for the cone and the
    /// background so that the cancelling terms never meet in floating point.
    fn curvature_numerator(&self, s: f64) -> f64 {
        let (l, _) = log_derivs(self.alpha, self.kappa, s);
        let phi = self.phi(s);
        let mut n = -2.0 * self.kappa * lambda(self.alpha, self.kappa, s) * phi.value + l * phi.d1;
        if let Some((lb, dlb, _, kb)) = self.background(s) {
            n += -2.0 * kb * lb * (1.0 - phi.value) - dlb * phi.d1;
        }
        n
    }

    /// Curvature of the smoothed metric given `λ_δ(s)` in normalized
    /// coordinates, returned in original units.
    fn curvature_with(&self, s: f64, factor: f64) -> f64 {
        if self.identity || s >= self.delta {
            return self.kappa * self.scale;
        }
        let half = self.delta / 2.0;
        let k = if s <= half {
            match self.background(s) {
                None => 0.0,
                Some((lb, _, _, kb)) => kb * lb / factor,
            }
        } else {
            -self.curvature_numerator(s) / (2.0 * factor)
        };
        k * self.scale
    }

    fn original_factor(&self, f: f64) -> f64 {
        f * self.t * self.t / self.scale
    }
}

/// `λ_δ(r)` in the original chart.
pub fn smoothed_factor(c: &ConeMetric, p: &SmoothingParams, r: f64) -> Result<f64, SmoothingError> {
    check_radius(r)?;
    if r > c.radius {
        return Err(SmoothingError::Inadmissible(format!("r={r} beyond the cone radius {}", c.radius)));
    }
    let k = Kernel::new(c, p)?;
    Ok(k.original_factor(k.factor(r * k.t)?))
}

/// `g_δ(r)` and its derivative in the original chart.
pub fn blend(c: &ConeMetric, p: &SmoothingParams, r: f64) -> Result<(f64, f64), SmoothingError> {
    check_radius(r)?;
    let k = Kernel::new(c, p)?;
    let s = r * k.t;
    Ok((k.t * k.g(s), k.t * k.t * k.g_prime(s)))
}

/// Curvature of the raw cone metric from `K = −(L' + L/r)/(2λ)`.
pub fn raw_curvature(c: &ConeMetric, r: f64) -> Result<f64, SmoothingError> {
    check_radius(r)?;
    let (l, l2) = log_derivs(c.alpha, c.kappa, r);
    Ok(-(l2 + l / r) / (2.0 * lambda(c.alpha, c.kappa, r)))
}

/// Curvature of the smoothed metric, or of the raw cone when `p` is `None`.
pub fn gaussian_curvature(c: &ConeMetric, p: Option<&SmoothingParams>, r: f64) -> Result<f64, SmoothingError> {
    let Some(p) = p else { return raw_curvature(c, r) };
    check_radius(r)?;
    let k = Kernel::new(c, p)?;
    let s = r * k.t;
    Ok(k.curvature_with(s, k.factor(s)?))
}
