//! Admissible radii, numerical certificates and cap sizes.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_radius, lambda, log_derivs, ConeMetric, Kernel, Mode, SmoothingError, SmoothingParams};
use crate::quadrature;

/// Points used when checking a candidate `δ`.
const CHECK_GRID: usize = 2048;

/// Safety factor applied to the binding radius.
const SHRINK: f64 = 1.0 - 1e-6;

/// Innermost grid radius as a fraction of `δ`.
const GRID_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingConstraint {
    /// `∂_r log λ` changes sign.
    LogDerivative,
    /// `λ(δ) ≤ 1`.
    LambdaCap,
    /// The cone's chart radius.
    Radius,
    /// `∂_r log λ` against the background's log-derivative.
    LogComparison,
    /// `δ` halved until the curvature grid check passed.
    CurvatureGrid,
    /// Nothing to smooth.
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleDelta {
    pub delta: f64,
    pub binding: BindingConstraint,
    /// Smallest value of the mode's sign condition on the check grid.
    pub margin: f64,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    g[n - 1] = hi;
    g
}

/// First grid radius in `(0, top]` where `f` turns negative, refined by
/// bisection. `None` if `f ≥ 0` on the whole grid.
fn first_sign_change(f: impl Fn(f64) -> f64, top: f64) -> Option<f64> {
    let grid = log_grid(top * GRID_FLOOR, top, CHECK_GRID);
    let i = grid.iter().position(|&r| f(r) < 0.0)?;
    if i == 0 {
        return Some(grid[0] / 2.0);
    }
    let (mut lo, mut hi) = (grid[i - 1], grid[i]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(lo)
}

/// Radius in `(0, top)` where the increasing `λ` reaches 1.
fn lambda_cap(alpha: f64, kappa: f64, top: f64) -> Option<f64> {
    if lambda(alpha, kappa, top) <= 1.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lambda(alpha, kappa, mid) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

fn grid_min(f: impl Fn(f64) -> f64, top: f64) -> f64 {
    log_grid(top * GRID_FLOOR, top, CHECK_GRID).into_iter().map(f).fold(f64::INFINITY, f64::min)
}

/// Normalized curvature and scale of a cone under `mode`.
fn normalize(c: &ConeMetric, mode: Mode) -> (f64, f64, f64) {
    let rescale = match mode {
        Mode::Hyperbolic => c.kappa < -1.0,
        Mode::SphericalCbb => c.kappa > 1.0,
        _ => false,
    };
    let (kappa, scale) = if rescale { (c.kappa.signum(), c.kappa.abs()) } else { (c.kappa, 1.0) };
    (kappa, scale, scale.powf(0.5 / c.alpha))
}

/// A `δ` for which the smoothing argument applies, and the constraint that
/// fixed it.
pub fn admissible_delta(c: &ConeMetric, mode: Mode) -> Result<AdmissibleDelta, SmoothingError> {
    mode.check(c)?;
    if c.alpha == 1.0 {
        return Ok(AdmissibleDelta { delta: 0.5 * c.radius, binding: BindingConstraint::Smooth, margin: 0.0 });
    }
    let (kappa, _, t) = normalize(c, mode);
    let alpha = c.alpha;
    let radius = c.radius * t;
    let l = |r: f64| log_derivs(alpha, kappa, r).0;
    let mut candidates = vec![(radius, BindingConstraint::Radius)];
    let margin_fn: Box<dyn Fn(f64) -> f64>;
    match mode {
        Mode::Flat | Mode::Cbb => {
            // Zero of ∂_r log λ, where the numerator 2α − 2 − 2κr^{2α}(1 + α) vanishes.
            let ratio = (alpha - 1.0) / (kappa * (1.0 + alpha));
            if kappa != 0.0 && ratio > 0.0 {
                candidates.push((ratio.powf(0.5 / alpha), BindingConstraint::LogDerivative));
            }
            if mode == Mode::Flat {
                let top = candidates.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
                if let Some(r) = lambda_cap(alpha, kappa, top) {
                    candidates.push((r, BindingConstraint::LambdaCap));
                }
                margin_fn = Box::new(l);
            } else {
                margin_fn = Box::new(move |r| -l(r));
            }
        }
        Mode::Hyperbolic => {
            candidates.push((1.0, BindingConstraint::Radius));
            let lb = |r: f64| 4.0 * r / (1.0 - r * r);
            let top = radius.min(1.0) * SHRINK;
            if let Some(r) = first_sign_change(|r| l(r) - lb(r), top) {
                candidates.push((r, BindingConstraint::LogComparison));
            }
            let top = candidates.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
            if let Some(r) = lambda_cap(alpha, kappa, top) {
                candidates.push((r, BindingConstraint::LambdaCap));
            }
            margin_fn = Box::new(move |r| l(r) - lb(r));
        }
        Mode::SphericalCbb => {
            let lb = |r: f64| -4.0 * r / (1.0 + r * r);
            if let Some(r) = first_sign_change(|r| lb(r) - l(r), radius * SHRINK) {
                candidates.push((r, BindingConstraint::LogComparison));
            }
            margin_fn = Box::new(move |r| lb(r) - l(r));
        }
    }
    let (bound, mut binding) = candidates.into_iter().fold((f64::INFINITY, BindingConstraint::Radius), |a, b| if b.0 < a.0 { b } else { a });
    let mut delta = bound * SHRINK;
    if delta.is_nan() || delta <= 0.0 {
        return Err(SmoothingError::NoAdmissibleDelta(format!("{binding:?} leaves no room")));
    }
    if mode.is_cbb() && !(mode == Mode::Cbb && kappa == 0.0) {
        // The curvature bound is not implied by the sign conditions alone;
        // halve until it holds on the check grid.
        let mut ok = false;
        for _ in 0..60 {
            let p = SmoothingParams::new(delta / t, mode);
            if cbb_grid_ok(c, &p)? {
                ok = true;
                break;
            }
            delta /= 2.0;
            binding = BindingConstraint::CurvatureGrid;
        }
        if !ok {
            return Err(SmoothingError::NoAdmissibleDelta("curvature grid check never passed".into()));
        }
    }
    let margin = grid_min(&*margin_fn, delta);
    Ok(AdmissibleDelta { delta: delta / t, binding, margin })
}

fn cbb_grid_ok(c: &ConeMetric, p: &SmoothingParams) -> Result<bool, SmoothingError> {
    let k = Kernel::new(c, p)?;
    let grid = log_grid(k.delta * GRID_FLOOR, k.delta, CHECK_GRID);
    let factors = cumulative_factors(&k, &grid)?;
    let bound = k.kappa * k.scale;
    Ok(grid.iter().zip(&factors).all(|(&s, &f)| k.curvature_with(s, f) >= bound - 1e-9 * bound.abs().max(1.0)))
}

/// `λ_δ` at sorted normalized radii, integrating `g_δ` piece by piece from
/// `δ` inwards so that the result is exactly monotone when `g_δ` has a
/// sign.
fn cumulative_factors(k: &Kernel, grid: &[f64]) -> Result<Vec<f64>, SmoothingError> {
    if k.identity {
        return Ok(grid.iter().map(|&s| lambda(k.alpha, k.kappa, s)).collect());
    }
    let half = k.delta / 2.0;
    let mut knots: Vec<f64> = grid.iter().copied().filter(|&s| s > half && s < k.delta).collect();
    knots.push(half);
    knots.push(k.delta);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let pieces: Vec<quadrature::Quadrature> =
        knots.par_windows(2).map(|w| quadrature::integrate(|x| k.g(x), w[0], w[1], k.tol * (w[1] - w[0]) / half)).collect();
    if let Some(i) = pieces.iter().position(|q| !q.converged) {
        return Err(SmoothingError::Quadrature { a: knots[i] / k.t, b: knots[i + 1] / k.t });
    }
    // cum[i] = ∫_{knots[i]}^{δ} g.
    let mut cum = vec![0.0; knots.len()];
    for i in (0..pieces.len()).rev() {
        cum[i] = cum[i + 1] + pieces[i].value;
    }
    let top = lambda(k.alpha, k.kappa, k.delta);
    let inner = top * (-cum[0]).exp();
    let inner_bg = k.background(half).map(|b| b.0);
    Ok(grid
        .iter()
        .map(|&s| {
            if s >= k.delta {
                lambda(k.alpha, k.kappa, s)
            } else if s <= half {
                match inner_bg {
                    None => inner,
                    Some(b) => inner * k.background(s).unwrap().0 / b,
                }
            } else {
                let i = knots.binary_search_by(|x| x.total_cmp(&s)).unwrap();
                top * (-cum[i]).exp()
            }
        })
        .collect())
}

/// Outcome of checking a smoothed cone on a radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub alpha: f64,
    pub kappa: f64,
    pub mode: Mode,
    pub delta: f64,
    pub grid_n: usize,
    /// `max(K_δ − κ)` for upper-bound modes, `max(κ − K_δ)` for cbb modes.
    pub max_excess_curvature: f64,
    /// Smallest and largest curvature on the grid.
    pub min_curvature: f64,
    pub max_curvature: f64,
    /// `λ_δ` is increasing (upper-bound modes) or decreasing (cbb modes) on `(0, δ]`.
    pub monotone_ok: bool,
    /// Largest relative gap between `λ_δ` and `λ` on `[δ, R]`.
    pub tail_match: f64,
    /// Largest relative jump of value or slope across `δ/2` and `δ`.
    pub junction_jump: f64,
    /// The inequality the argument reduces to, checked on `(δ/2, δ)`:
    /// `λφ ≤ λ_δ` for flat blends, `λφ + λ̄(1 − φ) ≥ λ_δ` for the hyperbolic one.
    pub key_inequality_ok: Option<bool>,
    /// Curvature scale applied before smoothing, if any.
    pub rescale: Option<f64>,
    pub experimental: bool,
}

pub const EXCESS_TOL: f64 = 1e-6;
pub const TAIL_TOL: f64 = 1e-12;
pub const JUNCTION_TOL: f64 = 1e-6;

impl Certificate {
    pub fn passed(&self) -> bool {
        self.max_excess_curvature <= EXCESS_TOL && self.monotone_ok && self.tail_match <= TAIL_TOL && self.junction_jump <= JUNCTION_TOL
    }
}

fn junction_jump(k: &Kernel) -> Result<f64, SmoothingError> {
    if k.identity {
        return Ok(0.0);
    }
    let fine = Kernel { tol: k.tol.min(1e-13), ..*k };
    let mut worst: f64 = 0.0;
    for x in [k.delta / 2.0, k.delta] {
        let h = 1e-4 * k.delta;
        let f = |s: f64| fine.factor(s);
        let (l2, l1, m, r1, r2) = (f(x - 2.0 * h)?, f(x - h)?, f(x)?, f(x + h)?, f(x + 2.0 * h)?);
        let value = (2.0 * l1 - l2 - m).abs().max((2.0 * r1 - r2 - m).abs()) / m;
        let dl = (l2 - 4.0 * l1 + 3.0 * m) / (2.0 * h);
        let dr = (-3.0 * m + 4.0 * r1 - r2) / (2.0 * h);
        let slope = (dl - dr).abs() / dl.abs().max(dr.abs()).max(m / k.delta);
        worst = worst.max(value).max(slope);
    }
    Ok(worst)
}

/// Checks the curvature bound, monotonicity, tail agreement and junction
/// smoothness on `grid_n` log-spaced radii in `[10⁻⁶δ, R]`.
pub fn certify(c: &ConeMetric, p: &SmoothingParams, grid_n: usize) -> Result<Certificate, SmoothingError> {
    let k = Kernel::new(c, p)?;
    let grid = log_grid(k.delta * GRID_FLOOR, k.radius, grid_n.max(2));
    let factors = cumulative_factors(&k, &grid)?;
    let curv: Vec<f64> = grid.par_iter().zip(&factors).map(|(&s, &f)| k.curvature_with(s, f)).collect();
    let kappa = c.kappa;
    let excess = curv.iter().map(|&x| if p.mode.is_cbb() { kappa - x } else { x - kappa }).fold(f64::NEG_INFINITY, f64::max);
    let inside: Vec<f64> = grid.iter().zip(&factors).filter(|(s, _)| **s <= k.delta).map(|(_, f)| *f).collect();
    let monotone_ok = k.identity || inside.windows(2).all(|w| if p.mode.is_cbb() { w[1] <= w[0] } else { w[1] >= w[0] });
    let mut tail_match: f64 = 0.0;
    for &s in grid.iter().filter(|&&s| s >= k.delta) {
        let raw = lambda(k.alpha, k.kappa, s);
        tail_match = tail_match.max((k.factor(s)? - raw).abs() / raw);
    }
    let key_inequality_ok = match p.mode {
        _ if k.identity => None,
        Mode::Flat => Some(
            grid.iter()
                .zip(&factors)
                .filter(|(s, _)| **s > k.delta / 2.0 && **s < k.delta)
                .all(|(&s, &f)| lambda(k.alpha, k.kappa, s) * k.phi(s).value <= f * (1.0 + 1e-12)),
        ),
        Mode::Hyperbolic => Some(grid.iter().zip(&factors).filter(|(s, _)| **s > k.delta / 2.0 && **s < k.delta).all(|(&s, &f)| {
            let phi = k.phi(s).value;
            lambda(k.alpha, k.kappa, s) * phi + k.background(s).unwrap().0 * (1.0 - phi) >= f * (1.0 - 1e-12)
        })),
        Mode::Cbb | Mode::SphericalCbb => None,
    };
    Ok(Certificate {
        alpha: c.alpha,
        kappa,
        mode: p.mode,
        delta: p.delta,
        grid_n: grid.len(),
        max_excess_curvature: excess,
        min_curvature: curv.iter().copied().fold(f64::INFINITY, f64::min),
        max_curvature: curv.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        monotone_ok,
        tail_match,
        junction_jump: junction_jump(&k)?,
        key_inequality_ok,
        rescale: k.rescale_factor(),
        experimental: p.mode.is_experimental(),
    })
}

/// Size of the smoothed cap `r < δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapGeometry {
    /// `2π ∫₀^δ λ_δ(r) r dr`.
    pub area: f64,
    /// `2 ∫₀^δ √λ_δ(r) dr`, the length of a diameter through the vertex.
    pub diameter: f64,
}

pub fn cap_geometry(c: &ConeMetric, p: &SmoothingParams) -> Result<CapGeometry, SmoothingError> {
    let k = Kernel::new(c, p)?;
    let d = k.delta;
    let check = |q: quadrature::Quadrature, a: f64, b: f64| {
        if q.converged {
            Ok(q.value)
        } else {
            Err(SmoothingError::Quadrature { a: a / k.t, b: b / k.t })
        }
    };
    let (area, diam) = if k.identity {
        let lam = |s: f64| lambda(k.alpha, k.kappa, s);
        (
            check(quadrature::integrate(|s| lam(s) * s, 0.0, d, k.tol), 0.0, d)?,
            check(quadrature::integrate(|s| lam(s).sqrt(), 0.0, d, k.tol), 0.0, d)?,
        )
    } else {
        let a = d / 2.0;
        let (inner_area, inner_diam) = match k.mode {
            Mode::Flat | Mode::Cbb => (k.inner * a * a / 2.0, k.inner.sqrt() * a),
            Mode::Hyperbolic => {
                let c0 = k.inner / k.background(a).unwrap().0;
                (c0 * (2.0 / (1.0 - a * a) - 2.0), c0.sqrt() * ((1.0 + a) / (1.0 - a)).ln())
            }
            Mode::SphericalCbb => {
                let c0 = k.inner / k.background(a).unwrap().0;
                (c0 * (2.0 - 2.0 / (1.0 + a * a)), c0.sqrt() * 2.0 * a.atan())
            }
        };
        // Factors on the outer ring come from inner quadratures; the outer
        // integral tolerates their error.
        let fine = Kernel { tol: k.tol.min(1e-13), ..k };
        let f = |s: f64| fine.factor(s).unwrap_or(f64::NAN);
        let top = lambda(k.alpha, k.kappa, d);
        let outer_area = check(quadrature::integrate(|s| f(s) * s, a, d, k.tol * top * d * d), a, d)?;
        let outer_diam = check(quadrature::integrate(|s| f(s).sqrt(), a, d, k.tol * top.sqrt() * d), a, d)?;
        if outer_area.is_nan() || outer_diam.is_nan() {
            return Err(SmoothingError::Quadrature { a: a / k.t, b: d / k.t });
        }
        (inner_area + outer_area, inner_diam + outer_diam)
    };
    Ok(CapGeometry { area: TAU * area / k.scale, diameter: 2.0 * diam / k.scale.sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    RawCone,
    Smoothed,
}

/// Conformal factor and curvature sampled along a radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub lambda: Vec<f64>,
    pub k: Vec<f64>,
    pub kind: ProfileKind,
}

/// Smoothed profile on `grid_n` log-spaced radii in `[10⁻⁶δ, R]`.
pub fn profile(c: &ConeMetric, p: &SmoothingParams, grid_n: usize) -> Result<RadialProfile, SmoothingError> {
    let k = Kernel::new(c, p)?;
    let grid = log_grid(k.delta * GRID_FLOOR, k.radius, grid_n.max(2));
    let factors = cumulative_factors(&k, &grid)?;
    let curv = grid.iter().zip(&factors).map(|(&s, &f)| k.curvature_with(s, f)).collect();
    Ok(RadialProfile {
        r: grid.iter().map(|s| s / k.t).collect(),
        lambda: factors.iter().map(|&f| k.original_factor(f)).collect(),
        k: curv,
        kind: ProfileKind::Smoothed,
    })
}

/// Raw cone profile on `grid_n` log-spaced radii in `[r_min, R]`.
pub fn raw_profile(c: &ConeMetric, r_min: f64, grid_n: usize) -> Result<RadialProfile, SmoothingError> {
    check_radius(r_min)?;
    let r = log_grid(r_min, c.radius, grid_n.max(2));
    let lambda = r.iter().map(|&x| lambda(c.alpha, c.kappa, x)).collect();
    let k = r.iter().map(|&x| super::raw_curvature(c, x)).collect::<Result<_, _>>()?;
    Ok(RadialProfile { r, lambda, k, kind: ProfileKind::RawCone })
}
