//! Closed-form geometry of the constant-curvature model surfaces.
//!
//! Points live in the conformal chart `ds² = 4|dz|² / (1 + κ|z|²)²`. For
//! `κ > 0` this is stereographic projection of the sphere of radius
//! `1/√κ`, for `κ < 0` it is the Poincaré disk of radius `1/√|κ|`, and for
//! `κ = 0` it is the plane with lengths doubled.
//!
//! Distances are computed by moving one point to the origin with a chart
//! isometry `T_a(z) = (z − a) / (1 + κ ā z)`, where the distance to the origin
//! has a closed form. Trigonometry uses half-angle forms throughout so that
//! tiny and nearly degenerate triangles keep full relative precision.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use crate::error::GeometryError;

/// Below this value of `|κ|·L²` the Euclidean formulas are used.
pub const FLAT_SWITCH: f64 = 1e-12;

/// Relative tolerance for deciding that a triangle is degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// A model surface of constant curvature `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    kappa: f64,
    diameter: f64,
}

/// Coordinates in the conformal chart.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChartPoint {
    pub x: f64,
    pub y: f64,
}

/// Angle returned by [`ModelSpace::angle_from_sides`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    pub value: f64,
    /// Set when the triangle inequality holds with equality (within tolerance).
    pub degenerate: bool,
}

/// A model triangle with its derived angles, excess and area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleData {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Angle opposite `a`.
    pub alpha: f64,
    /// Angle opposite `b`.
    pub beta: f64,
    /// Angle opposite `c`.
    pub gamma: f64,
    pub kappa: f64,
    pub excess: f64,
    pub area: f64,
    pub degenerate: bool,
}

impl ChartPoint {
    pub const ORIGIN: ChartPoint = ChartPoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm_sqr(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    fn to_c(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    fn from_c(z: Complex64) -> Self {
        Self { x: z.re, y: z.im }
    }
}

impl From<(f64, f64)> for ChartPoint {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

impl ModelSpace {
    pub fn new(kappa: f64) -> Result<Self, GeometryError> {
        if !kappa.is_finite() {
            return Err(GeometryError::InvalidKappa(kappa));
        }
        let diameter = if kappa > 0.0 { PI / kappa.sqrt() } else { f64::INFINITY };
        Ok(Self { kappa, diameter })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `π/√κ` for `κ > 0`, infinite otherwise.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    fn s(&self) -> f64 {
        self.kappa.abs().sqrt()
    }

    fn is_flat_at(&self, scale: f64) -> bool {
        self.kappa == 0.0 || self.kappa.abs() * scale * scale < FLAT_SWITCH
    }

    /// Checks that `p` lies in the chart domain.
    pub fn check_point(&self, p: ChartPoint) -> Result<(), GeometryError> {
        let ok = p.x.is_finite() && p.y.is_finite() && (self.kappa >= 0.0 || 1.0 + self.kappa * p.norm_sqr() > 0.0);
        if ok {
            Ok(())
        } else {
            Err(GeometryError::OutsideChart { x: p.x, y: p.y, kappa: self.kappa })
        }
    }

    /// Conformal factor `4 / (1 + κ|z|²)²` at `p`.
    pub fn conformal_factor(&self, p: ChartPoint) -> f64 {
        let d = 1.0 + self.kappa * p.norm_sqr();
        4.0 / (d * d)
    }

    /// Distance from the origin to a point at chart radius `r`.
    pub fn radius_to_distance(&self, r: f64) -> f64 {
        let k = self.kappa;
        if k.abs() * r * r < FLAT_SWITCH {
            return 2.0 * r * (1.0 - k * r * r / 3.0);
        }
        let s = self.s();
        if k > 0.0 {
            2.0 * (s * r).atan() / s
        } else {
            2.0 * (s * r).atanh() / s
        }
    }

    /// Chart radius of the point at distance `d` from the origin.
    pub fn distance_to_radius(&self, d: f64) -> f64 {
        let k = self.kappa;
        if k.abs() * d * d < FLAT_SWITCH {
            return 0.5 * d * (1.0 + k * d * d / 12.0);
        }
        let s = self.s();
        if k > 0.0 {
            (0.5 * s * d).tan() / s
        } else {
            (0.5 * s * d).tanh() / s
        }
    }

    /// Chart isometry sending `a` to the origin.
    fn recentre(&self, a: Complex64, z: Complex64) -> Complex64 {
        (z - a) / (Complex64::new(1.0, 0.0) + self.kappa * a.conj() * z)
    }

    /// Inverse of [`Self::recentre`].
    fn uncentre(&self, a: Complex64, w: Complex64) -> Complex64 {
        (w + a) / (Complex64::new(1.0, 0.0) - self.kappa * a.conj() * w)
    }

    /// Image of `z` under the isometry taking `center` to the origin.
    pub fn move_to_origin(&self, center: ChartPoint, z: ChartPoint) -> ChartPoint {
        ChartPoint::from_c(self.recentre(center.to_c(), z.to_c()))
    }

    /// Inverse of [`Self::move_to_origin`].
    pub fn move_from_origin(&self, center: ChartPoint, w: ChartPoint) -> ChartPoint {
        ChartPoint::from_c(self.uncentre(center.to_c(), w.to_c()))
    }

    /// Normalized centroid of points on the sphere (`κ > 0`), or `None` when
    /// the points balance out or the centroid is the chart's point at infinity.
    pub fn spherical_centroid(&self, pts: &[ChartPoint]) -> Option<ChartPoint> {
        if self.kappa <= 0.0 || pts.is_empty() {
            return None;
        }
        let s = self.s();
        let mut acc = [0.0; 3];
        for p in pts {
            let (x, y) = (s * p.x, s * p.y);
            let n = x * x + y * y;
            let d = 1.0 + n;
            acc[0] += 2.0 * x / d;
            acc[1] += 2.0 * y / d;
            acc[2] += (1.0 - n) / d;
        }
        let len = (acc[0] * acc[0] + acc[1] * acc[1] + acc[2] * acc[2]).sqrt();
        if len < 1e-12 {
            return None;
        }
        let [x, y, z] = acc.map(|c| c / len);
        if 1.0 + z < 1e-12 {
            return None;
        }
        Some(ChartPoint::new(x / ((1.0 + z) * s), y / ((1.0 + z) * s)))
    }

    /// Point at distance `d` from the origin in direction `theta`.
    pub fn polar_point(&self, d: f64, theta: f64) -> ChartPoint {
        let r = self.distance_to_radius(d);
        ChartPoint::new(r * theta.cos(), r * theta.sin())
    }

    /// Geodesic distance between two chart points.
    pub fn distance(&self, p: ChartPoint, q: ChartPoint) -> Result<f64, GeometryError> {
        self.check_point(p)?;
        self.check_point(q)?;
        // Fixed argument order makes the result exactly symmetric.
        let (p, q) = if (p.x, p.y) <= (q.x, q.y) { (p, q) } else { (q, p) };
        let (a, z) = (p.to_c(), q.to_c());
        let num = z - a;
        let den = Complex64::new(1.0, 0.0) + self.kappa * a.conj() * z;
        if num.norm() == 0.0 {
            return Ok(0.0);
        }
        if den.norm() == 0.0 {
            return Ok(self.diameter);
        }
        let d = self.radius_to_distance(num.norm() / den.norm());
        Ok(if self.kappa > 0.0 { d.min(self.diameter) } else { d })
    }

    /// Angle at `p` between the geodesics towards `q` and `r`, in `[0, π]`.
    pub fn angle_at(&self, p: ChartPoint, q: ChartPoint, r: ChartPoint) -> Result<f64, GeometryError> {
        self.check_point(p)?;
        self.check_point(q)?;
        self.check_point(r)?;
        let a = p.to_c();
        let u = self.recentre(a, q.to_c());
        let v = self.recentre(a, r.to_c());
        if u.norm() == 0.0 || v.norm() == 0.0 {
            return Err(GeometryError::CoincidentPoints);
        }
        Ok((v / u).arg().abs())
    }

    /// Point at arclength `s` from `p` along the geodesic `[pq]`.
    pub fn geodesic_point(&self, p: ChartPoint, q: ChartPoint, s: f64) -> Result<ChartPoint, GeometryError> {
        let d = self.distance(p, q)?;
        if !s.is_finite() || s < 0.0 || s > d * (1.0 + 1e-14) {
            if d == 0.0 && s > 0.0 {
                return Err(GeometryError::CoincidentPoints);
            }
            return Err(GeometryError::ArclengthOutOfRange { s, length: d });
        }
        if s == 0.0 {
            return Ok(p);
        }
        if s >= d {
            return Ok(q);
        }
        if self.kappa > 0.0 && d >= self.diameter * (1.0 - 1e-15) {
            return Err(GeometryError::Antipodal);
        }
        let a = p.to_c();
        let w = self.recentre(a, q.to_c());
        let dir = w / w.norm();
        let moved = dir * self.distance_to_radius(s);
        Ok(ChartPoint::from_c(self.uncentre(a, moved)))
    }

    fn check_length(&self, what: &'static str, x: f64) -> Result<(), GeometryError> {
        if !x.is_finite() || x < 0.0 {
            return Err(GeometryError::InvalidArgument { what, value: x });
        }
        if x >= self.diameter {
            return Err(GeometryError::BeyondDiameter { value: x, diameter: self.diameter });
        }
        Ok(())
    }

    /// Third side of a triangle with sides `a`, `b` enclosing angle `gamma`.
    pub fn side_from_angle(&self, a: f64, b: f64, gamma: f64) -> Result<f64, GeometryError> {
        self.check_length("side", a)?;
        self.check_length("side", b)?;
        if !gamma.is_finite() || !(0.0..=PI).contains(&gamma) {
            return Err(GeometryError::InvalidArgument { what: "angle", value: gamma });
        }
        let hg = (0.5 * gamma).sin();
        let hg2 = hg * hg;
        if self.is_flat_at(a.max(b)) {
            let d = a - b;
            return Ok((d * d + 4.0 * a * b * hg2).sqrt());
        }
        let s = self.s();
        let (a1, b1) = (s * a, s * b);
        if self.kappa > 0.0 {
            let h0 = (0.5 * (a1 - b1)).sin();
            let h = (h0 * h0 + a1.sin() * b1.sin() * hg2).clamp(0.0, 1.0);
            Ok(2.0 * h.sqrt().atan2((1.0 - h).sqrt()) / s)
        } else {
            let h0 = (0.5 * (a1 - b1)).sinh();
            let h = (h0 * h0 + a1.sinh() * b1.sinh() * hg2).max(0.0);
            Ok(2.0 * h.sqrt().asinh() / s)
        }
    }

    /// Checks side lengths and reports which degeneracy, if any, applies to
    /// the angle opposite `c`.
    fn check_sides(&self, a: f64, b: f64, c: f64) -> Result<Option<f64>, GeometryError> {
        for x in [a, b, c] {
            if !x.is_finite() || x <= 0.0 {
                return Err(GeometryError::InvalidArgument { what: "side", value: x });
            }
        }
        let perimeter = a + b + c;
        if self.kappa > 0.0 && perimeter >= 2.0 * self.diameter {
            return Err(GeometryError::PerimeterTooLarge { perimeter, limit: 2.0 * self.diameter });
        }
        let tol = DEGENERACY_TOL * perimeter;
        if a > b + c + tol || b > a + c + tol || c > a + b + tol {
            return Err(GeometryError::TriangleInequality { a, b, c });
        }
        if c >= a + b - tol {
            return Ok(Some(PI));
        }
        if a >= b + c - tol || b >= a + c - tol {
            return Ok(Some(0.0));
        }
        Ok(None)
    }

    /// Angle opposite `c` in the triangle with sides `a`, `b`, `c`.
    pub fn angle_from_sides(&self, a: f64, b: f64, c: f64) -> Result<Angle, GeometryError> {
        if let Some(value) = self.check_sides(a, b, c)? {
            return Ok(Angle { value, degenerate: true });
        }
        // sin²(γ/2) = hs / den and cos²(γ/2) = hc / den.
        let (hs, hc) = if self.is_flat_at(a.max(b).max(c)) {
            ((c - a + b) * (c + a - b), (a + b + c) * (a + b - c))
        } else {
            let s = self.s();
            let (a1, b1, c1) = (s * a, s * b, s * c);
            let f: fn(f64) -> f64 = if self.kappa > 0.0 { f64::sin } else { f64::sinh };
            (f(0.5 * (c1 - a1 + b1)) * f(0.5 * (c1 + a1 - b1)), f(0.5 * (a1 + b1 + c1)) * f(0.5 * (a1 + b1 - c1)))
        };
        let value = 2.0 * hs.max(0.0).sqrt().atan2(hc.max(0.0).sqrt());
        Ok(Angle { value, degenerate: false })
    }

    /// Angles, excess and area of the triangle with sides `a`, `b`, `c`.
    ///
    /// The excess is computed from the sides alone (L'Huilier's formula), not
    /// from the angle sum, so the two routes can be checked against each other.
    pub fn triangle_data(&self, a: f64, b: f64, c: f64) -> Result<TriangleData, GeometryError> {
        let gamma = self.angle_from_sides(a, b, c)?;
        let alpha = self.angle_from_sides(b, c, a)?;
        let beta = self.angle_from_sides(c, a, b)?;
        let degenerate = gamma.degenerate || alpha.degenerate || beta.degenerate;
        let (excess, area) = if self.is_flat_at(a.max(b).max(c)) {
            let area = heron(a, b, c);
            (self.kappa * area, area)
        } else {
            let e = lhuilier(self.kappa, a, b, c);
            (e, e / self.kappa)
        };
        Ok(TriangleData { a, b, c, alpha: alpha.value, beta: beta.value, gamma: gamma.value, kappa: self.kappa, excess, area, degenerate })
    }

    /// Maps a conformal chart point to the projective chart, where geodesics
    /// are straight lines. The identity for `κ = 0`; otherwise the projective
    /// radius is `tan(√κ d)/√κ` (or `tanh` for `κ < 0`) at distance `d` from
    /// the chart origin.
    pub fn to_projective(&self, p: ChartPoint) -> Result<(f64, f64), GeometryError> {
        self.check_point(p)?;
        if self.kappa == 0.0 {
            return Ok((p.x, p.y));
        }
        let den = 1.0 - self.kappa * p.norm_sqr();
        if den <= 0.0 {
            return Err(GeometryError::OutsideHemisphere { x: p.x, y: p.y });
        }
        Ok((2.0 * p.x / den, 2.0 * p.y / den))
    }

    /// Inverse of [`Self::to_projective`].
    pub fn from_projective(&self, u: (f64, f64)) -> Result<ChartPoint, GeometryError> {
        if !u.0.is_finite() || !u.1.is_finite() {
            return Err(GeometryError::OutsideChart { x: u.0, y: u.1, kappa: self.kappa });
        }
        if self.kappa == 0.0 {
            return Ok(ChartPoint::new(u.0, u.1));
        }
        let q = 1.0 + self.kappa * (u.0 * u.0 + u.1 * u.1);
        if q <= 0.0 {
            return Err(GeometryError::OutsideChart { x: u.0, y: u.1, kappa: self.kappa });
        }
        let den = 1.0 + q.sqrt();
        Ok(ChartPoint::new(u.0 / den, u.1 / den))
    }

    /// Distance between two projective chart points.
    pub fn projective_distance(&self, u: (f64, f64), v: (f64, f64)) -> Result<f64, GeometryError> {
        self.distance(self.from_projective(u)?, self.from_projective(v)?)
    }

    /// Riemannian area element of the projective chart at `u`.
    pub fn projective_area_element(&self, u: (f64, f64)) -> f64 {
        if self.kappa == 0.0 {
            return 4.0;
        }
        let q = 1.0 + self.kappa * (u.0 * u.0 + u.1 * u.1);
        q.powf(-1.5)
    }
}

/// Area of a Euclidean triangle, in Kahan's cancellation-free form.
pub fn heron(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * p.max(0.0).sqrt()
}

/// Signed excess from the sides via L'Huilier's formula (negative for
/// `κ < 0`).
fn lhuilier(kappa: f64, a: f64, b: f64, c: f64) -> f64 {
    let s = kappa.abs().sqrt();
    let mut v = [a * s, b * s, c * s];
    v.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = v;
    let half = 0.5 * (a + (b + c));
    let sa = 0.5 * (c - (a - b)).max(0.0);
    let sb = 0.5 * (c + (a - b));
    let sc = 0.5 * (a + (b - c));
    let f: fn(f64) -> f64 = if kappa > 0.0 { f64::tan } else { f64::tanh };
    let prod = f(0.5 * half) * f(0.5 * sa) * f(0.5 * sb) * f(0.5 * sc);
    let e = 4.0 * prod.max(0.0).sqrt().atan();
    if kappa > 0.0 {
        e
    } else {
        -e
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_2d};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    const LN_3: f64 = 1.098_612_288_668_109_8;

    fn sp(k: f64) -> ModelSpace {
        ModelSpace::new(k).unwrap()
    }

    fn pt(x: f64, y: f64) -> ChartPoint {
        ChartPoint::new(x, y)
    }

    #[test]
    fn diameter_convention() {
        assert_eq!(sp(1.0).diameter(), PI);
        assert!((sp(4.0).diameter() - FRAC_PI_2).abs() < 1e-15);
        assert!(sp(0.0).diameter().is_infinite());
        assert!(sp(-3.0).diameter().is_infinite());
        assert!(ModelSpace::new(f64::NAN).is_err());
    }

    #[test]
    fn distance_examples() {
        let o = ChartPoint::ORIGIN;
        assert!((sp(1.0).distance(o, pt(1.0, 0.0)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((sp(0.0).distance(o, pt(1.0, 0.0)).unwrap() - 2.0).abs() < 1e-15);
        assert!((sp(-1.0).distance(o, pt(0.5, 0.0)).unwrap() - LN_3).abs() < 1e-14);
    }

    #[test]
    fn hyperbolic_distance_matches_line_integral() {
        let q = integrate(|t| 2.0 / (1.0 - t * t), 0.0, 0.5, 1e-13).value;
        let d = sp(-1.0).distance(ChartPoint::ORIGIN, pt(0.5, 0.0)).unwrap();
        assert!((q - d).abs() < 1e-11);
    }

    #[test]
    fn distance_rejects_points_outside_disk() {
        let e = sp(-1.0).distance(ChartPoint::ORIGIN, pt(1.0, 0.0));
        assert!(matches!(e, Err(GeometryError::OutsideChart { .. })));
    }

    #[test]
    fn antipodes_are_at_diameter() {
        let s = sp(1.0);
        let d = s.distance(pt(0.3, 0.0), pt(-1.0 / 0.3, 0.0)).unwrap();
        assert!((d - PI).abs() < 1e-12);
        assert!(s.distance(pt(1.0, 0.0), pt(-1.0, 0.0)).unwrap() <= PI);
    }

    #[test]
    fn side_from_angle_examples() {
        assert!((sp(1.0).side_from_angle(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((sp(0.0).side_from_angle(3.0, 4.0, FRAC_PI_2).unwrap() - 5.0).abs() < 1e-14);
        let c = sp(-1.0).side_from_angle(1.0, 1.0, FRAC_PI_2).unwrap();
        assert!((c - (1f64.cosh().powi(2)).acosh()).abs() < 1e-13);
        assert!((c - 1.513_374_006_596_504).abs() < 1e-13);
    }

    #[test]
    fn hyperbolic_side_matches_chart_construction() {
        let s = sp(-1.0);
        let q = s.polar_point(1.0, 0.0);
        let r = s.polar_point(1.0, FRAC_PI_2);
        let c = s.side_from_angle(1.0, 1.0, FRAC_PI_2).unwrap();
        assert!((s.distance(q, r).unwrap() - c).abs() < 1e-13);
    }

    #[test]
    fn side_from_angle_rejects_bad_input() {
        assert!(sp(1.0).side_from_angle(PI, 0.5, 1.0).is_err());
        assert!(sp(0.0).side_from_angle(1.0, 1.0, 4.0).is_err());
        assert!(sp(0.0).side_from_angle(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn angle_from_sides_examples() {
        let g = sp(1.0).angle_from_sides(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2).unwrap();
        assert!((g.value - FRAC_PI_2).abs() < 1e-15 && !g.degenerate);
        let g = sp(0.0).angle_from_sides(3.0, 4.0, 5.0).unwrap();
        assert!((g.value - FRAC_PI_2).abs() < 1e-15);
        let g = sp(1.0).angle_from_sides(0.3, 0.4, 0.5).unwrap().value;
        assert!(g > FRAC_PI_2 && g < FRAC_PI_2 + 0.1);
    }

    #[test]
    fn spherical_angle_matches_chart_search() {
        // Place sides 0.3 and 0.4 at the origin and search the opening angle
        // that makes the chart distance equal 0.5.
        let s = sp(1.0);
        let f = |t: f64| s.distance(s.polar_point(0.3, 0.0), s.polar_point(0.4, t)).unwrap() - 0.5;
        let (mut lo, mut hi) = (0.0, PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let g = s.angle_from_sides(0.3, 0.4, 0.5).unwrap().value;
        assert!((g - 0.5 * (lo + hi)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_invalid_triangles() {
        let s = sp(0.0);
        let g = s.angle_from_sides(1.0, 2.0, 3.0).unwrap();
        assert!(g.degenerate && g.value == PI);
        let g = s.angle_from_sides(1.0, 3.0, 2.0).unwrap();
        assert!(g.degenerate && g.value == 0.0);
        assert!(matches!(s.angle_from_sides(1.0, 1.0, 3.0), Err(GeometryError::TriangleInequality { .. })));
        assert!(matches!(sp(1.0).angle_from_sides(3.0, 3.0, 1.0), Err(GeometryError::PerimeterTooLarge { .. })));
    }

    #[test]
    fn triangle_data_examples() {
        let t = sp(1.0).triangle_data(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2).unwrap();
        for v in [t.alpha, t.beta, t.gamma, t.excess, t.area] {
            assert!((v - FRAC_PI_2).abs() < 1e-12);
        }
        let t = sp(0.0).triangle_data(3.0, 4.0, 5.0).unwrap();
        assert_eq!(t.excess, 0.0);
        assert!((t.area - 6.0).abs() < 1e-14);
        let t = sp(-1.0).triangle_data(1.0, 1.0, 1.0).unwrap();
        assert!(t.excess < 0.0 && t.area > 0.0);
        assert!((t.area + t.excess).abs() < 1e-15);
        assert!((t.alpha + t.beta + t.gamma - PI - t.excess).abs() < 1e-13);
    }

    #[test]
    fn hyperbolic_area_matches_chart_quadrature() {
        // Equilateral triangle of side 1 with one vertex at the origin and one
        // on the x-axis. In the projective chart its sides are straight.
        let s = sp(-1.0);
        let t = s.triangle_data(1.0, 1.0, 1.0).unwrap();
        let q = s.to_projective(s.polar_point(1.0, 0.0)).unwrap();
        let r = s.to_projective(s.polar_point(1.0, t.alpha)).unwrap();
        let (qx, rx, ry) = (q.0, r.0, r.1);
        let area =
            integrate_2d(|x, y| s.projective_area_element((x, y)), 0.0, ry, move |y| y * rx / ry, move |y| qx + y * (rx - qx) / ry, 1e-12).value;
        assert!((area - t.area).abs() < 1e-8, "{area} vs {}", t.area);
    }

    #[test]
    fn projective_chart_examples() {
        let s = sp(0.0);
        assert_eq!(s.to_projective(pt(0.3, -2.0)).unwrap(), (0.3, -2.0));
        let s = sp(1.0);
        assert_eq!(s.to_projective(ChartPoint::ORIGIN).unwrap(), (0.0, 0.0));
        let p = s.polar_point(FRAC_PI_4, 0.7);
        let u = s.to_projective(p).unwrap();
        assert!(((u.0 * u.0 + u.1 * u.1).sqrt() - 1.0).abs() < 1e-14);
        let back = s.from_projective(u).unwrap();
        assert!((s.distance(ChartPoint::ORIGIN, back).unwrap() - FRAC_PI_4).abs() < 1e-14);
        assert!(s.to_projective(pt(1.0, 0.0)).is_err());
        assert!(s.to_projective(pt(2.0, 0.0)).is_err());
    }

    #[test]
    fn projective_geodesics_are_straight() {
        for k in [1.0, -1.0, 0.0, 3.0] {
            let s = sp(k);
            let p = pt(0.1, 0.2);
            let q = pt(-0.3, 0.05);
            let up = s.to_projective(p).unwrap();
            let uq = s.to_projective(q).unwrap();
            let d = s.distance(p, q).unwrap();
            for i in 1..10 {
                let m = s.to_projective(s.geodesic_point(p, q, d * i as f64 / 10.0).unwrap()).unwrap();
                let cross = (uq.0 - up.0) * (m.1 - up.1) - (uq.1 - up.1) * (m.0 - up.0);
                assert!(cross.abs() < 1e-14, "kappa {k}: {cross}");
            }
        }
    }

    #[test]
    fn geodesic_point_examples() {
        let s = sp(1.0);
        let p = ChartPoint::ORIGIN;
        let q = pt(1.0, 0.0);
        assert_eq!(s.geodesic_point(p, q, 0.0).unwrap(), p);
        assert_eq!(s.geodesic_point(p, q, FRAC_PI_2).unwrap(), q);
        let m = s.geodesic_point(p, q, FRAC_PI_4).unwrap();
        assert!((m.x - (PI / 8.0).tan()).abs() < 1e-15 && m.y == 0.0);
        assert!(s.geodesic_point(p, q, 2.0).is_err());
        assert!(matches!(s.geodesic_point(p, p, 0.1), Err(GeometryError::CoincidentPoints)));
    }

    #[test]
    fn angle_at_matches_law_of_cosines() {
        let s = sp(1.0);
        let p = pt(0.2, -0.1);
        let q = pt(-0.4, 0.3);
        let r = pt(0.5, 0.6);
        let a = s.distance(p, q).unwrap();
        let b = s.distance(p, r).unwrap();
        let c = s.distance(q, r).unwrap();
        let g = s.angle_from_sides(a, b, c).unwrap().value;
        assert!((s.angle_at(p, q, r).unwrap() - g).abs() < 1e-12);
    }

    #[test]
    fn recentring_preserves_distance() {
        for k in [1.0, -1.0, 0.0] {
            let s = sp(k);
            let (c, p, q) = (pt(0.3, -0.2), pt(-0.1, 0.4), pt(0.5, 0.5));
            let d0 = s.distance(p, q).unwrap();
            let (mp, mq) = (s.move_to_origin(c, p), s.move_to_origin(c, q));
            assert!((s.distance(mp, mq).unwrap() - d0).abs() < 1e-14);
            assert!(s.move_to_origin(c, c).norm_sqr() < 1e-30);
            let back = s.move_from_origin(c, mp);
            assert!((back.x - p.x).abs() < 1e-15 && (back.y - p.y).abs() < 1e-15);
        }
    }

    #[test]
    fn spherical_centroid_is_equidistant_for_symmetric_points() {
        let s = sp(4.0);
        let pts: Vec<_> = (0..3).map(|i| s.polar_point(0.3, 2.0 * PI * i as f64 / 3.0)).collect();
        let c = s.spherical_centroid(&pts).unwrap();
        assert!(c.norm_sqr() < 1e-28);
        assert!(sp(-1.0).spherical_centroid(&pts).is_none());
    }

    #[test]
    fn small_triangle_comparability() {
        // Law of cosines at κ = 1 versus the Euclidean one, at perimeter < 0.1.
        let s = sp(1.0);
        let eps = 0.5;
        for i in 1..30 {
            for j in 1..30 {
                let a = 0.001 * i as f64;
                let b = 0.0012 * j as f64;
                let g = 0.1 * (i + j) as f64 % PI;
                let c = s.side_from_angle(a, b, g).unwrap();
                let e = a * a + b * b - 2.0 * a * b * g.cos();
                assert!((1.0 - eps) * e <= c * c && c * c <= (1.0 + eps) * e);
            }
        }
    }

    fn kappas() -> impl Strategy<Value = f64> {
        prop::sample::select(vec![-2.0, -1.0, 0.0, 0.5, 1.0, 4.0])
    }

    fn point_in(k: f64) -> impl Strategy<Value = ChartPoint> {
        let r = if k < 0.0 { 0.95 / (-k).sqrt() } else { 1.5 };
        (0.0..r, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| ChartPoint::new(r * t.cos(), r * t.sin()))
    }

    proptest! {
        #[test]
        fn distance_symmetric_and_triangle(
            (k, p, q, r) in kappas().prop_flat_map(|k| (Just(k), point_in(k), point_in(k), point_in(k)))
        ) {
            let s = sp(k);
            let pq = s.distance(p, q).unwrap();
            prop_assert_eq!(pq, s.distance(q, p).unwrap());
            let pr = s.distance(p, r).unwrap();
            let qr = s.distance(q, r).unwrap();
            prop_assert!(pq <= pr + qr + 1e-12 * (1.0 + pr + qr));
        }

        #[test]
        fn law_of_cosines_round_trip(k in kappas(), fa in 0.01f64..0.9, fb in 0.01f64..0.9, g in 0.01f64..3.13) {
            let s = sp(k);
            let scale = if k > 0.0 { s.diameter() / 2.0 } else { 3.0 };
            let (a, b) = (fa * scale, fb * scale);
            let c = s.side_from_angle(a, b, g).unwrap();
            let back = s.angle_from_sides(a, b, c).unwrap();
            prop_assert!((back.value - g).abs() < 1e-10, "{} vs {}", back.value, g);
        }

        #[test]
        fn scaling_covariance(k in prop::sample::select(vec![-4.0f64, -0.25, 0.25, 9.0]), p in point_in(-1.0), q in point_in(-1.0)) {
            let unit = sp(k.signum());
            let s = sp(k);
            let t = 1.0 / k.abs().sqrt();
            let scaled = |z: ChartPoint| ChartPoint::new(z.x * t, z.y * t);
            let d1 = unit.distance(p, q).unwrap();
            let dk = s.distance(scaled(p), scaled(q)).unwrap();
            prop_assert!((dk - t * d1).abs() < 1e-10 * (1.0 + t * d1));
        }

        #[test]
        fn angle_increases_with_kappa(a in 0.05f64..0.6, b in 0.05f64..0.6, g in 0.2f64..2.9) {
            let c = sp(0.0).side_from_angle(a, b, g).unwrap();
            let ks = [-2.0, -1.0, 0.0, 0.5, 1.0, 4.0];
            let angles: Vec<f64> = ks.iter().map(|&k| sp(k).angle_from_sides(a, b, c).unwrap().value).collect();
            for w in angles.windows(2) {
                prop_assert!(w[0] < w[1], "{:?}", angles);
            }
        }

        #[test]
        fn geodesic_point_hits_arclength(
            (k, p, q) in kappas().prop_flat_map(|k| (Just(k), point_in(k), point_in(k))),
            f in 0.0f64..1.0,
        ) {
            let s = sp(k);
            let d = s.distance(p, q).unwrap();
            prop_assume!(d > 1e-6 && d < 0.99 * s.diameter());
            let m = s.geodesic_point(p, q, f * d).unwrap();
            prop_assert!((s.distance(p, m).unwrap() - f * d).abs() < 1e-10 * (1.0 + d));
            prop_assert!((s.distance(m, q).unwrap() - (1.0 - f) * d).abs() < 1e-10 * (1.0 + d));
        }

        #[test]
        fn projective_round_trip(k in kappas(), p in point_in(-1.0)) {
            let s = sp(k);
            let p = if k > 0.0 { ChartPoint::new(p.x * 0.6 / k.sqrt(), p.y * 0.6 / k.sqrt()) } else if k < 0.0 {
                ChartPoint::new(p.x / (-k).sqrt(), p.y / (-k).sqrt())
            } else { p };
            let back = s.from_projective(s.to_projective(p).unwrap()).unwrap();
            prop_assert!((back.x - p.x).abs() < 1e-12 && (back.y - p.y).abs() < 1e-12);
        }
    }
}
