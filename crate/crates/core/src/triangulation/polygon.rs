//! Convex polygons in a projective chart and their clipping.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::TriangulationError;
use crate::model_space::ModelSpace;

/// A point in projective chart coordinates.
pub type Pt = [f64; 2];

pub(crate) fn sub(a: Pt, b: Pt) -> Pt {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn cross(a: Pt, b: Pt) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn dot(a: Pt, b: Pt) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm(a: Pt) -> f64 {
    a[0].hypot(a[1])
}

pub(crate) fn lerp(a: Pt, b: Pt, t: f64) -> Pt {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Twice the signed area of `abc`; positive when counter-clockwise.
pub fn orient(a: Pt, b: Pt, c: Pt) -> f64 {
    cross(sub(b, a), sub(c, a))
}

/// Signed distance of `c` from the line through `a` and `b` (positive on the left).
pub(crate) fn line_offset(a: Pt, b: Pt, c: Pt) -> f64 {
    let l = norm(sub(b, a));
    if l == 0.0 {
        return norm(sub(c, a));
    }
    orient(a, b, c) / l
}

/// Distance from `c` to the closed segment `[a, b]`.
pub(crate) fn segment_distance(a: Pt, b: Pt, c: Pt) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    if l2 == 0.0 {
        return norm(sub(c, a));
    }
    let t = (dot(sub(c, a), ab) / l2).clamp(0.0, 1.0);
    norm(sub(c, lerp(a, b, t)))
}

pub(crate) fn close(a: Pt, b: Pt, tol: f64) -> bool {
    (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol
}

/// Shoelace signed area.
pub fn signed_area(vs: &[Pt]) -> f64 {
    let n = vs.len();
    if n < 3 {
        return 0.0;
    }
    let o = vs[0];
    let mut s = 0.0;
    for i in 1..n - 1 {
        s += orient(o, vs[i], vs[i + 1]);
    }
    0.5 * s
}

/// Size of the bounding box of `vs`, never below 1e-300.
pub(crate) fn extent(vs: &[Pt]) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in vs {
        for k in 0..2 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    (hi[0] - lo[0]).hypot(hi[1] - lo[1]).max(1e-300)
}

/// Drops consecutive near-duplicates, including a closing duplicate.
pub(crate) fn dedupe(vs: &[Pt], tol: f64) -> Vec<Pt> {
    let mut out: Vec<Pt> = Vec::with_capacity(vs.len());
    for &v in vs {
        if out.last().is_none_or(|&l| !close(l, v, tol)) {
            out.push(v);
        }
    }
    while out.len() > 1 && close(out[0], *out.last().unwrap(), tol) {
        out.pop();
    }
    out
}

/// Removes vertices where the boundary does not turn.
pub(crate) fn strip_collinear(vs: &[Pt], tol: f64) -> Vec<Pt> {
    let mut cur = vs.to_vec();
    loop {
        let n = cur.len();
        if n <= 3 {
            return cur;
        }
        let drop = (0..n).find(|&i| {
            let (a, b, c) = (cur[(i + n - 1) % n], cur[i], cur[(i + 1) % n]);
            line_offset(a, c, b).abs() <= tol
        });
        match drop {
            Some(i) => {
                cur.remove(i);
            }
            None => return cur,
        }
    }
}

/// A strictly convex, positively oriented polygon in the projective chart of
/// the model space of curvature `kappa`. Collinear boundary vertices are
/// permitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPolygon {
    vertices: Vec<Pt>,
    kappa: f64,
}

impl ChartPolygon {
    /// Validates and normalizes to counter-clockwise order. When the input is
    /// clockwise, the first vertex is kept and the rest reversed.
    pub fn new(vertices: Vec<Pt>, kappa: f64) -> Result<Self, TriangulationError> {
        let invalid = |m: &str| Err(TriangulationError::InvalidPolygon(m.to_string()));
        if !kappa.is_finite() {
            return invalid("non-finite curvature");
        }
        if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return invalid("non-finite coordinate");
        }
        if kappa < 0.0 && vertices.iter().any(|v| 1.0 + kappa * dot(*v, *v) <= 0.0) {
            return invalid("vertex outside the projective disk");
        }
        let scale = extent(&vertices);
        let mut vs = dedupe(&vertices, 1e-15 * scale);
        if vs.len() < 3 {
            return invalid("fewer than three distinct vertices");
        }
        let area = signed_area(&vs);
        if area < 0.0 {
            vs[1..].reverse();
        }
        if area == 0.0 || area.abs() <= 1e-15 * scale * scale {
            return invalid("zero area");
        }
        let n = vs.len();
        let mut turning = 0.0;
        for i in 0..n {
            let (a, b, c) = (vs[(i + n - 1) % n], vs[i], vs[(i + 1) % n]);
            let (u, w) = (sub(b, a), sub(c, b));
            if cross(u, w) < -1e-12 * norm(u) * norm(w) {
                return invalid("not convex");
            }
            turning += cross(u, w).atan2(dot(u, w));
        }
        if (turning - TAU).abs() > 1e-6 {
            return invalid("not simple");
        }
        Ok(Self { vertices: vs, kappa })
    }

    pub fn triangle(a: Pt, b: Pt, c: Pt, kappa: f64) -> Result<Self, TriangulationError> {
        Self::new(vec![a, b, c], kappa)
    }

    pub fn vertices(&self) -> &[Pt] {
        &self.vertices
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Euclidean area in chart coordinates.
    pub fn chart_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn scale(&self) -> f64 {
        extent(&self.vertices)
    }

    pub fn centroid(&self) -> Pt {
        let n = self.vertices.len() as f64;
        let s = self.vertices.iter().fold([0.0, 0.0], |acc, v| [acc[0] + v[0], acc[1] + v[1]]);
        [s[0] / n, s[1] / n]
    }

    /// Vertices with collinear boundary points removed.
    pub fn corners(&self) -> Vec<Pt> {
        strip_collinear(&self.vertices, 1e-12 * self.scale())
    }

    /// True if `x` is inside or within `tol` of the polygon.
    pub fn contains(&self, x: Pt, tol: f64) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| line_offset(self.vertices[i], self.vertices[(i + 1) % n], x) >= -tol)
    }

    /// True if `x` is at least `tol` inside every edge.
    pub fn strictly_contains(&self, x: Pt, tol: f64) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            a == b || line_offset(a, b, x) > tol
        })
    }

    /// Area in the model-space metric, as a sum of fan triangle areas.
    pub fn model_area(&self) -> Result<f64, TriangulationError> {
        let space = ModelSpace::new(self.kappa)?;
        let cs = self.corners();
        let pts: Vec<_> = cs.iter().map(|&u| space.from_projective((u[0], u[1]))).collect::<Result<_, _>>()?;
        let mut total = 0.0;
        for i in 1..pts.len() - 1 {
            let a = space.distance(pts[0], pts[i])?;
            let b = space.distance(pts[i], pts[i + 1])?;
            let c = space.distance(pts[0], pts[i + 1])?;
            total += space.triangle_data(a, b, c)?.area;
        }
        Ok(total)
    }
}

/// Sutherland–Hodgman clipping of a polygon against a convex,
/// counter-clockwise clip polygon.
pub fn clip_convex(subject: &[Pt], clip: &[Pt]) -> Vec<Pt> {
    let scale = extent(subject).max(extent(clip));
    let mut out = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % m]);
        let input = std::mem::take(&mut out);
        let n = input.len();
        for j in 0..n {
            let cur = input[j];
            let prev = input[(j + n - 1) % n];
            let dc = orient(a, b, cur);
            let dp = orient(a, b, prev);
            if dc >= 0.0 {
                if dp < 0.0 {
                    out.push(lerp(prev, cur, dp / (dp - dc)));
                }
                out.push(cur);
            } else if dp >= 0.0 {
                out.push(lerp(prev, cur, dp / (dp - dc)));
            }
        }
        out = dedupe(&out, 1e-14 * scale);
    }
    out
}

/// Outcome of intersecting two convex polygons.
#[derive(Debug, Clone, PartialEq)]
pub enum Intersection {
    Empty,
    /// A point or segment, or a sliver of negligible area.
    Degenerate(Vec<Pt>),
    Polygon(ChartPolygon),
}

impl Intersection {
    pub fn area(&self) -> f64 {
        match self {
            Intersection::Polygon(p) => p.chart_area(),
            _ => 0.0,
        }
    }
}

/// Intersection of two convex polygons in the same chart.
pub fn intersect_convex(p: &ChartPolygon, q: &ChartPolygon) -> Result<Intersection, TriangulationError> {
    if p.kappa != q.kappa {
        return Err(TriangulationError::KappaMismatch(p.kappa, q.kappa));
    }
    let pts = clip_convex(&p.vertices, &q.vertices);
    if pts.is_empty() {
        return Ok(Intersection::Empty);
    }
    let scale = p.scale().max(q.scale());
    if pts.len() < 3 || signed_area(&pts) <= 1e-14 * scale * scale {
        return Ok(Intersection::Degenerate(pts));
    }
    match ChartPolygon::new(pts.clone(), p.kappa) {
        Ok(poly) => Ok(Intersection::Polygon(poly)),
        Err(_) => Ok(Intersection::Degenerate(pts)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x: f64, y: f64) -> ChartPolygon {
        ChartPolygon::new(vec![[x, y], [x + 1.0, y], [x + 1.0, y + 1.0], [x, y + 1.0]], 0.0).unwrap()
    }

    #[test]
    fn orientation_is_normalized_keeping_first_vertex() {
        let p = ChartPolygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], 0.0).unwrap();
        assert_eq!(p.vertices(), &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(p.chart_area() > 0.0);
    }

    #[test]
    fn rejects_bad_polygons() {
        assert!(ChartPolygon::new(vec![[0.0, 0.0], [1.0, 0.0]], 0.0).is_err());
        assert!(ChartPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], 0.0).is_err());
        let dart = vec![[0.0, 0.0], [2.0, 1.0], [0.0, 2.0], [0.5, 1.0]];
        assert!(ChartPolygon::new(dart, 0.0).is_err());
        let bowtie = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(ChartPolygon::new(bowtie, 0.0).is_err());
        assert!(ChartPolygon::new(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 0.5]], -1.0).is_err());
    }

    #[test]
    fn collinear_vertices_are_kept_but_not_corners() {
        let p = ChartPolygon::new(vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [0.0, 1.0]], 0.0).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.corners().len(), 3);
    }

    #[test]
    fn intersection_examples() {
        let a = square(0.0, 0.0);
        match intersect_convex(&a, &a).unwrap() {
            Intersection::Polygon(p) => assert!((p.chart_area() - 1.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert_eq!(intersect_convex(&a, &square(3.0, 0.0)).unwrap(), Intersection::Empty);
        let i = intersect_convex(&a, &square(0.5, 0.5)).unwrap();
        assert!((i.area() - 0.25).abs() < 1e-15);
        assert!(matches!(intersect_convex(&a, &square(1.0, 0.0)).unwrap(), Intersection::Degenerate(_)));
        let other = ChartPolygon::new(a.vertices().to_vec(), 1.0).unwrap();
        assert!(matches!(intersect_convex(&a, &other), Err(TriangulationError::KappaMismatch(..))));
    }

    #[test]
    fn model_area_of_flat_square_is_scaled() {
        // The flat chart carries conformal factor 4.
        assert!((square(0.0, 0.0).model_area().unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn spherical_octant_area() {
        // Gnomonic image of the octant with vertices at the pole and on the
        // equator is unbounded, so use the octant centred on (1,1,1).
        let c = 1.0 / 3f64.sqrt();
        // Project (1,0,0), (0,1,0), (0,0,1) from the centre direction.
        let basis_u = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
        let basis_v = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
        let proj = |x: [f64; 3]| -> Pt {
            let h = (x[0] + x[1] + x[2]) * c;
            let u = x[0] * basis_u[0] + x[1] * basis_u[1] + x[2] * basis_u[2];
            let v = x[0] * basis_v[0] + x[1] * basis_v[1] + x[2] * basis_v[2];
            [u / h, v / h]
        };
        let tri = ChartPolygon::triangle(proj([1.0, 0.0, 0.0]), proj([0.0, 1.0, 0.0]), proj([0.0, 0.0, 1.0]), 1.0).unwrap();
        assert!((tri.model_area().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
