//! Vertex-edge refinement of a model triangle relative to a family of convex
//! polygons, carried out in the projective chart where geodesics are
//! straight.
//!
//! The refinement draws a fan of segments from the apex `p` through every
//! family vertex to the opposite side `[qr]`. Inside each fan triangle the
//! family boundaries cross as chords between the two fan segments; the
//! chords are stacked from the base up, and each band between consecutive
//! chords is cut into one or two triangles.

mod polygon;
mod recognize;

use std::f64::consts::PI;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::error::GeometryError;
use crate::model_space::ModelSpace;

pub use polygon::{clip_convex, intersect_convex, orient, signed_area, ChartPolygon, Intersection, Pt};
pub use recognize::{check_tiling, is_vertex_edge, replay, replay_matches, ChordSplit, VertexEdgeVerdict};

use polygon::{close, line_offset, segment_distance, sub};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TriangulationError {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("polygons live in charts of different curvature ({0} and {1})")]
    KappaMismatch(f64, f64),
    #[error("the parent must be a triangle")]
    NotATriangle,
    #[error("point {0:?} coincides with the apex")]
    PointIsApex(Pt),
    #[error("point {0:?} is not inside the triangle")]
    NotInterior(Pt),
    #[error("family polygon {0} is not contained in the parent")]
    NotContained(usize),
    #[error("family polygons {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("not a tiling: {0}")]
    NotTiling(String),
    #[error("certificate replay failed: {0}")]
    ReplayFailed(String),
    #[error("refinement failed verification: {0}")]
    Verification(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Foot of the extended geodesic on the side opposite the apex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Foot {
    pub point: Pt,
    /// Position along `[qr]`, 0 at `q` and 1 at `r`.
    pub param: f64,
    /// The input already lay on `[qr]`.
    pub on_side: bool,
}

/// Extends the segment from the apex `p = parent[0]` through `v` to the
/// opposite side `[qr]`.
pub fn extend_geodesic_to_side(parent: &ChartPolygon, v: Pt) -> Result<Foot, TriangulationError> {
    let [p, q, r] = triangle_corners(parent)?;
    let tol = 1e-12 * parent.scale();
    if close(v, p, tol) {
        return Err(TriangulationError::PointIsApex(v));
    }
    let e = sub(r, q);
    let param_of = |x: Pt| polygon::dot(sub(x, q), e) / polygon::dot(e, e);
    if segment_distance(q, r, v) <= tol {
        return Ok(Foot { point: v, param: param_of(v).clamp(0.0, 1.0), on_side: true });
    }
    if !parent.strictly_contains(v, tol) {
        return Err(TriangulationError::NotInterior(v));
    }
    let d = sub(v, p);
    let u = (polygon::cross(sub(q, p), d) / polygon::cross(d, e)).clamp(0.0, 1.0);
    Ok(Foot { point: polygon::lerp(q, r, u), param: u, on_side: false })
}

fn triangle_corners(parent: &ChartPolygon) -> Result<[Pt; 3], TriangulationError> {
    match parent.corners()[..] {
        [p, q, r] => Ok([p, q, r]),
        _ => Err(TriangulationError::NotATriangle),
    }
}

/// Which family polygon a refined triangle lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Owner {
    Family(usize),
    Background,
}

impl Serialize for Owner {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Owner::Family(i) => s.serialize_u64(*i as u64),
            Owner::Background => s.serialize_str("background"),
        }
    }
}

impl<'de> Deserialize<'de> for Owner {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Index(usize),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Index(i) => Ok(Owner::Family(i)),
            Raw::Tag(t) if t == "background" => Ok(Owner::Background),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!("unknown owner {t:?}"))),
        }
    }
}

/// Triangles of a vertex-edge refinement with ownership and certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementOutput {
    pub kappa: f64,
    pub triangles: Vec<ChartPolygon>,
    pub owner: Vec<Owner>,
    /// Cuts reproducing `triangles` from the parent.
    pub certificate: Vec<ChordSplit>,
    /// For each family polygon, cuts reproducing its owned triangles.
    pub family_certificates: Vec<Vec<ChordSplit>>,
}

impl RefinementOutput {
    pub fn owned_by(&self, family: usize) -> Vec<ChartPolygon> {
        self.triangles.iter().zip(&self.owner).filter(|(_, o)| **o == Owner::Family(family)).map(|(t, _)| t.clone()).collect()
    }
}

/// Points on the fan segment from the foot `f` (t = 0) to the apex (t = 1),
/// snapped so that shared points get identical coordinates.
struct FanLine {
    foot: Pt,
    params: Vec<f64>,
}

impl FanLine {
    fn snap(&mut self, t: f64) -> f64 {
        const EPS: f64 = 1e-10;
        if let Some(&s) = self.params.iter().find(|&&s| (s - t).abs() <= EPS) {
            return s;
        }
        self.params.push(t);
        t
    }

    fn point(&self, apex: Pt, t: f64) -> Pt {
        if t == 1.0 {
            apex
        } else if t == 0.0 {
            self.foot
        } else {
            polygon::lerp(self.foot, apex, t)
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Label {
    Lower(f64),
    Upper(f64),
    Apex,
}

fn validate_family(parent: &ChartPolygon, family: &[ChartPolygon]) -> Result<(), TriangulationError> {
    let tol = 1e-10 * parent.scale();
    for (i, a) in family.iter().enumerate() {
        if a.kappa() != parent.kappa() {
            return Err(TriangulationError::KappaMismatch(parent.kappa(), a.kappa()));
        }
        if !a.vertices().iter().all(|&v| parent.contains(v, tol)) {
            return Err(TriangulationError::NotContained(i));
        }
    }
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let o = intersect_convex(&family[i], &family[j])?.area();
            if o > 1e-12 * parent.chart_area().max(1e-300) {
                return Err(TriangulationError::Overlap(i, j));
            }
        }
    }
    Ok(())
}

/// Vertex-edge refinement of `parent` relative to `family`.
///
/// The parent's first vertex is the apex of the fan. The returned
/// certificates are replayed before returning.
pub fn ve_refine(parent: &ChartPolygon, family: &[ChartPolygon]) -> Result<RefinementOutput, TriangulationError> {
    let [p, q, r] = triangle_corners(parent)?;
    let kappa = parent.kappa();
    let space = ModelSpace::new(kappa)?;
    let parent_tri = ChartPolygon::triangle(p, q, r, kappa)?;
    let perimeter = {
        let c: Vec<_> = [p, q, r].iter().map(|u| space.from_projective((u[0], u[1]))).collect::<Result<_, _>>()?;
        space.distance(c[0], c[1])? + space.distance(c[1], c[2])? + space.distance(c[2], c[0])?
    };
    if kappa > 0.0 && perimeter >= 2.0 * space.diameter() {
        return Err(GeometryError::PerimeterTooLarge { perimeter, limit: 2.0 * space.diameter() }.into());
    }
    validate_family(&parent_tri, family)?;
    let scale = parent_tri.scale();
    let tol = 1e-10 * scale;

    // Fan feet on [qr], as parameters from q.
    let mut params = vec![0.0, 1.0];
    for a in family {
        for &v in a.vertices() {
            if segment_distance(p, q, v) <= tol || segment_distance(p, r, v) <= tol {
                continue;
            }
            let foot = extend_geodesic_to_side(&parent_tri, v)?;
            params.push(foot.param);
        }
    }
    params.sort_by(f64::total_cmp);
    params.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    if let Some(last) = params.last_mut() {
        *last = 1.0;
    }
    let feet: Vec<Pt> = params
        .iter()
        .map(|&u| {
            if u == 0.0 {
                q
            } else if u == 1.0 {
                r
            } else {
                polygon::lerp(q, r, u)
            }
        })
        .collect();
    let mut lines: Vec<FanLine> = feet.iter().map(|&f| FanLine { foot: f, params: vec![0.0, 1.0] }).collect();

    let mut certificate = Vec::new();
    for k in 1..feet.len() - 1 {
        certificate.push(ChordSplit { polygon: vec![p, feet[k - 1], r], from: p, to: feet[k] });
    }

    let mut triangles = Vec::new();
    for k in 0..feet.len() - 1 {
        let fan = [p, feet[k], feet[k + 1]];
        let mut chords: Vec<(f64, f64)> = vec![(0.0, 0.0)];
        for a in family {
            let clipped = clip_convex(a.vertices(), &fan);
            if clipped.len() < 3 {
                continue;
            }
            let mut labels = Vec::with_capacity(clipped.len());
            for &x in &clipped {
                let dl = line_offset(p, feet[k], x).abs();
                let du = line_offset(p, feet[k + 1], x).abs();
                let label = if (dl <= tol && du <= tol) || close(x, p, tol) {
                    Label::Apex
                } else if dl <= tol {
                    Label::Lower(lines[k].snap(param_on(feet[k], p, x)))
                } else if du <= tol {
                    Label::Upper(lines[k + 1].snap(param_on(feet[k + 1], p, x)))
                } else {
                    return Err(TriangulationError::Verification(format!("clipped vertex {x:?} is off the fan segments")));
                };
                labels.push(label);
            }
            let m = labels.len();
            for i in 0..m {
                match (labels[i], labels[(i + 1) % m]) {
                    (Label::Lower(s), Label::Upper(t)) | (Label::Upper(t), Label::Lower(s)) => chords.push((s, t)),
                    _ => {}
                }
            }
        }
        chords.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        chords.dedup();
        chords.push((1.0, 1.0));

        let (lo, hi) = (&lines[k], &lines[k + 1]);
        for j in 0..chords.len() - 1 {
            let (a0, b0) = (lo.point(p, chords[j].0), hi.point(p, chords[j].1));
            let (ta, tb) = chords[j + 1];
            let region = vec![a0, b0, p];
            if (ta, tb) == (1.0, 1.0) {
                triangles.push(ChartPolygon::triangle(a0, b0, p, kappa)?);
                continue;
            }
            let (a1, b1) = (lo.point(p, ta), hi.point(p, tb));
            if chords[j].0 == ta {
                triangles.push(ChartPolygon::triangle(a0, b0, b1, kappa)?);
                certificate.push(ChordSplit { polygon: region, from: a0, to: b1 });
            } else if chords[j].1 == tb {
                triangles.push(ChartPolygon::triangle(a0, b0, a1, kappa)?);
                certificate.push(ChordSplit { polygon: region, from: b0, to: a1 });
            } else {
                triangles.push(ChartPolygon::triangle(a0, b0, b1, kappa)?);
                triangles.push(ChartPolygon::triangle(a0, b1, a1, kappa)?);
                certificate.push(ChordSplit { polygon: region, from: a0, to: b1 });
                certificate.push(ChordSplit { polygon: vec![a0, b1, p], from: b1, to: a1 });
            }
        }
    }

    let owner: Vec<Owner> = triangles
        .iter()
        .map(|t| {
            let c = t.centroid();
            family.iter().position(|a| a.strictly_contains(c, 0.0)).map_or(Owner::Background, Owner::Family)
        })
        .collect();

    if !replay_matches(&parent_tri, &certificate, &triangles)? {
        return Err(TriangulationError::Verification("parent certificate does not reproduce the triangles".into()));
    }
    let mut out = RefinementOutput { kappa, triangles, owner, certificate, family_certificates: Vec::new() };
    for (i, a) in family.iter().enumerate() {
        let owned = out.owned_by(i);
        match is_vertex_edge(a, &owned)? {
            VertexEdgeVerdict::Yes(trace) => out.family_certificates.push(trace),
            other => {
                return Err(TriangulationError::Verification(format!("family polygon {i}: owned triangles gave {other:?}")));
            }
        }
    }
    Ok(out)
}

fn param_on(foot: Pt, apex: Pt, x: Pt) -> f64 {
    let d = sub(apex, foot);
    (polygon::dot(sub(x, foot), d) / polygon::dot(d, d)).clamp(0.0, 1.0)
}

/// Excess of a convex chart polygon in the ambient model space: angle sum
/// minus `(n − 2)π`, with angles from geodesic side lengths.
pub fn polygon_excess(poly: &ChartPolygon) -> Result<f64, TriangulationError> {
    let space = ModelSpace::new(poly.kappa())?;
    let vs: Vec<_> = poly.corners().iter().map(|u| space.from_projective((u[0], u[1]))).collect::<Result<_, _>>()?;
    let n = vs.len();
    let mut sum = 0.0;
    for i in 0..n {
        let (a, b, c) = (vs[(i + n - 1) % n], vs[i], vs[(i + 1) % n]);
        let x = space.distance(b, a)?;
        let y = space.distance(b, c)?;
        let z = space.distance(a, c)?;
        sum += space.angle_from_sides(x, y, z)?.value;
    }
    Ok(sum - (n as f64 - 2.0) * PI)
}

/// Total family excess against `target_kappa` times the area of the parent's
/// comparison triangle at `target_kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcessBound {
    pub family_excess: f64,
    pub parent_model_area_scaled: f64,
}

pub fn family_excess_bound_demo(parent: &ChartPolygon, family: &[ChartPolygon], target_kappa: f64) -> Result<ExcessBound, TriangulationError> {
    let [p, q, r] = triangle_corners(parent)?;
    validate_family(parent, family)?;
    let ambient = ModelSpace::new(parent.kappa())?;
    let target = ModelSpace::new(target_kappa)?;
    let c: Vec<_> = [p, q, r].iter().map(|u| ambient.from_projective((u[0], u[1]))).collect::<Result<_, _>>()?;
    let t = target.triangle_data(ambient.distance(c[1], c[2])?, ambient.distance(c[0], c[2])?, ambient.distance(c[0], c[1])?)?;
    let family_excess = family.iter().map(polygon_excess).sum::<Result<f64, _>>()?;
    Ok(ExcessBound { family_excess, parent_model_area_scaled: target_kappa * t.area })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(vs: &[Pt]) -> ChartPolygon {
        ChartPolygon::new(vs.to_vec(), 0.0).unwrap()
    }

    fn parent() -> ChartPolygon {
        poly(&[[0.0, 1.0], [-1.0, 0.0], [1.2, 0.0]])
    }

    fn check(parent: &ChartPolygon, family: &[ChartPolygon]) -> RefinementOutput {
        let out = ve_refine(parent, family).unwrap();
        check_tiling(parent, &out.triangles).unwrap();
        assert!(replay_matches(parent, &out.certificate, &out.triangles).unwrap());
        assert!(is_vertex_edge(parent, &out.triangles).unwrap().is_yes());
        for (i, a) in family.iter().enumerate() {
            let owned = out.owned_by(i);
            let s: f64 = owned.iter().map(|t| t.chart_area()).sum();
            assert!((s - a.chart_area()).abs() <= 1e-9 * a.chart_area(), "family {i}: {s} vs {}", a.chart_area());
            assert!(replay_matches(a, &out.family_certificates[i], &owned).unwrap());
        }
        out
    }

    #[test]
    fn foot_examples() {
        let t = parent();
        let [p, q, r] = [t.vertices()[0], t.vertices()[1], t.vertices()[2]];
        let m = polygon::lerp(q, r, 0.5);
        let f = extend_geodesic_to_side(&t, polygon::lerp(p, m, 0.5)).unwrap();
        assert!(close(f.point, m, 1e-15) && !f.on_side);
        let f = extend_geodesic_to_side(&t, [0.3, 0.0]).unwrap();
        assert!(f.on_side && f.point == [0.3, 0.0]);
        let v = [0.1, 0.4];
        let f = extend_geodesic_to_side(&t, v).unwrap();
        assert!(orient(p, v, f.point).abs() < 1e-14);
        assert!(f.param > 0.0 && f.param < 1.0 && f.point[1].abs() < 1e-15);
        assert!(matches!(extend_geodesic_to_side(&t, p), Err(TriangulationError::PointIsApex(_))));
        assert!(matches!(extend_geodesic_to_side(&t, [2.0, 0.5]), Err(TriangulationError::NotInterior(_))));
    }

    #[test]
    fn empty_family_returns_parent() {
        let out = check(&parent(), &[]);
        assert_eq!(out.triangles.len(), 1);
        assert_eq!(out.owner, vec![Owner::Background]);
        assert!(out.certificate.is_empty());
    }

    #[test]
    fn interior_triangle() {
        let a = poly(&[[-0.2, 0.2], [0.3, 0.15], [0.05, 0.5]]);
        let out = check(&parent(), &[a]);
        assert!(out.owner.contains(&Owner::Family(0)));
    }

    #[test]
    fn two_disjoint_triangles() {
        let a = poly(&[[-0.6, 0.1], [-0.2, 0.15], [-0.35, 0.45]]);
        let b = poly(&[[0.2, 0.1], [0.7, 0.12], [0.3, 0.4]]);
        check(&parent(), &[a, b]);
    }

    #[test]
    fn touching_and_boundary_cases() {
        // Shares an edge with its neighbour, has an edge on [qr] and a vertex at q.
        let a = poly(&[[-1.0, 0.0], [-0.2, 0.0], [-0.3, 0.3]]);
        let b = poly(&[[-0.2, 0.0], [0.5, 0.0], [-0.3, 0.3]]);
        // Vertex on [pr].
        let c = poly(&[[0.6, 0.5], [0.3, 0.4], [0.5, 0.3]]);
        check(&parent(), &[a, b, c]);
    }

    #[test]
    fn apex_collinear_vertices_share_a_fan_segment() {
        let a = poly(&[[0.0, 0.2], [0.2, 0.3], [0.0, 0.6]]);
        let out = check(&parent(), &[a]);
        let fan_cuts = out.certificate.iter().filter(|c| c.from == [0.0, 1.0]).count();
        assert_eq!(fan_cuts, 2);
    }

    #[test]
    fn family_containing_apex() {
        let a = poly(&[[0.0, 1.0], [-0.2, 0.8], [0.2, 0.8]]);
        check(&parent(), &[a]);
    }

    #[test]
    fn curved_charts() {
        for k in [1.0, -1.0] {
            let t = ChartPolygon::new(vec![[0.0, 0.5], [-0.5, -0.3], [0.6, -0.2]], k).unwrap();
            let a = ChartPolygon::new(vec![[-0.1, 0.0], [0.2, 0.05], [0.0, 0.3], [-0.15, 0.2]], k).unwrap();
            check(&t, &[a]);
        }
    }

    #[test]
    fn invalid_families() {
        let t = parent();
        let out = poly(&[[1.0, 0.5], [2.0, 0.5], [1.5, 1.0]]);
        assert!(matches!(ve_refine(&t, &[out]), Err(TriangulationError::NotContained(0))));
        let a = poly(&[[-0.2, 0.2], [0.3, 0.15], [0.05, 0.5]]);
        let b = poly(&[[-0.1, 0.2], [0.4, 0.2], [0.1, 0.5]]);
        assert!(matches!(ve_refine(&t, &[a.clone(), b]), Err(TriangulationError::Overlap(0, 1))));
        let sq = poly(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert!(matches!(ve_refine(&sq, &[]), Err(TriangulationError::NotATriangle)));
        let other = ChartPolygon::new(a.vertices().to_vec(), 1.0).unwrap();
        assert!(matches!(ve_refine(&t, &[other]), Err(TriangulationError::KappaMismatch(..))));
    }

    #[test]
    fn owner_serializes_as_index_or_tag() {
        let j = serde_json::to_string(&[Owner::Family(2), Owner::Background]).unwrap();
        assert_eq!(j, r#"[2,"background"]"#);
        let back: Vec<Owner> = serde_json::from_str(&j).unwrap();
        assert_eq!(back, vec![Owner::Family(2), Owner::Background]);
    }

    #[test]
    fn excess_bound_examples() {
        let t = poly(&[[0.0, 0.3], [-0.3, 0.0], [0.36, 0.0]]);
        let b = family_excess_bound_demo(&t, &[], 1.0).unwrap();
        assert_eq!(b.family_excess, 0.0);
        assert!(b.parent_model_area_scaled > 0.0);
        let a = poly(&[[-0.06, 0.06], [0.09, 0.045], [0.015, 0.15]]);
        let b = family_excess_bound_demo(&t, &[a], 1.0).unwrap();
        assert!(b.family_excess.abs() < 1e-14);
        let ts = ChartPolygon::new(vec![[0.0, 0.5], [-0.5, -0.3], [0.6, -0.2]], 1.0).unwrap();
        let a = ChartPolygon::new(vec![[-0.1, 0.0], [0.2, 0.05], [0.0, 0.3]], 1.0).unwrap();
        let b = family_excess_bound_demo(&ts, std::slice::from_ref(&a), 1.0).unwrap();
        assert!((b.family_excess - a.model_area().unwrap()).abs() < 1e-12);
        assert!(b.family_excess <= b.parent_model_area_scaled);
    }
}
