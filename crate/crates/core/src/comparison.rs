//! Comparison triangles, model and upper angles, and sampled tests of the
//! CAT(κ) inequality.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::GeometryError;
use crate::model_space::{ChartPoint, ModelSpace, TriangleData};
use crate::triangulation::{clip_convex, signed_area, ChartPolygon, Pt, TriangulationError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComparisonError {
    #[error("perimeter {perimeter} is not below twice the model diameter {limit}")]
    Inadmissible { perimeter: f64, limit: f64 },
    #[error("distance oracle failed: {0}")]
    Oracle(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
}

/// A point on the boundary of a triangle: side `side` runs from vertex
/// `side` to vertex `side + 1 (mod 3)` and is parametrized by arclength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub side: usize,
    pub arclength: f64,
}

/// A triangle in some metric space, seen through its boundary.
pub trait AbstractTriangle: Sync {
    /// Length of side `i`, from vertex `i` to vertex `i + 1`.
    fn side_lengths(&self) -> [f64; 3];
    /// Ambient distance between two boundary points.
    fn boundary_distance(&self, x: BoundaryPoint, y: BoundaryPoint) -> Result<f64, ComparisonError>;
}

/// A geodesic triangle in a model space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelTriangle {
    space: ModelSpace,
    vertices: [ChartPoint; 3],
    sides: [f64; 3],
}

impl ModelTriangle {
    pub fn new(space: ModelSpace, vertices: [ChartPoint; 3]) -> Result<Self, ComparisonError> {
        let mut sides = [0.0; 3];
        for (i, s) in sides.iter_mut().enumerate() {
            *s = space.distance(vertices[i], vertices[(i + 1) % 3])?;
            if space.kappa() > 0.0 && *s >= space.diameter() {
                return Err(GeometryError::Antipodal.into());
            }
        }
        Ok(Self { space, vertices, sides })
    }

    /// The comparison triangle with side lengths `sides` in `M_κ`: vertex 0
    /// at the origin, vertex 1 on the positive x-axis, vertex 2 above it.
    pub fn comparison(kappa: f64, sides: [f64; 3]) -> Result<Self, ComparisonError> {
        let space = ModelSpace::new(kappa)?;
        let perimeter: f64 = sides.iter().sum();
        if kappa > 0.0 && perimeter >= 2.0 * space.diameter() {
            return Err(ComparisonError::Inadmissible { perimeter, limit: 2.0 * space.diameter() });
        }
        let theta = space.angle_from_sides(sides[0], sides[2], sides[1])?.value;
        let vertices = [ChartPoint::ORIGIN, space.polar_point(sides[0], 0.0), space.polar_point(sides[2], theta)];
        Ok(Self { space, vertices, sides })
    }

    pub fn space(&self) -> ModelSpace {
        self.space
    }

    pub fn vertices(&self) -> [ChartPoint; 3] {
        self.vertices
    }

    pub fn sides(&self) -> [f64; 3] {
        self.sides
    }

    /// Chart position of a boundary point.
    pub fn point(&self, x: BoundaryPoint) -> Result<ChartPoint, ComparisonError> {
        if x.side > 2 {
            return Err(ComparisonError::Precondition(format!("side index {} out of range", x.side)));
        }
        let (a, b) = (self.vertices[x.side], self.vertices[(x.side + 1) % 3]);
        let len = self.sides[x.side];
        Ok(self.space.geodesic_point(a, b, x.arclength.min(len))?)
    }

    pub fn triangle_data(&self) -> Result<TriangleData, GeometryError> {
        self.space.triangle_data(self.sides[1], self.sides[2], self.sides[0])
    }
}

impl AbstractTriangle for ModelTriangle {
    fn side_lengths(&self) -> [f64; 3] {
        self.sides
    }

    fn boundary_distance(&self, x: BoundaryPoint, y: BoundaryPoint) -> Result<f64, ComparisonError> {
        Ok(self.space.distance(self.point(x)?, self.point(y)?)?)
    }
}

/// A triangle given by side lengths and a distance oracle.
pub struct OracleTriangle<F> {
    sides: [f64; 3],
    oracle: F,
}

impl<F> OracleTriangle<F>
where
    F: Fn(BoundaryPoint, BoundaryPoint) -> Result<f64, ComparisonError> + Sync,
{
    pub fn new(sides: [f64; 3], oracle: F) -> Self {
        Self { sides, oracle }
    }
}

impl<F> AbstractTriangle for OracleTriangle<F>
where
    F: Fn(BoundaryPoint, BoundaryPoint) -> Result<f64, ComparisonError> + Sync,
{
    fn side_lengths(&self) -> [f64; 3] {
        self.sides
    }

    fn boundary_distance(&self, x: BoundaryPoint, y: BoundaryPoint) -> Result<f64, ComparisonError> {
        (self.oracle)(x, y)
    }
}

/// Largest sampled value of `d(x, y) − d̄(x̄, ȳ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    /// Positive when the CAT(κ) inequality fails at some sampled pair.
    pub max_violation: f64,
    pub arg_pair: (BoundaryPoint, BoundaryPoint),
    pub samples_used: usize,
}

/// Empirical bi-Lipschitz constant of the canonical map to the Euclidean
/// comparison triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub bilipschitz: f64,
    /// Longest side over shortest side.
    pub edge_ratio_max: f64,
    pub samples_used: usize,
}

/// Preconditions for [`canonical_distortion`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionLimits {
    /// Smallest allowed angle of the Euclidean comparison triangle.
    pub min_angle: f64,
    pub max_perimeter: f64,
}

impl Default for DistortionLimits {
    fn default() -> Self {
        Self { min_angle: 1e-3, max_perimeter: f64::INFINITY }
    }
}

struct Sample {
    point: BoundaryPoint,
    /// Bit `i` is set when the point lies on side `i`.
    sides: u8,
}

fn boundary_samples(sides: [f64; 3], grid_n: usize) -> Vec<Sample> {
    let mut out = Vec::with_capacity(3 * grid_n);
    for (i, &len) in sides.iter().enumerate() {
        for j in 0..grid_n {
            let mut mask = 1u8 << i;
            if j == 0 {
                mask |= 1 << ((i + 2) % 3);
            }
            if j == grid_n - 1 {
                mask |= 1 << ((i + 1) % 3);
            }
            let arclength = if j == grid_n - 1 { len } else { len * j as f64 / (grid_n - 1) as f64 };
            out.push(Sample { point: BoundaryPoint { side: i, arclength }, sides: mask });
        }
    }
    out
}

type Best = Option<(f64, usize, usize)>;

fn better(a: Best, b: Best) -> Best {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

/// Maximizes `score(i, j)` over pairs of samples on different sides.
fn max_over_pairs<S>(samples: &[Sample], score: S) -> Result<(Best, usize), ComparisonError>
where
    S: Fn(usize, usize) -> Result<Option<f64>, ComparisonError> + Sync,
{
    let rows: Vec<(Best, usize)> = (0..samples.len())
        .into_par_iter()
        .map(|i| {
            let mut best: Best = None;
            let mut used = 0;
            for j in i + 1..samples.len() {
                if samples[i].sides & samples[j].sides != 0 {
                    continue;
                }
                if let Some(v) = score(i, j)? {
                    used += 1;
                    best = better(best, Some((v, i, j)));
                }
            }
            Ok((best, used))
        })
        .collect::<Result<_, ComparisonError>>()?;
    Ok(rows.into_iter().fold((None, 0), |(b, n), (r, m)| (better(b, r), n + m)))
}

/// Samples the CAT(κ) inequality on pairs of boundary points lying on
/// different sides (pairs on a common side always agree).
pub fn cat_test<T: AbstractTriangle + ?Sized>(t: &T, kappa: f64, grid_n: usize) -> Result<ViolationReport, ComparisonError> {
    if grid_n < 2 {
        return Err(ComparisonError::Precondition("grid_n must be at least 2".into()));
    }
    let cmp = ModelTriangle::comparison(kappa, t.side_lengths())?;
    let samples = boundary_samples(t.side_lengths(), grid_n);
    let bars: Vec<ChartPoint> = samples.iter().map(|s| cmp.point(s.point)).collect::<Result<_, _>>()?;
    let space = cmp.space();
    let (best, used) = max_over_pairs(&samples, |i, j| {
        let d = t.boundary_distance(samples[i].point, samples[j].point)?;
        let dbar = space.distance(bars[i], bars[j])?;
        Ok(Some(d - dbar))
    })?;
    let (v, i, j) = best.ok_or_else(|| ComparisonError::Precondition("no sample pairs".into()))?;
    Ok(ViolationReport { max_violation: v, arg_pair: (samples[i].point, samples[j].point), samples_used: used })
}

/// Empirical bi-Lipschitz constant of `x ↦ x̄` into the Euclidean comparison
/// triangle, over sampled boundary pairs.
pub fn canonical_distortion<T: AbstractTriangle + ?Sized>(
    t: &T,
    grid_n: usize,
    limits: DistortionLimits,
) -> Result<DistortionReport, ComparisonError> {
    if grid_n < 2 {
        return Err(ComparisonError::Precondition("grid_n must be at least 2".into()));
    }
    let sides = t.side_lengths();
    let perimeter: f64 = sides.iter().sum();
    if perimeter > limits.max_perimeter {
        return Err(ComparisonError::Precondition(format!("perimeter {perimeter} exceeds {}", limits.max_perimeter)));
    }
    let flat = ModelSpace::new(0.0)?;
    let data = flat.triangle_data(sides[1], sides[2], sides[0])?;
    let min_angle = data.alpha.min(data.beta).min(data.gamma);
    if data.degenerate || min_angle < limits.min_angle {
        return Err(ComparisonError::Precondition(format!("comparison angle {min_angle} below {}", limits.min_angle)));
    }
    let cmp = ModelTriangle::comparison(0.0, sides)?;
    let samples = boundary_samples(sides, grid_n);
    let bars: Vec<ChartPoint> = samples.iter().map(|s| cmp.point(s.point)).collect::<Result<_, _>>()?;
    let (best, used) = max_over_pairs(&samples, |i, j| {
        let d = t.boundary_distance(samples[i].point, samples[j].point)?;
        let dbar = flat.distance(bars[i], bars[j])?;
        if d <= 0.0 || dbar <= 0.0 {
            return Ok(None);
        }
        Ok(Some((d / dbar).max(dbar / d)))
    })?;
    let longest = sides.iter().cloned().fold(0.0, f64::max);
    let shortest = sides.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(DistortionReport { bilipschitz: best.map_or(1.0, |b| b.0.max(1.0)), edge_ratio_max: longest / shortest, samples_used: used })
}

/// Angle at `p` of the comparison triangle with the given side lengths.
pub fn model_angle(kappa: f64, d_pq: f64, d_pr: f64, d_qr: f64) -> Result<f64, ComparisonError> {
    Ok(ModelSpace::new(kappa)?.angle_from_sides(d_pq, d_pr, d_qr)?.value)
}

/// Estimates the upper angle at `p` between `[pq]` and `[pr]` from Euclidean
/// model angles of shrinking triangles `(p, q_k, r_k)`, where `q_k`, `r_k`
/// sit at distance `shrinkᵏ·d` along the geodesics. Returns the maximum over
/// the last ten iterates.
pub fn upper_angle_estimate(
    space: ModelSpace,
    p: ChartPoint,
    q: ChartPoint,
    r: ChartPoint,
    shrink: f64,
    steps: usize,
) -> Result<f64, ComparisonError> {
    if !(shrink > 0.0 && shrink < 1.0) || steps == 0 {
        return Err(ComparisonError::Precondition("shrink must be in (0, 1) and steps positive".into()));
    }
    // Work with p at the origin so that tiny iterates keep their precision.
    let (q, r) = (space.move_to_origin(p, q), space.move_to_origin(p, r));
    let o = ChartPoint::ORIGIN;
    let (dq, dr) = (space.distance(o, q)?, space.distance(o, r)?);
    if dq == 0.0 || dr == 0.0 {
        return Err(ComparisonError::Precondition("q or r coincides with p".into()));
    }
    let mut tail = Vec::with_capacity(10);
    let mut f = 1.0;
    for k in 1..=steps {
        f *= shrink;
        let qk = space.geodesic_point(o, q, f * dq)?;
        let rk = space.geodesic_point(o, r, f * dr)?;
        let (a, b, c) = (space.distance(o, qk)?, space.distance(o, rk)?, space.distance(qk, rk)?);
        let angle = if c == 0.0 { 0.0 } else { model_angle(0.0, a, b, c)? };
        if k + 10 > steps {
            tail.push(angle);
        }
    }
    Ok(tail.into_iter().fold(0.0, f64::max))
}

pub fn excess(t: &TriangleData) -> f64 {
    t.excess
}

pub fn family_excess(ts: &[TriangleData]) -> f64 {
    ts.iter().map(excess).sum()
}

/// Excess and comparison-area bookkeeping for one subdivision of a triangle
/// `(p, q, r)` at a point `s` of `[qr]` into `(p, q, s)` and `(p, s, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionRecord {
    pub excess_parent: f64,
    pub excess_children_sum: f64,
    pub model_area_parent_at_kappa: f64,
    pub model_area_children_sum_at_kappa: f64,
}

/// Measures excess in the ambient space and comparison areas at
/// `target_kappa` for the subdivision of `t = (p, q, r)` at `s ∈ [qr]`.
pub fn subdivision_check(ambient: ModelSpace, t: [ChartPoint; 3], s: ChartPoint, target_kappa: f64) -> Result<SubdivisionRecord, ComparisonError> {
    let [p, q, r] = t;
    let d = |a, b| ambient.distance(a, b);
    let (pq, pr, qr) = (d(p, q)?, d(p, r)?, d(q, r)?);
    let (ps, qs, rs) = (d(p, s)?, d(q, s)?, d(r, s)?);
    if qs <= 1e-12 * qr || rs <= 1e-12 * qr || (qs + rs - qr).abs() > 1e-9 * qr {
        return Err(ComparisonError::Precondition("s must lie strictly inside [qr]".into()));
    }
    let target = ModelSpace::new(target_kappa)?;
    let parent = ambient.triangle_data(pq, pr, qr)?;
    let c1 = ambient.triangle_data(pq, ps, qs)?;
    let c2 = ambient.triangle_data(pr, ps, rs)?;
    let area = |a, b, c| -> Result<f64, ComparisonError> {
        let perimeter = a + b + c;
        if target_kappa > 0.0 && perimeter >= 2.0 * target.diameter() {
            return Err(ComparisonError::Inadmissible { perimeter, limit: 2.0 * target.diameter() });
        }
        Ok(target.triangle_data(a, b, c)?.area)
    };
    Ok(SubdivisionRecord {
        excess_parent: parent.excess,
        excess_children_sum: c1.excess + c2.excess,
        model_area_parent_at_kappa: area(pq, pr, qr)?,
        model_area_children_sum_at_kappa: area(pq, ps, qs)? + area(pr, ps, rs)?,
    })
}

/// Whether the comparison children fit inside the comparison parent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub contained: bool,
    /// Model area of the intersection of the two placed children.
    pub overlap_area: f64,
    pub parent_area: f64,
}

impl FitRecord {
    /// Overlap below `1e-10` of the parent's area.
    pub fn overlap_negligible(&self) -> bool {
        self.overlap_area <= 1e-10 * self.parent_area
    }
}

/// Places the comparison children `(p̄, q̄, ȳ)` and `(p̄, z̄, r̄)` against the
/// sides `[p̄q̄]` and `[p̄r̄]` of the comparison parent in `M_κ` and reports
/// containment and mutual overlap.
///
/// `parent` holds `[|pq|, |pr|, |qr|]` and `children` holds
/// `[|ps|, |qs|, |rs|]`.
pub fn fit_comparison_children(kappa: f64, parent: [f64; 3], children: [f64; 3]) -> Result<FitRecord, ComparisonError> {
    let space = ModelSpace::new(kappa)?;
    let [pq, pr, qr] = parent;
    let [ps, qs, rs] = children;
    for (a, b, c) in [(pq, pr, qr), (pq, ps, qs), (pr, ps, rs)] {
        let perimeter = a + b + c;
        if kappa > 0.0 && perimeter >= 2.0 * space.diameter() {
            return Err(ComparisonError::Inadmissible { perimeter, limit: 2.0 * space.diameter() });
        }
    }
    let alpha = space.angle_from_sides(pq, pr, qr)?.value;
    let alpha1 = space.angle_from_sides(pq, ps, qs)?.value;
    let alpha2 = space.angle_from_sides(pr, ps, rs)?.value;
    let p = ChartPoint::ORIGIN;
    let q = space.polar_point(pq, 0.0);
    let r = space.polar_point(pr, alpha);
    let y = space.polar_point(ps, alpha1);
    let z = space.polar_point(ps, alpha - alpha2);

    let mut pts = [p, q, r, y, z];
    if kappa > 0.0 {
        let c = space.spherical_centroid(&pts[..3]).ok_or_else(|| ComparisonError::Precondition("comparison parent has no centre".into()))?;
        for x in pts.iter_mut() {
            *x = space.move_to_origin(c, *x);
        }
    }
    let proj: Vec<Pt> = pts.iter().map(|&x| space.to_projective(x).map(|u| [u.0, u.1])).collect::<Result<_, _>>()?;
    let parent_poly = ChartPolygon::triangle(proj[0], proj[1], proj[2], kappa)?;
    let tol = 1e-10 * parent_poly.scale();
    let contained = [proj[3], proj[4]].iter().all(|&v| parent_poly.contains(v, tol));
    let c1 = ChartPolygon::triangle(proj[0], proj[1], proj[3], kappa)?;
    let c2 = ChartPolygon::triangle(proj[0], proj[4], proj[2], kappa)?;
    let clipped = clip_convex(c1.vertices(), c2.vertices());
    let scale = parent_poly.scale();
    let overlap_area = if clipped.len() >= 3 && signed_area(&clipped) > 1e-15 * scale * scale {
        ChartPolygon::new(clipped, kappa).map_or(Ok(0.0), |poly| poly.model_area())?
    } else {
        0.0
    };
    Ok(FitRecord { contained, overlap_area, parent_area: space.triangle_data(pq, pr, qr)?.area })
}

/// Angle sum of the comparison parent minus π; exposed for bound checks.
pub fn comparison_excess(kappa: f64, sides: [f64; 3]) -> Result<f64, ComparisonError> {
    let t = ModelSpace::new(kappa)?.triangle_data(sides[0], sides[1], sides[2])?;
    Ok(t.alpha + t.beta + t.gamma - PI)
}
