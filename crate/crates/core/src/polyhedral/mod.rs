//! Closed cone-metric surfaces glued from model triangles.
//!
//! Each face is a triangle of some model space `M_κ` given by its three side
//! lengths. The cone angle at a vertex is the sum of the face corners there,
//! and the curvature measure assigns `2π − angle` to each vertex plus
//! `κ·area` to each face.

mod refine;
mod region;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::GeometryError;
use crate::model_space::{ModelSpace, TriangleData};

pub use refine::{edge_graph_distance, refine_midpoint, refined_distance, DistanceSeries, MAX_REFINED_FACES};
pub use region::{gauss_bonnet_region, PolygonRegion, RegionGaussBonnet};

/// Vertices with `|angle − 2π|` below this are smooth.
pub const SMOOTH_TOL: f64 = 1e-9;

/// Relative tolerance for matching an edge length across its two faces.
pub const LENGTH_MATCH_TOL: f64 = 1e-12;

/// One face as read from a surface file. `len[i]` is the length of the edge
/// opposite `v[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceSpec {
    pub v: [usize; 3],
    pub len: [f64; 3],
    pub kappa: f64,
}

impl FaceSpec {
    /// Length of the edge between local corners `i` and `j`.
    pub fn edge_length(&self, i: usize, j: usize) -> f64 {
        self.len[3 - i - j]
    }
}

/// A structural problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    Empty,
    RepeatedVertex { face: usize },
    InadmissibleFace { face: usize, reason: String },
    OpenEdge { u: usize, v: usize },
    NonManifoldEdge { u: usize, v: usize, faces: usize },
    LengthMismatch { u: usize, v: usize, lengths: Vec<f64> },
    UnusedVertex { v: usize },
    NonManifoldVertex { v: usize },
    Disconnected { components: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "surface has no faces"),
            Violation::RepeatedVertex { face } => write!(f, "face {face} repeats a vertex"),
            Violation::InadmissibleFace { face, reason } => write!(f, "face {face} is not a model triangle: {reason}"),
            Violation::OpenEdge { u, v } => write!(f, "edge {u}-{v} has only one face"),
            Violation::NonManifoldEdge { u, v, faces } => write!(f, "edge {u}-{v} has {faces} faces"),
            Violation::LengthMismatch { u, v, lengths } => write!(f, "edge {u}-{v} has mismatched lengths {lengths:?}"),
            Violation::UnusedVertex { v } => write!(f, "vertex {v} is not used by any face"),
            Violation::NonManifoldVertex { v } => write!(f, "the link of vertex {v} is not a single cycle"),
            Violation::Disconnected { components } => write!(f, "surface has {components} components"),
        }
    }
}

fn join(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("invalid surface: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("vertices {0} and {1} are not connected")]
    Disconnected(usize, usize),
    #[error("refinement would create {faces} faces, above the cap of {cap}")]
    ResourceCap { faces: usize, cap: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// How a surface was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Validated,
    Glued,
    Refined { level: u32 },
}

/// An undirected edge with its length and incident faces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub length: f64,
    /// `(face, local corner of u, local corner of v)` for each incident face.
    pub faces: Vec<(usize, usize, usize)>,
}

/// A validated closed surface. Immutable; refinement returns a new one.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySurface {
    vertex_count: usize,
    faces: Vec<FaceSpec>,
    triangles: Vec<TriangleData>,
    edges: BTreeMap<(usize, usize), Edge>,
    /// `(face, local corner)` pairs at each vertex.
    corners: Vec<Vec<(usize, usize)>>,
    warnings: Vec<String>,
    provenance: Provenance,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Checks a raw face list and builds the surface, or lists every violation.
pub fn validate(faces: &[FaceSpec]) -> Result<PolySurface, SurfaceError> {
    let mut violations = Vec::new();
    if faces.is_empty() {
        return Err(SurfaceError::Invalid(vec![Violation::Empty]));
    }
    let vertex_count = faces.iter().flat_map(|f| f.v).max().unwrap() + 1;
    let mut triangles = Vec::with_capacity(faces.len());
    for (i, f) in faces.iter().enumerate() {
        if f.v[0] == f.v[1] || f.v[1] == f.v[2] || f.v[0] == f.v[2] {
            violations.push(Violation::RepeatedVertex { face: i });
        }
        let data = ModelSpace::new(f.kappa).and_then(|s| {
            let t = s.triangle_data(f.len[0], f.len[1], f.len[2])?;
            if t.degenerate {
                return Err(GeometryError::TriangleInequality { a: f.len[0], b: f.len[1], c: f.len[2] });
            }
            Ok(t)
        });
        match data {
            Ok(t) => triangles.push(t),
            Err(e) => violations.push(Violation::InadmissibleFace { face: i, reason: e.to_string() }),
        }
    }
    if !violations.is_empty() {
        return Err(SurfaceError::Invalid(violations));
    }

    let mut edges: BTreeMap<(usize, usize), Edge> = BTreeMap::new();
    let mut corners = vec![Vec::new(); vertex_count];
    for (fi, f) in faces.iter().enumerate() {
        for i in 0..3 {
            corners[f.v[i]].push((fi, i));
            let j = (i + 1) % 3;
            let k = key(f.v[i], f.v[j]);
            let (li, lj) = if f.v[i] == k.0 { (i, j) } else { (j, i) };
            let e = edges.entry(k).or_insert(Edge { length: f.edge_length(i, j), faces: Vec::new() });
            e.faces.push((fi, li, lj));
        }
    }
    for (&(u, v), e) in &edges {
        match e.faces.len() {
            1 => violations.push(Violation::OpenEdge { u, v }),
            2 => {}
            n => violations.push(Violation::NonManifoldEdge { u, v, faces: n }),
        }
        let lengths: Vec<f64> = e.faces.iter().map(|&(f, a, b)| faces[f].edge_length(a, b)).collect();
        let reference = lengths[0];
        if lengths.iter().any(|&l| (l - reference).abs() > LENGTH_MATCH_TOL * reference.max(1.0)) {
            violations.push(Violation::LengthMismatch { u, v, lengths });
        }
    }
    for (v, cs) in corners.iter().enumerate() {
        if cs.is_empty() {
            violations.push(Violation::UnusedVertex { v });
        } else if !link_is_cycle(faces, v, cs) {
            violations.push(Violation::NonManifoldVertex { v });
        }
    }
    let components = count_components(vertex_count, edges.keys());
    if components > 1 {
        violations.push(Violation::Disconnected { components });
    }
    if !violations.is_empty() {
        return Err(SurfaceError::Invalid(violations));
    }

    let mut warnings = Vec::new();
    let kappas: BTreeSet<u64> = faces.iter().map(|f| f.kappa.to_bits()).collect();
    if kappas.len() > 1 {
        warnings.push(format!("faces use {} different curvature values", kappas.len()));
    }
    Ok(PolySurface { vertex_count, faces: faces.to_vec(), triangles, edges, corners, warnings, provenance: Provenance::Validated })
}

/// The named entry point for building a surface by gluing model triangles
/// along an edge graph. Same checks as [`validate`].
pub fn glue_from_edge_graph(faces: &[FaceSpec]) -> Result<PolySurface, SurfaceError> {
    let mut s = validate(faces)?;
    s.provenance = Provenance::Glued;
    Ok(s)
}

fn link_is_cycle(faces: &[FaceSpec], v: usize, cs: &[(usize, usize)]) -> bool {
    // Each incident face contributes the link edge between its other corners.
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(f, i) in cs {
        let a = faces[f].v[(i + 1) % 3];
        let b = faces[f].v[(i + 2) % 3];
        if a == v || b == v {
            return false;
        }
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    if adj.values().any(|n| n.len() != 2) {
        return false;
    }
    let start = *adj.keys().next().unwrap();
    let (mut prev, mut cur, mut steps) = (start, adj[&start][0], 1);
    while cur != start {
        let n = &adj[&cur];
        let next = if n[0] == prev { n[1] } else { n[0] };
        prev = cur;
        cur = next;
        steps += 1;
        if steps > adj.len() {
            return false;
        }
    }
    steps == adj.len()
}

fn count_components<'a>(n: usize, edges: impl Iterator<Item = &'a (usize, usize)>) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut count = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            count -= 1;
        }
    }
    count
}

/// Cone angles and the curvature measure of a surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub cone_angles: Vec<f64>,
    /// `2π −` cone angle at each vertex.
    pub omega: Vec<f64>,
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// `Σ_f κ_f·|f|`.
    pub face_curvature: f64,
    pub chi: i64,
    /// `Σ ω + Σ κ_f|f| − 2πχ`.
    pub gauss_bonnet_defect: f64,
}

impl CurvatureReport {
    pub fn total_vertex_curvature(&self) -> f64 {
        self.omega.iter().sum()
    }
}

impl PolySurface {
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn faces(&self) -> &[FaceSpec] {
        &self.faces
    }

    pub fn face_data(&self) -> &[TriangleData] {
        &self.triangles
    }

    pub fn edges(&self) -> &BTreeMap<(usize, usize), Edge> {
        &self.edges
    }

    pub fn edge(&self, u: usize, v: usize) -> Option<&Edge> {
        self.edges.get(&key(u, v))
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Largest face curvature.
    pub fn max_kappa(&self) -> f64 {
        self.faces.iter().map(|f| f.kappa).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(face, local corner)` pairs at `v`.
    pub fn corners_at(&self, v: usize) -> Result<&[(usize, usize)], SurfaceError> {
        self.corners.get(v).map(|c| c.as_slice()).ok_or(SurfaceError::UnknownVertex(v))
    }

    /// Corner angle of `face` at local corner `i`.
    pub fn corner_angle(&self, face: usize, i: usize) -> f64 {
        let t = &self.triangles[face];
        [t.alpha, t.beta, t.gamma][i]
    }

    /// Sum of the face angles at `v`.
    pub fn cone_angle(&self, v: usize) -> Result<f64, SurfaceError> {
        Ok(self.corners_at(v)?.iter().map(|&(f, i)| self.corner_angle(f, i)).sum())
    }

    /// Vertex id assigned by [`refine_midpoint`] to the midpoint of `u-v`.
    pub fn midpoint_id(&self, u: usize, v: usize) -> Option<usize> {
        let k = key(u, v);
        self.edges.range(..k).count().checked_add(self.vertex_count).filter(|_| self.edges.contains_key(&k))
    }

    /// Neighbours of `v` with the connecting edge length.
    pub fn neighbours(&self, v: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        if let Some(cs) = self.corners.get(v) {
            for &(f, i) in cs {
                for j in [(i + 1) % 3, (i + 2) % 3] {
                    let w = self.faces[f].v[j];
                    if !out.iter().any(|&(x, _)| x == w) {
                        out.push((w, self.edges[&key(v, w)].length));
                    }
                }
            }
        }
        out
    }

    pub fn curvature_report(&self) -> CurvatureReport {
        let cone_angles: Vec<f64> = (0..self.vertex_count).map(|v| self.cone_angle(v).unwrap()).collect();
        let omega: Vec<f64> = cone_angles.iter().map(|a| TAU - a).collect();
        let omega_plus = omega.iter().filter(|&&w| w > 0.0).sum();
        let omega_minus = -omega.iter().filter(|&&w| w < 0.0).sum::<f64>();
        let face_curvature: f64 = self.triangles.iter().map(|t| t.kappa * t.area).sum();
        let chi = self.euler_characteristic();
        let gauss_bonnet_defect = omega.iter().sum::<f64>() + face_curvature - TAU * chi as f64;
        CurvatureReport { cone_angles, omega, omega_plus, omega_minus, face_curvature, chi, gauss_bonnet_defect }
    }

    /// Vertices whose cone angle differs from `2π` by at least [`SMOOTH_TOL`].
    pub fn conical_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count).filter(|&v| (self.cone_angle(v).unwrap() - TAU).abs() >= SMOOTH_TOL).collect()
    }
}
