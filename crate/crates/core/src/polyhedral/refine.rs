//! Midpoint subdivision and edge-graph distances.

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};

use super::{validate, FaceSpec, PolySurface, Provenance, SurfaceError};
use crate::model_space::ModelSpace;

/// Largest face count `refined_distance` will build.
pub const MAX_REFINED_FACES: usize = 1 << 22;

/// Splits every face into four through its edge midpoints.
///
/// Original vertices keep their ids; the midpoint of the `k`-th edge in
/// sorted order gets id `V + k`. Chords are computed in each face's own
/// model space.
pub fn refine_midpoint(surface: &PolySurface) -> Result<PolySurface, SurfaceError> {
    let n = surface.vertex_count;
    let index: std::collections::BTreeMap<(usize, usize), usize> = surface.edges.keys().enumerate().map(|(i, &k)| (k, n + i)).collect();
    let mut faces = Vec::with_capacity(4 * surface.faces.len());
    for (fi, f) in surface.faces.iter().enumerate() {
        let space = ModelSpace::new(f.kappa)?;
        let t = &surface.triangles[fi];
        let angle = [t.alpha, t.beta, t.gamma];
        // Half of the canonical edge length, so both sides agree exactly.
        let half = |i: usize, j: usize| surface.edges[&super::key(f.v[i], f.v[j])].length / 2.0;
        let mid = |i: usize, j: usize| index[&super::key(f.v[i], f.v[j])];
        // m[i] is the midpoint of the edge opposite corner i.
        let m = [mid(1, 2), mid(2, 0), mid(0, 1)];
        // chord[i] joins the two midpoints adjacent to corner i.
        let mut chord = [0.0; 3];
        for (i, ch) in chord.iter_mut().enumerate() {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            *ch = space.side_from_angle(half(i, j), half(i, k), angle[i])?;
        }
        for (i, &ch) in chord.iter().enumerate() {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            // Corner i with the midpoints of edges i-j and i-k.
            faces.push(FaceSpec { v: [f.v[i], m[k], m[j]], len: [ch, half(i, k), half(i, j)], kappa: f.kappa });
        }
        faces.push(FaceSpec { v: m, len: chord, kappa: f.kappa });
    }
    let mut out = validate(&faces)?;
    out.provenance = Provenance::Refined {
        level: match surface.provenance {
            Provenance::Refined { level } => level + 1,
            _ => 1,
        },
    };
    Ok(out)
}

fn graph(surface: &PolySurface) -> UnGraph<(), f64> {
    let mut g = UnGraph::with_capacity(surface.vertex_count, surface.edges.len());
    for _ in 0..surface.vertex_count {
        g.add_node(());
    }
    for (&(a, b), e) in &surface.edges {
        g.add_edge(NodeIndex::new(a), NodeIndex::new(b), e.length);
    }
    g
}

/// Shortest path length in the weighted edge graph.
pub fn edge_graph_distance(surface: &PolySurface, u: usize, v: usize) -> Result<f64, SurfaceError> {
    for x in [u, v] {
        if x >= surface.vertex_count {
            return Err(SurfaceError::UnknownVertex(x));
        }
    }
    if u == v {
        return Ok(0.0);
    }
    let g = graph(surface);
    let d = dijkstra(&g, NodeIndex::new(u), Some(NodeIndex::new(v)), |e| *e.weight());
    d.get(&NodeIndex::new(v)).copied().ok_or(SurfaceError::Disconnected(u, v))
}

/// Edge-graph distances at successive refinement levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSeries {
    /// `distances[l]` is the distance after `l` refinements.
    pub distances: Vec<f64>,
    /// `gaps[l] = distances[l] − distances[l + 1]`.
    pub gaps: Vec<f64>,
}

impl DistanceSeries {
    pub fn last(&self) -> f64 {
        *self.distances.last().unwrap()
    }

    pub fn final_gap(&self) -> Option<f64> {
        self.gaps.last().copied()
    }
}

/// Distance between `u` and `v` after each of `level` midpoint refinements.
pub fn refined_distance(surface: &PolySurface, u: usize, v: usize, level: u32) -> Result<DistanceSeries, SurfaceError> {
    let faces = surface.faces.len().saturating_mul(4usize.saturating_pow(level));
    if faces > MAX_REFINED_FACES {
        return Err(SurfaceError::ResourceCap { faces, cap: MAX_REFINED_FACES });
    }
    let mut distances = vec![edge_graph_distance(surface, u, v)?];
    let mut current = surface.clone();
    for _ in 0..level {
        current = refine_midpoint(&current)?;
        distances.push(edge_graph_distance(&current, u, v)?);
    }
    let gaps = distances.windows(2).map(|w| w[0] - w[1]).collect();
    Ok(DistanceSeries { distances, gaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    #[test]
    fn flat_face_splits_into_halves() {
        let s = validate(&corpus::tetrahedron(1.0)).unwrap();
        let r = refine_midpoint(&s).unwrap();
        assert_eq!(r.faces().len(), 16);
        assert_eq!(r.vertex_count(), 10);
        for f in r.faces() {
            for l in f.len {
                assert!((l - 0.5).abs() < 1e-15);
            }
        }
        assert_eq!(r.provenance(), Provenance::Refined { level: 1 });
        assert_eq!(refine_midpoint(&r).unwrap().provenance(), Provenance::Refined { level: 2 });
    }

    #[test]
    fn octant_chord_is_a_third_of_pi() {
        let s = validate(&corpus::octant_octahedron()).unwrap();
        let r = refine_midpoint(&s).unwrap();
        let inner = &r.faces()[3];
        for l in inner.len {
            assert!((l - PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_preserves_curvature() {
        for (name, faces) in corpus::surfaces(11) {
            let s = validate(&faces).unwrap();
            let r = refine_midpoint(&s).unwrap();
            let (a, b) = (s.curvature_report(), r.curvature_report());
            for v in 0..s.vertex_count() {
                assert!((a.cone_angles[v] - b.cone_angles[v]).abs() < 1e-12, "{name} vertex {v}");
            }
            for v in s.vertex_count()..r.vertex_count() {
                assert!((b.cone_angles[v] - TAU).abs() < 1e-9, "{name} midpoint {v}");
            }
            assert!((a.total_vertex_curvature() - b.total_vertex_curvature()).abs() < 1e-9, "{name}");
            assert!((a.face_curvature - b.face_curvature).abs() < 1e-8, "{name}");
            assert_eq!(b.chi, a.chi);
        }
    }

    #[test]
    fn graph_distance_examples() {
        let s = validate(&corpus::octant_octahedron()).unwrap();
        assert_eq!(edge_graph_distance(&s, 0, 0).unwrap(), 0.0);
        assert!((edge_graph_distance(&s, 0, 2).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((edge_graph_distance(&s, 0, 1).unwrap() - PI).abs() < 1e-12);
        assert!(matches!(edge_graph_distance(&s, 0, 6), Err(SurfaceError::UnknownVertex(6))));
        let series = refined_distance(&s, 0, 1, 3).unwrap();
        for d in &series.distances {
            assert!((d - PI).abs() < 1e-9);
        }
    }

    #[test]
    fn tetrahedron_cross_distance_is_monotone() {
        let s = validate(&corpus::tetrahedron(1.0)).unwrap();
        let a = s.midpoint_id(0, 1).unwrap();
        let b = s.midpoint_id(2, 3).unwrap();
        let r = refine_midpoint(&s).unwrap();
        let series = refined_distance(&r, a, b, 3).unwrap();
        // Unfolding two faces across a shared edge gives 1.
        assert!((series.distances[0] - 1.0).abs() < 1e-12);
        for g in &series.gaps {
            assert!(*g >= -1e-12);
        }
        assert!(series.last() >= 1.0 - 1e-12);
    }

    #[test]
    fn vertex_to_far_point_converges_from_above() {
        let s = validate(&corpus::tetrahedron(1.0)).unwrap();
        let m = s.midpoint_id(1, 2).unwrap();
        let r = refine_midpoint(&s).unwrap();
        // From the midpoint of 1-2 to the far corner: the altitude sqrt(3)/2.
        let series = refined_distance(&r, m, 0, 4).unwrap();
        assert!((series.distances[0] - 1.0).abs() < 1e-12);
        for g in &series.gaps {
            assert!(*g >= -1e-12);
        }
        assert!(series.last() >= 3f64.sqrt() / 2.0 - 1e-12);
    }

    #[test]
    fn resource_cap() {
        let s = validate(&corpus::tetrahedron(1.0)).unwrap();
        assert!(matches!(refined_distance(&s, 0, 1, 11), Err(SurfaceError::ResourceCap { .. })));
    }
}
