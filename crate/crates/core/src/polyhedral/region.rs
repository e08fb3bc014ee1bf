//! Disk regions made of whole faces and their Gauss–Bonnet balance.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{key, PolySurface, SurfaceError};

/// A disk bounded by a simple closed edge walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonRegion {
    /// Boundary vertices in walk order; the walk closes back to the first.
    pub boundary: Vec<usize>,
    pub faces: Vec<usize>,
    /// Interior-side angle at each boundary vertex.
    pub corner_angles: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionGaussBonnet {
    pub tau: f64,
    pub omega_interior: f64,
    pub defect: f64,
}

impl PolygonRegion {
    /// Builds the region enclosed by `faces`, which must form a disk.
    pub fn from_faces(surface: &PolySurface, faces: &[usize]) -> Result<Self, SurfaceError> {
        let set: BTreeSet<usize> = faces.iter().copied().collect();
        if set.is_empty() {
            return Err(SurfaceError::InvalidRegion("no faces".into()));
        }
        if let Some(&f) = set.iter().find(|&&f| f >= surface.faces.len()) {
            return Err(SurfaceError::InvalidRegion(format!("unknown face {f}")));
        }
        let mut edge_use: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut verts = BTreeSet::new();
        for &f in &set {
            let v = surface.faces[f].v;
            verts.extend(v);
            for i in 0..3 {
                *edge_use.entry(key(v[i], v[(i + 1) % 3])).or_default() += 1;
            }
        }
        let chi = verts.len() as i64 - edge_use.len() as i64 + set.len() as i64;
        if chi != 1 {
            return Err(SurfaceError::InvalidRegion(format!("euler characteristic {chi}, expected 1")));
        }
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&(a, b), &n) in &edge_use {
            if n == 1 {
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
        }
        if adj.is_empty() {
            return Err(SurfaceError::InvalidRegion("region has no boundary".into()));
        }
        if let Some((&v, _)) = adj.iter().find(|(_, n)| n.len() != 2) {
            return Err(SurfaceError::InvalidRegion(format!("boundary is not simple at vertex {v}")));
        }
        let start = *adj.keys().next().unwrap();
        let mut boundary = vec![start];
        let (mut prev, mut cur) = (start, adj[&start][0]);
        while cur != start {
            boundary.push(cur);
            let n = &adj[&cur];
            let next = if n[0] == prev { n[1] } else { n[0] };
            prev = cur;
            cur = next;
        }
        if boundary.len() != adj.len() {
            return Err(SurfaceError::InvalidRegion("boundary has several components".into()));
        }
        let corner_angles = boundary
            .iter()
            .map(|&v| surface.corners[v].iter().filter(|(f, _)| set.contains(f)).map(|&(f, i)| surface.corner_angle(f, i)).sum())
            .collect();
        Ok(Self { boundary, faces: set.into_iter().collect(), corner_angles })
    }
}

/// Rotation of the boundary, curvature of the interior, and their defect
/// from `2π`.
pub fn gauss_bonnet_region(surface: &PolySurface, region: &PolygonRegion) -> Result<RegionGaussBonnet, SurfaceError> {
    let checked = PolygonRegion::from_faces(surface, &region.faces)?;
    if checked.boundary.len() != region.boundary.len() || region.corner_angles.len() != region.boundary.len() {
        return Err(SurfaceError::InvalidRegion("boundary does not match the face set".into()));
    }
    let tau: f64 = region.corner_angles.iter().map(|phi| PI - phi).sum();
    let on_boundary: BTreeSet<usize> = region.boundary.iter().copied().collect();
    let interior: BTreeSet<usize> = region.faces.iter().flat_map(|&f| surface.faces[f].v).filter(|v| !on_boundary.contains(v)).collect();
    let mut omega_interior = 0.0;
    for v in interior {
        omega_interior += TAU - surface.cone_angle(v)?;
    }
    for &f in &region.faces {
        let t = &surface.triangles[f];
        omega_interior += t.kappa * t.area;
    }
    Ok(RegionGaussBonnet { tau, omega_interior, defect: tau + omega_interior - TAU })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::polyhedral::validate;

    #[test]
    fn single_flat_face() {
        let s = validate(&corpus::tetrahedron(1.0)).unwrap();
        let r = PolygonRegion::from_faces(&s, &[0]).unwrap();
        let g = gauss_bonnet_region(&s, &r).unwrap();
        assert!((g.tau - TAU).abs() < 1e-12);
        assert!(g.defect.abs() < 1e-12);
    }

    #[test]
    fn single_octant_face() {
        let s = validate(&corpus::octant_octahedron()).unwrap();
        let g = gauss_bonnet_region(&s, &PolygonRegion::from_faces(&s, &[3]).unwrap()).unwrap();
        assert!((g.tau - 1.5 * PI).abs() < 1e-12);
        assert!((g.omega_interior - PI / 2.0).abs() < 1e-12);
        assert!(g.defect.abs() < 1e-12);
    }

    #[test]
    fn flat_rhombus() {
        let s = validate(&corpus::flat_torus(3)).unwrap();
        // Two faces sharing an edge.
        let e = s.edges().values().next().unwrap();
        let faces: Vec<usize> = e.faces.iter().map(|x| x.0).collect();
        let r = PolygonRegion::from_faces(&s, &faces).unwrap();
        assert_eq!(r.boundary.len(), 4);
        let g = gauss_bonnet_region(&s, &r).unwrap();
        assert!((g.tau - TAU).abs() < 1e-12 && g.omega_interior == 0.0 && g.defect.abs() < 1e-12);
    }

    #[test]
    fn vertex_stars_balance() {
        for (name, faces) in corpus::surfaces(3) {
            let s = validate(&faces).unwrap();
            for v in 0..s.vertex_count() {
                let star: Vec<usize> = s.corners_at(v).unwrap().iter().map(|c| c.0).collect();
                let r = PolygonRegion::from_faces(&s, &star).unwrap();
                let g = gauss_bonnet_region(&s, &r).unwrap();
                assert!(g.defect.abs() < 1e-8, "{name} star of {v}: {}", g.defect);
            }
        }
    }

    #[test]
    fn non_disks_are_rejected() {
        let s = validate(&corpus::tetrahedron(1.0)).unwrap();
        assert!(PolygonRegion::from_faces(&s, &[0, 1, 2, 3]).is_err());
        assert!(PolygonRegion::from_faces(&s, &[]).is_err());
        assert!(PolygonRegion::from_faces(&s, &[9]).is_err());
        // Annulus: the star of a torus vertex minus nothing is a disk, but
        // the complement of a star is not.
        let t = validate(&corpus::flat_torus(3)).unwrap();
        let star: BTreeSet<usize> = t.corners_at(0).unwrap().iter().map(|c| c.0).collect();
        let rest: Vec<usize> = (0..t.faces().len()).filter(|f| !star.contains(f)).collect();
        assert!(PolygonRegion::from_faces(&t, &rest).is_err());
    }
}
