//! Generators for the bundled test surfaces and triangulation scenes.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::polyhedral::FaceSpec;
use crate::triangulation::{intersect_convex, ChartPolygon, Intersection, Pt, TriangulationError};

type P3 = [f64; 3];

fn dist3(a: P3, b: P3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn flat_face(points: &[P3], v: [usize; 3]) -> FaceSpec {
    let p = v.map(|i| points[i]);
    FaceSpec { v, len: [dist3(p[1], p[2]), dist3(p[2], p[0]), dist3(p[0], p[1])], kappa: 0.0 }
}

fn equilateral(v: [usize; 3], side: f64, kappa: f64) -> FaceSpec {
    FaceSpec { v, len: [side; 3], kappa }
}

/// Regular flat tetrahedron.
pub fn tetrahedron(side: f64) -> Vec<FaceSpec> {
    [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]].into_iter().map(|v| equilateral(v, side, 0.0)).collect()
}

fn octahedron(side: f64, kappa: f64) -> Vec<FaceSpec> {
    // Vertices: 0,1 = ±x, 2,3 = ±y, 4,5 = ±z.
    let mut faces = Vec::with_capacity(8);
    for x in [0, 1] {
        for y in [2, 3] {
            for z in [4, 5] {
                faces.push(equilateral([x, y, z], side, kappa));
            }
        }
    }
    faces
}

/// The unit sphere cut into eight octant triangles.
pub fn octant_octahedron() -> Vec<FaceSpec> {
    octahedron(FRAC_PI_2, 1.0)
}

/// Octahedral gluing of eight spherical triangles with side 1.7; every
/// vertex has cone angle above `2π`.
pub fn fat_octahedron() -> Vec<FaceSpec> {
    octahedron(1.7, 1.0)
}

/// Flat unit cube, each square split along a diagonal.
pub fn cube(side: f64) -> Vec<FaceSpec> {
    let pts: Vec<P3> = (0..8).map(|i| [(i & 1) as f64 * side, ((i >> 1) & 1) as f64 * side, ((i >> 2) & 1) as f64 * side]).collect();
    let quads = [[0, 1, 3, 2], [4, 6, 7, 5], [0, 4, 5, 1], [2, 3, 7, 6], [0, 2, 6, 4], [1, 5, 7, 3]];
    quads.iter().flat_map(|q| [flat_face(&pts, [q[0], q[1], q[2]]), flat_face(&pts, [q[0], q[2], q[3]])]).collect()
}

/// Flat torus from an `n × n` equilateral lattice, `n ≥ 3`.
pub fn flat_torus(n: usize) -> Vec<FaceSpec> {
    let id = |i: usize, j: usize| (i % n) * n + (j % n);
    let mut faces = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            faces.push(equilateral([id(i, j), id(i + 1, j), id(i, j + 1)], 1.0, 0.0));
            faces.push(equilateral([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)], 1.0, 0.0));
        }
    }
    faces
}

/// Convex hull faces of points in general position, by brute force.
fn hull(points: &[P3]) -> Vec<FaceSpec> {
    let n = points.len();
    let sub = |a: P3, b: P3| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let mut faces = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (u, w) = (sub(points[j], points[i]), sub(points[k], points[i]));
                let normal = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
                let side = |p: P3| {
                    let d = sub(p, points[i]);
                    normal[0] * d[0] + normal[1] * d[1] + normal[2] * d[2]
                };
                let signs: Vec<f64> = (0..n).filter(|&m| m != i && m != j && m != k).map(|m| side(points[m])).collect();
                if signs.iter().all(|&s| s < 0.0) {
                    faces.push(flat_face(points, [i, j, k]));
                } else if signs.iter().all(|&s| s > 0.0) {
                    faces.push(flat_face(points, [i, k, j]));
                }
            }
        }
    }
    // Drop points that ended up inside the hull.
    let mut used: Vec<usize> = faces.iter().flat_map(|f| f.v).collect();
    used.sort_unstable();
    used.dedup();
    for f in &mut faces {
        f.v = f.v.map(|x| used.binary_search(&x).unwrap());
    }
    faces
}

/// Regular flat icosahedron with unit edges.
pub fn icosahedron() -> Vec<FaceSpec> {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut pts = Vec::with_capacity(12);
    for a in [-1.0, 1.0] {
        for b in [-g, g] {
            pts.push([0.0, a / 2.0, b / 2.0]);
            pts.push([a / 2.0, b / 2.0, 0.0]);
            pts.push([b / 2.0, 0.0, a / 2.0]);
        }
    }
    hull(&pts)
}

/// Flat convex polyhedron on `n` perturbed random points of the sphere.
pub fn random_convex(seed: u64, n: usize) -> Vec<FaceSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<P3> = (0..n.max(4))
        .map(|_| loop {
            let p: P3 = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if r > 0.1 && r <= 1.0 {
                let s = rng.gen_range(0.9..1.1) / r;
                break p.map(|x| x * s);
            }
        })
        .collect();
    hull(&pts)
}

/// Every bundled surface with a name.
pub fn surfaces(seed: u64) -> Vec<(String, Vec<FaceSpec>)> {
    vec![
        ("tetrahedron".into(), tetrahedron(1.0)),
        ("octant-octahedron".into(), octant_octahedron()),
        ("fat-octahedron".into(), fat_octahedron()),
        ("icosahedron".into(), icosahedron()),
        ("cube".into(), cube(1.0)),
        ("flat-torus".into(), flat_torus(3)),
        (format!("random-convex-{seed}"), random_convex(seed, 12)),
    ]
}

/// A parent triangle and a family of convex polygons in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub kappa: f64,
    pub parent: [Pt; 3],
    pub family: Vec<Vec<Pt>>,
}

impl Scene {
    pub fn parent_polygon(&self) -> Result<ChartPolygon, TriangulationError> {
        ChartPolygon::new(self.parent.to_vec(), self.kappa)
    }

    pub fn family_polygons(&self) -> Result<Vec<ChartPolygon>, TriangulationError> {
        self.family.iter().map(|vs| ChartPolygon::new(vs.clone(), self.kappa)).collect()
    }
}

/// Two disjoint triangles inside a flat parent.
pub fn two_triangle_scene() -> Scene {
    Scene {
        kappa: 0.0,
        parent: [[0.0, 1.0], [-1.0, 0.0], [1.2, 0.0]],
        family: vec![vec![[-0.6, 0.1], [-0.2, 0.15], [-0.35, 0.45]], vec![[0.2, 0.1], [0.7, 0.12], [0.3, 0.4]]],
    }
}

/// Random scene with up to `max_polygons` disjoint convex polygons of at
/// most `max_vertices` vertices each. Curvature is drawn from `{−1, 0, 1}`.
pub fn random_scene(seed: u64, max_polygons: usize, max_vertices: usize) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kappa = [-1.0, 0.0, 1.0][rng.gen_range(0..3)];
    let parent: [Pt; 3] = loop {
        let t: [Pt; 3] = std::array::from_fn(|i| {
            let a = rng.gen_range(-0.3..0.3) + i as f64 * 2.0 * std::f64::consts::PI / 3.0;
            let r = rng.gen_range(0.5..0.8);
            [r * a.cos(), r * a.sin()]
        });
        if ChartPolygon::new(t.to_vec(), kappa).is_ok() {
            break t;
        }
    };
    let parent_poly = ChartPolygon::new(parent.to_vec(), kappa).unwrap();
    let target = rng.gen_range(0..=max_polygons);
    let mut family: Vec<ChartPolygon> = Vec::new();
    let mut attempts = 0;
    while family.len() < target && attempts < 200 {
        attempts += 1;
        let c = [rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
        let radius = rng.gen_range(0.03..0.2);
        let k = rng.gen_range(3..=max_vertices.max(3));
        let mut angles: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let vs: Vec<Pt> = angles.iter().map(|a| [c[0] + radius * a.cos(), c[1] + radius * a.sin()]).collect();
        let Ok(poly) = ChartPolygon::new(vs.clone(), kappa) else { continue };
        if poly.chart_area() < 1e-4 || !vs.iter().all(|&v| parent_poly.strictly_contains(v, 1e-9)) {
            continue;
        }
        let disjoint = family.iter().all(|f| matches!(intersect_convex(f, &poly), Ok(Intersection::Empty)));
        if disjoint {
            family.push(poly);
        }
    }
    Scene { kappa, parent, family: family.iter().map(|p| p.vertices().to_vec()).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedral::validate;

    #[test]
    fn hulls_have_expected_sizes() {
        assert_eq!(icosahedron().len(), 20);
        assert_eq!(cube(1.0).len(), 12);
        for seed in 0..5 {
            let faces = random_convex(seed, 12);
            assert!(faces.len() >= 4, "seed {seed}");
            assert_eq!(validate(&faces).unwrap().euler_characteristic(), 2);
        }
        for f in icosahedron() {
            for l in f.len {
                assert!((l - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(validate(&flat_torus(4)).unwrap().euler_characteristic(), 0);
    }

    #[test]
    fn random_scenes_are_valid() {
        for seed in 0..50 {
            let s = random_scene(seed, 4, 6);
            assert!(s.family.len() <= 4);
            s.parent_polygon().unwrap();
            let fam = s.family_polygons().unwrap();
            assert!(fam.iter().all(|p| p.len() <= 6));
        }
        assert_eq!(random_scene(3, 4, 6), random_scene(3, 4, 6));
    }
}
