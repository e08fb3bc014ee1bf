//! Recognition and replay of vertex-edge triangulations.
//!
//! A tiling of a convex polygon is vertex-edge if it can be produced by
//! repeatedly cutting a convex piece along a segment from one of its corners
//! to a point on a non-incident edge. Recognition searches for such a cut that
//! is a union of triangle edges, splits the tiling in two and recurses.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::polygon::{close, extent, line_offset, orient, segment_distance, strip_collinear, ChartPolygon, Pt};
use super::{intersect_convex, TriangulationError};

/// One cut: `polygon` is split along the segment `from -> to`, where `from`
/// is a corner of `polygon` and `to` lies on an edge not incident to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordSplit {
    pub polygon: Vec<Pt>,
    pub from: Pt,
    pub to: Pt,
}

/// Outcome of [`is_vertex_edge`].
#[derive(Debug, Clone, PartialEq)]
pub enum VertexEdgeVerdict {
    /// The tiling is vertex-edge; the trace replays it from the parent.
    Yes(Vec<ChordSplit>),
    No,
    /// The search budget ran out before a decision.
    Unknown,
}

impl VertexEdgeVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, VertexEdgeVerdict::Yes(_))
    }
}

/// Checks that `triangles` tile `parent`: chart areas add up within
/// `1e-9` relative, every vertex lies in the parent, and pairwise overlaps
/// are at most `1e-12` in chart area.
pub fn check_tiling(parent: &ChartPolygon, triangles: &[ChartPolygon]) -> Result<(), TriangulationError> {
    let area = parent.chart_area();
    let tol = 1e-10 * parent.scale();
    let mut sum = 0.0;
    for (i, t) in triangles.iter().enumerate() {
        if t.kappa() != parent.kappa() {
            return Err(TriangulationError::KappaMismatch(parent.kappa(), t.kappa()));
        }
        if let Some(v) = t.vertices().iter().find(|&&v| !parent.contains(v, tol)) {
            return Err(TriangulationError::NotTiling(format!("triangle {i} vertex {v:?} is outside the parent")));
        }
        sum += t.chart_area();
    }
    if (sum - area).abs() > 1e-9 * area {
        return Err(TriangulationError::NotTiling(format!("areas sum to {sum}, parent has {area}")));
    }
    for i in 0..triangles.len() {
        for j in i + 1..triangles.len() {
            let o = intersect_convex(&triangles[i], &triangles[j])?.area();
            if o > 1e-12 {
                return Err(TriangulationError::NotTiling(format!("triangles {i} and {j} overlap by {o}")));
            }
        }
    }
    Ok(())
}

fn same_point_set(a: &[Pt], b: &[Pt], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|&p| b.iter().any(|&q| close(p, q, tol))) && b.iter().all(|&p| a.iter().any(|&q| close(p, q, tol)))
}

/// Splits the convex polygon `poly` (corners, counter-clockwise) along
/// `from -> to`. Returns `None` if the cut is not a vertex-edge chord.
fn split(poly: &[Pt], from: Pt, to: Pt, tol: f64) -> Option<(Vec<Pt>, Vec<Pt>)> {
    let n = poly.len();
    let iv = poly.iter().position(|&p| close(p, from, tol))?;
    let prev = poly[(iv + n - 1) % n];
    let next = poly[(iv + 1) % n];
    if segment_distance(prev, from, to) <= tol || segment_distance(from, next, to) <= tol {
        return None;
    }
    let mut ring = poly.to_vec();
    let ix = match ring.iter().position(|&p| close(p, to, tol)) {
        Some(ix) => ix,
        None => {
            let e = (0..n).find(|&e| segment_distance(poly[e], poly[(e + 1) % n], to) <= tol)?;
            ring.insert(e + 1, to);
            e + 1
        }
    };
    let iv = ring.iter().position(|&p| close(p, from, tol))?;
    let m = ring.len();
    let walk = |a: usize, b: usize| {
        let mut out = vec![ring[a]];
        let mut k = a;
        while k != b {
            k = (k + 1) % m;
            out.push(ring[k]);
        }
        out
    };
    let first = strip_collinear(&walk(iv, ix), tol);
    let second = strip_collinear(&walk(ix, iv), tol);
    if first.len() < 3 || second.len() < 3 {
        return None;
    }
    Some((first, second))
}

/// Replays `steps` from `parent` and returns the resulting pieces.
pub fn replay(parent: &ChartPolygon, steps: &[ChordSplit]) -> Result<Vec<Vec<Pt>>, TriangulationError> {
    let tol = 1e-10 * parent.scale();
    let mut pieces = vec![parent.corners()];
    for (k, step) in steps.iter().enumerate() {
        let target = strip_collinear(&step.polygon, tol);
        let idx = pieces
            .iter()
            .position(|p| same_point_set(p, &target, tol))
            .ok_or_else(|| TriangulationError::ReplayFailed(format!("step {k}: polygon not present")))?;
        let (a, b) = split(&pieces[idx], step.from, step.to, tol)
            .ok_or_else(|| TriangulationError::ReplayFailed(format!("step {k}: not a vertex-edge chord")))?;
        pieces.swap_remove(idx);
        pieces.push(a);
        pieces.push(b);
    }
    Ok(pieces)
}

/// True if replaying `steps` from `parent` yields exactly `triangles`.
pub fn replay_matches(parent: &ChartPolygon, steps: &[ChordSplit], triangles: &[ChartPolygon]) -> Result<bool, TriangulationError> {
    let pieces = replay(parent, steps)?;
    let tol = 1e-10 * parent.scale();
    if pieces.len() != triangles.len() {
        return Ok(false);
    }
    let mut used = vec![false; triangles.len()];
    for piece in &pieces {
        let hit = triangles.iter().enumerate().position(|(i, t)| !used[i] && same_point_set(piece, &t.corners(), tol));
        match hit {
            Some(i) => used[i] = true,
            None => return Ok(false),
        }
    }
    Ok(true)
}

enum Outcome {
    Found(Vec<ChordSplit>),
    Fail,
    Budget,
}

struct Search<'a> {
    tris: &'a [ChartPolygon],
    tol: f64,
    memo: HashMap<Vec<usize>, ()>,
    expansions: usize,
    budget: usize,
}

impl Search<'_> {
    fn solve(&mut self, poly: Vec<Pt>, subset: Vec<usize>) -> Outcome {
        if subset.len() == 1 {
            let t = self.tris[subset[0]].corners();
            return if same_point_set(&poly, &t, self.tol) { Outcome::Found(Vec::new()) } else { Outcome::Fail };
        }
        if self.memo.contains_key(&subset) {
            return Outcome::Fail;
        }
        self.expansions += 1;
        if self.expansions > self.budget {
            return Outcome::Budget;
        }
        let n = poly.len();
        let mut targets: Vec<Pt> = Vec::new();
        for &i in &subset {
            for &v in self.tris[i].vertices() {
                let on_boundary = (0..n).any(|e| segment_distance(poly[e], poly[(e + 1) % n], v) <= self.tol);
                if on_boundary && !targets.iter().any(|&t| close(t, v, self.tol)) {
                    targets.push(v);
                }
            }
        }
        for iv in 0..n {
            let from = poly[iv];
            for &to in &targets {
                let Some((left, right)) = split(&poly, from, to, self.tol) else {
                    continue;
                };
                let mut a = Vec::new();
                let mut b = Vec::new();
                let mut straddles = false;
                for &i in &subset {
                    let offs: Vec<f64> = self.tris[i].vertices().iter().map(|&v| line_offset(from, to, v)).collect();
                    let hi = offs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let lo = offs.iter().cloned().fold(f64::INFINITY, f64::min);
                    if hi > self.tol && lo < -self.tol {
                        straddles = true;
                        break;
                    }
                    let c = self.tris[i].centroid();
                    // `left` runs counter-clockwise from `from` to `to`, so it
                    // lies to the right of the directed cut.
                    if orient(from, to, c) < 0.0 {
                        a.push(i);
                    } else {
                        b.push(i);
                    }
                }
                if straddles || a.is_empty() || b.is_empty() {
                    continue;
                }
                let first = match self.solve(left.clone(), a) {
                    Outcome::Found(t) => t,
                    Outcome::Fail => continue,
                    Outcome::Budget => return Outcome::Budget,
                };
                let second = match self.solve(right.clone(), b) {
                    Outcome::Found(t) => t,
                    Outcome::Fail => continue,
                    Outcome::Budget => return Outcome::Budget,
                };
                let mut trace = vec![ChordSplit { polygon: poly.clone(), from, to }];
                trace.extend(first);
                trace.extend(second);
                return Outcome::Found(trace);
            }
        }
        self.memo.insert(subset, ());
        Outcome::Fail
    }
}

/// Decides whether `triangles` form a vertex-edge triangulation of `parent`.
///
/// The search expands at most `4·n² + 16` sub-tilings for `n` triangles and
/// answers [`VertexEdgeVerdict::Unknown`] beyond that.
pub fn is_vertex_edge(parent: &ChartPolygon, triangles: &[ChartPolygon]) -> Result<VertexEdgeVerdict, TriangulationError> {
    check_tiling(parent, triangles)?;
    let n = triangles.len();
    let scale = extent(parent.vertices());
    let mut search = Search { tris: triangles, tol: 1e-10 * scale, memo: HashMap::new(), expansions: 0, budget: 4 * n * n + 16 };
    Ok(match search.solve(parent.corners(), (0..n).collect()) {
        Outcome::Found(trace) => VertexEdgeVerdict::Yes(trace),
        Outcome::Fail => VertexEdgeVerdict::No,
        Outcome::Budget => VertexEdgeVerdict::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: Pt, b: Pt, c: Pt) -> ChartPolygon {
        ChartPolygon::triangle(a, b, c, 0.0).unwrap()
    }

    const A: Pt = [0.0, 0.0];
    const B: Pt = [1.0, 0.0];
    const C: Pt = [0.3, 0.9];

    fn mid(p: Pt, q: Pt) -> Pt {
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
    }

    fn centroid() -> Pt {
        [(A[0] + B[0] + C[0]) / 3.0, (A[1] + B[1] + C[1]) / 3.0]
    }

    #[test]
    fn parent_alone_is_vertex_edge() {
        let p = tri(A, B, C);
        assert_eq!(is_vertex_edge(&p, std::slice::from_ref(&p)).unwrap(), VertexEdgeVerdict::Yes(vec![]));
    }

    #[test]
    fn median_split_is_vertex_edge() {
        let p = tri(A, B, C);
        let m = mid(B, C);
        let ts = [tri(A, B, m), tri(A, m, C)];
        let VertexEdgeVerdict::Yes(trace) = is_vertex_edge(&p, &ts).unwrap() else { panic!() };
        assert_eq!(trace.len(), 1);
        assert!(replay_matches(&p, &trace, &ts).unwrap());
    }

    #[test]
    fn centroid_fan_is_not_vertex_edge() {
        let p = tri(A, B, C);
        let g = centroid();
        let ts = [tri(A, B, g), tri(B, C, g), tri(C, A, g)];
        assert_eq!(is_vertex_edge(&p, &ts).unwrap(), VertexEdgeVerdict::No);
    }

    #[test]
    fn six_triangle_barycentric_split_is_vertex_edge() {
        // Every median passes through the centroid, so the medians are chords.
        let p = tri(A, B, C);
        let g = centroid();
        let (ma, mb, mc) = (mid(B, C), mid(C, A), mid(A, B));
        let ts = [tri(A, mc, g), tri(mc, B, g), tri(B, ma, g), tri(ma, C, g), tri(C, mb, g), tri(mb, A, g)];
        let VertexEdgeVerdict::Yes(trace) = is_vertex_edge(&p, &ts).unwrap() else { panic!() };
        assert!(replay_matches(&p, &trace, &ts).unwrap());
    }

    #[test]
    fn non_tilings_are_rejected() {
        let p = tri(A, B, C);
        let m = mid(B, C);
        assert!(matches!(is_vertex_edge(&p, &[tri(A, B, m)]), Err(TriangulationError::NotTiling(_))));
        let over = [tri(A, B, m), tri(A, m, C), tri(A, B, m)];
        assert!(matches!(is_vertex_edge(&p, &over), Err(TriangulationError::NotTiling(_))));
    }

    #[test]
    fn replay_rejects_edge_to_edge_cuts() {
        let p = tri(A, B, C);
        let step = ChordSplit { polygon: p.corners(), from: mid(A, B), to: mid(B, C) };
        assert!(replay(&p, &[step]).is_err());
        let step = ChordSplit { polygon: p.corners(), from: A, to: mid(A, B) };
        assert!(replay(&p, &[step]).is_err());
    }
}
