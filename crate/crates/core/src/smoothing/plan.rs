//! Per-vertex smoothing plans for a whole surface.

use std::f64::consts::{FRAC_PI_2, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    admissible_delta, cap_geometry, certify, BindingConstraint, CapGeometry, Certificate, ConeMetric, Mode, SmoothingError, SmoothingParams,
};
use crate::model_space::ModelSpace;
use crate::polyhedral::PolySurface;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexPlan {
    pub vertex: usize,
    /// 1-based position among the conical vertices.
    pub index: usize,
    pub cone_angle: f64,
    pub alpha: f64,
    pub kappa: f64,
    /// Intrinsic radius of the ball set aside for this vertex.
    pub r: f64,
    /// The same radius in the cone chart.
    pub chart_radius: f64,
    pub delta: f64,
    pub binding: BindingConstraint,
    /// Bound on cap area and diameter, `ε·2^{−i}`.
    pub budget: f64,
    pub cap: CapGeometry,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingPlan {
    pub epsilon: f64,
    pub mode: Mode,
    pub vertices: Vec<VertexPlan>,
    pub total_r: f64,
    pub all_certified: bool,
}

type Scaled = fn(f64, f64) -> f64;

/// Smallest distance from `v` to an opposite edge of its star. Corners
/// whose foot of perpendicular falls outside the edge are skipped, since
/// there the distance is at least the shortest incident edge.
fn star_altitude(surface: &PolySurface, v: usize, kappa: f64) -> Result<f64, SmoothingError> {
    let (sn, asn): (Scaled, Scaled) = if kappa > 0.0 {
        (|k, x| (k.sqrt() * x).sin() / k.sqrt(), |k, y| (k.sqrt() * y).min(1.0).asin() / k.sqrt())
    } else if kappa < 0.0 {
        (|k, x| ((-k).sqrt() * x).sinh() / (-k).sqrt(), |k, y| ((-k).sqrt() * y).asinh() / (-k).sqrt())
    } else {
        (|_, x| x, |_, y| y)
    };
    let mut best = f64::INFINITY;
    for &(f, i) in surface.corners_at(v)? {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let (aj, ak) = (surface.corner_angle(f, j), surface.corner_angle(f, k));
        if aj > FRAC_PI_2 || ak > FRAC_PI_2 {
            continue;
        }
        // Right triangle with hypotenuse |v v_j| and angle aj at v_j.
        let side = surface.faces()[f].edge_length(i, j);
        best = best.min(asn(kappa, sn(kappa, side) * aj.sin()));
    }
    Ok(best)
}

/// Chooses a ball, a cap radius and a certificate for every conical vertex.
///
/// Vertex `i` (1-based among conical vertices) gets
/// `r_i = min(ε·2^{−i}, m_i/2)/2` where `m_i` is its shortest incident
/// edge, with `m_i` also capped by the distance to the far side of its
/// star so that `B(v, 2r_i)` is a true cone ball. `δ_i` is halved from the admissible value
/// until the cap's area and diameter are at most `ε·2^{−i}`.
pub fn plan_surface_smoothing(surface: &PolySurface, epsilon: f64, mode: Mode, grid_n: usize) -> Result<SmoothingPlan, SmoothingError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(SmoothingError::Inadmissible(format!("epsilon={epsilon}")));
    }
    let conical = surface.conical_vertices();
    let mut offending = Vec::new();
    let mut jobs = Vec::with_capacity(conical.len());
    for (rank, &v) in conical.iter().enumerate() {
        let angle = surface.cone_angle(v)?;
        if (angle > TAU) == mode.is_cbb() {
            offending.push(v);
            continue;
        }
        let corners = surface.corners_at(v)?;
        let kappa = surface.faces()[corners[0].0].kappa;
        if corners.iter().any(|&(f, _)| surface.faces()[f].kappa != kappa) {
            return Err(SmoothingError::NonUniformKappa(v));
        }
        let shortest = surface.neighbours(v).iter().map(|n| n.1).fold(f64::INFINITY, f64::min);
        let reach = shortest.min(star_altitude(surface, v, kappa)?);
        jobs.push((rank + 1, v, angle, kappa, reach));
    }
    if !offending.is_empty() {
        return Err(SmoothingError::MixedDefects { mode, vertices: offending });
    }
    let vertices = jobs
        .into_par_iter()
        .map(|(index, vertex, cone_angle, kappa, reach)| {
            let budget = epsilon * 0.5f64.powi(index as i32);
            let r = budget.min(reach / 2.0) / 2.0;
            let alpha = cone_angle / TAU;
            let space = ModelSpace::new(kappa).map_err(|e| SmoothingError::InvalidCone(e.to_string()))?;
            let chart_radius = space.distance_to_radius(r).powf(1.0 / alpha);
            let cone = ConeMetric::new(alpha, kappa, chart_radius)?;
            let adm = admissible_delta(&cone, mode)?;
            let (mut delta, mut binding) = (adm.delta, adm.binding);
            let mut cap = cap_geometry(&cone, &SmoothingParams::new(delta, mode))?;
            let mut halvings = 0;
            while cap.area > budget || cap.diameter > budget {
                halvings += 1;
                if halvings > 60 {
                    return Err(SmoothingError::NoAdmissibleDelta(format!("cap at vertex {vertex} never fits the budget")));
                }
                delta /= 2.0;
                binding = BindingConstraint::CurvatureGrid;
                cap = cap_geometry(&cone, &SmoothingParams::new(delta, mode))?;
            }
            let certificate = certify(&cone, &SmoothingParams::new(delta, mode), grid_n)?;
            Ok(VertexPlan { vertex, index, cone_angle, alpha, kappa, r, chart_radius, delta, binding, budget, cap, certificate })
        })
        .collect::<Result<Vec<_>, SmoothingError>>()?;
    let total_r = vertices.iter().map(|v| v.r).fold(0.0, |a, b| a + b);
    let all_certified = vertices.iter().all(|v| v.certificate.passed());
    Ok(SmoothingPlan { epsilon, mode, vertices, total_r, all_certified })
}
