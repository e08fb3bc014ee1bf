//! Fixtures shared by the benchmarks.

use catsurf_core::corpus;
use catsurf_core::polyhedral::validate;
use catsurf_core::smoothing::{admissible_delta, ConeMetric, Mode, SmoothingParams};
use catsurf_core::triangulation::ChartPolygon;
use catsurf_core::PolySurface;

pub fn surface(name: &str) -> PolySurface {
    let faces = corpus::surfaces(1).into_iter().find(|(n, _)| n == name).map(|(_, f)| f).expect("bundled surface");
    validate(&faces).unwrap()
}

pub fn scene(seed: u64) -> (ChartPolygon, Vec<ChartPolygon>) {
    let s = corpus::random_scene(seed, 4, 6);
    (s.parent_polygon().unwrap(), s.family_polygons().unwrap())
}

pub fn cone(alpha: f64, kappa: f64, mode: Mode) -> (ConeMetric, SmoothingParams) {
    let c = ConeMetric::new(alpha, kappa, 0.9).unwrap();
    let d = admissible_delta(&c, mode).unwrap().delta;
    (c, SmoothingParams::new(d, mode))
}
