//! Error type for model-space geometry.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("curvature must be finite, got {0}")]
    InvalidKappa(f64),
    #[error("point ({x}, {y}) is outside the chart domain for kappa = {kappa}")]
    OutsideChart { x: f64, y: f64, kappa: f64 },
    #[error("point ({x}, {y}) is not inside the open hemisphere of the projective chart")]
    OutsideHemisphere { x: f64, y: f64 },
    #[error("invalid {what}: {value}")]
    InvalidArgument { what: &'static str, value: f64 },
    #[error("length {value} is not below the model diameter {diameter}")]
    BeyondDiameter { value: f64, diameter: f64 },
    #[error("sides ({a}, {b}, {c}) violate the triangle inequality")]
    TriangleInequality { a: f64, b: f64, c: f64 },
    #[error("perimeter {perimeter} is not below twice the model diameter ({limit})")]
    PerimeterTooLarge { perimeter: f64, limit: f64 },
    #[error("arclength {s} is outside [0, {length}]")]
    ArclengthOutOfRange { s: f64, length: f64 },
    #[error("geodesic endpoints coincide")]
    CoincidentPoints,
    #[error("points are antipodal, the geodesic is not unique")]
    Antipodal,
}
