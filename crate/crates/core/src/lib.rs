//! Geometry of surfaces with curvature bounded above.
//!
//! Model-space trigonometry, comparison-triangle tests, vertex-edge
//! refinement in projective charts, cone-metric polyhedral surfaces, and
//! explicit smoothing of cone vertices with certified curvature bounds.

pub mod comparison;
pub mod corpus;
pub mod error;
pub mod model_space;
pub mod polyhedral;
pub mod quadrature;
pub mod smoothing;
pub mod triangulation;

pub use error::GeometryError;
pub use model_space::{Angle, ChartPoint, ModelSpace, TriangleData};
pub use polyhedral::{FaceSpec, PolySurface, SurfaceError};
