//! Exact geometry of configuration spaces and projectivized matrices.

pub mod plane;
pub mod polytope;
pub mod projective;

pub use plane::AffinePlane;
pub use polytope::{ConfigurationSpace, HalfSpace, PlanePolytope, Simplex, Triangulation};
pub use projective::{
    distortion_constant, distortion_constant_at, elementary_measure_ratio, full_jacobian,
    image_chart_measure, image_euclidean_measure, image_norm, image_triangulation, projectivize,
    restricted_jacobian, restricted_jacobian_ratio, restricted_jacobian_with,
    simplex_measure_ratio, vertex_norm_ratio, DistortionConstant,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("projectivization of the zero vector")]
    ZeroImage,
    #[error("matrix has a zero column")]
    SingularMatrix,
    #[error("degenerate polytope: {0}")]
    DegeneratePolytope(String),
    #[error("configuration space has no codimension-one normal")]
    DegenerateNormal,
    #[error("empty polytope")]
    EmptyPolytope,
    #[error("unsupported geometry: {0}")]
    Unsupported(String),
}
