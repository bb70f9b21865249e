//! Domain geometry, grid sampling, and the unstructured spatial grid.
//!
//! The computational domain is an axis-aligned rectangle with polygonal
//! obstacles. Grid vertices are placed by exposure-weighted rejection
//! sampling (dense where the field is hot, sparse elsewhere), plus
//! structural points: the goal, the sources, the domain boundary, and
//! rings along obstacle boundaries. The vertex cloud is Delaunay
//! triangulated; value fields live on the vertices and are evaluated
//! anywhere by barycentric interpolation, which is monotone and
//! non-expansive — the properties the fixed-point scheme needs.

mod domain;
mod mesh;
mod sample;

pub use domain::{Domain, Polygon};
pub use mesh::{triangulate, SpatialGrid, Stencil};
pub use sample::{sample_grid, GridConfig};

use thiserror::Error;

/// Role of a grid vertex; drives boundary conditions and export.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexClass {
    /// Ordinary interior vertex.
    Free,
    /// The unique goal vertex (value pinned to 0).
    Goal,
    /// Vertex on an obstacle boundary (value pinned to 1).
    Obstacle,
    /// Vertex on the domain rectangle boundary.
    DomainBoundary,
}

impl VertexClass {
    /// Stable lowercase name, used in exports.
    pub fn name(self) -> &'static str {
        match self {
            VertexClass::Free => "free",
            VertexClass::Goal => "goal",
            VertexClass::Obstacle => "obstacle",
            VertexClass::DomainBoundary => "domain_boundary",
        }
    }
}

/// Geometry construction, sampling, or triangulation failure.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("domain bounds must have positive width and height")]
    InvalidBounds,
    #[error("invalid obstacle polygon: {0}")]
    InvalidPolygon(String),
    #[error("obstacle {index} extends outside the domain bounds")]
    ObstacleOutsideBounds { index: usize },
    #[error("goal lies inside an obstacle")]
    GoalInObstacle,
    #[error("source {index} lies inside an obstacle")]
    SourceInObstacle { index: usize },
    #[error("{what} lies outside the domain bounds")]
    OutsideBounds { what: &'static str },
    #[error("rejection sampling exhausted after {draws} draws ({accepted}/{target} points accepted)")]
    SamplingExhausted {
        draws: usize,
        accepted: usize,
        target: usize,
    },
    #[error("triangulation input is degenerate: {0}")]
    DegenerateInput(String),
    #[error("duplicate vertex at index {index}")]
    DuplicateVertex { index: usize },
}
