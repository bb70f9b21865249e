//! Minimal exposure path computation over wireless sensor fields.
//!
//! The exposure of a path p(t) through a sensor field with intensity I is
//! the line integral ∫ I(p(t)) ‖p'(t)‖ dt. Finding the path of least
//! exposure between a source and a goal is an optimal-control problem whose
//! value function solves a static Hamilton-Jacobi-Bellman equation. This
//! crate solves a bounded transform of that equation (values mapped to
//! [0, 1] via v̄ = 1 − e^{−v}) with a semi-Lagrangian scheme on an
//! unstructured Delaunay grid, using policy iteration, and then extracts
//! and polishes discrete paths from the converged value field.
//!
//! Modules:
//! - [`sensing`]: sensor models, field intensity, and its rescaling
//! - [`geometry`]: domain with polygonal obstacles, exposure-weighted grid
//!   sampling, Delaunay triangulation, point location and interpolation
//! - [`solver`]: the semi-Lagrangian fixed-point scheme and policy iteration
//! - [`path`]: path extraction, exposure evaluation, local smoothing

pub mod geometry;
pub mod path;
pub mod sensing;
pub mod solver;
pub mod vec2;

pub use geometry::{Domain, GridConfig, SpatialGrid, VertexClass};
pub use path::{Path, PathResult};
pub use sensing::{IntensityField, IntensityMode, SensingModel, SensorNode};
pub use solver::{SolverConfig, ValueField};
pub use vec2::Vec2;
