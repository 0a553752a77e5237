//! Euclidean 3D geometry kernel: convex hulls, halfspace intersection,
//! and volume/area/diameter metrics.

pub(crate) mod halfspace;
mod hull;
mod io;
mod mesh;
mod metrics;
mod vector;

pub use halfspace::{halfspace_intersection_3d, FacetEdge, HalfspacePolytope};
pub use halfspace::{intersect_halfspaces, normals_positively_span};
pub use hull::{convex_hull_3d, convex_hull_3d_with};
pub use io::{format_sig, MeshJson, OffPrecision};
pub use mesh::{PolytopeMesh, SupportVector, SurfaceData};
pub use metrics::{gww_check, mesh_metrics, GwwReport, MeshMetrics};
pub use vector::{Vec3, VecN};

use thiserror::Error;

/// Errors raised by the geometry kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("unbounded intersection: the normals lie in a closed halfspace")]
    Unbounded,
    #[error("empty intersection: {0}")]
    Empty(String),
    #[error("invalid surface data: {0}")]
    InvalidSurfaceData(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("parse error: {0}")]
    Parse(String),
}
