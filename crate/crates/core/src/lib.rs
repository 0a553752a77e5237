//! Polytopes with prescribed facet areas.
//!
//! The crate solves the discrete Minkowski problem in ℝ³, builds explicit
//! small-volume polytopes with fixed facet areas, evaluates quantitative
//! volume bounds for polytopes with steep facets, computes infima of polygon
//! areas with given side lengths, and constructs hyperbolic and spherical
//! tetrahedra with prescribed facet areas through a winding-number search.
//!
//! All algorithms are generic over a [`Real`] scalar (`f32` or `f64`);
//! the crate root re-exports `f64` aliases for everyday use.

// Guards such as `!(x > 0)` are written to reject NaN along with the
// out-of-range values, which `x <= 0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod euclid;
pub mod geom;
pub mod linalg;
pub mod minkowski;
pub mod noneuclid;
pub mod oracle;
pub mod planar_infimum;
pub mod scalar;
pub mod tetra;
pub mod tolerances;

pub use scalar::Real;
pub use tolerances::Tolerances;

/// `f64` 3-vector.
pub type Vec3d = geom::Vec3<f64>;
/// `f64` n-vector.
pub type VecNd = geom::VecN<f64>;
/// `f64` polytope mesh.
pub type Mesh = geom::PolytopeMesh<f64>;
/// `f64` surface-area data.
pub type Surface = geom::SurfaceData<f64>;
/// `f64` support numbers.
pub type Support = geom::SupportVector<f64>;
