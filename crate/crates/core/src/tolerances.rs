//! Centralized tolerance configuration.
//!
//! Every threshold used by the geometry kernel lives here so that callers
//! can override them in one place. Defaults never drop below a small
//! multiple of the scalar's machine epsilon, which keeps `f32`
//! instantiations meaningful.

use crate::scalar::Real;

/// Tolerances used across the geometry kernel and solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    /// Allowed deviation of a unit vector's norm from 1.
    pub unit_norm: T,
    /// Relative best-fit-plane residual below which a point set counts as flat.
    pub coplanar: T,
    /// Relative distance (times diameter) under which triangles are merged into one facet.
    pub merge: T,
    /// Relative planarity bound (times diameter) for emitted facets.
    pub planarity: T,
    /// Relative mismatch allowed between cached and recomputed facet areas.
    pub area_rel: T,
    /// Minimum angular separation between two input normals, in radians.
    pub normal_separation: T,
    /// Relative magnitude of `Σ S_i u_i` accepted as zero.
    pub closure: T,
    /// Relative area below which a facet is treated as inactive.
    pub inactive_area: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            unit_norm: T::tol_at_least(1e-12, 64.0),
            coplanar: T::tol_at_least(1e-10, 64.0),
            merge: T::tol_at_least(1e-9, 64.0),
            planarity: T::tol_at_least(1e-9, 256.0),
            area_rel: T::tol_at_least(1e-9, 256.0),
            normal_separation: T::tol_at_least(1e-9, 16.0),
            closure: T::tol_at_least(1e-9, 256.0),
            inactive_area: T::tol_at_least(1e-13, 64.0),
        }
    }
}
