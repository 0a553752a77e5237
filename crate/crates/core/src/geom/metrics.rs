//! Volume, area and diameter metrics, and the surface-diameter-volume check.

use serde::{Deserialize, Serialize};

use super::mesh::{fan_volume, polygon_area, PolytopeMesh};
use super::GeomError;
use crate::scalar::Real;

/// Metrics recomputed from a mesh's vertices and facet cycles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshMetrics<T> {
    pub volume: T,
    pub facet_areas: Vec<T>,
    pub surface_area: T,
    pub diameter: T,
}

/// Recomputes volume (tetrahedron fan from the centroid), facet areas
/// (triangle fans), surface area and diameter (pairwise scan).
pub fn mesh_metrics<T: Real>(mesh: &PolytopeMesh<T>) -> MeshMetrics<T> {
    let facet_areas: Vec<T> = mesh
        .facets
        .iter()
        .zip(&mesh.normals)
        .map(|(c, &u)| polygon_area(&mesh.vertices, c, u))
        .collect();
    MeshMetrics {
        volume: fan_volume(&mesh.vertices, &mesh.facets),
        surface_area: facet_areas.iter().copied().sum(),
        facet_areas,
        diameter: mesh.diameter(),
    }
}

/// Both sides of `S² > κ₂ · diam · 3V` for a 3-polytope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GwwReport<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// Evaluates the sharp surface-diameter-volume inequality in ℝ³.
///
/// `κ₂ = π` is the area of the unit disc.
pub fn gww_check<T: Real>(mesh: &PolytopeMesh<T>) -> Result<GwwReport<T>, GeomError> {
    let m = mesh_metrics(mesh);
    let flat = T::tol_at_least(1e-12, 64.0) * m.diameter * m.surface_area;
    if !(m.volume > flat) {
        return Err(GeomError::DegenerateInput(format!(
            "mesh has no interior (volume {})",
            m.volume
        )));
    }
    let lhs = m.surface_area * m.surface_area;
    let rhs = T::PI() * m.diameter * T::of(3.0) * m.volume;
    Ok(GwwReport {
        lhs,
        rhs,
        holds: lhs > rhs,
    })
}
