//! Intersection of halfspaces `⟨x, u_i⟩ ≤ h_i` in ℝ³.
//!
//! Vertices are enumerated from plane triples and filtered for feasibility;
//! each active plane then collects its incident vertices in angular order.
//! The number of planes is small in every use, so the cubic enumeration is
//! cheaper and more robust than a dual hull with an interior-point pass.

use std::collections::BTreeMap;

use super::hull::convex_hull_3d_with;
use super::mesh::{polygon_area, PolytopeMesh, SupportVector, SurfaceData};
use super::{GeomError, Vec3};
use crate::scalar::Real;
use crate::tolerances::Tolerances;

/// An edge shared by two active facets, identified by input plane indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FacetEdge<T> {
    pub a: usize,
    pub b: usize,
    pub length: T,
}

/// Result of a halfspace intersection with per-plane bookkeeping.
#[derive(Clone, Debug)]
pub struct HalfspacePolytope<T> {
    pub mesh: PolytopeMesh<T>,
    /// Input plane index of each mesh facet.
    pub facet_source: Vec<usize>,
    /// Facet area per input plane; zero for inactive planes.
    pub areas: Vec<T>,
    /// Whether each input plane carries a facet of positive area.
    pub active: Vec<bool>,
    /// Edges between active facets.
    pub edges: Vec<FacetEdge<T>>,
}

impl<T: Real> HalfspacePolytope<T> {
    pub fn volume(&self) -> T {
        self.mesh.volume
    }

    /// First inactive plane, if any.
    pub fn first_inactive(&self) -> Option<usize> {
        self.active.iter().position(|a| !a)
    }
}

/// Realizes `P(h) = ∩ {x : ⟨x, u_i⟩ ≤ h_i}` for the normals of `data`.
pub fn halfspace_intersection_3d<T: Real>(
    data: &SurfaceData<T>,
    h: &SupportVector<T>,
) -> Result<HalfspacePolytope<T>, GeomError> {
    intersect_halfspaces(&data.normals, &h.h, &Tolerances::default())
}

/// Checks that the normals positively span ℝ³, which is equivalent to
/// every `P(h)` being bounded.
pub fn normals_positively_span<T: Real>(normals: &[Vec3<T>], tol: &Tolerances<T>) -> bool {
    let Ok(hull) = convex_hull_3d_with(normals, tol) else {
        return false;
    };
    let eps = T::tol_at_least(1e-12, 64.0);
    (0..hull.facet_count()).all(|f| hull.facet_offset(f) > eps)
}

/// Core intersection routine working on raw normals and offsets.
pub fn intersect_halfspaces<T: Real>(
    normals: &[Vec3<T>],
    h: &[T],
    tol: &Tolerances<T>,
) -> Result<HalfspacePolytope<T>, GeomError> {
    let m = normals.len();
    if h.len() != m {
        return Err(GeomError::InvalidSurfaceData(format!(
            "{m} normals but {} support numbers",
            h.len()
        )));
    }
    if m < 4 || !normals_positively_span(normals, tol) {
        return Err(GeomError::Unbounded);
    }
    if let Some(i) = h.iter().position(|x| !x.is_finite()) {
        return Err(GeomError::InvalidSurfaceData(format!("support number {i} is not finite")));
    }

    let scale = h.iter().fold(T::zero(), |acc, &x| acc.max(x.abs())).max(T::min_positive_value());
    let feas = T::tol_at_least(1e-11, 256.0) * scale;
    let det_eps = T::tol_at_least(1e-14, 16.0);

    let mut vertices: Vec<Vec3<T>> = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let uij = normals[i].cross(normals[j]);
            for k in (j + 1)..m {
                let det = uij.dot(normals[k]);
                if det.abs() <= det_eps {
                    continue;
                }
                let x = (normals[j].cross(normals[k]) * h[i]
                    + normals[k].cross(normals[i]) * h[j]
                    + uij * h[k])
                    / det;
                if !x.is_finite() {
                    continue;
                }
                let feasible = (0..m).all(|l| x.dot(normals[l]) - h[l] <= feas);
                if feasible && !vertices.iter().any(|v| v.distance(x) <= feas) {
                    vertices.push(x);
                }
            }
        }
    }
    if vertices.len() < 4 {
        return Err(GeomError::Empty(format!(
            "only {} feasible vertices",
            vertices.len()
        )));
    }

    let mut facets = Vec::new();
    let mut facet_normals = Vec::new();
    let mut facet_source = Vec::new();
    let mut areas = vec![T::zero(); m];
    let mut active = vec![false; m];
    let area_floor = tol.inactive_area * scale * scale;
    for i in 0..m {
        let u = normals[i];
        let incident: Vec<usize> = (0..vertices.len())
            .filter(|&v| (vertices[v].dot(u) - h[i]).abs() <= feas)
            .collect();
        if incident.len() < 3 {
            continue;
        }
        let cycle = angular_order(&vertices, &incident, u);
        let area = polygon_area(&vertices, &cycle, u);
        if area > area_floor {
            areas[i] = area;
            active[i] = true;
            facets.push(cycle);
            facet_normals.push(u);
            facet_source.push(i);
        }
    }
    if facets.len() < 4 {
        return Err(GeomError::Empty("intersection is lower-dimensional".into()));
    }

    // Keep only vertices that appear on some facet, in first-use order.
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::new();
    for cycle in &mut facets {
        for v in cycle.iter_mut() {
            if remap[*v] == usize::MAX {
                remap[*v] = kept.len();
                kept.push(vertices[*v]);
            }
            *v = remap[*v];
        }
    }

    let mut owners: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (f, cycle) in facets.iter().enumerate() {
        for k in 0..cycle.len() {
            let a = cycle[k];
            let b = cycle[(k + 1) % cycle.len()];
            owners.entry((a.min(b), a.max(b))).or_default().push(facet_source[f]);
        }
    }
    let edges = owners
        .into_iter()
        .filter(|(_, fs)| fs.len() == 2)
        .map(|((a, b), fs)| FacetEdge {
            a: fs[0].min(fs[1]),
            b: fs[0].max(fs[1]),
            length: kept[a].distance(kept[b]),
        })
        .collect();

    let mesh = PolytopeMesh::with_normals(kept, facets, facet_normals);
    if !(mesh.volume > T::zero()) {
        return Err(GeomError::Empty("intersection has no interior".into()));
    }
    Ok(HalfspacePolytope {
        mesh,
        facet_source,
        areas,
        active,
        edges,
    })
}

/// Sorts coplanar vertices counterclockwise as seen from the side `u` points to.
fn angular_order<T: Real>(vertices: &[Vec3<T>], idx: &[usize], u: Vec3<T>) -> Vec<usize> {
    let c = idx.iter().map(|&i| vertices[i]).sum::<Vec3<T>>() / T::of_usize(idx.len());
    let e1 = u.any_orthogonal();
    let e2 = u.cross(e1);
    let mut keyed: Vec<(T, usize)> = idx
        .iter()
        .map(|&i| {
            let d = vertices[i] - c;
            (d.dot(e2).atan2(d.dot(e1)), i)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    keyed.into_iter().map(|(_, i)| i).collect()
}
