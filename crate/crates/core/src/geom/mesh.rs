//! Polytope meshes and the Minkowski-problem input types.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{GeomError, Vec3};
use crate::scalar::Real;
use crate::tolerances::Tolerances;

/// Finite surface-area measure: unit normals with positive facet areas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceData<T> {
    pub normals: Vec<Vec3<T>>,
    pub areas: Vec<T>,
}

impl<T: Real> SurfaceData<T> {
    /// Validates unit normals, positive areas and pairwise distinct normals.
    pub fn new(normals: Vec<Vec3<T>>, areas: Vec<T>) -> Result<Self, GeomError> {
        let data = Self { normals, areas };
        data.validate(&Tolerances::default())?;
        Ok(data)
    }

    /// Normalizes the given directions before validating.
    pub fn from_directions(directions: Vec<Vec3<T>>, areas: Vec<T>) -> Result<Self, GeomError> {
        let normals = directions
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                d.normalized()
                    .ok_or_else(|| GeomError::InvalidSurfaceData(format!("normal {i} is zero")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(normals, areas)
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn validate(&self, tol: &Tolerances<T>) -> Result<(), GeomError> {
        if self.normals.len() != self.areas.len() {
            return Err(GeomError::InvalidSurfaceData(format!(
                "{} normals but {} areas",
                self.normals.len(),
                self.areas.len()
            )));
        }
        for (i, (u, &s)) in self.normals.iter().zip(&self.areas).enumerate() {
            if !u.is_finite() || (u.norm() - T::one()).abs() > tol.unit_norm {
                return Err(GeomError::InvalidSurfaceData(format!(
                    "normal {i} is not a unit vector (norm {})",
                    u.norm()
                )));
            }
            if !(s > T::zero()) || !s.is_finite() {
                return Err(GeomError::InvalidSurfaceData(format!(
                    "area {i} must be positive and finite, got {s}"
                )));
            }
        }
        for i in 0..self.normals.len() {
            for j in (i + 1)..self.normals.len() {
                if self.normals[i].angle_to(self.normals[j]) <= tol.normal_separation {
                    return Err(GeomError::InvalidSurfaceData(format!(
                        "normals {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same normals with every area multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            normals: self.normals.clone(),
            areas: self.areas.iter().map(|&a| a * factor).collect(),
        }
    }
}

/// Support numbers `h_i` defining `P(h) = ∩ {x : ⟨x, u_i⟩ ≤ h_i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportVector<T> {
    pub h: Vec<T>,
}

impl<T: Real> SupportVector<T> {
    pub fn new(h: Vec<T>) -> Self {
        Self { h }
    }

    pub fn constant(m: usize, value: T) -> Self {
        Self::new(vec![value; m])
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Support numbers of the polytope translated by `v`.
    pub fn translated(&self, normals: &[Vec3<T>], v: Vec3<T>) -> Self {
        Self::new(self.h.iter().zip(normals).map(|(&h, &u)| h + u.dot(v)).collect())
    }
}

/// Vertex/facet representation of a convex 3-polytope.
///
/// Facets are vertex-index cycles ordered counterclockwise when seen from
/// outside. Normals, areas and the volume are cached at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct PolytopeMesh<T> {
    pub vertices: Vec<Vec3<T>>,
    pub facets: Vec<Vec<usize>>,
    pub normals: Vec<Vec3<T>>,
    pub areas: Vec<T>,
    pub volume: T,
}

impl<T: Real> PolytopeMesh<T> {
    /// Builds a mesh from vertices and facet cycles, deriving normals,
    /// areas and volume from the geometry.
    pub fn from_parts(vertices: Vec<Vec3<T>>, facets: Vec<Vec<usize>>) -> Result<Self, GeomError> {
        for (f, cycle) in facets.iter().enumerate() {
            if cycle.len() < 3 {
                return Err(GeomError::InvalidMesh(format!("facet {f} has fewer than 3 vertices")));
            }
            if let Some(&bad) = cycle.iter().find(|&&i| i >= vertices.len()) {
                return Err(GeomError::InvalidMesh(format!(
                    "facet {f} references missing vertex {bad}"
                )));
            }
        }
        let mut normals = Vec::with_capacity(facets.len());
        let mut areas = Vec::with_capacity(facets.len());
        for (f, cycle) in facets.iter().enumerate() {
            let n = newell(&vertices, cycle);
            let len = n.norm();
            let unit = n
                .normalized()
                .ok_or_else(|| GeomError::InvalidMesh(format!("facet {f} has zero area")))?;
            normals.push(unit);
            areas.push(len / T::of(2.0));
        }
        let volume = fan_volume(&vertices, &facets);
        Ok(Self {
            vertices,
            facets,
            normals,
            areas,
            volume,
        })
    }

    /// Builds a mesh whose facet normals are known exactly (halfspace output).
    pub(crate) fn with_normals(
        vertices: Vec<Vec3<T>>,
        facets: Vec<Vec<usize>>,
        normals: Vec<Vec3<T>>,
    ) -> Self {
        let areas = facets
            .iter()
            .zip(&normals)
            .map(|(c, &u)| polygon_area(&vertices, c, u))
            .collect();
        let volume = fan_volume(&vertices, &facets);
        Self {
            vertices,
            facets,
            normals,
            areas,
            volume,
        }
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn surface_area(&self) -> T {
        self.areas.iter().copied().sum()
    }

    /// Maximum pairwise vertex distance (O(V²) scan).
    pub fn diameter(&self) -> T {
        let mut d = T::zero();
        for (i, &a) in self.vertices.iter().enumerate() {
            for &b in &self.vertices[i + 1..] {
                d = d.max(a.distance(b));
            }
        }
        d
    }

    /// Arithmetic mean of the vertices.
    pub fn vertex_centroid(&self) -> Vec3<T> {
        let s: Vec3<T> = self.vertices.iter().copied().sum();
        s / T::of_usize(self.vertices.len().max(1))
    }

    /// Center of mass of the solid polytope.
    pub fn volume_centroid(&self) -> Vec3<T> {
        let c = self.vertex_centroid();
        let mut acc = Vec3::zero();
        let mut vol = T::zero();
        for cycle in &self.facets {
            let a = self.vertices[cycle[0]];
            for k in 1..cycle.len() - 1 {
                let b = self.vertices[cycle[k]];
                let d = self.vertices[cycle[k + 1]];
                let v = Vec3::triple(a - c, b - c, d - c) / T::of(6.0);
                acc += (a + b + d + c) * (v / T::of(4.0));
                vol = vol + v;
            }
        }
        if vol == T::zero() {
            c
        } else {
            acc / vol
        }
    }

    /// Offset of facet `f`'s supporting plane: `⟨v, n_f⟩` averaged over its vertices.
    pub fn facet_offset(&self, f: usize) -> T {
        let n = self.normals[f];
        let cycle = &self.facets[f];
        cycle.iter().map(|&i| self.vertices[i].dot(n)).sum::<T>() / T::of_usize(cycle.len())
    }

    /// Undirected edges, each listed once.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut seen = HashMap::new();
        for cycle in &self.facets {
            for k in 0..cycle.len() {
                let a = cycle[k];
                let b = cycle[(k + 1) % cycle.len()];
                seen.entry((a.min(b), a.max(b))).or_insert(());
            }
        }
        let mut e: Vec<_> = seen.into_keys().collect();
        e.sort_unstable();
        e
    }

    /// `V − E + F`; equals 2 for every closed convex polytope.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.facets.len() as i64
    }

    /// Translates every vertex by `v`, keeping cached quantities.
    pub fn translated(&self, v: Vec3<T>) -> Self {
        let mut out = self.clone();
        for p in &mut out.vertices {
            *p += v;
        }
        out
    }

    /// Scales every vertex by `s > 0` and updates cached quantities.
    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        for p in &mut out.vertices {
            *p = *p * s;
        }
        for a in &mut out.areas {
            *a = *a * s * s;
        }
        out.volume = out.volume * s * s * s;
        out
    }

    /// Checks closedness, orientation, planarity, convexity and cached values.
    pub fn validate(&self, tol: &Tolerances<T>) -> Result<(), GeomError> {
        let diam = self.diameter();
        if !(diam > T::zero()) {
            return Err(GeomError::InvalidMesh("zero diameter".into()));
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (f, cycle) in self.facets.iter().enumerate() {
            for k in 0..cycle.len() {
                let e = (cycle[k], cycle[(k + 1) % cycle.len()]);
                if directed.insert(e, f).is_some() {
                    return Err(GeomError::InvalidMesh(format!(
                        "directed edge {e:?} used twice"
                    )));
                }
            }
        }
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                return Err(GeomError::InvalidMesh(format!("edge ({a},{b}) is a border")));
            }
        }
        for (f, cycle) in self.facets.iter().enumerate() {
            let n = self.normals[f];
            let off = self.facet_offset(f);
            for &i in cycle {
                if (self.vertices[i].dot(n) - off).abs() > tol.planarity * diam {
                    return Err(GeomError::InvalidMesh(format!("facet {f} is not planar")));
                }
            }
            for (i, v) in self.vertices.iter().enumerate() {
                if v.dot(n) - off > tol.planarity * diam {
                    return Err(GeomError::InvalidMesh(format!(
                        "vertex {i} lies outside facet {f}"
                    )));
                }
            }
            let recomputed = polygon_area(&self.vertices, cycle, n);
            if (recomputed - self.areas[f]).abs() > tol.area_rel * self.areas[f].max(T::epsilon()) {
                return Err(GeomError::InvalidMesh(format!("facet {f} area cache mismatch")));
            }
            if !(self.areas[f] > T::zero()) {
                return Err(GeomError::InvalidMesh(format!("facet {f} has zero area")));
            }
        }
        if self.euler_characteristic() != 2 {
            return Err(GeomError::InvalidMesh(format!(
                "Euler characteristic {} != 2",
                self.euler_characteristic()
            )));
        }
        if !(self.volume > T::zero()) {
            return Err(GeomError::InvalidMesh("non-positive volume".into()));
        }
        Ok(())
    }
}

/// Newell's vector of a polygon: twice its area times its unit normal.
pub(crate) fn newell<T: Real>(vertices: &[Vec3<T>], cycle: &[usize]) -> Vec3<T> {
    let c = cycle.iter().map(|&i| vertices[i]).sum::<Vec3<T>>() / T::of_usize(cycle.len());
    let mut n = Vec3::zero();
    for k in 0..cycle.len() {
        let a = vertices[cycle[k]] - c;
        let b = vertices[cycle[(k + 1) % cycle.len()]] - c;
        n += a.cross(b);
    }
    n
}

/// Area of a planar polygon projected on the unit normal `u`.
pub(crate) fn polygon_area<T: Real>(vertices: &[Vec3<T>], cycle: &[usize], u: Vec3<T>) -> T {
    newell(vertices, cycle).dot(u) / T::of(2.0)
}

/// Volume by a signed tetrahedron fan from the vertex centroid.
pub(crate) fn fan_volume<T: Real>(vertices: &[Vec3<T>], facets: &[Vec<usize>]) -> T {
    if vertices.is_empty() {
        return T::zero();
    }
    let c = vertices.iter().copied().sum::<Vec3<T>>() / T::of_usize(vertices.len());
    let mut vol = T::zero();
    for cycle in facets {
        let a = vertices[cycle[0]] - c;
        for k in 1..cycle.len() - 1 {
            let b = vertices[cycle[k]] - c;
            let d = vertices[cycle[k + 1]] - c;
            vol = vol + Vec3::triple(a, b, d);
        }
    }
    vol / T::of(6.0)
}
