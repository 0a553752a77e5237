//! Fixtures shared by the integration tests.

#![allow(dead_code)]

use facetforge::geom::{convex_hull_3d, intersect_halfspaces, SupportVector, SurfaceData, Vec3};
use facetforge::noneuclid::Geometry;
use facetforge::tetra::check_hypotheses;
use facetforge::{Mesh, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cube_data() -> SurfaceData<f64> {
    let n: Vec<Vec3<f64>> = (0..3).flat_map(|i| [Vec3::unit(i), -Vec3::unit(i)]).collect();
    SurfaceData::new(n, vec![1.0; 6]).unwrap()
}

/// Outward normals of a regular tetrahedron, each face of area `√3/4`.
pub fn regular_tetra_data() -> SurfaceData<f64> {
    let dirs = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    let n = dirs.iter().map(|d| Vec3::of(-d[0], -d[1], -d[2])).collect();
    SurfaceData::from_directions(n, vec![3f64.sqrt() / 4.0; 4]).unwrap()
}

pub fn unit_cube_mesh() -> Mesh {
    let pts: Vec<Vec3<f64>> = (0..8)
        .map(|i| Vec3::of((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    convex_hull_3d(&pts).unwrap()
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3<f64> {
    loop {
        let v = Vec3::of(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v * (1.0 / n);
        }
    }
}

/// A random polytope `P(h)` with `m` facets, all active, from a seed.
/// Returns the normals, the support numbers and the facet areas.
///
/// Draws whose normals nearly fit in a half-space give long slivers with
/// facet areas spread over several orders of magnitude; those are rejected
/// by capping the diameter, so every instance is well conditioned.
pub fn random_polytope(seed: u64, m: usize) -> (Vec<Vec3<f64>>, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let normals: Vec<Vec3<f64>> = (0..m).map(|_| random_unit(&mut rng)).collect();
        let h: Vec<f64> = (0..m).map(|_| rng.gen_range(0.8..1.2)).collect();
        let Ok(p) = intersect_halfspaces(&normals, &h, &Tolerances::default()) else { continue };
        if p.active.iter().all(|&a| a) && p.areas.iter().all(|&a| a > 1e-2) && p.mesh.diameter() < 8.0 {
            let areas = p.areas.clone();
            return (normals, h, areas);
        }
    }
}

pub fn support(h: &[f64]) -> SupportVector<f64> {
    SupportVector::new(h.to_vec())
}

/// Sorted facet-area quadruples drawn uniformly from `(lo, hi)^4` and kept
/// when the existence hypotheses hold for `g` (all-equal draws excluded).
pub fn tetra_instances(g: Geometry, count: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut s: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.05..1.5));
        s.sort_by(f64::total_cmp);
        let r = check_hypotheses(&s, g).unwrap();
        if r.holds() && !r.all_equal {
            out.push(s);
        }
    }
    out
}
