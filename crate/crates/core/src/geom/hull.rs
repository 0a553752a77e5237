//! Incremental (beneath-beyond) convex hull in ℝ³ with coplanar-facet merging.

use std::collections::{HashMap, HashSet};

use super::mesh::PolytopeMesh;
use super::{GeomError, Vec3};
use crate::scalar::Real;
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug)]
struct Tri {
    v: [usize; 3],
    alive: bool,
}

/// Convex hull of a point cloud as a polygonal mesh.
///
/// Interior points and points lying on facets or edges are discarded;
/// coplanar triangles are merged into one facet cycle.
pub fn convex_hull_3d<T: Real>(points: &[Vec3<T>]) -> Result<PolytopeMesh<T>, GeomError> {
    convex_hull_3d_with(points, &Tolerances::default())
}

/// [`convex_hull_3d`] with explicit tolerances.
pub fn convex_hull_3d_with<T: Real>(
    points: &[Vec3<T>],
    tol: &Tolerances<T>,
) -> Result<PolytopeMesh<T>, GeomError> {
    if points.len() < 4 {
        return Err(GeomError::DegenerateInput(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(GeomError::DegenerateInput(format!("point {i} is not finite")));
    }
    let diam = bounding_diagonal(points);
    if !(diam > T::zero()) {
        return Err(GeomError::DegenerateInput("all points coincide".into()));
    }
    let seed = initial_simplex(points, diam, tol)?;
    let visible_eps = T::epsilon() * T::of(64.0) * diam;

    let mut tris: Vec<Tri> = Vec::new();
    let [a, b, c, d] = seed;
    for mut f in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        let other = seed.iter().copied().find(|i| !f.contains(i)).unwrap();
        if signed_distance(points, f, points[other]) > T::zero() {
            f.swap(1, 2);
        }
        tris.push(Tri { v: f, alive: true });
    }

    for (p, &pt) in points.iter().enumerate() {
        if seed.contains(&p) {
            continue;
        }
        let visible: Vec<usize> = tris
            .iter()
            .enumerate()
            .filter(|(_, t)| t.alive && signed_distance(points, t.v, pt) > visible_eps)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for &f in &visible {
            let v = tris[f].v;
            for k in 0..3 {
                edges.insert((v[k], v[(k + 1) % 3]));
            }
            tris[f].alive = false;
        }
        let mut horizon: Vec<(usize, usize)> = edges
            .iter()
            .copied()
            .filter(|&(x, y)| !edges.contains(&(y, x)))
            .collect();
        horizon.sort_unstable();
        for (x, y) in horizon {
            tris.push(Tri {
                v: [x, y, p],
                alive: true,
            });
        }
    }

    let live: Vec<[usize; 3]> = tris.iter().filter(|t| t.alive).map(|t| t.v).collect();
    let groups = merge_coplanar(points, &live, tol.merge * diam);
    let mut cycles = groups
        .iter()
        .map(|g| boundary_cycle(&live, g))
        .collect::<Result<Vec<_>, _>>()?;

    // Vertices shared by fewer than three facets lie on an edge or inside a
    // facet and are not extreme points.
    let mut degree: HashMap<usize, usize> = HashMap::new();
    for c in &cycles {
        for &v in c {
            *degree.entry(v).or_insert(0) += 1;
        }
    }
    for c in &mut cycles {
        c.retain(|v| degree[v] >= 3);
    }

    let mut used: Vec<usize> = degree.iter().filter(|(_, &d)| d >= 3).map(|(&v, _)| v).collect();
    used.sort_unstable();
    let remap: HashMap<usize, usize> = used.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let vertices = used.iter().map(|&v| points[v]).collect();
    let facets = cycles
        .into_iter()
        .map(|c| c.into_iter().map(|v| remap[&v]).collect())
        .collect();
    PolytopeMesh::from_parts(vertices, facets)
}

fn bounding_diagonal<T: Real>(points: &[Vec3<T>]) -> T {
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    (hi - lo).norm()
}

fn signed_distance<T: Real>(points: &[Vec3<T>], f: [usize; 3], p: Vec3<T>) -> T {
    let a = points[f[0]];
    let n = (points[f[1]] - a).cross(points[f[2]] - a);
    let len = n.norm();
    if len == T::zero() {
        return T::zero();
    }
    n.dot(p - a) / len
}

/// Picks four affinely independent points, or reports a flat input.
fn initial_simplex<T: Real>(
    points: &[Vec3<T>],
    diam: T,
    tol: &Tolerances<T>,
) -> Result<[usize; 4], GeomError> {
    let flat = tol.coplanar * diam;
    let i0 = (0..points.len())
        .min_by(|&a, &b| points[a].x.partial_cmp(&points[b].x).unwrap())
        .unwrap();
    let i1 = argmax(points, |p| p.distance(points[i0]));
    let dir = points[i1] - points[i0];
    let i2 = argmax(points, |p| (*p - points[i0]).cross(dir).norm() / dir.norm());
    if (points[i2] - points[i0]).cross(dir).norm() / dir.norm() <= flat {
        return Err(GeomError::DegenerateInput("points are collinear".into()));
    }
    let n = (points[i2] - points[i0]).cross(dir).normalized().unwrap();
    let i3 = argmax(points, |p| (*p - points[i0]).dot(n).abs());
    if (points[i3] - points[i0]).dot(n).abs() <= flat {
        return Err(GeomError::DegenerateInput("points are coplanar".into()));
    }
    Ok([i0, i1, i2, i3])
}

fn argmax<T: Real>(points: &[Vec3<T>], f: impl Fn(&Vec3<T>) -> T) -> usize {
    let mut best = 0;
    let mut val = f(&points[0]);
    for (i, p) in points.iter().enumerate().skip(1) {
        let v = f(p);
        if v > val {
            val = v;
            best = i;
        }
    }
    best
}

/// Flood-fills adjacent triangles whose vertices lie on a common plane.
fn merge_coplanar<T: Real>(points: &[Vec3<T>], tris: &[[usize; 3]], eps: T) -> Vec<Vec<usize>> {
    let mut by_edge: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, t) in tris.iter().enumerate() {
        for k in 0..3 {
            by_edge.insert((t[k], t[(k + 1) % 3]), i);
        }
    }
    let area = |t: &[usize; 3]| {
        (points[t[1]] - points[t[0]])
            .cross(points[t[2]] - points[t[0]])
            .norm()
    };
    // Seed groups from the largest triangles: their planes are the most accurate.
    let mut order: Vec<usize> = (0..tris.len()).collect();
    order.sort_by(|&a, &b| area(&tris[b]).partial_cmp(&area(&tris[a])).unwrap());
    let mut group_of = vec![usize::MAX; tris.len()];
    let mut groups = Vec::new();
    for &seed in &order {
        if group_of[seed] != usize::MAX {
            continue;
        }
        let g = groups.len();
        let st = tris[seed];
        let a = points[st[0]];
        let n = (points[st[1]] - a).cross(points[st[2]] - a).normalized().unwrap_or_else(Vec3::zero);
        let mut members = vec![seed];
        group_of[seed] = g;
        let mut stack = vec![seed];
        while let Some(t) = stack.pop() {
            let v = tris[t];
            for k in 0..3 {
                let Some(&nb) = by_edge.get(&(v[(k + 1) % 3], v[k])) else {
                    continue;
                };
                if group_of[nb] != usize::MAX {
                    continue;
                }
                let on_plane = tris[nb].iter().all(|&i| (points[i] - a).dot(n).abs() <= eps);
                if on_plane {
                    group_of[nb] = g;
                    members.push(nb);
                    stack.push(nb);
                }
            }
        }
        groups.push(members);
    }
    groups
}

/// Boundary cycle of a merged group of consistently oriented triangles.
fn boundary_cycle(tris: &[[usize; 3]], group: &[usize]) -> Result<Vec<usize>, GeomError> {
    let mut directed = HashSet::new();
    for &t in group {
        let v = tris[t];
        for k in 0..3 {
            directed.insert((v[k], v[(k + 1) % 3]));
        }
    }
    let mut next: HashMap<usize, usize> = HashMap::new();
    for &(a, b) in &directed {
        if !directed.contains(&(b, a)) && next.insert(a, b).is_some() {
            return Err(GeomError::DegenerateInput(
                "merged facet boundary is not a simple cycle".into(),
            ));
        }
    }
    let start = *next.keys().min().ok_or_else(|| {
        GeomError::DegenerateInput("merged facet has no boundary".into())
    })?;
    let mut cycle = vec![start];
    let mut cur = next[&start];
    while cur != start {
        if cycle.len() > next.len() {
            return Err(GeomError::DegenerateInput("facet boundary does not close".into()));
        }
        cycle.push(cur);
        cur = *next
            .get(&cur)
            .ok_or_else(|| GeomError::DegenerateInput("broken facet boundary".into()))?;
    }
    if cycle.len() != next.len() {
        return Err(GeomError::DegenerateInput("facet boundary has several loops".into()));
    }
    Ok(cycle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_points() -> Vec<Vec3<f64>> {
        (0..8)
            .map(|i| Vec3::of((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect()
    }

    #[test]
    fn cube_has_six_square_facets() {
        let m = convex_hull_3d(&cube_points()).unwrap();
        assert_eq!(m.facet_count(), 6);
        assert_eq!(m.vertices.len(), 8);
        assert!((m.volume - 1.0).abs() < 1e-14);
        assert!(m.facets.iter().all(|f| f.len() == 4));
        m.validate(&Tolerances::default()).unwrap();
    }

    #[test]
    fn interior_edge_and_face_points_are_dropped() {
        let mut pts = cube_points();
        pts.push(Vec3::of(0.5, 0.5, 0.5));
        pts.push(Vec3::of(0.5, 0.0, 0.0));
        pts.push(Vec3::of(0.5, 0.5, 1.0));
        pts.insert(0, Vec3::of(0.25, 0.0, 0.0));
        let m = convex_hull_3d(&pts).unwrap();
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.facet_count(), 6);
        assert!((m.volume - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coplanar_points_are_degenerate() {
        let pts: Vec<Vec3<f64>> = (0..5)
            .map(|i| {
                let a = i as f64;
                Vec3::of(a.cos(), a.sin(), 0.0)
            })
            .collect();
        assert!(matches!(convex_hull_3d(&pts), Err(GeomError::DegenerateInput(_))));
        assert!(matches!(
            convex_hull_3d(&pts[..3]),
            Err(GeomError::DegenerateInput(_))
        ));
    }

    #[test]
    fn needle_tetrahedron_areas() {
        let e = 0.1f64;
        let z = (1.0 - e.powi(4) / 4.0).sqrt() / e;
        let pts: Vec<Vec3<f64>> = vec![
            Vec3::of(e, 0.0, -z),
            Vec3::of(-e, 0.0, -z),
            Vec3::of(0.0, e, z),
            Vec3::of(0.0, -e, z),
        ];
        let m = convex_hull_3d(&pts).unwrap();
        assert_eq!(m.facet_count(), 4);
        for &a in &m.areas {
            assert!((a - 2.0).abs() < 1e-12, "area {a}");
        }
        let v = 4.0 * e / 3.0 * (1.0 - e.powi(4) / 4.0).sqrt();
        assert!((m.volume - v).abs() < 1e-13);
    }

    #[test]
    fn f32_hull_of_cube() {
        let pts: Vec<Vec3<f32>> = cube_points().into_iter().map(|p| p.cast()).collect();
        let m = convex_hull_3d(&pts).unwrap();
        assert_eq!(m.facet_count(), 6);
        assert!((m.volume - 1.0).abs() < 1e-5);
    }
}
