//! Independent verification oracles: Monte Carlo volume, Cayley–Menger
//! simplex volumes, angle-based triangle areas from model coordinates, and
//! a random sampler of convex polygons with prescribed side lengths.
//!
//! Random streams use `ChaCha8Rng::seed_from_u64(seed)` split into
//! [`STREAMS`] independent streams with `set_stream`, so results depend only
//! on the seed and never on the thread count.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geom::{PolytopeMesh, Vec3};
use crate::linalg::det;
use crate::noneuclid::{angle_from_sides, triangle_area_from_sides, Geometry, NoneuclidError};
use crate::scalar::Real;
use crate::tetra::{model_inner, ModelPoint};

/// Number of independent random streams a job is split into.
pub const STREAMS: u64 = 16;

/// Errors raised by the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("Cayley–Menger determinant has the wrong sign: squared volume {0:e}")]
    NegativeDeterminant(f64),
    #[error("degenerate face: {0}")]
    DegenerateFace(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Trig(#[from] NoneuclidError),
}

type Result<T, E = OracleError> = std::result::Result<T, E>;

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn chunk_sizes(n: usize) -> Vec<usize> {
    let k = STREAMS as usize;
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

/// Monte Carlo volume estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// `√(p(1−p)/N)` times the box volume; infinite when `N = 0`.
    pub stderr: f64,
    pub samples: usize,
    pub hits: usize,
    pub box_volume: f64,
}

/// Rejection-sampling volume of a convex mesh inside its bounding box.
pub fn mc_volume<T: Real>(mesh: &PolytopeMesh<T>, samples: usize, seed: u64) -> McEstimate {
    let verts: Vec<[f64; 3]> = mesh.vertices.iter().map(|v| v.to_array().map(|c| c.f64())).collect();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in &verts {
        for i in 0..3 {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    let box_volume = if verts.is_empty() { 0.0 } else { (0..3).map(|i| hi[i] - lo[i]).product() };
    if samples == 0 {
        return McEstimate { estimate: 0.0, stderr: f64::INFINITY, samples, hits: 0, box_volume };
    }
    let planes: Vec<([f64; 3], f64)> = (0..mesh.facet_count())
        .map(|f| (mesh.normals[f].to_array().map(|c| c.f64()), mesh.facet_offset(f).f64()))
        .collect();
    let inside = |p: [f64; 3]| planes.iter().all(|(n, d)| n[0] * p[0] + n[1] * p[1] + n[2] * p[2] <= *d);
    let hits: usize = chunk_sizes(samples)
        .into_par_iter()
        .enumerate()
        .map(|(i, n)| {
            let mut rng = stream(seed, i as u64);
            (0..n)
                .filter(|_| {
                    let p: [f64; 3] = std::array::from_fn(|k| lo[k] + (hi[k] - lo[k]) * rng.gen::<f64>());
                    inside(p)
                })
                .count()
        })
        .sum();
    let p = hits as f64 / samples as f64;
    McEstimate {
        estimate: p * box_volume,
        stderr: (p * (1.0 - p) / samples as f64).sqrt() * box_volume,
        samples,
        hits,
        box_volume,
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `k`-volume of the simplex with the given squared pairwise distances.
pub fn cayley_menger_from_squared<T: Real>(d2: &[Vec<T>]) -> Result<T> {
    let n = d2.len();
    if n < 2 || d2.iter().any(|r| r.len() != n) {
        return Err(OracleError::InvalidInput("need a square matrix for at least two points".into()));
    }
    let k = n - 1;
    let mut cm = vec![vec![T::one(); n + 1]; n + 1];
    cm[0][0] = T::zero();
    let scale = d2.iter().flatten().fold(T::zero(), |m, &v| m.max(v.abs()));
    for i in 0..n {
        for j in 0..n {
            cm[i + 1][j + 1] = d2[i][j];
        }
    }
    let sign = if (k + 1).is_multiple_of(2) { T::one() } else { -T::one() };
    let denom = T::of(2f64.powi(k as i32) * factorial(k).powi(2));
    let v2 = sign * det(&cm) / denom;
    let floor = T::tol_at_least(1e-12, 64.0) * scale.max(T::one()).powi(k as i32);
    if v2 < -floor || !v2.is_finite() {
        return Err(OracleError::NegativeDeterminant(v2.f64()));
    }
    Ok(v2.max(T::zero()).sqrt())
}

/// `k`-volume of the simplex spanned by `k+1` points of any dimension.
pub fn cayley_menger_volume<T: Real>(points: &[Vec<T>]) -> Result<T> {
    let d2: Vec<Vec<T>> = points
        .iter()
        .map(|p| {
            points
                .iter()
                .map(|q| p.iter().zip(q).map(|(&a, &b)| (a - b) * (a - b)).sum())
                .collect()
        })
        .collect();
    cayley_menger_from_squared(&d2)
}

/// Sum of the Cayley–Menger volumes of the tetrahedra fanning a mesh from
/// its first vertex.
pub fn cayley_menger_mesh_volume<T: Real>(mesh: &PolytopeMesh<T>) -> Result<T> {
    let apex = mesh.vertices[0];
    let as_vec = |v: Vec3<T>| v.to_array().to_vec();
    let mut total = T::zero();
    for cycle in &mesh.facets {
        if cycle.contains(&0) {
            continue;
        }
        for w in 1..cycle.len() - 1 {
            let pts = [apex, mesh.vertices[cycle[0]], mesh.vertices[cycle[w]], mesh.vertices[cycle[w + 1]]];
            total = total + cayley_menger_volume(&pts.map(as_vec))?;
        }
    }
    Ok(total)
}

/// Area of a geodesic triangle from its vertex coordinates: angle defect
/// (hyperbolic) or excess (spherical), with angles measured between
/// tangent vectors. Euclidean points use the first three coordinates.
pub fn angle_area_oracle<T: Real>(v: &[ModelPoint<T>; 3], g: Geometry) -> Result<T> {
    let gram: Vec<Vec<T>> = (0..3).map(|i| (0..3).map(|j| model_inner(&v[i], &v[j], g)).collect()).collect();
    if g == Geometry::Euclidean {
        let p = v.map(|q| Vec3::new(q[0], q[1], q[2]));
        let area = (p[1] - p[0]).cross(p[2] - p[0]).norm() / T::of(2.0);
        let size = p[0].distance(p[1]).max(p[1].distance(p[2])).max(p[0].distance(p[2]));
        if area <= T::tol_at_least(1e-14, 16.0) * size * size {
            return Err(OracleError::DegenerateFace("collinear points".into()));
        }
        return Ok(area);
    }
    if det(&gram).abs() <= T::tol_at_least(1e-20, 16.0) {
        return Err(OracleError::DegenerateFace("the three points lie on one geodesic".into()));
    }
    let sign = match g {
        Geometry::Hyperbolic => T::one(),
        _ => -T::one(),
    };
    let tangent = |p: usize, q: usize| -> [T; 4] {
        // Projection of v_q onto the tangent space at v_p.
        let c = gram[p][q] * sign;
        std::array::from_fn(|i| v[q][i] + c * v[p][i])
    };
    let angle = |p: usize, q: usize, r: usize| -> T {
        let (u, w) = (tangent(p, q), tangent(p, r));
        let uu = model_inner(&u, &u, g);
        let ww = model_inner(&w, &w, g);
        let uw = model_inner(&u, &w, g);
        (uu * ww - uw * uw).max(T::zero()).sqrt().atan2(uw)
    };
    let sum = angle(0, 1, 2) + angle(1, 2, 0) + angle(2, 0, 1);
    Ok(match g {
        Geometry::Hyperbolic => T::PI() - sum,
        _ => sum - T::PI(),
    })
}

/// Outcome of [`sample_polygon_areas`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleReport {
    pub min_area: f64,
    pub max_area: f64,
    pub accepted: usize,
    pub attempts: usize,
}

/// Attempts allowed per requested trial before giving up.
const ATTEMPTS_PER_TRIAL: usize = 1000;

/// Draws one convex polygon with the given sides (in the given order) as a
/// fan from the first vertex. Returns its area, or `None` if the draw is
/// not convex.
fn draw_convex<R: Rng>(s: &[f64], g: Geometry, rng: &mut R) -> Result<Option<f64>> {
    let m = s.len();
    let cap = match g {
        Geometry::Spherical => std::f64::consts::PI,
        _ => f64::INFINITY,
    };
    // Diagonals d[k] = |P_0 P_k| for k = 1..m-1, with d[1] = s_0, d[m-1] = s_{m-1}.
    let mut d = vec![0.0; m];
    d[1] = s[0];
    d[m - 1] = s[m - 1];
    for k in 1..m - 2 {
        let rest: f64 = s[k + 1..].iter().sum();
        let rest_max = s[k + 1..].iter().cloned().fold(0.0, f64::max);
        let lo = (d[k] - s[k]).abs().max(2.0 * rest_max - rest).max(0.0);
        let hi = (d[k] + s[k]).min(rest).min(cap);
        if !(hi > lo) {
            return Ok(None);
        }
        d[k + 1] = rng.gen_range(lo..hi);
    }
    // Triangle k has vertices P_0, P_k, P_{k+1}: sides d[k], s[k], d[k+1].
    let mut area = 0.0;
    let mut at_p0 = 0.0;
    let mut at_vertex = vec![0.0; m];
    for k in 1..m - 1 {
        let (a, b, c) = (d[k], s[k], d[k + 1]);
        if a + b < c || b + c < a || a + c < b {
            return Ok(None);
        }
        let tri = match triangle_area_from_sides(a, b, c, g) {
            Ok(v) => v,
            Err(NoneuclidError::InvalidTriple(_)) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        area += tri;
        at_p0 += angle_from_sides(a, c, b, g);
        at_vertex[k] += angle_from_sides(a, b, c, g);
        at_vertex[k + 1] += angle_from_sides(b, c, a, g);
    }
    let straight = std::f64::consts::PI + 1e-12;
    if at_p0 > straight || at_vertex[1..].iter().any(|&a| a > straight) {
        return Ok(None);
    }
    Ok(Some(area))
}

/// Minimum area over random convex realizations of the side lengths `s`.
///
/// Each trial takes a random side order and random fan diagonals from the
/// first vertex, each uniform within its triangle-inequality range; draws
/// that are not convex are rejected. `trials` counts accepted samples.
pub fn sample_polygon_areas(s: &[f64], g: Geometry, trials: usize, seed: u64) -> Result<SampleReport> {
    let m = s.len();
    if m < 3 || s.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(OracleError::InvalidInput("need at least three positive sides".into()));
    }
    let total: f64 = s.iter().sum();
    let max = s.iter().cloned().fold(0.0, f64::max);
    if max >= total - max {
        return Err(OracleError::Infeasible(format!("longest side {max} is not below the sum of the others")));
    }
    if g == Geometry::Spherical && total >= std::f64::consts::TAU {
        return Err(OracleError::Infeasible("spherical perimeter must be below 2π".into()));
    }
    let results: Vec<Result<SampleReport>> = chunk_sizes(trials)
        .into_par_iter()
        .enumerate()
        .map(|(i, want)| {
            let mut rng = stream(seed, i as u64);
            let mut order = s.to_vec();
            let mut rep = SampleReport { min_area: f64::INFINITY, max_area: 0.0, accepted: 0, attempts: 0 };
            while rep.accepted < want && rep.attempts < want * ATTEMPTS_PER_TRIAL {
                rep.attempts += 1;
                order.shuffle(&mut rng);
                if let Some(a) = draw_convex(&order, g, &mut rng)? {
                    rep.accepted += 1;
                    rep.min_area = rep.min_area.min(a);
                    rep.max_area = rep.max_area.max(a);
                }
            }
            Ok(rep)
        })
        .collect();
    let mut out = SampleReport { min_area: f64::INFINITY, max_area: 0.0, accepted: 0, attempts: 0 };
    for r in results {
        let r = r?;
        out.min_area = out.min_area.min(r.min_area);
        out.max_area = out.max_area.max(r.max_area);
        out.accepted += r.accepted;
        out.attempts += r.attempts;
    }
    if trials > 0 && out.accepted == 0 {
        return Err(OracleError::Infeasible("no convex realization was drawn".into()));
    }
    Ok(out)
}
