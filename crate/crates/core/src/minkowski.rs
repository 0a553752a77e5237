//! Discrete Minkowski problem in ℝ³: find support numbers whose polytope
//! has prescribed facet normals and areas.
//!
//! The solver runs a damped Newton iteration on `A(h) − S`. The area
//! Jacobian is the Hessian of the volume in `h`; it annihilates the three
//! translation directions `h ↦ h + (⟨u_i, t⟩)_i`, so each Newton system is
//! augmented with the gauge constraint `Uᵀ δh = 0`. Iterates are re-centred
//! so the volume centroid stays at the origin.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::halfspace::intersect_halfspaces;
use crate::geom::{GeomError, HalfspacePolytope, PolytopeMesh, SupportVector, SurfaceData, Vec3};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::tolerances::Tolerances;

/// The three solvability conditions with their measured residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// `Σ S_i u_i`.
    pub sum_vector: [f64; 3],
    /// `‖Σ S_i u_i‖`.
    pub sum_norm: f64,
    /// Tolerance the sum norm was compared against (relative to `Σ S_i`).
    pub sum_tolerance: f64,
    /// Rank of the normal set.
    pub span_rank: usize,
    /// Strict `S_max < Σ_{others} S_j`.
    pub max_area_ok: bool,
    /// `Σ_{others} S_j − S_max`.
    pub max_area_margin: f64,
    pub feasible: bool,
}

/// Errors raised by the Minkowski solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MinkowskiError {
    #[error("surface data is not realizable: {0:?}")]
    Infeasible(Box<FeasibilityReport>),
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("facet {0} is inactive")]
    InactiveFacet(usize),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Reports `Σ S_i u_i = 0`, full rank, and the strict largest-area inequality.
pub fn check_feasible<T: Real>(data: &SurfaceData<T>) -> FeasibilityReport {
    let tol = Tolerances::<T>::default();
    let sum: Vec3<T> = data
        .normals
        .iter()
        .zip(&data.areas)
        .map(|(&u, &s)| u * s)
        .sum();
    let total: T = data.areas.iter().copied().sum();
    let sum_tolerance = (tol.closure * total).f64();
    let span_rank = rank(&data.normals, T::tol_at_least(1e-9, 64.0));
    let (max_i, &max_s) = data
        .areas
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap_or((0, &T::zero()));
    let others: T = data
        .areas
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != max_i)
        .map(|(_, &s)| s)
        .sum();
    let max_area_ok = data.len() >= 2 && max_s < others;
    let sum_norm = sum.norm().f64();
    FeasibilityReport {
        sum_vector: [sum.x.f64(), sum.y.f64(), sum.z.f64()],
        sum_norm,
        sum_tolerance,
        span_rank,
        max_area_ok,
        max_area_margin: (others - max_s).f64(),
        feasible: data.len() >= 4 && sum_norm <= sum_tolerance && span_rank == 3 && max_area_ok,
    }
}

/// Numerical rank of a set of 3-vectors.
fn rank<T: Real>(v: &[Vec3<T>], eps: T) -> usize {
    let Some(&a) = v.iter().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap()) else {
        return 0;
    };
    let na = a.norm();
    if na <= eps {
        return 0;
    }
    let a = a / na;
    let b = v
        .iter()
        .map(|&x| a.cross(x))
        .max_by(|p, q| p.norm().partial_cmp(&q.norm()).unwrap())
        .unwrap();
    if b.norm() <= eps {
        return 1;
    }
    let n = b / b.norm();
    let c = v.iter().fold(T::zero(), |acc, &x| acc.max(x.dot(n).abs()));
    if c <= eps {
        2
    } else {
        3
    }
}

/// How the area Jacobian is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JacobianMode {
    /// Edge-length formula.
    Analytic,
    /// Central finite differences with the given step.
    FiniteDifference(f64),
}

/// Options for [`solve_support_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions<T> {
    /// Relative area tolerance: `|A_i − S_i| ≤ tol · S_i`.
    pub tol: T,
    pub max_iter: usize,
    pub jacobian: JacobianMode,
    /// Starting support numbers; defaults to `h = 1`.
    pub initial: Option<SupportVector<T>>,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::tol_at_least(1e-12, 1024.0),
            max_iter: 100,
            jacobian: JacobianMode::Analytic,
            initial: None,
        }
    }
}

/// A converged Minkowski solve.
#[derive(Clone, Debug)]
pub struct MinkowskiSolution<T> {
    pub support: SupportVector<T>,
    pub polytope: HalfspacePolytope<T>,
    pub iterations: usize,
    /// Final `max_i |A_i − S_i| / S_i`.
    pub residual: T,
}

impl<T: Real> MinkowskiSolution<T> {
    pub fn mesh(&self) -> &PolytopeMesh<T> {
        &self.polytope.mesh
    }
}

/// Evaluates `P(h)` for the data's normals.
pub fn polytope<T: Real>(
    data: &SurfaceData<T>,
    h: &SupportVector<T>,
) -> Result<HalfspacePolytope<T>, GeomError> {
    intersect_halfspaces(&data.normals, &h.h, &Tolerances::default())
}

/// `∂A_i/∂h_j` from shared edge lengths and dihedral data.
///
/// Off-diagonal entries are `ℓ_ij / sin θ_ij` for facets sharing an edge of
/// length `ℓ_ij` with normals at angle `θ_ij`; the diagonal is
/// `−Σ_j cos θ_ij · ℓ_ij / sin θ_ij`.
pub fn area_jacobian<T: Real>(
    data: &SurfaceData<T>,
    h: &SupportVector<T>,
) -> Result<Matrix<T>, MinkowskiError> {
    let p = polytope(data, h)?;
    jacobian_of(data, &p)
}

fn jacobian_of<T: Real>(
    data: &SurfaceData<T>,
    p: &HalfspacePolytope<T>,
) -> Result<Matrix<T>, MinkowskiError> {
    if let Some(i) = p.first_inactive() {
        return Err(MinkowskiError::InactiveFacet(i));
    }
    let m = data.len();
    let mut j = Matrix::zeros(m, m);
    for e in &p.edges {
        let (ua, ub) = (data.normals[e.a], data.normals[e.b]);
        let sin = ua.cross(ub).norm();
        let cos = ua.dot(ub);
        let off = e.length / sin;
        j[(e.a, e.b)] = j[(e.a, e.b)] + off;
        j[(e.b, e.a)] = j[(e.b, e.a)] + off;
        j[(e.a, e.a)] = j[(e.a, e.a)] - cos * off;
        j[(e.b, e.b)] = j[(e.b, e.b)] - cos * off;
    }
    Ok(j)
}

/// Central finite-difference area Jacobian.
pub fn area_jacobian_fd<T: Real>(
    data: &SurfaceData<T>,
    h: &SupportVector<T>,
    step: T,
) -> Result<Matrix<T>, MinkowskiError> {
    let m = data.len();
    let mut j = Matrix::zeros(m, m);
    for col in 0..m {
        let mut hp = h.clone();
        let mut hm = h.clone();
        hp.h[col] = hp.h[col] + step;
        hm.h[col] = hm.h[col] - step;
        let (ap, am) = (polytope(data, &hp)?, polytope(data, &hm)?);
        for row in 0..m {
            j[(row, col)] = (ap.areas[row] - am.areas[row]) / (step + step);
        }
    }
    Ok(j)
}

/// Solves for support numbers with the default Newton settings.
pub fn solve_support<T: Real>(
    data: &SurfaceData<T>,
    tol: T,
    max_iter: usize,
) -> Result<(SupportVector<T>, PolytopeMesh<T>), MinkowskiError> {
    let opts = SolveOptions {
        tol,
        max_iter,
        ..SolveOptions::default()
    };
    let sol = solve_support_with(data, &opts)?;
    Ok((sol.support, sol.polytope.mesh))
}

/// Damped, gauge-fixed Newton iteration on `A(h) − S`.
pub fn solve_support_with<T: Real>(
    data: &SurfaceData<T>,
    opts: &SolveOptions<T>,
) -> Result<MinkowskiSolution<T>, MinkowskiError> {
    let report = check_feasible(data);
    if !report.feasible {
        return Err(MinkowskiError::Infeasible(Box::new(report)));
    }
    let m = data.len();
    let mut h = match &opts.initial {
        Some(h0) if h0.len() == m => h0.clone(),
        _ => initial_support(data)?,
    };
    let min_step = T::of(2.0).powi(-20);
    let mut last_residual = T::infinity();

    for iter in 0..=opts.max_iter {
        let mut p = reactivate(data, &mut h)?;
        recenter(data, &mut h, &p);
        p = polytope(data, &h)?;

        let (res, rel) = residuals(data, &p);
        last_residual = rel;
        if rel <= opts.tol {
            return Ok(MinkowskiSolution {
                support: h,
                polytope: p,
                iterations: iter,
                residual: rel,
            });
        }
        if iter == opts.max_iter {
            break;
        }

        let jac = match opts.jacobian {
            JacobianMode::Analytic => jacobian_of(data, &p)?,
            JacobianMode::FiniteDifference(step) => area_jacobian_fd(data, &h, T::of(step))?,
        };
        let Some(dh) = gauge_newton_step(&jac, &data.normals, &res) else {
            break;
        };

        let norm0 = weighted_norm(data, &res);
        let mut step = T::one();
        let mut accepted = false;
        while step >= min_step {
            let trial = SupportVector::new(
                h.h.iter().zip(&dh).map(|(&a, &d)| a + d * step).collect(),
            );
            if let Ok(pt) = polytope(data, &trial) {
                if pt.first_inactive().is_none() {
                    let (rt, _) = residuals(data, &pt);
                    if weighted_norm(data, &rt) < norm0 {
                        h = trial;
                        accepted = true;
                        break;
                    }
                }
            }
            step = step / T::of(2.0);
        }
        if !accepted {
            return Err(MinkowskiError::NotConverged {
                iterations: iter,
                residual: rel.f64(),
            });
        }
    }
    Err(MinkowskiError::NotConverged {
        iterations: opts.max_iter,
        residual: last_residual.f64(),
    })
}

/// `h = c · 1`, scaled so the total area matches the target.
fn initial_support<T: Real>(data: &SurfaceData<T>) -> Result<SupportVector<T>, MinkowskiError> {
    let h = SupportVector::constant(data.len(), T::one());
    let p = polytope(data, &h)?;
    let target: T = data.areas.iter().copied().sum();
    let have: T = p.areas.iter().copied().sum();
    let c = (target / have).sqrt();
    Ok(SupportVector::new(h.h.iter().map(|&x| x * c).collect()))
}

/// Pulls vanished facets back onto the polytope by lowering their `h_i`.
fn reactivate<T: Real>(
    data: &SurfaceData<T>,
    h: &mut SupportVector<T>,
) -> Result<HalfspacePolytope<T>, MinkowskiError> {
    let mut p = polytope(data, h)?;
    let mut guard = 0;
    while let Some(i) = p.first_inactive() {
        guard += 1;
        if guard > 4 * data.len() {
            return Err(MinkowskiError::InactiveFacet(i));
        }
        let u = data.normals[i];
        let proj: Vec<T> = p.mesh.vertices.iter().map(|v| v.dot(u)).collect();
        let hi = proj.iter().copied().fold(T::neg_infinity(), T::max);
        let lo = proj.iter().copied().fold(T::infinity(), T::min);
        let width = hi - lo;
        let wanted = data.areas[i] * T::of(1e-3);
        let mut eta = T::of(1e-3);
        loop {
            h.h[i] = hi - width * eta;
            p = polytope(data, h)?;
            if p.areas[i] >= wanted || eta >= T::of(0.5) {
                break;
            }
            eta = eta + eta;
        }
    }
    Ok(p)
}

/// Translates `P(h)` so its volume centroid sits at the origin.
fn recenter<T: Real>(data: &SurfaceData<T>, h: &mut SupportVector<T>, p: &HalfspacePolytope<T>) {
    let c = p.mesh.volume_centroid();
    *h = h.translated(&data.normals, -c);
}

fn residuals<T: Real>(data: &SurfaceData<T>, p: &HalfspacePolytope<T>) -> (Vec<T>, T) {
    let r: Vec<T> = p.areas.iter().zip(&data.areas).map(|(&a, &s)| a - s).collect();
    let rel = r
        .iter()
        .zip(&data.areas)
        .fold(T::zero(), |acc, (&x, &s)| acc.max(x.abs() / s));
    (r, rel)
}

fn weighted_norm<T: Real>(data: &SurfaceData<T>, r: &[T]) -> T {
    r.iter()
        .zip(&data.areas)
        .fold(T::zero(), |acc, (&x, &s)| acc + (x / s) * (x / s))
        .sqrt()
}

/// Solves `[J U; Uᵀ 0] [δh; λ] = [−r; 0]`.
fn gauge_newton_step<T: Real>(jac: &Matrix<T>, normals: &[Vec3<T>], r: &[T]) -> Option<Vec<T>> {
    let m = normals.len();
    let mut a = Matrix::zeros(m + 3, m + 3);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] = jac[(i, j)];
        }
        for k in 0..3 {
            a[(i, m + k)] = normals[i].get(k);
            a[(m + k, i)] = normals[i].get(k);
        }
    }
    let mut b = vec![T::zero(); m + 3];
    for i in 0..m {
        b[i] = -r[i];
    }
    let x = a.solve(&b)?;
    let dh: Vec<T> = x[..m].to_vec();
    dh.iter().all(|v| v.is_finite()).then_some(dh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_data(areas: [f64; 6]) -> SurfaceData<f64> {
        SurfaceData::new(
            vec![
                Vec3::unit(0),
                -Vec3::unit(0),
                Vec3::unit(1),
                -Vec3::unit(1),
                Vec3::unit(2),
                -Vec3::unit(2),
            ],
            areas.to_vec(),
        )
        .unwrap()
    }

    fn tetra_data(a: f64) -> SurfaceData<f64> {
        SurfaceData::from_directions(
            vec![
                Vec3::of(1.0, 1.0, 1.0),
                Vec3::of(1.0, -1.0, -1.0),
                Vec3::of(-1.0, 1.0, -1.0),
                Vec3::of(-1.0, -1.0, 1.0),
            ],
            vec![a; 4],
        )
        .unwrap()
    }

    #[test]
    fn feasibility_reports() {
        assert!(check_feasible(&cube_data([1.0; 6])).feasible);
        let bad = check_feasible(&cube_data([5.0, 1.0, 1.0, 1.0, 1.0, 1.0]));
        assert!(!bad.feasible);
        assert!((bad.sum_norm - 4.0).abs() < 1e-15);
        let planar: Vec<Vec3<f64>> = (0..5)
            .map(|i| {
                let a = i as f64 * 1.2566370614359172;
                Vec3::of(a.cos(), a.sin(), 0.0)
            })
            .collect();
        let r = check_feasible(&SurfaceData::new(planar, vec![1.0; 5]).unwrap());
        assert_eq!(r.span_rank, 2);
        assert!(!r.feasible);
    }

    #[test]
    fn cube_jacobian_entries() {
        let d = cube_data([1.0; 6]);
        let h = SupportVector::new(vec![0.5; 6]);
        let j = area_jacobian(&d, &h).unwrap();
        assert!((j[(0, 2)] - 1.0).abs() < 1e-14);
        assert!(j[(0, 1)].abs() < 1e-14);
        assert!(j.asymmetry() < 1e-14);
        let fd = area_jacobian_fd(&d, &h, 1e-5).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                assert!((j[(r, c)] - fd[(r, c)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn jacobian_annihilates_translations() {
        let d = tetra_data(1.0);
        let h = SupportVector::new(vec![1.0, 0.7, 1.3, 0.9]);
        let j = area_jacobian(&d, &h).unwrap();
        for k in 0..3 {
            let col: Vec<f64> = d.normals.iter().map(|u| u.get(k)).collect();
            assert!(j.mul_vec(&col).iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn solves_cube() {
        let (h, mesh) = solve_support(&cube_data([1.0; 6]), 1e-13, 50).unwrap();
        assert!((mesh.volume - 1.0).abs() < 1e-12);
        assert!(h.h.iter().all(|&x| (x - 0.5).abs() < 1e-12));
    }

    #[test]
    fn solves_regular_tetrahedron() {
        let (_, mesh) = solve_support(&tetra_data(3f64.sqrt() / 4.0), 1e-13, 50).unwrap();
        let v = 1.0 / (6.0 * 2f64.sqrt());
        assert!((mesh.volume - v).abs() < 1e-12);
    }

    #[test]
    fn solves_box_with_unequal_areas() {
        let d = cube_data([6.0, 6.0, 3.0, 3.0, 2.0, 2.0]);
        let (_, mesh) = solve_support(&d, 1e-13, 50).unwrap();
        assert!((mesh.volume - 6.0).abs() < 1e-11);
    }

    #[test]
    fn infeasible_input_is_rejected() {
        let d = cube_data([5.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            solve_support(&d, 1e-12, 10),
            Err(MinkowskiError::Infeasible(_))
        ));
    }

    #[test]
    fn inactive_facet_is_reported() {
        let mut n = cube_data([1.0; 6]).normals;
        n.push(Vec3::of(1.0, 1.0, 1.0).normalized().unwrap());
        let d = SurfaceData::new(n, vec![1.0; 7]).unwrap();
        let h = SupportVector::new(vec![0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 10.0]);
        assert_eq!(area_jacobian(&d, &h).unwrap_err(), MinkowskiError::InactiveFacet(6));
    }

    #[test]
    fn finite_difference_mode_converges() {
        let opts = SolveOptions {
            jacobian: JacobianMode::FiniteDifference(1e-6),
            tol: 1e-10,
            ..SolveOptions::default()
        };
        let sol = solve_support_with(&tetra_data(1.0), &opts).unwrap();
        assert!(sol.residual <= 1e-10);
    }
}
