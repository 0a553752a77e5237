//! Explicit Euclidean constructions: cyclic polygons with given side
//! lengths, general-position perturbation of closed polygons, small-volume
//! polytopes with prescribed facet areas, needle families, and the
//! quantitative slope and volume bounds for polytopes with steep facets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::halfspace::intersect_halfspaces;
use crate::geom::{convex_hull_3d, GeomError, PolytopeMesh, SurfaceData, Vec3, VecN};
use crate::linalg::det;
use crate::minkowski::{solve_support_with, MinkowskiError, SolveOptions};
use crate::scalar::Real;
use crate::tolerances::Tolerances;

/// Errors raised by the constructions in this module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EuclidError {
    #[error("infeasible side lengths: {0}")]
    Infeasible(String),
    #[error("four equal sides in the plane form a rhombus, which must stay a parallelogram")]
    RhombException,
    #[error("dimension error: {m} sides cannot be put in general position in dimension {n}")]
    DimensionError { m: usize, n: usize },
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("no convergence: {0}")]
    NotConverged(String),
    #[error(transparent)]
    Minkowski(#[from] MinkowskiError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// A closed polygon given by its vertices, with side `i` running from
/// vertex `i` to vertex `i + 1 (mod m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedPolygon<T> {
    pub vertices: Vec<VecN<T>>,
    pub side_vectors: Vec<VecN<T>>,
    pub side_lengths: Vec<T>,
    /// Side `i` of the polygon carries input length `order[i]`.
    pub order: Vec<usize>,
    /// Circumradius of the cyclic construction, if the polygon is cyclic.
    pub circumradius: Option<T>,
    /// Whether the circumcentre lies inside the polygon.
    pub centre_inside: Option<bool>,
}

impl<T: Real> ClosedPolygon<T> {
    fn from_vertices(vertices: Vec<VecN<T>>, side_lengths: Vec<T>, order: Vec<usize>) -> Self {
        let m = vertices.len();
        let side_vectors = (0..m)
            .map(|i| vertices[(i + 1) % m].sub(&vertices[i]))
            .collect();
        Self {
            vertices,
            side_vectors,
            side_lengths,
            order,
            circumradius: None,
            centre_inside: None,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vertices.first().map_or(0, VecN::dim)
    }

    /// `‖Σ side_vectors‖`.
    pub fn closure_residual(&self) -> T {
        let sum = self
            .side_vectors
            .iter()
            .fold(VecN::zeros(self.dim()), |acc, v| acc.add(v));
        sum.norm()
    }

    /// `max_i |‖side_i‖ − S_i| / S_i`.
    pub fn length_error(&self) -> T {
        self.side_vectors
            .iter()
            .zip(&self.side_lengths)
            .fold(T::zero(), |acc, (v, &s)| acc.max((v.norm() - s).abs() / s))
    }

    /// Pads every coordinate vector with zeros up to dimension `n`.
    pub fn embedded(&self, n: usize) -> Self {
        let pad = |v: &VecN<T>| {
            let mut c = v.coords.clone();
            c.resize(n.max(c.len()), T::zero());
            VecN::new(c)
        };
        Self {
            vertices: self.vertices.iter().map(pad).collect(),
            side_vectors: self.side_vectors.iter().map(pad).collect(),
            ..self.clone()
        }
    }

    /// Vertices as 3-vectors (missing coordinates are zero).
    pub fn vertices_3d(&self) -> Vec<Vec3<T>> {
        self.vertices
            .iter()
            .map(|v| {
                let c = |i: usize| v.coords.get(i).copied().unwrap_or_else(T::zero);
                Vec3::new(c(0), c(1), c(2))
            })
            .collect()
    }
}

fn check_lengths<T: Real>(s: &[T]) -> Result<(), EuclidError> {
    if s.iter().any(|&x| !(x > T::zero()) || !x.is_finite()) {
        return Err(EuclidError::OutOfRange(
            "side lengths must be positive and finite".into(),
        ));
    }
    Ok(())
}

/// Index of the first maximal entry and the sum of the others.
fn max_and_rest<T: Real>(s: &[T]) -> (usize, T) {
    let mut k = 0;
    for (i, &x) in s.iter().enumerate() {
        if x > s[k] {
            k = i;
        }
    }
    let rest = s
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, &x)| x)
        .sum();
    (k, rest)
}

fn bisect<T: Real>(mut lo: T, mut hi: T, f: impl Fn(T) -> T) -> T {
    let f_lo = f(lo);
    for _ in 0..400 {
        let mid = (lo + hi) / T::of(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > T::zero()) == (f_lo > T::zero()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::of(2.0)
}

/// Builds the convex polygon inscribed in a circle whose sides have the
/// given lengths in the given cyclic order.
///
/// The circumradius `R` is found by bisection. With central angles
/// `θ_i = 2 asin(S_i / 2R)`, the centre is inside when `Σ θ_i = 2π` has a
/// root with `R ≥ S_max / 2`; otherwise the longest side subtends the
/// reflex arc and `θ_max = Σ_{i≠max} θ_i`.
pub fn polygon_from_side_lengths<T: Real>(s: &[T]) -> Result<ClosedPolygon<T>, EuclidError> {
    let m = s.len();
    if m < 3 {
        return Err(EuclidError::Infeasible(format!("{m} sides do not close a polygon")));
    }
    check_lengths(s)?;
    let (kmax, rest) = max_and_rest(s);
    let smax = s[kmax];
    if smax >= rest {
        return Err(EuclidError::Infeasible(format!(
            "longest side {:e} is not shorter than the sum of the others {:e}",
            smax.f64(),
            rest.f64()
        )));
    }
    let two = T::of(2.0);
    let tau = T::PI() * two;
    let theta = |r: T, x: T| two * (x / (two * r)).clamp_unit().asin();
    let total = |r: T| s.iter().map(|&x| theta(r, x)).sum::<T>();
    let r0 = smax / two;
    let inside = total(r0) >= tau;
    let r = if inside {
        let sum: T = s.iter().copied().sum();
        bisect(r0, sum / T::of(4.0), |r| total(r) - tau)
    } else {
        let f = |r: T| total(r) - theta(r, smax) - theta(r, smax);
        let mut hi = r0 + r0;
        let mut guard = 0;
        while f(hi) <= T::zero() && guard < 200 {
            hi = hi + hi;
            guard += 1;
        }
        bisect(r0, hi, f)
    };
    let mut phi = T::zero();
    let mut vertices = Vec::with_capacity(m);
    for (i, &x) in s.iter().enumerate() {
        vertices.push(VecN::new(vec![r * phi.cos(), r * phi.sin()]));
        let t = theta(r, x);
        phi = phi + if !inside && i == kmax { tau - t } else { t };
    }
    let mut poly = ClosedPolygon::from_vertices(vertices, s.to_vec(), (0..m).collect());
    poly.circumradius = Some(r);
    poly.centre_inside = Some(inside);
    Ok(poly)
}

/// Outcome of [`perturb_to_general_position`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralPosition<T> {
    /// The perturbed polygon in ℝⁿ (last coordinate zero).
    pub polygon: ClosedPolygon<T>,
    /// Minimum `|det|` over all `(n−1)`-subsets of normed side vectors.
    pub b_out: T,
    /// Proposed moves.
    pub iterations: usize,
    /// Accepted moves.
    pub accepted: usize,
    /// Largest vertex displacement from the starting polygon.
    pub max_displacement: T,
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > m {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == m - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// `(count of |det| ≤ zero_tol, min |det|)` over all subsets.
fn determinant_score<T: Real>(sides: &[VecN<T>], subsets: &[Vec<usize>], zero_tol: T) -> (usize, T) {
    let unit: Vec<VecN<T>> = sides
        .iter()
        .map(|v| v.normalized().unwrap_or_else(|| v.clone()))
        .collect();
    let mut zeros = 0;
    let mut min = T::infinity();
    for sub in subsets {
        let rows: Vec<Vec<T>> = sub.iter().map(|&i| unit[i].coords.clone()).collect();
        let d = det(&rows).abs();
        if d <= zero_tol {
            zeros += 1;
        }
        min = min.min(d);
    }
    (zeros, min)
}

fn random_ball<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            return v;
        }
    }
}

/// Moves a convex polygon inside `X = ℝ^{n−1}` so that no `n − 1` of its side
/// vectors are linearly dependent, keeping every side length fixed.
///
/// Each step is a four-bar move: `A_{i−1}` and `A_{i+2}` stay fixed, `A_i`
/// moves on the sphere of radius `S_{i−1}` about `A_{i−1}`, and `A_{i+1}` is
/// re-placed at the nearest point of the intersection of the spheres about
/// `A_i` and `A_{i+2}`. A move is accepted when it strictly improves the
/// key `(number of vanishing determinants, minimum |det|)` in lexicographic
/// order and keeps every vertex within `budget` of its start.
pub fn perturb_to_general_position<T: Real>(
    s: &[T],
    n: usize,
    budget: T,
    seed: u64,
) -> Result<GeneralPosition<T>, EuclidError> {
    let m = s.len();
    if n < 3 || m <= n {
        return Err(EuclidError::DimensionError { m, n });
    }
    check_lengths(s)?;
    if !(budget > T::zero()) {
        return Err(EuclidError::OutOfRange("budget must be positive".into()));
    }
    let mut order: Vec<usize> = (0..m).collect();
    if m == 4 && n == 3 {
        if s.iter().all(|&x| x == s[0]) {
            return Err(EuclidError::RhombException);
        }
        if s[0] == s[2] && s[1] == s[3] {
            // A parallelogram only flexes through parallelograms; use the deltoid.
            order = vec![0, 2, 1, 3];
        }
    }
    let ordered: Vec<T> = order.iter().map(|&i| s[i]).collect();
    let base = polygon_from_side_lengths(&ordered)?;
    let d = n - 1;
    let start = base.embedded(d);
    let mut verts = start.vertices.clone();
    let subsets = combinations(m, d);
    let zero_tol = T::tol_at_least(1e-12, 16.0);
    let stop_at = T::of(1e-2);
    let sides_of = |v: &[VecN<T>]| -> Vec<VecN<T>> {
        (0..m).map(|i| v[(i + 1) % m].sub(&v[i])).collect()
    };
    let mut score = determinant_score(&sides_of(&verts), &subsets, zero_tol);
    let cap = 10 * subsets.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut iterations = 0;
    let mut accepted = 0;

    while iterations < cap && !(score.0 == 0 && score.1 >= stop_at) {
        iterations += 1;
        let i = rng.gen_range(0..m);
        let (im1, ip1, ip2) = ((i + m - 1) % m, (i + 1) % m, (i + 2) % m);
        let len_prev = ordered[im1];
        let (len_i, len_next) = (ordered[i], ordered[ip1]);

        let dir = verts[i].sub(&verts[im1]).scale(T::one() / len_prev);
        let sigma = T::of(0.25 * rng.gen_range(0.05..1.0)) * budget / len_prev;
        let w = VecN::new(random_ball(&mut rng, d).into_iter().map(T::of).collect());
        let Some(new_dir) = dir.add(&w.scale(sigma)).normalized() else {
            continue;
        };
        let new_i = verts[im1].add(&new_dir.scale(len_prev));

        let axis = verts[ip2].sub(&new_i);
        let dist = axis.norm();
        if dist <= (len_i - len_next).abs() || dist >= len_i + len_next {
            continue;
        }
        let e = axis.scale(T::one() / dist);
        let a = (dist * dist + len_i * len_i - len_next * len_next) / (dist + dist);
        let r2 = len_i * len_i - a * a;
        if r2 <= T::zero() {
            continue;
        }
        let c = new_i.add(&e.scale(a));
        let off = verts[ip1].sub(&c);
        let radial = off.sub(&e.scale(off.dot(&e)));
        let Some(radial) = radial.normalized() else {
            continue;
        };
        let new_next = c.add(&radial.scale(r2.sqrt()));

        if new_i.distance(&start.vertices[i]) > budget
            || new_next.distance(&start.vertices[ip1]) > budget
        {
            continue;
        }
        let mut trial = verts.clone();
        trial[i] = new_i;
        trial[ip1] = new_next;
        let cand = determinant_score(&sides_of(&trial), &subsets, zero_tol);
        if cand.0 < score.0 || (cand.0 == score.0 && cand.1 > score.1) {
            verts = trial;
            score = cand;
            accepted += 1;
        }
    }
    if score.0 > 0 {
        return Err(EuclidError::NotConverged(format!(
            "{} of {} determinants still vanish after {iterations} moves",
            score.0,
            subsets.len()
        )));
    }
    let max_displacement = verts
        .iter()
        .zip(&start.vertices)
        .fold(T::zero(), |acc, (a, b)| acc.max(a.distance(b)));
    let mut polygon = ClosedPolygon::from_vertices(verts, ordered, order).embedded(n);
    polygon.circumradius = None;
    polygon.centre_inside = None;
    Ok(GeneralPosition {
        polygon,
        b_out: score.1,
        iterations,
        accepted,
        max_displacement,
    })
}

/// The needle tetrahedron with vertices `(±ε, 0, −z)` and `(0, ±ε, z)`,
/// `z = (1/ε)√(1 − ε⁴/4)`. Every facet has area 2 and the volume is
/// `(4ε/3)√(1 − ε⁴/4)`.
pub fn needle_tetrahedron<T: Real>(eps: T) -> Result<PolytopeMesh<T>, EuclidError> {
    if !(eps > T::zero() && eps < T::SQRT_2()) {
        return Err(EuclidError::OutOfRange(format!(
            "needle parameter {:e} must lie in (0, √2)",
            eps.f64()
        )));
    }
    let z = (T::one() - eps.powi(4) / T::of(4.0)).sqrt() / eps;
    let zero = T::zero();
    let pts = [
        Vec3::new(eps, zero, -z),
        Vec3::new(-eps, zero, -z),
        Vec3::new(zero, eps, z),
        Vec3::new(zero, -eps, z),
    ];
    Ok(convex_hull_3d(&pts)?)
}

/// Closed-form volume of [`needle_tetrahedron`].
pub fn needle_volume<T: Real>(eps: T) -> T {
    T::of(4.0) * eps / T::of(3.0) * (T::one() - eps.powi(4) / T::of(4.0)).sqrt()
}

/// Vertices of the odd-dimensional needle simplex in `ℝ^{2k+1}`: a regular
/// `k`-simplex of edge `1/ε` in the last `k` coordinates, with a segment of
/// length `ε` along `x_i` centred at its `i`-th vertex.
pub fn needle_simplex_odd<T: Real>(k: usize, eps: T) -> Result<Vec<VecN<T>>, EuclidError> {
    if k == 0 || !(eps > T::zero()) || !eps.is_finite() {
        return Err(EuclidError::OutOfRange(
            "needle simplex needs k ≥ 1 and ε > 0".into(),
        ));
    }
    let n = 2 * k + 1;
    let a = T::one() / eps;
    let scale = a / T::SQRT_2();
    let half = eps / T::of(2.0);
    let mut out = Vec::with_capacity(2 * k + 2);
    for i in 0..=k {
        // Helmert basis of the sum-zero hyperplane in ℝ^{k+1}.
        let q: Vec<T> = (1..=k)
            .map(|j| {
                let norm = T::of_usize(j * (j + 1)).sqrt();
                let b = match i.cmp(&j) {
                    std::cmp::Ordering::Less => T::one(),
                    std::cmp::Ordering::Equal => -T::of_usize(j),
                    std::cmp::Ordering::Greater => T::zero(),
                };
                scale * b / norm
            })
            .collect();
        for sign in [T::one(), -T::one()] {
            let mut c = vec![T::zero(); n];
            c[i] = sign * half;
            c[k + 1..].copy_from_slice(&q);
            out.push(VecN::new(c));
        }
    }
    Ok(out)
}

/// Volume of the unit ball in ℝᵏ.
pub fn unit_ball_volume<T: Real>(k: usize) -> T {
    match k {
        0 => T::one(),
        1 => T::of(2.0),
        _ => T::of(2.0) * T::PI() / T::of_usize(k) * unit_ball_volume::<T>(k - 2),
    }
}

/// Inputs to the steep-facet slope and volume bounds.
///
/// `separation` is the minimum angle `β` between normals when `n = 3`, and
/// the minimum parallelotope volume `b` of normed normals when `n > 3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs<T> {
    pub epsilon: T,
    pub separation: T,
    pub n: usize,
    pub areas: Vec<T>,
}

impl<T: Real> BoundInputs<T> {
    fn validate(&self) -> Result<(), EuclidError> {
        let eps = self.epsilon;
        if self.n < 3 {
            return Err(EuclidError::OutOfRange(format!("dimension {} < 3", self.n)));
        }
        if !(eps >= T::zero() && eps < T::FRAC_PI_2()) {
            return Err(EuclidError::OutOfRange(format!(
                "tilt {:e} outside [0, π/2)",
                eps.f64()
            )));
        }
        let sep = self.separation;
        let ok = if self.n == 3 {
            sep > T::zero() && sep <= T::FRAC_PI_2() * (T::one() + T::epsilon())
        } else {
            sep > T::zero() && sep <= T::one() * (T::one() + T::epsilon())
        };
        if !ok {
            return Err(EuclidError::OutOfRange(format!(
                "separation {:e} outside its range",
                sep.f64()
            )));
        }
        Ok(())
    }

    /// `sin ε / sin(β/2)` for `n = 3`, `(n−1)^{3/2} sin ε / b` otherwise.
    pub fn ratio(&self) -> T {
        let s = self.epsilon.sin();
        if self.n == 3 {
            s / (self.separation / T::of(2.0)).sin()
        } else {
            T::of_usize(self.n - 1).powf(T::of(1.5)) * s / self.separation
        }
    }
}

/// Upper bound `δ` on the angle between any edge of the polytope and the
/// vertical axis.
pub fn slope_bound<T: Real>(inputs: &BoundInputs<T>) -> Result<T, EuclidError> {
    inputs.validate()?;
    let q = inputs.ratio();
    if q > T::one() + T::of(4.0) * T::epsilon() {
        return Err(EuclidError::PreconditionViolated(if inputs.n == 3 {
            format!("sin ε / sin(β/2) = {:e} > 1", q.f64())
        } else {
            format!("(n−1)^(3/2) sin ε / b = {:e} > 1", q.f64())
        }));
    }
    Ok(q.min(T::one()).asin())
}

/// Both forms of the volume bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeBound<T> {
    /// Value of the proof chain before the final simplification.
    pub chain: T,
    /// The displayed closed form; never smaller than `chain`.
    pub simplified: T,
    /// The ratio `q` entering both forms.
    pub ratio: T,
}

/// The proof constant `const_n` in front of the volume bound for `n > 3`
/// (chain form).
pub fn volume_constant<T: Real>(n: usize) -> T {
    let n1 = T::of_usize(n - 1);
    if n == 3 {
        return T::one() / (T::SQRT_2() * T::PI());
    }
    let n2 = T::of_usize(n - 2);
    let k = (n1.powi(n as i32 - 1) * unit_ball_volume::<T>(n - 1)).powf(-T::one() / n2);
    T::of(2.0).powf(-T::one() / n1)
        * unit_ball_volume::<T>(n - 2).powf(T::one() / (n1 * n2))
        * n1.powf(T::of_usize(n) / n1)
        * k
}

/// Upper bound on the volume of a polytope whose facet normals all lie
/// within angle `ε` of a hyperplane and are separated by `β` (or `b`).
pub fn facet_volume_bound<T: Real>(inputs: &BoundInputs<T>) -> Result<VolumeBound<T>, EuclidError> {
    inputs.validate()?;
    if inputs.areas.is_empty() || inputs.areas.iter().any(|&a| !(a >= T::zero())) {
        return Err(EuclidError::OutOfRange("areas must be non-negative".into()));
    }
    let n = inputs.n;
    let q = inputs.ratio();
    let limit = T::FRAC_1_SQRT_2() * (T::one() + T::of(4.0) * T::epsilon());
    if q > limit {
        return Err(EuclidError::PreconditionViolated(format!(
            "ratio {:e} exceeds 1/√2",
            q.f64()
        )));
    }
    let n1 = T::of_usize(n - 1);
    let p = T::of_usize(n) / (n1 + n1);
    let sum: T = inputs.areas.iter().map(|&a| a.powf(p)).sum();
    let c = volume_constant::<T>(n) * sum * sum;
    let root = T::one() / n1;
    let tan_delta = q / (T::one() - q * q).sqrt();
    Ok(VolumeBound {
        chain: c * tan_delta.powf(root),
        simplified: c * (T::SQRT_2() * q).powf(root),
        ratio: q,
    })
}

/// Tilt and separation measured from a 3D mesh.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredInputs<T> {
    /// Vertical axis the tilt is measured against.
    pub axis: Vec3<T>,
    /// `max_i asin |⟨u_i, axis⟩|`.
    pub epsilon: T,
    /// `min_{i<j} min(θ_ij, π − θ_ij)`.
    pub beta: T,
}

fn tilt_against<T: Real>(normals: &[Vec3<T>], axis: Vec3<T>) -> T {
    normals
        .iter()
        .fold(T::zero(), |acc, u| acc.max(u.dot(axis).abs().clamp_unit().asin()))
}

/// Measures `(ε, β)` for a mesh. The axis is the candidate (coordinate
/// axes and normalized cross products of normal pairs) with least tilt.
pub fn measure_bound_inputs<T: Real>(mesh: &PolytopeMesh<T>) -> MeasuredInputs<T> {
    let u = &mesh.normals;
    let mut candidates = vec![Vec3::unit(0), Vec3::unit(1), Vec3::unit(2)];
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            if let Some(c) = u[i].cross(u[j]).normalized() {
                candidates.push(c);
            }
        }
    }
    let (axis, epsilon) = candidates
        .into_iter()
        .map(|a| (a, tilt_against(u, a)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let mut beta = T::FRAC_PI_2();
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            let t = u[i].angle_to(u[j]);
            beta = beta.min(t.min(T::PI() - t));
        }
    }
    MeasuredInputs { axis, epsilon, beta }
}

/// Two unit normals tilted exactly `ε` above the horizontal plane and
/// enclosing the angle `π − β` (separation `β`), with the vertical pole
/// `e_z`, together with the
/// measured angle between their intersection line and the pole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeWitness<T> {
    pub u_plus: Vec3<T>,
    pub u_minus: Vec3<T>,
    pub line_angle: T,
}

/// Builds the plane pair realizing equality in the slope bound.
pub fn slope_sharp_example<T: Real>(eps: T, beta: T) -> Result<SlopeWitness<T>, EuclidError> {
    if !(eps >= T::zero() && beta > T::zero() && beta <= T::FRAC_PI_2() && eps + eps <= beta) {
        return Err(EuclidError::OutOfRange(
            "need 0 ≤ 2ε ≤ β ≤ π/2 for the sharp example".into(),
        ));
    }
    // The extremal pair encloses π − β, so its separation min(θ, π − θ)
    // is β and its horizontal parts are nearly opposite.
    let (se, ce) = eps.sin_cos();
    let cos2phi = ((-beta.cos() - se * se) / (ce * ce)).clamp_unit();
    let phi = cos2phi.acos() / T::of(2.0);
    let (sp, cp) = phi.sin_cos();
    let u_plus = Vec3::new(ce * cp, ce * sp, se);
    let u_minus = Vec3::new(ce * cp, -ce * sp, se);
    let line = u_plus.cross(u_minus);
    let line_angle = line.x.hypot(line.y).atan2(line.z.abs());
    Ok(SlopeWitness {
        u_plus,
        u_minus,
        line_angle,
    })
}

/// The steep polytope `P⁺ ∩ P⁻` together with its cone sandwich data.
#[derive(Clone, Debug)]
pub struct SteepExample<T> {
    pub mesh: PolytopeMesh<T>,
    pub normals: Vec<Vec3<T>>,
    /// Apex height `cot ε` of both pyramids and cones.
    pub apex_height: T,
    /// `V(P) / S(P)^{3/2}`.
    pub ratio: T,
    /// `V(C_i) / S(C_o)^{3/2}`, a lower bound on `ratio`.
    pub cone_bound: T,
    /// The displayed constant `(tan ε)^{1/2} / (3 (2κ₂)^{1/2} (1 + 2 tan²ε)^{3/4})`.
    pub displayed_bound: T,
    /// Inner double cone of radius 1 lies in `P`.
    pub inner_contained: bool,
    /// `P` lies in the outer double cone of radius 2.
    pub outer_contains: bool,
}

/// Intersects two pyramids whose bases are regular `m/2`-gons circumscribed
/// about the unit disc (the second rotated by `π/m`), with apexes
/// `(0, 0, ±cot ε)`. Every facet normal makes angle exactly `ε` with the
/// horizontal plane.
pub fn steep_example_3d<T: Real>(m: usize, eps: T) -> Result<SteepExample<T>, EuclidError> {
    if !m.is_multiple_of(2) || m < 6 {
        return Err(EuclidError::OutOfRange(format!(
            "facet count {m} must be even and at least 6"
        )));
    }
    if !(eps > T::zero() && eps < T::FRAC_PI_8()) {
        return Err(EuclidError::OutOfRange(format!(
            "tilt {:e} outside (0, π/8)",
            eps.f64()
        )));
    }
    let k = m / 2;
    let (se, ce) = eps.sin_cos();
    let tau = T::PI() + T::PI();
    let mut normals = Vec::with_capacity(m);
    for (sign, shift) in [(T::one(), T::zero()), (-T::one(), T::PI() / T::of_usize(m))] {
        for j in 0..k {
            let a = tau * T::of_usize(j) / T::of_usize(k) + shift;
            normals.push(Vec3::new(ce * a.cos(), ce * a.sin(), sign * se));
        }
    }
    let h = vec![ce; m];
    let hp = intersect_halfspaces(&normals, &h, &Tolerances::default())?;
    let mesh = hp.mesh;
    let apex = ce / se;
    let tol = T::tol_at_least(1e-12, 64.0) * apex;

    let inner_contained = normals
        .iter()
        .zip(&h)
        .all(|(u, &hi)| u.x.hypot(u.y).max(u.z.abs() * apex) <= hi + tol);
    let outer_contains = mesh.vertices.iter().all(|v| {
        v.x.hypot(v.y) <= T::of(2.0) * (T::one() - v.z.abs() / apex) + tol
    });

    let surface = mesh.surface_area();
    let ratio = mesh.volume / surface.powf(T::of(1.5));
    let two = T::of(2.0);
    let v_inner = two * T::PI() * apex / T::of(3.0);
    let s_outer = T::of(4.0) * T::PI() * (T::of(4.0) + apex * apex).sqrt();
    let cone_bound = v_inner / s_outer.powf(T::of(1.5));
    let t = eps.tan();
    let displayed_bound = t.sqrt()
        / (T::of(3.0)
            * (two * unit_ball_volume::<T>(2)).sqrt()
            * (T::one() + two * t * t).powf(T::of(0.75)));
    Ok(SteepExample {
        mesh,
        normals,
        apex_height: apex,
        ratio,
        cone_bound,
        displayed_bound,
        inner_contained,
        outer_contains,
    })
}

/// How [`build_small_volume_polytope`] produced its mesh.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ShrinkRoute {
    /// Scaled needle tetrahedron with the given needle parameter.
    Needle { epsilon: f64, scale: f64 },
    /// Tilted polygon followed by a Minkowski solve.
    Tilt,
}

/// One attempted tilt angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltStep {
    pub alpha: f64,
    /// Volume of the solved polytope, if the solve converged.
    pub volume: Option<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// A polytope with prescribed facet areas and small volume.
#[derive(Clone, Debug)]
pub struct SmallVolumePolytope<T> {
    pub mesh: PolytopeMesh<T>,
    pub route: ShrinkRoute,
    pub history: Vec<TiltStep>,
    /// Input area index of each mesh facet.
    pub facet_input: Vec<usize>,
    /// The planar polygon the normals came from, before tilting.
    pub polygon: Option<ClosedPolygon<T>>,
    /// Whether the polygon was perturbed to remove parallel sides.
    pub perturbed: bool,
}

const MAX_TILT_STEPS: usize = 80;
const MAX_SOLVER_RETRIES: usize = 40;

/// Builds a 3-polytope with facet areas `S` (in any order of facets, see
/// `facet_input`) and volume at most `target`.
///
/// Four equal areas use a scaled needle tetrahedron. Otherwise the areas
/// are taken as side lengths of a convex cyclic polygon (with a deltoid
/// arrangement for two equal pairs, and a general-position perturbation if
/// two sides are parallel). The side `A_1A_2` pair is rotated about the
/// line `A_1A_3` by a tilt `α`, the unit side vectors become facet normals,
/// and the Minkowski problem is solved. `α` starts at 0.3 and is halved
/// until the volume is at most `target`.
pub fn build_small_volume_polytope<T: Real>(
    s: &[T],
    target: T,
) -> Result<SmallVolumePolytope<T>, EuclidError> {
    let m = s.len();
    check_lengths(s)?;
    if !(target > T::zero()) {
        return Err(EuclidError::OutOfRange("target volume must be positive".into()));
    }
    if m <= 3 {
        return Err(EuclidError::Infeasible(format!(
            "{m} facets cannot bound a 3-polytope"
        )));
    }
    let (kmax, rest) = max_and_rest(s);
    if s[kmax] >= rest {
        return Err(EuclidError::Infeasible(format!(
            "largest area {:e} is not smaller than the sum of the others {:e}",
            s[kmax].f64(),
            rest.f64()
        )));
    }
    if m == 4 && s.iter().all(|&x| x == s[0]) {
        return needle_route(s[0], target);
    }

    let mut order: Vec<usize> = (0..m).collect();
    if m == 4 {
        order.sort_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap());
        let v: Vec<T> = order.iter().map(|&i| s[i]).collect();
        if !(v[0] == v[1] && v[2] == v[3]) {
            order = (0..m).collect();
        }
    }
    let ordered: Vec<T> = order.iter().map(|&i| s[i]).collect();
    let mut polygon = polygon_from_side_lengths(&ordered)?;
    let mut perturbed = false;
    if has_parallel_sides(&polygon) {
        let min_s = ordered.iter().copied().fold(T::infinity(), T::min);
        let gp = perturb_to_general_position(&ordered, 3, min_s * T::of(0.05), 0)?;
        order = gp.polygon.order.iter().map(|&i| order[i]).collect();
        polygon = gp.polygon;
        perturbed = true;
    }
    let areas: Vec<T> = order.iter().map(|&i| s[i]).collect();
    let verts = polygon.vertices_3d();

    let opts = SolveOptions {
        tol: T::tol_at_least(1e-9, 1024.0),
        max_iter: 200,
        ..SolveOptions::default()
    };
    let mut alpha = T::of(0.3);
    let mut history = Vec::new();
    let mut retries = 0;
    let mut warm: Option<crate::geom::SupportVector<T>> = None;
    for _ in 0..MAX_TILT_STEPS {
        let data = tilted_data(&verts, &areas, alpha)?;
        let mut attempt = SolveOptions {
            initial: warm.clone(),
            ..opts.clone()
        };
        let mut result = solve_support_with(&data, &attempt);
        if result.is_err() && attempt.initial.is_some() {
            attempt.initial = None;
            result = solve_support_with(&data, &attempt);
        }
        match result {
            Ok(sol) => {
                let volume = sol.polytope.volume();
                history.push(TiltStep {
                    alpha: alpha.f64(),
                    volume: Some(volume.f64()),
                    iterations: sol.iterations,
                    residual: sol.residual.f64(),
                });
                if volume <= target {
                    let facet_input = sol.polytope.facet_source.iter().map(|&i| order[i]).collect();
                    return Ok(SmallVolumePolytope {
                        mesh: sol.polytope.mesh,
                        route: ShrinkRoute::Tilt,
                        history,
                        facet_input,
                        polygon: Some(polygon),
                        perturbed,
                    });
                }
                warm = Some(sol.support);
            }
            Err(MinkowskiError::NotConverged {
                iterations,
                residual,
            }) => {
                history.push(TiltStep {
                    alpha: alpha.f64(),
                    volume: None,
                    iterations,
                    residual,
                });
                retries += 1;
                if retries > MAX_SOLVER_RETRIES {
                    return Err(MinkowskiError::NotConverged {
                        iterations,
                        residual,
                    }
                    .into());
                }
            }
            Err(e) => return Err(e.into()),
        }
        alpha = alpha / T::of(2.0);
    }
    Err(EuclidError::NotConverged(format!(
        "volume still above {:e} after {MAX_TILT_STEPS} tilt halvings",
        target.f64()
    )))
}

fn needle_route<T: Real>(side: T, target: T) -> Result<SmallVolumePolytope<T>, EuclidError> {
    let lambda = (side / T::of(2.0)).sqrt();
    let cube = lambda * lambda * lambda;
    let eps = T::of(0.9) * T::one().min(T::of(3.0) * target / (T::of(4.0) * cube));
    let mesh = needle_tetrahedron(eps)?.scaled(lambda);
    Ok(SmallVolumePolytope {
        mesh,
        route: ShrinkRoute::Needle {
            epsilon: eps.f64(),
            scale: lambda.f64(),
        },
        history: Vec::new(),
        facet_input: (0..4).collect(),
        polygon: None,
        perturbed: false,
    })
}

fn has_parallel_sides<T: Real>(p: &ClosedPolygon<T>) -> bool {
    let u: Vec<VecN<T>> = p.side_vectors.iter().filter_map(VecN::normalized).collect();
    let tol = T::tol_at_least(1e-9, 64.0);
    (0..u.len()).any(|i| {
        (i + 1..u.len()).any(|j| (u[i][0] * u[j][1] - u[i][1] * u[j][0]).abs() < tol)
    })
}

/// Rotates `A_2` about the line `A_1A_3` by `alpha` and returns unit side
/// vectors paired with the side lengths.
fn tilted_data<T: Real>(
    verts: &[Vec3<T>],
    areas: &[T],
    alpha: T,
) -> Result<SurfaceData<T>, EuclidError> {
    let m = verts.len();
    let mut v = verts.to_vec();
    let axis = (v[2] - v[0])
        .normalized()
        .ok_or_else(|| GeomError::DegenerateInput("coincident polygon vertices".into()))?;
    v[1] = v[0] + (v[1] - v[0]).rotate_about(axis, alpha);
    let normals: Vec<Vec3<T>> = (0..m)
        .map(|i| {
            let d = v[(i + 1) % m] - v[i];
            d / areas[i]
        })
        .collect();
    let normals = normals
        .into_iter()
        .map(|u| u.normalized().unwrap_or(u))
        .collect();
    Ok(SurfaceData::new(normals, areas.to_vec())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::mesh_metrics;

    #[test]
    fn equilateral_triangle() {
        let p = polygon_from_side_lengths(&[1.0, 1.0, 1.0]).unwrap();
        assert!((p.circumradius.unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(p.centre_inside.unwrap());
        assert!(p.closure_residual() < 1e-15);
        assert!(p.length_error() < 1e-14);
    }

    #[test]
    fn quadrilateral_with_long_side_closes() {
        let p = polygon_from_side_lengths(&[2.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(p.closure_residual() <= 1e-12 * 5.0);
        assert!(p.length_error() < 1e-12);
        let q = polygon_from_side_lengths(&[3.0, 1.0, 0.5, 0.5, 1.2]).unwrap();
        assert!(!q.centre_inside.unwrap());
        assert!(q.length_error() < 1e-12);
    }

    #[test]
    fn degenerate_sides_are_infeasible() {
        assert!(matches!(
            polygon_from_side_lengths(&[3.0, 1.0, 1.0]),
            Err(EuclidError::Infeasible(_))
        ));
        assert!(matches!(
            polygon_from_side_lengths(&[2.0, 1.0, 1.0]),
            Err(EuclidError::Infeasible(_))
        ));
    }

    #[test]
    fn polygon_is_convex() {
        let p = polygon_from_side_lengths(&[3.0, 1.0, 0.5, 0.5, 1.2]).unwrap();
        let m = p.len();
        for i in 0..m {
            let a = &p.side_vectors[i];
            let b = &p.side_vectors[(i + 1) % m];
            assert!(a[0] * b[1] - a[1] * b[0] > 0.0);
        }
    }

    #[test]
    fn pentagon_in_four_dimensions() {
        let gp = perturb_to_general_position(&[1.0; 5], 4, 0.2, 7).unwrap();
        assert!(gp.b_out > 0.0);
        assert_eq!(gp.polygon.dim(), 4);
        assert!(gp.polygon.length_error() < 1e-12);
        assert!(gp.polygon.closure_residual() < 1e-12 * 5.0);
        assert!(gp.max_displacement <= 0.2);
        let unit: Vec<Vec<f64>> = gp
            .polygon
            .side_vectors
            .iter()
            .map(|v| v.normalized().unwrap().coords[..3].to_vec())
            .collect();
        for sub in combinations(5, 3) {
            let rows: Vec<Vec<f64>> = sub.iter().map(|&i| unit[i].clone()).collect();
            assert!(det(&rows).abs() >= gp.b_out * (1.0 - 1e-12));
        }
    }

    #[test]
    fn perturbation_errors() {
        assert_eq!(
            perturb_to_general_position(&[1.0; 4], 3, 0.1, 0).unwrap_err(),
            EuclidError::RhombException
        );
        assert_eq!(
            perturb_to_general_position(&[1.0; 4], 4, 0.1, 0).unwrap_err(),
            EuclidError::DimensionError { m: 4, n: 4 }
        );
    }

    #[test]
    fn parallelogram_becomes_deltoid() {
        let gp = perturb_to_general_position(&[2.0, 1.0, 2.0, 1.0], 3, 0.05, 3).unwrap();
        assert_eq!(gp.polygon.order, vec![0, 2, 1, 3]);
        assert!(gp.b_out > 0.0);
    }

    #[test]
    fn trapezoid_loses_parallel_sides() {
        let gp = perturb_to_general_position(&[2.0, 1.0, 1.0, 1.0], 3, 0.05, 1).unwrap();
        assert!(gp.b_out > 1e-6);
        assert!(gp.polygon.length_error() < 1e-12);
    }

    #[test]
    fn needle_areas_and_volume() {
        for eps in [0.2, 0.1, 0.05, 0.01] {
            let mesh = needle_tetrahedron::<f64>(eps).unwrap();
            assert_eq!(mesh.facet_count(), 4);
            assert!(mesh.areas.iter().all(|a| (a - 2.0).abs() < 1e-12));
            assert!((mesh.volume - needle_volume(eps)).abs() < 1e-12);
        }
        assert!((needle_volume(0.1f64) - 0.1333317).abs() < 1e-7);
        assert!(matches!(needle_tetrahedron(1.5), Err(EuclidError::OutOfRange(_))));
        assert!(matches!(needle_tetrahedron(0.0), Err(EuclidError::OutOfRange(_))));
    }

    #[test]
    fn needle_simplex_shape() {
        let v = needle_simplex_odd(1, 0.1f64).unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.iter().all(|p| p.dim() == 3));
        assert!((v[0].distance(&v[2]) - (10.0f64.powi(2) + 0.05f64.powi(2) * 2.0).sqrt()).abs() < 1e-12);
        let w = needle_simplex_odd(2, 0.1f64).unwrap();
        assert_eq!(w.len(), 6);
        assert!((w[0].distance(&w[1]) - 0.1).abs() < 1e-15);
        assert!((w[0].distance(&w[2]) - (100.0f64 + 0.005).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume::<f64>(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume::<f64>(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn slope_examples() {
        let inp = |eps: f64, beta: f64| BoundInputs {
            epsilon: eps,
            separation: beta,
            n: 3,
            areas: vec![1.0; 4],
        };
        assert_eq!(slope_bound(&inp(0.0, 1.0)).unwrap(), 0.0);
        let d = slope_bound(&inp(0.1, std::f64::consts::FRAC_PI_2)).unwrap();
        assert!((d - 0.14166).abs() < 1e-5);
        let w = slope_sharp_example(0.1, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((w.line_angle - d).abs() < 1e-12);
        let w = slope_sharp_example(0.2f64, 0.7).unwrap();
        let sep = w.u_plus.angle_to(w.u_minus);
        assert!((sep.min(std::f64::consts::PI - sep) - 0.7).abs() < 1e-12);
        assert!((w.line_angle - slope_bound(&inp(0.2, 0.7)).unwrap()).abs() < 1e-12);
        let b = 1.0f64;
        let top = slope_bound(&inp(b / 2.0, b)).unwrap();
        assert!((top - std::f64::consts::FRAC_PI_2).abs() < 1e-7);
        assert!(matches!(
            slope_bound(&inp(0.6, 1.0)),
            Err(EuclidError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn volume_bound_forms() {
        let beta = 1.0f64;
        let eps = (0.9 * (beta / 2.0).sin()).asin();
        let inp = BoundInputs {
            epsilon: eps,
            separation: beta,
            n: 3,
            areas: vec![1.0; 5],
        };
        assert!(matches!(
            facet_volume_bound(&inp),
            Err(EuclidError::PreconditionViolated(_))
        ));
        let small = BoundInputs { epsilon: 1e-8, ..inp.clone() };
        let vb = facet_volume_bound(&small).unwrap();
        assert!(vb.chain <= vb.simplified);
        assert!(vb.simplified < 1e-2);
        let zero = BoundInputs { epsilon: 0.0, ..inp };
        assert_eq!(facet_volume_bound(&zero).unwrap().chain, 0.0);
    }

    #[test]
    fn higher_dimensional_constant_matches_three() {
        // The general constant reduces to 1/(√2 π) at n = 3.
        let n1 = 2.0f64;
        let k = 1.0 / (n1 * n1 * std::f64::consts::PI);
        let c = 2f64.powf(-0.5) * 2f64.powf(0.5) * n1.powf(1.5) * k;
        assert!((c - volume_constant::<f64>(3)).abs() < 1e-15);
        assert!(volume_constant::<f64>(4) > 0.0);
    }

    #[test]
    fn needle_fails_volume_precondition() {
        let mesh = needle_tetrahedron(0.05f64).unwrap();
        let m = measure_bound_inputs(&mesh);
        let inp = BoundInputs {
            epsilon: m.epsilon,
            separation: m.beta,
            n: 3,
            areas: mesh.areas.clone(),
        };
        assert!((inp.ratio() - 1.0).abs() < 1e-9);
        assert!(matches!(
            facet_volume_bound(&inp),
            Err(EuclidError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn steep_example_sandwich() {
        let ex = steep_example_3d(6, 0.1f64).unwrap();
        assert_eq!(ex.mesh.facet_count(), 6);
        assert!(ex.inner_contained && ex.outer_contains);
        for u in &ex.normals {
            assert!((u.z.abs().asin() - 0.1).abs() < 1e-14);
        }
        assert!(ex.ratio >= ex.cone_bound);
        assert!(ex.ratio < ex.displayed_bound);
        assert!(matches!(
            steep_example_3d(6, std::f64::consts::FRAC_PI_4),
            Err(EuclidError::OutOfRange(_))
        ));
    }

    #[test]
    fn shrink_pentagon() {
        for target in [1e-1, 1e-2, 1e-3] {
            let out = build_small_volume_polytope(&[1.0f64; 5], target).unwrap();
            let mm = mesh_metrics(&out.mesh);
            assert!(mm.volume <= target);
            assert_eq!(out.mesh.facet_count(), 5);
            for (a, &i) in mm.facet_areas.iter().zip(&out.facet_input) {
                assert!((a - [1.0; 5][i]).abs() <= 1e-6, "{a}");
            }
        }
    }

    #[test]
    fn shrink_routes() {
        let out = build_small_volume_polytope(&[1.0f64; 4], 1e-2).unwrap();
        assert!(matches!(out.route, ShrinkRoute::Needle { .. }));
        assert!(out.mesh.areas.iter().all(|a| (a - 1.0).abs() < 1e-12));
        assert!(out.mesh.volume <= 1e-2);
        assert!(matches!(
            build_small_volume_polytope(&[1.0, 1.0, 1.0], 1e-2),
            Err(EuclidError::Infeasible(_))
        ));
        let kite = build_small_volume_polytope(&[2.0, 1.0, 2.0, 1.0], 1e-2).unwrap();
        assert!(kite.mesh.volume <= 1e-2);
        let trap = build_small_volume_polytope(&[2.0, 1.0, 1.0, 1.0], 1e-2).unwrap();
        assert!(trap.perturbed);
        assert!(trap.mesh.volume <= 1e-2);
    }
}
