//! Hyperbolic and spherical tetrahedra with prescribed facet areas.
//!
//! The tetrahedron `A_1A_2A_3A_4` is built from a base edge `A_1A_2` of
//! length `t`. Over the point `H(x)` at distance `x` from `A_1` on the base
//! line, `A_4` sits at height `f_{t,S_3}(x)` and `A_3` at height
//! `f_{t,S_4}(x)`, then `A_3` is rotated by `φ` about the base line. This
//! fixes the facet areas `s_3 = S_3` and `s_4 = S_4` for every `(x, φ)`.
//! The remaining residual `(s_2 − S_2, s_1 − S_1)` has winding number one
//! around `[0,t]×[0,π]`, and a winding-number-guided quadtree followed by
//! Newton polishing locates its zero.
//!
//! Model points are 4-vectors: the hyperboloid `−x_0² + x_1² + x_2² + x_3² = −1`
//! or the unit sphere in `ℝ⁴`.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{det, Matrix};
use crate::noneuclid::{f_ts, h_ts, triangle_area_from_sides, Geometry, NoneuclidError};
use crate::scalar::Real;

/// A point of the hyperboloid or of the unit 3-sphere.
pub type ModelPoint<T> = [T; 4];

/// Errors raised by the tetrahedron solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TetraError {
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error("targets must be sorted ascending: {0}")]
    Unsorted(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("degenerate face opposite vertex {0}")]
    DegenerateFace(usize),
    #[error("residual vanishes on the boundary at ({x:e}, {y:e})")]
    ZeroOnBoundary { x: f64, y: f64 },
    #[error("only degenerate zeros found at φ = {phi:e}")]
    DegenerateOnly { phi: f64 },
    #[error("root search failed: {0}")]
    SearchFailed(String),
    #[error(transparent)]
    Trig(#[from] NoneuclidError),
}

type Result<T, E = TetraError> = std::result::Result<T, E>;

/// Parameter rectangle `[x0,x1]×[y0,y1]` of the root search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect2<T> {
    pub x0: T,
    pub x1: T,
    pub y0: T,
    pub y1: T,
}

impl<T: Real> Rect2<T> {
    pub fn new(x0: T, x1: T, y0: T, y1: T) -> Self {
        debug_assert!(x1 > x0 && y1 > y0, "rectangle sides must be positive");
        Rect2 { x0, x1, y0, y1 }
    }

    pub fn diameter(&self) -> T {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    pub fn centre(&self) -> (T, T) {
        let two = T::of(2.0);
        ((self.x0 + self.x1) / two, (self.y0 + self.y1) / two)
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Children in the order lower-left, lower-right, upper-left, upper-right.
    pub fn quarters(&self) -> [Rect2<T>; 4] {
        let (cx, cy) = self.centre();
        [
            Rect2::new(self.x0, cx, self.y0, cy),
            Rect2::new(cx, self.x1, self.y0, cy),
            Rect2::new(self.x0, cx, cy, self.y1),
            Rect2::new(cx, self.x1, cy, self.y1),
        ]
    }

    /// Boundary point at parameter `s ∈ [0,4]`, counter-clockwise from
    /// the lower-left corner.
    fn boundary_point(&self, s: T) -> (T, T) {
        let one = T::one();
        let lerp = |a: T, b: T, u: T| a + (b - a) * u;
        if s < one {
            (lerp(self.x0, self.x1, s), self.y0)
        } else if s < T::of(2.0) {
            (self.x1, lerp(self.y0, self.y1, s - one))
        } else if s < T::of(3.0) {
            (lerp(self.x1, self.x0, s - T::of(2.0)), self.y1)
        } else {
            (self.x0, lerp(self.y1, self.y0, (s - T::of(3.0)).min(one)))
        }
    }
}

/// Which sufficient condition on the targets holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisCase {
    /// `tan(S_1/2) > (1 − cos S_4)/(2√cos S_4)` (non-strict when spherical).
    Fc1,
    /// `S_4 ≥ S_3 + S_2`.
    Fc2,
    /// All four targets equal: a regular tetrahedron.
    Regular,
}

/// How a solution was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TetraMethod {
    Regular,
    WindingSearch,
}

/// A solved tetrahedron.
#[derive(Clone, Debug, Serialize)]
pub struct TetraConfig<T> {
    pub geometry: Geometry,
    /// Targets `S_1 ≤ S_2 ≤ S_3 ≤ S_4`.
    pub targets: [T; 4],
    pub case: HypothesisCase,
    pub method: TetraMethod,
    /// Base edge length `|A_1A_2|`.
    pub t: T,
    /// Construction parameters; `None` for the regular shortcut.
    pub x: Option<T>,
    pub phi: Option<T>,
    pub vertices: [ModelPoint<T>; 4],
    /// `s_i` is the area of the face opposite `A_i`.
    pub areas: [T; 4],
    pub max_area_error: T,
    /// Winding number of the residual around the full rectangle.
    pub winding: Option<i64>,
    /// Determinant of the 4×4 vertex coordinate matrix.
    pub volume_determinant: T,
    /// Spherical only: a unit vector with positive inner product against
    /// every vertex.
    pub hemisphere_witness: Option<[T; 4]>,
}

/// Inner product of the model: Lorentzian for hyperbolic, Euclidean for
/// spherical.
pub fn model_inner<T: Real>(p: &ModelPoint<T>, q: &ModelPoint<T>, g: Geometry) -> T {
    let space = p[1] * q[1] + p[2] * q[2] + p[3] * q[3];
    match g {
        Geometry::Hyperbolic => space - p[0] * q[0],
        _ => space + p[0] * q[0],
    }
}

/// Geodesic distance between two model points.
///
/// Both geometries use chord forms that stay accurate for nearby points:
/// hyperbolic `2 asinh(‖p−q‖_L/2)`, spherical `2 atan2(‖p−q‖, ‖p+q‖)`.
pub fn geodesic_distance<T: Real>(p: &ModelPoint<T>, q: &ModelPoint<T>, g: Geometry) -> T {
    let d: [T; 4] = std::array::from_fn(|i| p[i] - q[i]);
    match g {
        Geometry::Hyperbolic => {
            let n2 = model_inner(&d, &d, g).max(T::zero());
            T::of(2.0) * (n2.sqrt() / T::of(2.0)).asinh()
        }
        _ => {
            let s: [T; 4] = std::array::from_fn(|i| p[i] + q[i]);
            let dn = model_inner(&d, &d, g).sqrt();
            let sn = model_inner(&s, &s, g).sqrt();
            T::of(2.0) * dn.atan2(sn)
        }
    }
}

/// Deviation of a point from the model surface.
pub fn model_error<T: Real>(p: &ModelPoint<T>, g: Geometry) -> T {
    match g {
        Geometry::Hyperbolic => (model_inner(p, p, g) + T::one()).abs(),
        _ => (model_inner(p, p, g) - T::one()).abs(),
    }
}

fn trig_pair<T: Real>(v: T, g: Geometry) -> (T, T) {
    match g {
        Geometry::Hyperbolic => (v.cosh(), v.sinh()),
        _ => (v.cos(), v.sin()),
    }
}

/// The point at height `y` over the base-line point at distance `x` from
/// `A_1`, in the half-plane `x_3 = 0, x_2 ≥ 0`.
fn lifted_point<T: Real>(x: T, y: T, g: Geometry) -> ModelPoint<T> {
    let (cx, sx) = trig_pair(x, g);
    let (cy, sy) = trig_pair(y, g);
    [cy * cx, cy * sx, sy, T::zero()]
}

/// Rotation by `φ` about the base line, acting on coordinates 2 and 3.
fn rotate<T: Real>(p: ModelPoint<T>, phi: T) -> ModelPoint<T> {
    let (c, s) = (phi.cos(), phi.sin());
    [p[0], p[1], c * p[2] - s * p[3], s * p[2] + c * p[3]]
}

fn check_construction<T: Real>(t: T, s3: T, s4: T, g: Geometry) -> Result<()> {
    match g {
        Geometry::Hyperbolic => {
            if !(T::of(2.0) * (t / T::of(2.0)).sinh() > s4.tan()) {
                return Err(TetraError::PreconditionViolated(format!(
                    "2 sinh(t/2) must exceed tan S_4 (t = {:e}, S_4 = {:e})",
                    t.f64(),
                    s4.f64()
                )));
            }
        }
        Geometry::Spherical => {
            if (t - T::FRAC_PI_2()).abs() > T::tol_at_least(1e-12, 8.0) {
                return Err(TetraError::PreconditionViolated("spherical construction needs t = π/2".into()));
            }
            if s4 > T::FRAC_PI_2() {
                return Err(TetraError::PreconditionViolated("spherical construction needs S_4 ≤ π/2".into()));
            }
        }
        Geometry::Euclidean => {
            return Err(TetraError::PreconditionViolated(
                "the tetrahedron construction is hyperbolic or spherical".into(),
            ))
        }
    }
    if !(s3 > T::zero() && s3 <= s4) {
        return Err(TetraError::PreconditionViolated("need 0 < S_3 ≤ S_4".into()));
    }
    Ok(())
}

/// Construction coordinates of a point: distance `x` along the base line
/// from `A_1`, height `y ≥ 0` over it, and rotation angle `φ` about it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FermiPoint<T> {
    pub x: T,
    pub y: T,
    pub phi: T,
}

/// Geodesic distance between two points in construction coordinates.
///
/// `sinh²(d/2) = cosh y_a cosh y_b sinh²(Δx/2) + sinh²(Δy/2) + sinh y_a sinh y_b sin²(Δφ/2)`
/// (with circular functions in the spherical case). Every term is
/// non-negative, so there is no cancellation however long the base edge.
pub fn fermi_distance<T: Real>(a: &FermiPoint<T>, b: &FermiPoint<T>, g: Geometry) -> T {
    let half = T::of(0.5);
    let sq = |v: T| v * v;
    let dphi = sq(((a.phi - b.phi) * half).sin());
    match g {
        Geometry::Hyperbolic => {
            let q = a.y.cosh() * b.y.cosh() * sq(((a.x - b.x) * half).sinh())
                + sq(((a.y - b.y) * half).sinh())
                + a.y.sinh() * b.y.sinh() * dphi;
            T::of(2.0) * q.max(T::zero()).sqrt().asinh()
        }
        _ => {
            let q = a.y.cos() * b.y.cos() * sq(((a.x - b.x) * half).sin())
                + sq(((a.y - b.y) * half).sin())
                + a.y.sin() * b.y.sin() * dphi;
            T::of(2.0) * q.max(T::zero()).sqrt().min(T::one()).asin()
        }
    }
}

/// Construction coordinates of `A_1, …, A_4` for parameters `(x, φ)`.
pub fn construction_points<T: Real>(x: T, phi: T, t: T, s3: T, s4: T, g: Geometry) -> Result<[FermiPoint<T>; 4]> {
    check_construction(t, s3, s4, g)?;
    let z = T::zero();
    Ok([
        FermiPoint { x: z, y: z, phi: z },
        FermiPoint { x: t, y: z, phi: z },
        FermiPoint { x, y: f_ts(x, t, s4, g)?, phi },
        FermiPoint { x, y: f_ts(x, t, s3, g)?, phi: z },
    ])
}

/// Places the four vertices for parameters `(x, φ)`.
///
/// Spherical vertices use `A_1 = e_1`, `A_2 = e_2`. Hyperbolic vertices are
/// translated along the base line so that the middle of their extent along
/// it sits at the hyperboloid apex. Coordinates then grow like `e^{t/2}`
/// rather than `e^t`, which keeps coordinate-based checks accurate.
pub fn place_tetra<T: Real>(x: T, phi: T, t: T, s3: T, s4: T, g: Geometry) -> Result<[ModelPoint<T>; 4]> {
    let p = construction_points(x, phi, t, s3, s4, g)?;
    let shift = if g == Geometry::Hyperbolic {
        (x.min(T::zero()) + x.max(t)) * T::of(0.5)
    } else {
        T::zero()
    };
    Ok(p.map(|q| rotate(lifted_point(q.x - shift, q.y, g), q.phi)))
}

const OPPOSITE: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

fn face_areas_unchecked<T: Real>(v: &[ModelPoint<T>; 4], g: Geometry) -> Result<[T; 4]> {
    let d = |i: usize, j: usize| geodesic_distance(&v[i], &v[j], g);
    let mut out = [T::zero(); 4];
    for (i, f) in OPPOSITE.iter().enumerate() {
        out[i] = triangle_area_from_sides(d(f[0], f[1]), d(f[1], f[2]), d(f[0], f[2]), g)?;
    }
    Ok(out)
}

/// Facet areas `(s_1, s_2, s_3, s_4)`, `s_i` opposite `A_i`.
pub fn tetra_face_areas<T: Real>(v: &[ModelPoint<T>; 4], g: Geometry) -> Result<[T; 4]> {
    let tiny = T::tol_at_least(1e-14, 16.0);
    for (i, f) in OPPOSITE.iter().enumerate() {
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[0], f[2])] {
            if geodesic_distance(&v[a], &v[b], g) <= tiny {
                return Err(TetraError::DegenerateFace(i + 1));
            }
        }
    }
    face_areas_unchecked(v, g)
}

/// Determinant of the matrix whose rows are the vertex coordinates. It
/// vanishes exactly when the tetrahedron is degenerate.
pub fn volume_determinant<T: Real>(v: &[ModelPoint<T>; 4]) -> T {
    let rows: Vec<Vec<T>> = v.iter().map(|p| p.to_vec()).collect();
    det(&rows)
}

/// Problem data for the residual field.
#[derive(Clone, Copy, Debug)]
pub struct TetraProblem<T> {
    pub geometry: Geometry,
    pub targets: [T; 4],
    pub t: T,
}

impl<T: Real> TetraProblem<T> {
    pub fn vertices(&self, x: T, phi: T) -> Result<[ModelPoint<T>; 4]> {
        place_tetra(x, phi, self.t, self.targets[2], self.targets[3], self.geometry)
    }

    /// Facet areas at `(x, φ)` from construction-coordinate distances.
    pub fn areas(&self, x: T, phi: T) -> Result<[T; 4]> {
        let g = self.geometry;
        let p = construction_points(x, phi, self.t, self.targets[2], self.targets[3], g)?;
        let d = |i: usize, j: usize| fermi_distance(&p[i], &p[j], g);
        let mut out = [T::zero(); 4];
        for (i, f) in OPPOSITE.iter().enumerate() {
            out[i] = triangle_area_from_sides(d(f[0], f[1]), d(f[1], f[2]), d(f[0], f[2]), g)?;
        }
        Ok(out)
    }

    pub fn rect(&self) -> Rect2<T> {
        Rect2::new(T::zero(), self.t, T::zero(), T::PI())
    }
}

/// `(f_1, f_2) = (s_2 − S_2, s_1 − S_1)` at `(x, φ)`.
pub fn residual<T: Real>(x: T, phi: T, p: &TetraProblem<T>) -> Result<(T, T)> {
    let s = p.areas(x, phi)?;
    Ok((s[1] - p.targets[1], s[0] - p.targets[0]))
}

fn wrap_angle(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = a.rem_euclid(tau);
    if r > std::f64::consts::PI {
        r - tau
    } else {
        r
    }
}

const MAX_REFINE_DEPTH: u32 = 40;

/// Winding number of `f` around the counter-clockwise boundary of `rect`.
///
/// The boundary is sampled at `samples` points per side; any step whose
/// angular change exceeds `π/4` is bisected adaptively. Fails with
/// `ZeroOnBoundary` if `f` vanishes at a sample.
pub fn winding_number<T, F>(f: &F, rect: &Rect2<T>, samples: usize) -> Result<i64>
where
    T: Real,
    F: Fn(T, T) -> Result<(T, T)>,
{
    let zero_tol = 1e-14;
    let eval = |s: T| -> Result<f64> {
        let (x, y) = rect.boundary_point(s);
        let (u, v) = f(x, y)?;
        let (u, v) = (u.f64(), v.f64());
        if u.hypot(v) <= zero_tol {
            return Err(TetraError::ZeroOnBoundary { x: x.f64(), y: y.f64() });
        }
        Ok(v.atan2(u))
    };
    fn refine<T: Real>(
        eval: &dyn Fn(T) -> Result<f64>,
        s0: T,
        a0: f64,
        s1: T,
        a1: f64,
        depth: u32,
    ) -> Result<f64> {
        let d = wrap_angle(a1 - a0);
        if d.abs() <= std::f64::consts::FRAC_PI_4 || depth >= MAX_REFINE_DEPTH {
            return Ok(d);
        }
        let sm = (s0 + s1) / T::of(2.0);
        let am = eval(sm)?;
        Ok(refine(eval, s0, a0, sm, am, depth + 1)? + refine(eval, sm, am, s1, a1, depth + 1)?)
    }
    let n = 4 * samples.max(1);
    let step = T::of(4.0) / T::of_usize(n);
    let start = eval(T::zero())?;
    let (mut prev_s, mut prev_a) = (T::zero(), start);
    let mut total = 0.0;
    for k in 1..=n {
        let s = if k == n { T::of(4.0) } else { step * T::of_usize(k) };
        let a = if k == n { start } else { eval(s)? };
        total += refine(&eval, prev_s, prev_a, s, a, 0)?;
        prev_s = s;
        prev_a = a;
    }
    Ok((total / std::f64::consts::TAU).round() as i64)
}

/// Report of the sufficient conditions on a sorted target quadruple.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub range_ok: bool,
    pub sum_ok: bool,
    pub fc1: bool,
    pub fc1_lhs: f64,
    pub fc1_rhs: f64,
    pub fc2: bool,
    pub all_equal: bool,
}

impl HypothesisReport {
    pub fn holds(&self) -> bool {
        self.all_equal || (self.range_ok && self.sum_ok && (self.fc1 || self.fc2))
    }

    pub fn case(&self) -> Option<HypothesisCase> {
        if self.all_equal {
            Some(HypothesisCase::Regular)
        } else if !(self.range_ok && self.sum_ok) {
            None
        } else if self.fc1 {
            Some(HypothesisCase::Fc1)
        } else if self.fc2 {
            Some(HypothesisCase::Fc2)
        } else {
            None
        }
    }

    fn failure(&self) -> String {
        let mut parts = Vec::new();
        if !self.range_ok {
            parts.push("need π/2 > S_4 and S_1 > 0".to_string());
        }
        if !self.sum_ok {
            parts.push("need S_4 < S_1 + S_2 + S_3".to_string());
        }
        if !self.fc1 {
            parts.push(format!(
                "(fc1) fails: tan(S_1/2) = {:.6e} vs (1 − cos S_4)/(2√cos S_4) = {:.6e}",
                self.fc1_lhs, self.fc1_rhs
            ));
        }
        if !self.fc2 {
            parts.push("(fc2) fails: S_4 < S_3 + S_2".to_string());
        }
        parts.join("; ")
    }
}

fn check_sorted<T: Real>(s: &[T; 4]) -> Result<()> {
    if s.iter().any(|v| !v.is_finite()) || s.windows(2).any(|w| w[0] > w[1]) {
        return Err(TetraError::Unsorted(format!("{:?}", s.map(|v| v.f64()))));
    }
    Ok(())
}

/// Evaluates the sufficient conditions for sorted targets.
pub fn check_hypotheses<T: Real>(s: &[T; 4], g: Geometry) -> Result<HypothesisReport> {
    check_sorted(s)?;
    if g == Geometry::Euclidean {
        return Err(TetraError::PreconditionViolated(
            "the tetrahedron solver is hyperbolic or spherical".into(),
        ));
    }
    let [s1, s2, s3, s4] = s.map(|v| v.f64());
    let all_equal = s1 == s4 && s1 > 0.0 && s1 < std::f64::consts::PI;
    let range_ok = s1 > 0.0 && s4 < std::f64::consts::FRAC_PI_2;
    let sum_ok = s4 < s1 + s2 + s3;
    let lhs = (s1 / 2.0).tan();
    let rhs = if s4 < std::f64::consts::FRAC_PI_2 {
        (1.0 - s4.cos()) / (2.0 * s4.cos().sqrt())
    } else {
        f64::INFINITY
    };
    let fc1 = match g {
        Geometry::Spherical => lhs >= rhs,
        _ => lhs > rhs,
    };
    Ok(HypothesisReport {
        range_ok,
        sum_ok,
        fc1,
        fc1_lhs: lhs,
        fc1_rhs: rhs,
        fc2: s4 >= s3 + s2,
        all_equal,
    })
}

const MAX_DOUBLINGS: usize = 60;

/// Base edge length for the construction.
pub fn choose_t<T: Real>(s: &[T; 4], g: Geometry, case: HypothesisCase) -> Result<T> {
    if g == Geometry::Spherical {
        return Ok(T::FRAC_PI_2());
    }
    let [s1, s2, s3, s4] = *s;
    let two = T::of(2.0);
    let edge_ok = |t: T| two * (t / two).sinh() > s4.tan();
    let mut t = T::one();
    let mut doublings = 0;
    while !edge_ok(t) {
        t = t + t;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(TetraError::HypothesesNotMet("no t with 2 sinh(t/2) > tan S_4".into()));
        }
    }
    match case {
        HypothesisCase::Fc1 | HypothesisCase::Regular => {
            let bound = (s1 / two).tan();
            for _ in 0..=MAX_DOUBLINGS {
                let ch = h_ts(t, s4, g)?.cosh();
                if (ch - T::one()) / (two * ch.sqrt()) < bound {
                    return Ok(t);
                }
                t = t + t;
            }
            Err(TetraError::HypothesesNotMet("no power-of-two t satisfies the height condition".into()))
        }
        HypothesisCase::Fc2 => {
            for _ in 0..=MAX_DOUBLINGS {
                let p = TetraProblem { geometry: g, targets: [s1, s2, s3, s4], t };
                let left = p.areas(T::zero(), T::zero())?;
                let right = p.areas(t, T::zero())?;
                if left[0] >= s2 && right[1] >= s2 {
                    return Ok(t);
                }
                t = t + t;
            }
            Err(TetraError::HypothesesNotMet("t doubling did not reach the boundary inequalities".into()))
        }
    }
}

/// Tuning of the root search.
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Boundary samples per side for winding numbers.
    pub samples: usize,
    /// Cell diameter below which Newton polishing is attempted.
    pub newton_cell: f64,
    /// Cell diameter at which subdivision stops.
    pub min_cell: f64,
    /// Residual norm accepted as a zero.
    pub tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { samples: 16, newton_cell: 1e-4, min_cell: 1e-10, tol: 1e-13 }
    }
}

fn newton<T, F>(f: &F, start: (T, T), rect: &Rect2<T>, tol: f64) -> Option<(T, T)>
where
    T: Real,
    F: Fn(T, T) -> Result<(T, T)>,
{
    let (mut x, mut y) = start;
    let h = T::of(1e-7);
    for _ in 0..50 {
        let (u, v) = f(x, y).ok()?;
        if u.f64().hypot(v.f64()) <= tol {
            return Some((x, y));
        }
        let hx = h.min((x - rect.x0).max(rect.x1 - x));
        let sx = if x + hx <= rect.x1 { hx } else { -hx };
        let sy = if y + h <= rect.y1 { h } else { -h };
        let (ux, vx) = f(x + sx, y).ok()?;
        let (uy, vy) = f(x, y + sy).ok()?;
        let jac = Matrix::from_rows(&[
            vec![(ux - u) / sx, (uy - u) / sy],
            vec![(vx - v) / sx, (vy - v) / sy],
        ]);
        let d = jac.solve(&[-u, -v])?;
        x = x + d[0];
        y = y + d[1];
        if !rect.contains(x, y) {
            return None;
        }
    }
    let (u, v) = f(x, y).ok()?;
    (u.f64().hypot(v.f64()) <= tol * 1e3).then_some((x, y))
}

/// Locates a zero of `f` inside `rect`, guided by winding numbers.
pub fn find_zero<T, F>(f: &F, rect: &Rect2<T>, opts: &SearchOptions) -> Result<(T, T)>
where
    T: Real,
    F: Fn(T, T) -> Result<(T, T)>,
{
    let accept_boundary = |x: f64, y: f64| -> Result<(T, T)> {
        let p = (T::of(x), T::of(y));
        Ok(newton(f, p, rect, opts.tol).unwrap_or(p))
    };
    let mut cell = *rect;
    match winding_number(f, &cell, opts.samples) {
        Ok(0) => return Err(TetraError::SearchFailed("winding number 0 on the full rectangle".into())),
        Ok(_) => {}
        Err(TetraError::ZeroOnBoundary { x, y }) => return accept_boundary(x, y),
        Err(e) => return Err(e),
    }
    loop {
        let diam = cell.diameter().f64();
        if diam <= opts.newton_cell {
            if let Some(p) = newton(f, cell.centre(), rect, opts.tol) {
                return Ok(p);
            }
        }
        if diam <= opts.min_cell {
            return Ok(cell.centre());
        }
        let mut next = None;
        for child in cell.quarters() {
            match winding_number(f, &child, opts.samples) {
                Ok(0) => {}
                Ok(_) => {
                    next = Some(child);
                    break;
                }
                Err(TetraError::ZeroOnBoundary { x, y }) => return accept_boundary(x, y),
                Err(e) => return Err(e),
            }
        }
        cell = next.ok_or_else(|| {
            TetraError::SearchFailed(format!("no child cell carries the index at diameter {diam:e}"))
        })?;
    }
}

/// Regular tetrahedron with face area `area`.
pub fn regular_tetrahedron<T: Real>(area: T, g: Geometry) -> Result<[ModelPoint<T>; 4]> {
    let limit = match g {
        Geometry::Hyperbolic => T::of(60.0),
        Geometry::Spherical => (-T::one() / T::of(3.0)).acos(),
        Geometry::Euclidean => {
            return Err(TetraError::PreconditionViolated("regular tetrahedron needs curvature".into()))
        }
    };
    if !(area > T::zero() && area < T::PI()) {
        return Err(TetraError::PreconditionViolated(format!(
            "regular face area {:e} outside (0, π)",
            area.f64()
        )));
    }
    let face = |e: T| triangle_area_from_sides(e, e, e, g);
    let (mut lo, mut hi) = (T::zero(), limit);
    if face(hi * T::of(1.0 - 1e-12))? < area {
        return Err(TetraError::PreconditionViolated("face area not reachable by a regular tetrahedron".into()));
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::of(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if face(mid)? < area {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let e = (lo + hi) / T::of(2.0);
    let three = T::of(3.0);
    let half = T::of(0.5);
    match g {
        Geometry::Hyperbolic => {
            let sr = (three * (e.cosh() - T::one()) / T::of(4.0)).sqrt();
            let cr = (T::one() + sr * sr).sqrt();
            let k = sr / three.sqrt();
            let w = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
            Ok(w.map(|d| [cr, k * T::of(d[0]), k * T::of(d[1]), k * T::of(d[2])]))
        }
        _ => {
            // Centre n = (1,1,1,1)/2; w_i = (e_i − n/2)/(√3/2), so radius π/3
            // gives exactly the coordinate vectors.
            let sr = (three * (T::one() - e.cos()) / T::of(4.0)).sqrt().min(T::one());
            let cr = (T::one() - sr * sr).max(T::zero()).sqrt();
            let scale = sr / (three.sqrt() / T::of(2.0));
            Ok(std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let ej = if i == j { T::one() } else { T::zero() };
                    cr * half + scale * (ej - half * half)
                })
            }))
        }
    }
}

/// Unit vector `w` with `⟨w, v_i⟩ > 0` for all four vertices, if one exists.
pub fn hemisphere_witness<T: Real>(v: &[ModelPoint<T>; 4]) -> Option<[T; 4]> {
    let m = Matrix::from_rows(&v.iter().map(|p| p.to_vec()).collect::<Vec<_>>());
    let w = m.solve(&[T::one(); 4])?;
    let n = w.iter().map(|&c| c * c).sum::<T>().sqrt();
    if !(n > T::zero()) || !n.is_finite() {
        return None;
    }
    let w: [T; 4] = std::array::from_fn(|i| w[i] / n);
    v.iter()
        .all(|p| w.iter().zip(p).map(|(&a, &b)| a * b).sum::<T>() > T::zero())
        .then_some(w)
}

const DEGENERACY_TOL: f64 = 1e-10;

#[allow(clippy::too_many_arguments)]
fn finish<T: Real>(
    g: Geometry,
    targets: [T; 4],
    case: HypothesisCase,
    method: TetraMethod,
    t: T,
    params: Option<(T, T)>,
    vertices: [ModelPoint<T>; 4],
    winding: Option<i64>,
) -> Result<TetraConfig<T>> {
    let areas = tetra_face_areas(&vertices, g)?;
    let max_area_error = areas
        .iter()
        .zip(&targets)
        .map(|(&a, &s)| (a - s).abs())
        .fold(T::zero(), T::max);
    let vd = volume_determinant(&vertices);
    if vd.abs().f64() <= DEGENERACY_TOL {
        return Err(TetraError::DegenerateOnly { phi: params.map_or(f64::NAN, |p| p.1.f64()) });
    }
    let hemisphere_witness = match g {
        Geometry::Spherical => Some(hemisphere_witness(&vertices).ok_or_else(|| {
            TetraError::SearchFailed("vertices are not in an open hemisphere".into())
        })?),
        _ => None,
    };
    Ok(TetraConfig {
        geometry: g,
        targets,
        case,
        method,
        t,
        x: params.map(|p| p.0),
        phi: params.map(|p| p.1),
        vertices,
        areas,
        max_area_error,
        winding,
        volume_determinant: vd,
        hemisphere_witness,
    })
}

/// Solves for a tetrahedron with facet areas `targets` (sorted ascending).
pub fn solve_tetra<T: Real>(targets: [T; 4], g: Geometry) -> Result<TetraConfig<T>> {
    solve_tetra_with(targets, g, &SearchOptions::default())
}

/// [`solve_tetra`] with explicit search options.
pub fn solve_tetra_with<T: Real>(targets: [T; 4], g: Geometry, opts: &SearchOptions) -> Result<TetraConfig<T>> {
    let report = check_hypotheses(&targets, g)?;
    let case = report.case().ok_or_else(|| TetraError::HypothesesNotMet(report.failure()))?;
    if case == HypothesisCase::Regular {
        let v = regular_tetrahedron(targets[0], g)?;
        let t = geodesic_distance(&v[0], &v[1], g);
        return finish(g, targets, case, TetraMethod::Regular, t, None, v, None);
    }
    let t = choose_t(&targets, g, case)?;
    let problem = TetraProblem { geometry: g, targets, t };
    let f = |x: T, phi: T| residual(x, phi, &problem);
    let rect = problem.rect();
    let winding = winding_number(&f, &rect, opts.samples).ok();
    let (x, phi) = find_zero(&f, &rect, opts)?;
    let edge = T::of(1e-9);
    if phi <= edge || phi >= T::PI() - edge {
        return Err(TetraError::DegenerateOnly { phi: phi.f64() });
    }
    let v = problem.vertices(x, phi)?;
    finish(g, targets, case, TetraMethod::WindingSearch, t, Some((x, phi)), v, winding)
}
