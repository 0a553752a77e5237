//! Acceptance protocol: one PASS/FAIL line per criterion.
//!
//! The target runs without the libtest harness, so `cargo test -p facetforge
//! --test acceptance` always prints the report. It exits nonzero if any
//! criterion fails, except for the
//! documented bound clause of the needle criterion, which cannot hold (see
//! `needle_bound_clause`).

mod common;

use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

use facetforge::euclid::{
    build_small_volume_polytope, facet_volume_bound, measure_bound_inputs, needle_tetrahedron, needle_volume,
    slope_sharp_example, BoundInputs, EuclidError,
};
use facetforge::geom::gww_check;
use facetforge::minkowski::{polytope, solve_support};
use facetforge::noneuclid::{check_necessary, cosh_h_closed_form, g_x, h_ts, suspension_lift_areas, Geometry};
use facetforge::oracle::{angle_area_oracle, sample_polygon_areas};
use facetforge::planar_infimum::infimum_convex;
use facetforge::tetra::{residual, solve_tetra, winding_number, TetraConfig, TetraProblem};
use facetforge::Mesh;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

struct Protocol {
    lines: Vec<(usize, &'static str, Outcome)>,
    meshes: Vec<(String, Mesh)>,
}

impl Protocol {
    fn record(&mut self, id: usize, name: &'static str, outcome: Outcome) {
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] C{id:02} {name}: {}", outcome.detail);
        self.lines.push((id, name, outcome));
    }
}

fn cube(p: &mut Protocol) -> Outcome {
    let (_, mesh) = solve_support(&common::cube_data(), 1e-12, 100).unwrap();
    let area_err = mesh.areas.iter().map(|a| (a - 1.0).abs()).fold(0.0, f64::max);
    let vol_err = (mesh.volume - 1.0).abs();
    p.meshes.push(("cube".into(), mesh));
    Outcome::new(vol_err <= 1e-9 && area_err <= 1e-9, format!("|V-1| = {vol_err:.2e}, max area error {area_err:.2e}"))
}

fn regular_tetra(p: &mut Protocol) -> Outcome {
    let (_, mesh) = solve_support(&common::regular_tetra_data(), 1e-12, 100).unwrap();
    let want = 1.0 / (6.0 * 2f64.sqrt());
    let err = (mesh.volume - want).abs();
    p.meshes.push(("regular tetrahedron".into(), mesh));
    Outcome::new(err <= 1e-7, format!("V = {:.12}, |V - 1/(6√2)| = {err:.2e}", want + err))
}

/// The bound needs `q = sin ε / sin(β/2) ≤ 1/√2`. The needle is symmetric
/// under `y → −y`, so its measured tilt and separation satisfy
/// `sin(β/2) = sin ε` and `q = 1`: the bound's precondition never holds.
fn needle_bound_clause(mesh: &Mesh) -> Result<f64, String> {
    let m = measure_bound_inputs(mesh);
    let inputs = BoundInputs { epsilon: m.epsilon, separation: m.beta, n: 3, areas: mesh.areas.clone() };
    match facet_volume_bound(&inputs) {
        Ok(b) if mesh.volume <= b.simplified => Ok(b.simplified),
        Ok(b) => Err(format!("volume {:.3e} exceeds bound {:.3e}", mesh.volume, b.simplified)),
        Err(EuclidError::PreconditionViolated(_)) => Err(format!("q = {:.12} > 1/√2", inputs.ratio())),
        Err(e) => Err(e.to_string()),
    }
}

struct NeedleOutcome {
    geometry_ok: bool,
    bound_failures: Vec<String>,
}

fn needle(p: &mut Protocol) -> (Outcome, NeedleOutcome) {
    let mut geometry_ok = true;
    let mut worst = (0.0f64, 0.0f64);
    let mut bound_failures = Vec::new();
    for eps in [0.2f64, 0.1, 0.05, 0.01] {
        let mesh = needle_tetrahedron(eps).unwrap();
        let a = mesh.areas.iter().map(|a| (a - 2.0).abs()).fold(0.0, f64::max);
        let v = (mesh.volume - needle_volume(eps)).abs();
        worst = (worst.0.max(a), worst.1.max(v));
        geometry_ok &= a <= 1e-9 && v <= 1e-12;
        if let Err(why) = needle_bound_clause(&mesh) {
            bound_failures.push(format!("ε={eps}: {why}"));
        }
        p.meshes.push((format!("needle ε={eps}"), mesh));
    }
    let detail = format!(
        "areas/volume clause {} (max area error {:.2e}, max volume error {:.2e}); bound clause {}",
        if geometry_ok { "ok" } else { "FAILED" },
        worst.0,
        worst.1,
        if bound_failures.is_empty() {
            "ok".to_string()
        } else {
            format!("unattainable [{}]", bound_failures.join("; "))
        }
    );
    let pass = geometry_ok && bound_failures.is_empty();
    (Outcome::new(pass, detail), NeedleOutcome { geometry_ok, bound_failures })
}

fn shrink(p: &mut Protocol) -> Outcome {
    let areas = [1.0f64; 5];
    let mut ok = true;
    let mut notes = Vec::new();
    for target in [1e-1, 1e-2, 1e-3] {
        let start = Instant::now();
        let res = build_small_volume_polytope(&areas, target);
        let took = start.elapsed();
        match res {
            Ok(r) => {
                let err = r.mesh.areas.iter().map(|a| (a - 1.0).abs()).fold(0.0, f64::max);
                let good = r.mesh.volume <= target && err <= 1e-6 && took < Duration::from_secs(10);
                ok &= good;
                notes.push(format!("V={:.3e} err={err:.1e} {:.2}s", r.mesh.volume, took.as_secs_f64()));
                p.meshes.push((format!("shrink {target:e}"), r.mesh));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("target {target:e}: {e}"));
            }
        }
    }
    Outcome::new(ok, notes.join(", "))
}

fn gradient_identity(p: &mut Protocol) -> Outcome {
    let step = 1e-5;
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let (normals, h, areas) = common::random_polytope(1000 + seed, 8);
        let data = facetforge::geom::SurfaceData::new(normals, areas.clone()).unwrap();
        let base = polytope(&data, &common::support(&h)).unwrap();
        for i in 0..h.len() {
            let vol = |d: f64| {
                let mut hh = h.clone();
                hh[i] += d;
                polytope(&data, &common::support(&hh)).unwrap().volume()
            };
            let fd = (vol(step) - vol(-step)) / (2.0 * step);
            worst = worst.max((fd - areas[i]).abs());
        }
        p.meshes.push((format!("random polytope {seed}"), base.mesh));
    }
    Outcome::new(worst <= 1e-5, format!("max |∂V/∂h_i − A_i| = {worst:.2e} over 10 instances"))
}

fn slope_grid() -> Outcome {
    let mut worst = 0.0f64;
    for i in 1..=10 {
        let beta = FRAC_PI_2 * i as f64 / 10.0;
        for j in 1..=10 {
            let eps = beta / 2.0 * j as f64 / 11.0;
            let w = slope_sharp_example(eps, beta).unwrap();
            let want = (eps.sin() / (beta / 2.0).sin()).asin();
            worst = worst.max((w.line_angle - want).abs());
        }
    }
    Outcome::new(worst <= 1e-9, format!("max angle error {worst:.2e} on the 10×10 grid"))
}

/// Kahan's stable Heron formula on sides sorted descending.
fn heron(mut v: [f64; 3]) -> f64 {
    v.sort_by(|a, b| b.total_cmp(a));
    let [a, b, c] = v;
    let k = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    k.max(0.0).sqrt() / 4.0
}

/// Minimum Heron area over all labellings of the sides into three
/// non-empty classes whose sums satisfy the triangle inequality.
fn heron_enumeration(s: &[f64]) -> f64 {
    let m = s.len() as u32;
    let mut best = f64::INFINITY;
    for code in 0..3usize.pow(m) {
        let mut sums = [0.0; 3];
        let mut used = [false; 3];
        let mut c = code;
        for &side in s {
            sums[c % 3] += side;
            used[c % 3] = true;
            c /= 3;
        }
        if !used.iter().all(|&u| u) {
            continue;
        }
        let mut v = sums;
        v.sort_by(|a, b| b.total_cmp(a));
        if v[0] <= v[1] + v[2] {
            best = best.min(heron(sums));
        }
    }
    best
}

fn infimum() -> Outcome {
    let s = [2.0, 1.0, 1.0, 1.0];
    let (value, cert) = infimum_convex(&s, Geometry::Euclidean, false).unwrap();
    let enumerated = heron_enumeration(&s);
    let sampled = sample_polygon_areas(&s, Geometry::Euclidean, 10_000, 7).unwrap();
    let (zero, _) = infimum_convex(&[1.0; 4], Geometry::Euclidean, false).unwrap();
    let pass = (value - 0.9682458).abs() < 1e-7
        && value.to_bits() == enumerated.to_bits()
        && sampled.min_area >= value - 1e-9
        && zero == 0.0;
    Outcome::new(
        pass,
        format!(
            "value {value:.10} triple {:?} (enumeration {enumerated:.10}), sampled min {:.10}, (1,1,1,1) → {zero}",
            cert.triple, sampled.min_area
        ),
    )
}

fn tetra_checks(c: &TetraConfig<f64>) -> Result<f64, String> {
    let g = c.geometry;
    if c.max_area_error > 1e-8 {
        return Err(format!("area error {:.2e}", c.max_area_error));
    }
    if c.winding != Some(1) {
        return Err(format!("winding {:?}", c.winding));
    }
    let problem = TetraProblem { geometry: g, targets: c.targets, t: c.t };
    let f = |x: f64, phi: f64| residual(x, phi, &problem);
    let fine = winding_number(&f, &problem.rect(), 64).map_err(|e| e.to_string())?;
    if fine != 1 {
        return Err(format!("winding at 4× sampling {fine}"));
    }
    let mut worst = 0.0f64;
    for (i, face) in [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]].iter().enumerate() {
        let a = angle_area_oracle(&face.map(|k| c.vertices[k]), g).map_err(|e| e.to_string())?;
        worst = worst.max((a - c.targets[i]).abs());
    }
    if worst > 1e-7 {
        return Err(format!("angle-based area error {worst:.2e}"));
    }
    Ok(worst)
}

fn tetra_protocol(g: Geometry, seed: u64) -> Outcome {
    let instances = common::tetra_instances(g, 20, seed);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for s in &instances {
        match solve_tetra(*s, g).map_err(|e| e.to_string()).and_then(|c| tetra_checks(&c)) {
            Ok(w) => worst = worst.max(w),
            Err(e) => failures.push(format!("{s:?}: {e}")),
        }
    }
    let mut detail = format!(
        "{}/20 instances solved, max angle-based area error {worst:.2e}",
        20 - failures.len()
    );
    let mut pass = failures.is_empty();
    if g == Geometry::Spherical {
        let octant = solve_tetra([FRAC_PI_2; 4], g).map(|c| {
            c.vertices.iter().enumerate().all(|(i, v)| {
                v.iter().enumerate().all(|(j, &x)| (x - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12)
            })
        });
        let ok = matches!(octant, Ok(true));
        pass &= ok;
        detail.push_str(if ok { "; all-π/2 gives the octant tetrahedron" } else { "; octant case FAILED" });
    }
    if !failures.is_empty() {
        detail.push_str(&format!("; failures: {}", failures.join(" | ")));
    }
    Outcome::new(pass, detail)
}

fn bisect_g0(t: f64, s: f64) -> f64 {
    let g = Geometry::Hyperbolic;
    let f = |y: f64| g_x(0.0, y, t, g).unwrap() - s;
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn h_grid() -> Outcome {
    let g = Geometry::Hyperbolic;
    let mut worst = 0.0f64;
    let mut worst_limit = 0.0f64;
    for j in 1..=20 {
        let s = FRAC_PI_2 * j as f64 / 21.0;
        let t0 = 2.0 * (s.tan() / 2.0).asinh();
        for i in 1..=20 {
            let t = t0 + 0.25 * i as f64;
            let h = h_ts(t, s, g).unwrap();
            worst = worst.max((h - bisect_g0(t, s)).abs());
        }
        worst_limit = worst_limit.max((cosh_h_closed_form(20.0, s) - 1.0 / s.cos()).abs());
    }
    Outcome::new(
        worst <= 1e-10 && worst_limit <= 1e-3,
        format!("max |h − bisection| = {worst:.2e}; at t = 20, max |cosh h − 1/cos S| = {worst_limit:.2e}"),
    )
}

fn gww(p: &Protocol) -> Outcome {
    let mut failures = Vec::new();
    for (name, mesh) in &p.meshes {
        match gww_check(mesh) {
            Ok(r) if r.holds => {}
            Ok(r) => failures.push(format!("{name}: {} ≤ {}", r.lhs, r.rhs)),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!("{} meshes checked{}", p.meshes.len(), if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }),
    )
}

fn lift() -> Outcome {
    let l = suspension_lift_areas(&[1.0f64, 1.0, 1.0], 2).unwrap();
    let lifted_ok = l.areas.iter().all(|a| (a - 2.0).abs() < 1e-14);
    let rep = check_necessary(&l.areas, None, 3, Geometry::Spherical).unwrap();
    Outcome::new(
        lifted_ok && rep.all_hold,
        format!("lifted areas {:?}, necessary conditions at n = 3 hold: {}", l.areas, rep.all_hold),
    )
}

/// Runs without the libtest harness so the report is printed on every run.
fn main() {
    let start = Instant::now();
    let mut p = Protocol { lines: Vec::new(), meshes: Vec::new() };
    let o = cube(&mut p);
    p.record(1, "cube", o);
    let o = regular_tetra(&mut p);
    p.record(2, "regular tetrahedron", o);
    let (o, needle_parts) = needle(&mut p);
    p.record(3, "needle", o);
    let o = shrink(&mut p);
    p.record(4, "shrink", o);
    let o = gradient_identity(&mut p);
    p.record(5, "volume gradient", o);
    p.record(6, "slope sharp example", slope_grid());
    p.record(7, "convex infimum", infimum());
    p.record(8, "hyperbolic tetrahedra", tetra_protocol(Geometry::Hyperbolic, 8));
    p.record(9, "spherical tetrahedra", tetra_protocol(Geometry::Spherical, 9));
    p.record(10, "h_tS against bisection", h_grid());
    let o = gww(&p);
    p.record(11, "surface-diameter-volume", o);
    p.record(12, "suspension lift", lift());
    let passed = p.lines.iter().filter(|l| l.2.pass).count();
    println!("acceptance: {passed}/{} criteria pass in {:.1}s", p.lines.len(), start.elapsed().as_secs_f64());

    assert!(needle_parts.geometry_ok, "needle areas and volume must match");
    assert_eq!(needle_parts.bound_failures.len(), 4, "the needle bound clause is expected to be unattainable");
    assert!(needle_parts.bound_failures.iter().all(|f| f.contains("q = 1.0000")));
    let unexpected: Vec<_> = p.lines.iter().filter(|l| !l.2.pass && l.0 != 3).map(|l| l.1).collect();
    assert!(unexpected.is_empty(), "failing criteria: {unexpected:?}");
}
