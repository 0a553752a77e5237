//! `facetforge`: command-line front end for polytopes with prescribed
//! facet areas.

mod output;

use std::fs;
use std::io::{Read as _, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context as _};
use clap::{Args, Parser, Subcommand};
use facetforge::euclid::{
    build_small_volume_polytope, facet_volume_bound, measure_bound_inputs, needle_tetrahedron, needle_volume,
    slope_bound, slope_sharp_example, BoundInputs, EuclidError,
};
use facetforge::geom::{gww_check, mesh_metrics, MeshJson, OffPrecision, PolytopeMesh, SurfaceData};
use facetforge::minkowski::{check_feasible, solve_support_with, MinkowskiError, SolveOptions};
use facetforge::noneuclid::{
    bkm_classify, bkm_max, check_necessary, cosh_h_closed_form, f_ts, h_ts, spherical_polygon_from_sides,
    suspension_lift_areas, Geometry, NoneuclidError,
};
use facetforge::oracle::{angle_area_oracle, mc_volume, sample_polygon_areas, OracleError};
use facetforge::planar_infimum::{infimum_convex, infimum_simple, InfimumError};
use facetforge::tetra::{check_hypotheses, solve_tetra, TetraConfig, TetraError};
use facetforge::Mesh;
use serde_json::{json, Value};

use output::{to_json_string, JobError, EXIT_INTERNAL, EXIT_OK, EXIT_USAGE};

#[derive(Parser, Debug)]
#[command(name = "facetforge", version, about = "Polytopes with prescribed facet areas")]
struct Cli {
    /// Print every floating-point number with 17 significant digits.
    #[arg(long, global = true)]
    exact_print: bool,
    /// Seed for randomized jobs (decimal u64).
    #[arg(long, global = true, env = "FACETFORGE_SEED", default_value_t = 0)]
    seed: u64,
    /// Suppress the human-readable summary on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Discrete Minkowski problem in ℝ³.
    #[command(subcommand)]
    Minkowski(MinkowskiCmd),
    /// Build a polytope with the given facet areas and volume at most the target.
    Shrink(ShrinkArgs),
    /// The needle tetrahedron with all facet areas 2.
    Needle(NeedleArgs),
    /// Steep-facet slope and volume bounds.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Infimum of polygon areas with given side lengths.
    #[command(subcommand)]
    Infimum(InfimumCmd),
    /// Hyperbolic and spherical trigonometry.
    #[command(subcommand)]
    Noneuclid(NoneuclidCmd),
    /// Spherical polygons and the suspension lift.
    #[command(subcommand)]
    Sphere(SphereCmd),
    /// Hyperbolic and spherical tetrahedra with prescribed facet areas.
    #[command(subcommand)]
    Tetra(TetraCmd),
    /// Independent verification oracles.
    #[command(subcommand)]
    Oracle(OracleCmd),
}

#[derive(Args, Debug)]
struct MeshOut {
    /// Write the mesh as an OFF file.
    #[arg(long)]
    off: Option<PathBuf>,
    /// Use 17 significant digits in the OFF file.
    #[arg(long)]
    off_exact: bool,
}

#[derive(Subcommand, Debug)]
enum MinkowskiCmd {
    /// Check the solvability conditions of surface data.
    Check {
        /// Surface data JSON `{"normals": [[x,y,z],...], "areas": [...]}`, or `-` for stdin.
        #[arg(long)]
        input: PathBuf,
    },
    /// Solve for the polytope with the given normals and facet areas.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Relative area tolerance.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        #[command(flatten)]
        out: MeshOut,
    },
}

#[derive(Args, Debug)]
struct ShrinkArgs {
    /// Facet areas, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    areas: Vec<f64>,
    /// Target volume.
    #[arg(long)]
    target: f64,
    #[command(flatten)]
    out: MeshOut,
}

#[derive(Args, Debug)]
struct NeedleArgs {
    /// Needle parameter ε ∈ (0, 1].
    #[arg(long)]
    eps: f64,
    #[command(flatten)]
    out: MeshOut,
}

#[derive(Subcommand, Debug)]
enum BoundsCmd {
    /// Largest angle between an edge line and the vertical axis.
    Slope(BoundArgs),
    /// Volume bound in terms of facet areas.
    Volume(BoundArgs),
}

#[derive(Args, Debug)]
struct BoundArgs {
    /// Maximal tilt ε of the facet normals from the horizontal hyperplane.
    #[arg(long, required_unless_present = "mesh")]
    eps: Option<f64>,
    /// Separation: β (n = 3) or the parallelotope volume b (n > 3).
    #[arg(long, required_unless_present = "mesh")]
    separation: Option<f64>,
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Facet areas, comma separated (volume bound only).
    #[arg(long, value_delimiter = ',')]
    areas: Vec<f64>,
    /// Measure ε, β and the areas from a mesh JSON file instead.
    #[arg(long, conflicts_with_all = ["eps", "separation", "areas"])]
    mesh: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SidesGeometry {
    /// Side lengths, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    sides: Vec<f64>,
    #[arg(long, default_value = "euclidean")]
    geometry: Geometry,
}

#[derive(Subcommand, Debug)]
enum InfimumCmd {
    /// Convex polygons (`--cyclic` for the given cyclic order).
    Convex {
        #[command(flatten)]
        input: SidesGeometry,
        #[arg(long)]
        cyclic: bool,
    },
    /// Simple polygons.
    Simple {
        #[command(flatten)]
        input: SidesGeometry,
    },
}

#[derive(Subcommand, Debug)]
enum NoneuclidCmd {
    /// Height f_{t,S}(x) of the apex over the base point at distance x.
    F {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value = "hyperbolic")]
        geometry: Geometry,
    },
    /// h_{t,S} = f_{t,S}(0).
    H {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value = "hyperbolic")]
        geometry: Geometry,
    },
    /// Maximal-area triangle with two given sides.
    Bkm {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        /// Also classify the triangle with this enclosed angle.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value = "hyperbolic")]
        geometry: Geometry,
    },
    /// Necessary conditions on facet areas.
    Check {
        #[arg(long, value_delimiter = ',', required = true)]
        areas: Vec<f64>,
        /// Vertex counts of the facets (hyperbolic angle-sum checks).
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value = "hyperbolic")]
        geometry: Geometry,
    },
}

#[derive(Subcommand, Debug)]
enum SphereCmd {
    /// Convex spherical polygon with the given side lengths.
    Polygon {
        #[arg(long, value_delimiter = ',', required = true)]
        sides: Vec<f64>,
    },
    /// Suspend a spherical complex one dimension up.
    Lift {
        #[arg(long, value_delimiter = ',', required = true)]
        areas: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        from_dim: usize,
    },
}

#[derive(Subcommand, Debug)]
enum TetraCmd {
    /// Solve for a tetrahedron with four facet areas (any order).
    Solve {
        #[arg(long, value_delimiter = ',', required = true, num_args = 1)]
        areas: Vec<f64>,
        #[arg(long, default_value = "hyperbolic")]
        geometry: Geometry,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCmd {
    /// Monte Carlo volume of a mesh.
    Mc {
        /// Mesh JSON file, bare or as the `mesh` field of a solver report.
        #[arg(long, required_unless_present_any = ["needle", "cube"])]
        mesh: Option<PathBuf>,
        /// Use the needle tetrahedron with this ε.
        #[arg(long, conflicts_with = "mesh")]
        needle: Option<f64>,
        /// Use the unit cube.
        #[arg(long, conflicts_with_all = ["mesh", "needle"])]
        cube: bool,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Smallest area over random convex polygons with the given sides.
    Sample {
        #[command(flatten)]
        input: SidesGeometry,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

/// Result of one job: the JSON report and a one-line human summary.
struct Report {
    json: Value,
    summary: String,
}

type JobResult = Result<Report, JobError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let exact = cli.exact_print;
    let quiet = cli.quiet;
    let code = match dispatch(&cli) {
        Ok(report) => {
            emit(&report.json, exact);
            if !quiet {
                eprintln!("{}", report.summary);
            }
            EXIT_OK
        }
        Err(err) => {
            let code = err.exit_code();
            match err {
                JobError::Infeasible { message, report } => {
                    let body = json!({"status": "infeasible", "error": message, "report": report});
                    emit(&body, exact);
                    if !quiet {
                        eprintln!("infeasible: {message}");
                    }
                }
                JobError::Usage(message) => eprintln!("error: {message}"),
                JobError::Internal(e) => {
                    eprintln!("internal error: {e:#}");
                    debug_assert_eq!(code, EXIT_INTERNAL);
                }
            }
            code
        }
    };
    ExitCode::from(code as u8)
}

/// Writes a JSON document to stdout; a closed pipe is not an error.
fn emit(value: &Value, exact: bool) {
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{}", to_json_string(value, exact));
}

fn dispatch(cli: &Cli) -> JobResult {
    match &cli.command {
        Command::Minkowski(MinkowskiCmd::Check { input }) => minkowski_check(input),
        Command::Minkowski(MinkowskiCmd::Solve { input, tol, max_iter, out }) => {
            minkowski_solve(input, *tol, *max_iter, out)
        }
        Command::Shrink(args) => shrink(args),
        Command::Needle(args) => needle(args),
        Command::Bounds(BoundsCmd::Slope(args)) => bounds(args, false),
        Command::Bounds(BoundsCmd::Volume(args)) => bounds(args, true),
        Command::Infimum(InfimumCmd::Convex { input, cyclic }) => infimum(input, Some(*cyclic)),
        Command::Infimum(InfimumCmd::Simple { input }) => infimum(input, None),
        Command::Noneuclid(cmd) => noneuclid(cmd),
        Command::Sphere(cmd) => sphere(cmd),
        Command::Tetra(TetraCmd::Solve { areas, geometry }) => tetra(areas, *geometry),
        Command::Oracle(OracleCmd::Mc { mesh, needle, cube, samples }) => {
            oracle_mc(mesh.as_deref(), *needle, *cube, *samples, cli.seed)
        }
        Command::Oracle(OracleCmd::Sample { input, trials }) => oracle_sample(input, *trials, cli.seed),
    }
}

fn read_input(path: &Path) -> Result<String, JobError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| JobError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, JobError> {
    let text = read_input(path)?;
    serde_json::from_str(&text).map_err(|e| JobError::Usage(format!("invalid JSON in {}: {e}", path.display())))
}

/// Reads a bare mesh document or a solver report carrying one under `mesh`.
fn load_mesh(path: &Path) -> Result<Mesh, JobError> {
    let mut doc: Value = parse_json(path)?;
    if let Some(inner) = doc.get_mut("mesh") {
        doc = inner.take();
    }
    let json: MeshJson = serde_json::from_value(doc)
        .map_err(|e| JobError::Usage(format!("invalid mesh in {}: {e}", path.display())))?;
    PolytopeMesh::from_json(&json).map_err(|e| JobError::Usage(format!("invalid mesh in {}: {e}", path.display())))
}

fn sig(x: f64) -> String {
    facetforge::geom::format_sig(x, 7)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn write_off(mesh: &Mesh, out: &MeshOut) -> Result<Option<String>, JobError> {
    let Some(path) = &out.off else { return Ok(None) };
    let precision = if out.off_exact { OffPrecision::Exact } else { OffPrecision::Short };
    fs::write(path, mesh.to_off(precision)).with_context(|| format!("writing {}", path.display()))?;
    Ok(Some(path.display().to_string()))
}

fn mesh_report(mesh: &Mesh) -> Value {
    let metrics = mesh_metrics(mesh);
    json!({
        "mesh": to_value(&mesh.to_json()),
        "metrics": to_value(&metrics),
        "gww": gww_check(mesh).ok().map(|g| to_value(&g)),
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Some(a), Value::Object(b)) = (a.as_object_mut(), b) {
        a.extend(b);
    }
    a
}

fn euclid_error(e: EuclidError) -> JobError {
    match e {
        EuclidError::Infeasible(_)
        | EuclidError::PreconditionViolated(_)
        | EuclidError::OutOfRange(_)
        | EuclidError::DimensionError { .. } => JobError::infeasible(e),
        EuclidError::Minkowski(m) => minkowski_error(m),
        other => JobError::Internal(anyhow!(other)),
    }
}

fn minkowski_error(e: MinkowskiError) -> JobError {
    match e {
        MinkowskiError::Infeasible(report) => JobError::infeasible_with("surface data is not realizable", to_value(&*report)),
        other => JobError::Internal(anyhow!(other)),
    }
}

fn trig_error(e: NoneuclidError) -> JobError {
    match e {
        NoneuclidError::Degenerate(_) => JobError::Internal(anyhow!(e)),
        _ => JobError::infeasible(e),
    }
}

fn infimum_error(e: InfimumError) -> JobError {
    match e {
        InfimumError::Trig(t) => trig_error(t),
        other => JobError::infeasible(other),
    }
}

fn tetra_error(e: TetraError) -> JobError {
    match e {
        TetraError::HypothesesNotMet(_)
        | TetraError::Unsorted(_)
        | TetraError::PreconditionViolated(_) => JobError::infeasible(e),
        TetraError::Trig(t) => trig_error(t),
        other => JobError::Internal(anyhow!(other)),
    }
}

fn oracle_error(e: OracleError) -> JobError {
    match e {
        OracleError::Infeasible(_) | OracleError::InvalidInput(_) => JobError::infeasible(e),
        OracleError::Trig(t) => trig_error(t),
        other => JobError::Internal(anyhow!(other)),
    }
}

fn load_surface(input: &Path) -> Result<SurfaceData<f64>, JobError> {
    let data: SurfaceData<f64> = parse_json(input)?;
    if data.normals.len() != data.areas.len() {
        return Err(JobError::Usage(format!(
            "{} normals but {} areas",
            data.normals.len(),
            data.areas.len()
        )));
    }
    Ok(data)
}

fn minkowski_check(input: &Path) -> JobResult {
    let data = load_surface(input)?;
    let report = check_feasible(&data);
    if !report.feasible {
        return Err(JobError::infeasible_with("surface data is not realizable", to_value(&report)));
    }
    Ok(Report {
        summary: format!("feasible: {} facets, |Σ S_i u_i| = {}", data.len(), sig(report.sum_norm)),
        json: to_value(&report),
    })
}

fn minkowski_solve(input: &Path, tol: f64, max_iter: usize, out: &MeshOut) -> JobResult {
    let data = load_surface(input)?;
    let opts = SolveOptions { tol, max_iter, ..SolveOptions::default() };
    let sol = solve_support_with(&data, &opts).map_err(minkowski_error)?;
    let mesh = sol.mesh().clone();
    let off = write_off(&mesh, out)?;
    let json = merge(
        json!({
            "support": sol.support.h,
            "iterations": sol.iterations,
            "residual": sol.residual,
            "volume": mesh.volume,
            "off": off,
        }),
        mesh_report(&mesh),
    );
    Ok(Report {
        summary: format!(
            "minkowski solve: volume {} after {} iterations (relative area residual {})",
            sig(mesh.volume),
            sol.iterations,
            sig(sol.residual)
        ),
        json,
    })
}

fn shrink(args: &ShrinkArgs) -> JobResult {
    let res = build_small_volume_polytope(&args.areas, args.target).map_err(euclid_error)?;
    let mesh = &res.mesh;
    let mut achieved = vec![0.0; args.areas.len()];
    for (f, &i) in res.facet_input.iter().enumerate() {
        achieved[i] = mesh.areas[f];
    }
    let max_err = achieved
        .iter()
        .zip(&args.areas)
        .map(|(a, s)| (a - s).abs())
        .fold(0.0, f64::max);
    let off = write_off(mesh, &args.out)?;
    let json = merge(
        json!({
            "route": to_value(&res.route),
            "volume": mesh.volume,
            "target": args.target,
            "areas": achieved,
            "max_area_error": max_err,
            "facet_input": res.facet_input,
            "history": to_value(&res.history),
            "perturbed": res.perturbed,
            "off": off,
        }),
        mesh_report(mesh),
    );
    Ok(Report {
        summary: format!(
            "shrink: volume {} ≤ {} with max area error {}",
            sig(mesh.volume),
            sig(args.target),
            sig(max_err)
        ),
        json,
    })
}

fn needle(args: &NeedleArgs) -> JobResult {
    let mesh = needle_tetrahedron(args.eps).map_err(euclid_error)?;
    let measured = measure_bound_inputs(&mesh);
    let off = write_off(&mesh, &args.out)?;
    let formula = needle_volume(args.eps);
    let json = merge(
        json!({
            "epsilon": args.eps,
            "volume": mesh.volume,
            "volume_formula": formula,
            "measured": to_value(&measured),
            "off": off,
        }),
        mesh_report(&mesh),
    );
    Ok(Report { summary: format!("needle ε = {}: volume {}", sig(args.eps), sig(mesh.volume)), json })
}

fn bounds(args: &BoundArgs, volume: bool) -> JobResult {
    let (inputs, measured) = match &args.mesh {
        Some(path) => {
            let mesh = load_mesh(path)?;
            let m = measure_bound_inputs(&mesh);
            let inputs = BoundInputs { epsilon: m.epsilon, separation: m.beta, n: 3, areas: mesh.areas.clone() };
            (inputs, Some(to_value(&m)))
        }
        None => {
            let inputs = BoundInputs {
                epsilon: args.eps.expect("required by the parser"),
                separation: args.separation.expect("required by the parser"),
                n: args.n,
                areas: args.areas.clone(),
            };
            (inputs, None)
        }
    };
    let ratio = inputs.ratio();
    if volume {
        if inputs.areas.is_empty() {
            return Err(JobError::Usage("the volume bound needs --areas or --mesh".into()));
        }
        let b = facet_volume_bound(&inputs)
            .map_err(|e| JobError::infeasible_with(e, json!({"ratio": ratio, "measured": measured})))?;
        Ok(Report {
            summary: format!("volume bound: V ≤ {} (q = {})", sig(b.simplified), sig(b.ratio)),
            json: json!({"bound": to_value(&b), "inputs": to_value(&inputs), "measured": measured}),
        })
    } else {
        let angle = slope_bound(&inputs)
            .map_err(|e| JobError::infeasible_with(e, json!({"ratio": ratio, "measured": measured})))?;
        let mut json = json!({"angle": angle, "ratio": ratio, "inputs": to_value(&inputs), "measured": measured});
        if inputs.n == 3 {
            if let Ok(w) = slope_sharp_example(inputs.epsilon, inputs.separation) {
                json["sharp_example"] = to_value(&w);
            }
        }
        Ok(Report { summary: format!("slope bound: angle ≤ {} rad", sig(angle)), json })
    }
}

fn infimum(input: &SidesGeometry, convex: Option<bool>) -> JobResult {
    let g = input.geometry;
    match convex {
        Some(cyclic) => {
            let (value, cert) = infimum_convex(&input.sides, g, cyclic).map_err(infimum_error)?;
            Ok(Report {
                summary: format!("infimum ({}, {g}): {}", if cyclic { "cyclic" } else { "convex" }, sig(value)),
                json: json!({"value": value, "certificate": to_value(&cert)}),
            })
        }
        None => {
            let res = infimum_simple(&input.sides, g).map_err(infimum_error)?;
            Ok(Report { summary: format!("infimum (simple, {g}): {}", sig(res.value)), json: to_value(&res) })
        }
    }
}

fn noneuclid(cmd: &NoneuclidCmd) -> JobResult {
    match *cmd {
        NoneuclidCmd::F { x, t, s, geometry } => {
            let y = f_ts(x, t, s, geometry).map_err(trig_error)?;
            Ok(Report {
                summary: format!("f_(t,S)({}) = {}", sig(x), sig(y)),
                json: json!({"x": x, "t": t, "s": s, "geometry": geometry, "f": y}),
            })
        }
        NoneuclidCmd::H { t, s, geometry } => {
            let h = h_ts(t, s, geometry).map_err(trig_error)?;
            let closed = (geometry == Geometry::Hyperbolic).then(|| cosh_h_closed_form(t, s));
            Ok(Report {
                summary: format!("h_(t,S) = {}", sig(h)),
                json: json!({"t": t, "s": s, "geometry": geometry, "h": h, "cosh_h": closed}),
            })
        }
        NoneuclidCmd::Bkm { a, b, gamma, geometry } => {
            let max = bkm_max(a, b, geometry).map_err(trig_error)?;
            let mut json = json!({"a": a, "b": b, "geometry": geometry, "max": to_value(&max)});
            if let Some(gamma) = gamma {
                let c = bkm_classify(a, b, gamma, geometry).map_err(trig_error)?;
                json["classification"] = json!({
                    "x": c.x,
                    "y": c.y,
                    "gamma": c.gamma,
                    "gamma_max": c.gamma_max,
                    "angle_order": format!("{:?}", c.angle_order),
                    "side_order": format!("{:?}", c.side_order),
                });
            }
            Ok(Report {
                summary: format!("maximal area {} at γ = {}", sig(max.area_max), sig(max.gamma_max)),
                json,
            })
        }
        NoneuclidCmd::Check { ref areas, ref k, n, geometry } => {
            let k = (!k.is_empty()).then_some(k.as_slice());
            let rep = check_necessary(areas, k, n, geometry).map_err(trig_error)?;
            if !rep.all_hold {
                return Err(JobError::infeasible_with("a necessary condition fails", to_value(&rep)));
            }
            Ok(Report {
                summary: format!("all {} necessary conditions hold", rep.checks.len()),
                json: to_value(&rep),
            })
        }
    }
}

fn sphere(cmd: &SphereCmd) -> JobResult {
    match cmd {
        SphereCmd::Polygon { sides } => {
            let p = spherical_polygon_from_sides(sides).map_err(trig_error)?;
            Ok(Report {
                summary: format!("spherical polygon: area {}, circumradius {}", sig(p.area), sig(p.circumradius)),
                json: to_value(&p),
            })
        }
        SphereCmd::Lift { areas, from_dim } => {
            let lift = suspension_lift_areas(areas, *from_dim).map_err(trig_error)?;
            Ok(Report {
                summary: format!("lifted by factor {}", sig(lift.factor)),
                json: to_value(&lift),
            })
        }
    }
}

fn tetra(areas: &[f64], g: Geometry) -> JobResult {
    let mut sorted = areas.to_vec();
    if sorted.len() != 4 || sorted.iter().any(|v| !v.is_finite()) {
        return Err(JobError::Usage("tetra solve needs exactly four finite areas".into()));
    }
    sorted.sort_by(f64::total_cmp);
    let targets = [sorted[0], sorted[1], sorted[2], sorted[3]];
    let c: TetraConfig<f64> = solve_tetra(targets, g).map_err(|e| match tetra_error(e) {
        JobError::Infeasible { message, .. } => {
            let report = check_hypotheses(&targets, g).map(|r| to_value(&r)).unwrap_or(Value::Null);
            JobError::infeasible_with(message, json!({"targets": targets, "hypotheses": report}))
        }
        other => other,
    })?;
    let residuals: Vec<f64> = c.areas.iter().zip(&c.targets).map(|(a, s)| a - s).collect();
    let angle_areas: Vec<Option<f64>> = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]]
        .iter()
        .map(|f| angle_area_oracle(&f.map(|i| c.vertices[i]), g).ok())
        .collect();
    let mut json = to_value(&c);
    json["residuals"] = json!(residuals);
    json["angle_areas"] = json!(angle_areas);
    Ok(Report {
        summary: format!(
            "tetra ({g}): max area error {}, winding {}",
            sig(c.max_area_error),
            c.winding.map_or("n/a".to_string(), |w| w.to_string())
        ),
        json,
    })
}

fn oracle_mc(mesh: Option<&Path>, needle: Option<f64>, cube: bool, samples: usize, seed: u64) -> JobResult {
    let (mesh, exact) = if cube {
        let pts: Vec<_> = (0..8)
            .map(|i| facetforge::Vec3d::of((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect();
        (facetforge::geom::convex_hull_3d(&pts).context("cube hull")?, Some(1.0))
    } else if let Some(eps) = needle {
        (needle_tetrahedron(eps).map_err(euclid_error)?, Some(needle_volume(eps)))
    } else {
        let path = mesh.expect("required by the parser");
        let m = load_mesh(path)?;
        let v = m.volume;
        (m, Some(v))
    };
    let est = mc_volume(&mesh, samples, seed);
    let z = exact.map(|v| (est.estimate - v) / est.stderr);
    Ok(Report {
        summary: format!("monte carlo volume {} ± {}", sig(est.estimate), sig(est.stderr)),
        json: json!({"estimate": to_value(&est), "reference": exact, "z_score": z, "seed": seed}),
    })
}

fn oracle_sample(input: &SidesGeometry, trials: usize, seed: u64) -> JobResult {
    let rep = sample_polygon_areas(&input.sides, input.geometry, trials, seed).map_err(oracle_error)?;
    Ok(Report {
        summary: format!("sampled minimum area {} over {} polygons", sig(rep.min_area), rep.accepted),
        json: merge(to_value(&rep), json!({"seed": seed})),
    })
}
