//! The `ccgeo` command line.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure,
//! 3 invariant failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::asymptotics::{fit_expansion, obstruction, ExpansionFit, DEFAULT_WINDOW};
use crate::chart::{ChartSpec, FermiChart};
use crate::check::{corrupt_rho_sign, run_checks, CheckOptions};
use crate::error::{Error, Result};
use crate::integrate::{IntegratorConfig, ParameterKind, Sample, Termination, Trajectory};
use crate::io::write_atomic;
use crate::models::{figure_data, FigureOptions};
use crate::shoot::{boundary_shoot, direction_from_angles, endpoint_map, expmap_jacobian, w_from_u};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ccgeo", version, about = "Geodesics of conformally compact metrics up to the boundary")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// `epsilon:<value>`, `hyperbolic`, `warped`, inline JSON or a JSON file.
    #[arg(long, global = true)]
    pub chart: Option<String>,
    /// JSON file with `chart`, `integrator`, `out` and `seed` entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the randomized checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Relative tolerance of the adaptive integrator.
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Absolute tolerance of the adaptive integrator.
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// `|τ|` below which the last step to the boundary is taken.
    #[arg(long, global = true)]
    pub tau_min: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shoot from an interior point to the boundary.
    Shoot(ShootArgs),
    /// Integrate from a boundary point with prescribed second-order coefficient.
    BoundaryShoot(BoundaryShootArgs),
    /// Jacobian of the boundary exponential map.
    Expmap(ShootArgs),
    /// Fit the boundary expansion to a boundary-system trajectory CSV.
    Fit(FitArgs),
    /// Write figure data as CSV.
    Figures(FigureArgs),
    /// Run the invariant battery.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct ShootArgs {
    /// Boundary coordinates followed by the depth `y = −x⁰`, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub p: Vec<f64>,
    /// Angles from the inward normal, one per boundary dimension (radians).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "dir")]
    pub theta: Option<Vec<f64>>,
    /// Coordinate direction `(ẋ⁰, ẋ¹, …)`; normalized internally.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub dir: Option<Vec<f64>>,
    /// Step of the central differences (expmap only).
    #[arg(long, default_value_t = 1e-4)]
    pub fd_step: f64,
}

#[derive(Debug, Args)]
pub struct BoundaryShootArgs {
    /// Boundary point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub q: Vec<f64>,
    /// Coefficient of `τ²` in the boundary expansion, one per boundary dimension.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub u: Vec<f64>,
    /// Final parameter, in `[−δ, 0)`.
    #[arg(long, allow_negative_numbers = true, default_value_t = -0.1)]
    pub tau_end: f64,
    /// Also fit the boundary expansion.
    #[arg(long)]
    pub fit: bool,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Fit window in `|τ|`, as `lo,hi`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, value_name = "LO,HI")]
    pub window: Option<Vec<f64>>,
    /// Drop the `τ³ log|τ|` and `τ³` terms from the fit.
    #[arg(long)]
    pub no_nuisance: bool,
}

impl WindowArgs {
    fn window(&self) -> Result<(f64, f64)> {
        match self.window.as_deref() {
            Some(&[lo, hi]) => Ok((lo, hi)),
            Some(w) => Err(Error::Config(format!("--window needs two values, got {}", w.len()))),
            None => Ok(DEFAULT_WINDOW),
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Trajectory CSV written by `boundary-shoot`.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// Figure number: 1, 2 or 3.
    #[arg(long)]
    pub id: u32,
    /// Values of `ε` (figures 1 and 2).
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1")]
    pub eps: Vec<f64>,
    /// Points of the geometric `y` grid per curve.
    #[arg(long, default_value_t = 121)]
    pub grid_points: usize,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Flip the sign of `ρ` on the selected chart before checking.
    #[arg(long)]
    pub flip_rho: bool,
    /// Random pairs for the flow Lipschitz check.
    #[arg(long, default_value_t = 20)]
    pub pairs: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    chart: Option<Value>,
    #[serde(default)]
    integrator: Option<IntegratorConfig>,
    out: Option<PathBuf>,
    seed: Option<u64>,
}

struct Resolved {
    chart: Option<String>,
    cfg: IntegratorConfig,
    out: PathBuf,
    seed: u64,
}

fn resolve(global: &GlobalArgs) -> Result<Resolved> {
    let file = match &global.config {
        Some(path) => {
            let body = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&body).map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    let chart = match (&global.chart, file.chart) {
        (Some(c), _) => Some(c.clone()),
        (None, Some(Value::String(s))) => Some(s),
        (None, Some(v)) => Some(v.to_string()),
        (None, None) => None,
    };
    let mut cfg = file.integrator.unwrap_or_default();
    if let Some(v) = global.rel_tol {
        cfg.rel_tol = v;
    }
    if let Some(v) = global.abs_tol {
        cfg.abs_tol = v;
    }
    if let Some(v) = global.tau_min {
        cfg.tau_min = v;
    }
    cfg.validate()?;
    Ok(Resolved {
        chart,
        cfg,
        out: global.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(".")),
        seed: global.seed.or(file.seed).unwrap_or(0),
    })
}

fn build_chart(spec: Option<&str>) -> Result<FermiChart> {
    ChartSpec::parse(spec.unwrap_or("hyperbolic"))?.build()
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Json(_) | Error::Io(_) | Error::Domain(_) => EXIT_CONFIG,
        Error::ChartIntegrity(_) => EXIT_INVARIANT,
        Error::Numeric(_) | Error::NotInbound(_) | Error::IllConditioned(_) | Error::Integration { .. } => EXIT_NUMERIC,
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    write_atomic(path, body.as_bytes())
}

fn write_trajectory(path: &Path, chart: &FermiChart, traj: &Trajectory) -> Result<()> {
    let mut buf = Vec::new();
    traj.write_csv(chart, &mut buf)?;
    write_atomic(path, &buf)
}

/// Interior point in chart coordinates from boundary coordinates followed by the depth.
fn interior_point(chart: &FermiChart, p: &[f64]) -> Result<Vec<f64>> {
    let n = chart.boundary_dim();
    if p.len() != n + 1 {
        return Err(Error::Config(format!("--p needs {} values (boundary coordinates, then depth)", n + 1)));
    }
    let mut x = vec![-p[n]];
    x.extend(&p[..n]);
    Ok(x)
}

fn direction(chart: &FermiChart, x: &[f64], args: &ShootArgs) -> Result<Vec<f64>> {
    match (&args.theta, &args.dir) {
        (Some(th), None) => direction_from_angles(chart, x, th),
        (None, Some(d)) => Ok(d.clone()),
        (None, None) => direction_from_angles(chart, x, &vec![0.0; chart.boundary_dim()]),
        (Some(_), Some(_)) => Err(Error::Config("give --theta or --dir, not both".into())),
    }
}

fn cmd_shoot(r: &Resolved, args: &ShootArgs) -> Result<Value> {
    let chart = build_chart(r.chart.as_deref())?;
    let x = interior_point(&chart, &args.p)?;
    let v = direction(&chart, &x, args)?;
    let shot = endpoint_map(&chart, &x, &v, &r.cfg)?;
    let arc = r.out.join("shoot_arclength.csv");
    let tau = r.out.join("shoot_tau.csv");
    write_trajectory(&arc, &chart, &shot.arclength)?;
    write_trajectory(&tau, &chart, &shot.trajectory)?;
    let value = json!({
        "command": "shoot",
        "chart": chart.id(),
        "p": x,
        "direction": v,
        "endpoint": shot.endpoint,
        "termination": shot.trajectory.termination,
        "diagnostics": shot.diagnostics,
        "trajectory_file": tau,
        "files": { "arclength": arc, "tau": tau },
    });
    write_json(&r.out.join("shoot.json"), &value)?;
    Ok(value)
}

fn cmd_expmap(r: &Resolved, args: &ShootArgs) -> Result<Value> {
    let chart = build_chart(r.chart.as_deref())?;
    let x = interior_point(&chart, &args.p)?;
    let v = direction(&chart, &x, args)?;
    let rep = expmap_jacobian(&chart, &x, &v, &r.cfg, args.fd_step)?;
    let value = json!({
        "command": "expmap",
        "chart": chart.id(),
        "p": x,
        "direction": v,
        "endpoint": rep.endpoint,
        "jacobian": rep.matrix,
        "singular_values": rep.singular_values,
        "min_singular_value": rep.min_singular_value,
        "condition": rep.condition,
        "fd_step": rep.fd_step,
    });
    write_json(&r.out.join("expmap.json"), &value)?;
    Ok(value)
}

fn fit_json(fit: &ExpansionFit) -> Value {
    json!({
        "o_fit": fit.o_fit,
        "u_fit": fit.u_fit,
        "nuisance": fit.nuisance,
        "window": [fit.window.0, fit.window.1],
        "residual_rms": fit.residual_rms,
        "condition": fit.condition,
        "samples": fit.samples,
    })
}

fn cmd_boundary_shoot(r: &Resolved, args: &BoundaryShootArgs) -> Result<Value> {
    let chart = build_chart(r.chart.as_deref())?;
    let traj = boundary_shoot(&chart, &args.q, &args.u, args.tau_end, &r.cfg)?;
    let file = r.out.join("boundary_shoot.csv");
    write_trajectory(&file, &chart, &traj)?;
    let mut value = json!({
        "command": "boundary-shoot",
        "chart": chart.id(),
        "q": args.q,
        "u": args.u,
        "w_init": w_from_u(&chart, &args.q, &args.u)?,
        "tau_end": args.tau_end,
        "termination": traj.termination,
        "samples": traj.len(),
        "obstruction": obstruction(&chart, &args.q)?,
        "files": { "trajectory": file },
    });
    if args.fit {
        let fit = fit_expansion(&traj, args.window.window()?, !args.window.no_nuisance)?;
        let f = fit_json(&fit);
        write_json(&r.out.join("fit.json"), &json!({ "command": "fit", "input": file, "fit": f }))?;
        value["fit"] = f;
    }
    write_json(&r.out.join("boundary_shoot.json"), &value)?;
    Ok(value)
}

/// Reads a boundary-system trajectory CSV as written by [`Trajectory::write_csv`].
pub fn read_tau_csv(path: &Path) -> Result<Trajectory> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        .clone();
    if headers.get(0) != Some("tau") {
        return Err(Error::Config(format!("{}: first column must be 'tau'", path.display())));
    }
    let ncols = headers.iter().position(|h| h == "rho").unwrap_or(headers.len());
    let mut samples = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let vals = rec
            .iter()
            .take(ncols)
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        samples.push(Sample {
            param: vals[0],
            state: vals[1..].to_vec(),
        });
    }
    if samples.is_empty() {
        return Err(Error::Config(format!("{}: no samples", path.display())));
    }
    Ok(Trajectory {
        chart_id: String::new(),
        parameter_kind: ParameterKind::Tau,
        samples,
        termination: Termination::ReachedEnd,
        note: None,
    })
}

fn cmd_fit(r: &Resolved, args: &FitArgs) -> Result<Value> {
    let traj = read_tau_csv(&args.input)?;
    let fit = fit_expansion(&traj, args.window.window()?, !args.window.no_nuisance)?;
    let value = json!({ "command": "fit", "input": args.input, "fit": fit_json(&fit) });
    write_json(&r.out.join("fit.json"), &value)?;
    Ok(value)
}

fn cmd_figures(r: &Resolved, args: &FigureArgs) -> Result<Value> {
    let opts = FigureOptions {
        cfg: r.cfg.clone(),
        grid_points: args.grid_points,
        ..FigureOptions::default()
    };
    let curves = figure_data(args.id, &args.eps, &r.out, &opts)?;
    let files: Vec<Value> = curves
        .iter()
        .map(|c| {
            json!({
                "file": c.file,
                "epsilon": c.epsilon,
                "kind": c.kind,
                "value": c.value,
                "endpoint": c.endpoint,
                "termination": c.termination,
                "points": c.points.len(),
            })
        })
        .collect();
    let value = json!({ "command": "figures", "figure": args.id, "epsilons": args.eps, "files": files });
    write_json(&r.out.join(format!("figure{}.json", args.id)), &value)?;
    Ok(value)
}

fn cmd_check(r: &Resolved, args: &CheckArgs) -> Result<(Value, bool)> {
    let charts = match (&r.chart, args.flip_rho) {
        (None, false) => None,
        (spec, flip) => {
            let chart = build_chart(spec.as_deref())?;
            Some(vec![if flip { corrupt_rho_sign(&chart)? } else { chart }])
        }
    };
    let opts = CheckOptions {
        cfg: r.cfg.clone(),
        seed: r.seed,
        lipschitz_pairs: args.pairs,
        ..CheckOptions::default()
    };
    let report = run_checks(charts, &opts)?;
    eprint!("{}", report.table());
    let passed = report.all_passed();
    let value = json!({
        "command": "check",
        "seed": report.seed,
        "all_passed": passed,
        "rows": report.rows,
    });
    write_json(&r.out.join("check.json"), &value)?;
    Ok((value, passed))
}

/// Parses `args` (including the program name) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let resolved = match resolve(&cli.global) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let outcome = match &cli.command {
        Command::Shoot(a) => cmd_shoot(&resolved, a).map(|v| (v, true)),
        Command::Expmap(a) => cmd_expmap(&resolved, a).map(|v| (v, true)),
        Command::BoundaryShoot(a) => cmd_boundary_shoot(&resolved, a).map(|v| (v, true)),
        Command::Fit(a) => cmd_fit(&resolved, a).map(|v| (v, true)),
        Command::Figures(a) => cmd_figures(&resolved, a).map(|v| (v, true)),
        Command::Check(a) => cmd_check(&resolved, a),
    };
    match outcome {
        Ok((value, ok)) => {
            println!("{}", serde_json::to_string_pretty(&value).unwrap_or_default());
            if ok {
                EXIT_OK
            } else {
                EXIT_INVARIANT
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
