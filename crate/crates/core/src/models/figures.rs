//! CSV data for the three example figures of the ε-family.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{integrate_tau_from_boundary_with_outputs, IntegratorConfig, Trajectory};
use crate::io::write_atomic;
use crate::models::{asymptotic_curve, make_epsilon_chart, EpsilonFamily};
use crate::shoot::{direction_from_angles, endpoint_map, w_from_u};

/// Settings shared by all figures.
#[derive(Debug, Clone, Serialize)]
pub struct FigureOptions {
    pub cfg: IntegratorConfig,
    /// Points of the geometric `y`-grid per curve.
    pub grid_points: usize,
    /// Smallest `y` on the grid.
    pub y_min: f64,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            cfg: IntegratorConfig::default(),
            grid_points: 121,
            y_min: 1e-4,
        }
    }
}

pub const FIGURE1_THETAS: [f64; 5] = [
    -std::f64::consts::FRAC_PI_4,
    -std::f64::consts::FRAC_PI_8,
    0.0,
    std::f64::consts::FRAC_PI_8,
    std::f64::consts::FRAC_PI_4,
];
pub const FIGURE2_US: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// One emitted curve.
#[derive(Debug, Clone, Serialize)]
pub struct FigureCurve {
    pub figure: u32,
    pub epsilon: f64,
    /// `"theta"`, `"u"` or `"asymptote"`.
    pub kind: String,
    pub value: f64,
    pub file: PathBuf,
    /// `(y, x)` pairs in order of decreasing `y`.
    pub points: Vec<(f64, f64)>,
    /// Boundary abscissa, for curves that reach `y = 0`.
    pub endpoint: Option<f64>,
    pub termination: String,
}

/// Geometric grid from `hi` down to `lo`, `n ≥ 2` points.
pub fn geometric_grid(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let (a, b) = (hi.ln(), lo.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                hi
            } else if i == n - 1 {
                lo
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

struct Job {
    figure: u32,
    epsilon: f64,
    kind: &'static str,
    value: f64,
}

/// Points, boundary endpoint and termination of one curve.
type CurveData = (Vec<(f64, f64)>, Option<f64>, String);

fn file_name(job: &Job) -> String {
    format!("fig{}_eps{:.2}_{}{:+.4}.csv", job.figure, job.epsilon, job.kind, job.value)
}

fn figure1_curve(job: &Job, opts: &FigureOptions) -> Result<CurveData> {
    let chart = make_epsilon_chart(&EpsilonFamily::new(job.epsilon))?;
    let p = [-1.0, 0.0];
    let v = direction_from_angles(&chart, &p, &[job.value])?;
    let shot = endpoint_map(&chart, &p, &v, &opts.cfg)?;
    let mut pts: Vec<(f64, f64)> = shot.arclength.samples.iter().map(|s| (-s.state[0], s.state[1])).collect();
    pts.extend(shot.trajectory.samples.iter().skip(1).map(|s| (0.0 - s.param, s.state[0])));
    let term = shot.trajectory.termination.to_string();
    Ok((pts, Some(shot.endpoint[0]), term))
}

fn boundary_curve(epsilon: f64, u: f64, grid: &[f64], opts: &FigureOptions) -> Result<(Vec<(f64, f64)>, Trajectory)> {
    let chart = make_epsilon_chart(&EpsilonFamily::new(epsilon))?;
    let q = [0.0];
    let w = w_from_u(&chart, &q, &[u])?;
    let outputs: Vec<f64> = grid.iter().map(|y| -y).collect();
    let tau_end = -grid[0];
    let traj = integrate_tau_from_boundary_with_outputs(&chart, &q, &w, tau_end, &outputs, &opts.cfg)?;
    let mut pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|s| s.param == 0.0 || outputs.contains(&s.param))
        .map(|s| (0.0 - s.param, s.state[0]))
        .collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok((pts, traj))
}

fn render(job: &Job, pts: &[(f64, f64)], opts: &FigureOptions, term: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# figure: {}", job.figure);
    let _ = writeln!(s, "# epsilon: {}", job.epsilon);
    let _ = writeln!(s, "# {}: {}", job.kind, job.value);
    let _ = writeln!(s, "# rel_tol: {:e}", opts.cfg.rel_tol);
    let _ = writeln!(s, "# abs_tol: {:e}", opts.cfg.abs_tol);
    let _ = writeln!(s, "# tau_min: {:e}", opts.cfg.tau_min);
    let _ = writeln!(s, "# termination: {term}");
    let _ = writeln!(s, "# version: {}", env!("CARGO_PKG_VERSION"));
    s.push_str("y,x\n");
    for (y, x) in pts {
        let _ = writeln!(s, "{y:.17e},{x:.17e}");
    }
    s
}

fn run_job(job: &Job, opts: &FigureOptions, delta: f64) -> Result<CurveData> {
    match (job.figure, job.kind) {
        (1, _) => figure1_curve(job, opts),
        (2, _) => {
            let grid = geometric_grid(delta.min(1.0), opts.y_min, opts.grid_points);
            let (pts, traj) = boundary_curve(job.epsilon, job.value, &grid, opts)?;
            Ok((pts, Some(traj.samples[0].state[0]), traj.termination.to_string()))
        }
        (3, "u") => {
            let grid = geometric_grid(1e-1, opts.y_min, opts.grid_points);
            let (pts, traj) = boundary_curve(job.epsilon, job.value, &grid, opts)?;
            Ok((pts, Some(traj.samples[0].state[0]), traj.termination.to_string()))
        }
        (3, _) => {
            let grid = geometric_grid(1e-1, opts.y_min, opts.grid_points);
            let pts = grid
                .iter()
                .map(|&y| (y, asymptotic_curve(job.epsilon, job.value, y)))
                .collect();
            Ok((pts, Some(0.0), "analytic".to_string()))
        }
        _ => unreachable!("figure ids are validated"),
    }
}

/// Computes the curves of figure `figure_id` and writes one CSV per curve into `out_dir`.
///
/// Figure 1 shoots from `(x, y) = (0, 1)` at five angles per ε; figure 2 shoots from
/// `q = 0` with five second-order coefficients per ε; figure 3 is figure 2 at ε = 1
/// together with the asymptotic curves on `y ∈ [y_min, 10⁻¹]`.
pub fn figure_data(figure_id: u32, eps_list: &[f64], out_dir: &Path, opts: &FigureOptions) -> Result<Vec<FigureCurve>> {
    let mut jobs = Vec::new();
    match figure_id {
        1 => {
            for &e in eps_list {
                jobs.extend(FIGURE1_THETAS.iter().map(|&t| Job { figure: 1, epsilon: e, kind: "theta", value: t }));
            }
        }
        2 => {
            for &e in eps_list {
                jobs.extend(FIGURE2_US.iter().map(|&u| Job { figure: 2, epsilon: e, kind: "u", value: u }));
            }
        }
        3 => {
            jobs.extend(FIGURE2_US.iter().map(|&u| Job { figure: 3, epsilon: 1.0, kind: "u", value: u }));
            jobs.extend(FIGURE2_US.iter().map(|&u| Job { figure: 3, epsilon: 1.0, kind: "asymptote", value: u }));
        }
        other => return Err(Error::Config(format!("unknown figure id {other}; expected 1, 2 or 3"))),
    }
    if figure_id != 3 && eps_list.is_empty() {
        return Err(Error::Config("figure needs at least one epsilon".into()));
    }
    if let Some(e) = eps_list.iter().find(|e| !(**e >= 0.0)) {
        return Err(Error::Config(format!("epsilon must be nonnegative, got {e}")));
    }
    if !(opts.y_min > 0.0 && opts.y_min < 1e-1) {
        return Err(Error::Config("y_min must lie in (0, 0.1)".into()));
    }
    let delta = EpsilonFamily::new(0.0).delta;

    let results: Vec<Result<CurveData>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|job| scope.spawn(move || run_job(job, opts, delta)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Numeric("figure worker panicked".into()))))
            .collect()
    });

    let mut curves = Vec::with_capacity(jobs.len());
    for (job, res) in jobs.iter().zip(results) {
        let (points, endpoint, termination) = res?;
        let file = out_dir.join(file_name(job));
        write_atomic(&file, render(job, &points, opts, &termination).as_bytes())?;
        curves.push(FigureCurve {
            figure: job.figure,
            epsilon: job.epsilon,
            kind: job.kind.to_string(),
            value: job.value,
            file,
            points,
            endpoint,
            termination,
        });
    }
    Ok(curves)
}
