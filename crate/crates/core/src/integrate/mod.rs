//! Integration drivers for the arclength and boundary systems.

mod rk;

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::chart::FermiChart;
use crate::error::{Error, Result};
use crate::systems::{CogeodesicSystem, CotangentState, TauState, TauSystem};

pub use rk::{heun_step, solve_on_grid, AdaptiveRun, OdeSystem, RunOutput, Stop};

/// Tolerances and limits shared by all drivers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Below this `|τ|` the run to the boundary finishes with one Heun step.
    pub tau_min: f64,
    pub initial_step: f64,
    /// Keep every k-th accepted step (the first and last samples are always kept).
    pub record_stride: usize,
    /// Runs toward the boundary stop with `LeftInboundRegime` once `w⁰ ≤ w_min`.
    pub w_min: f64,
    /// Arclength runs hand off once `x⁰ ≥ −x_stop`; defaults to `10⁻³·δ`.
    pub x_stop: Option<f64>,
    /// Arclength budget of the first phase of a shot.
    pub t_max: f64,
    /// Boundary-system steps are capped at this multiple of `|τ|`.
    pub max_step_ratio: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
            tau_min: 1e-12,
            initial_step: 1e-6,
            record_stride: 1,
            w_min: 1e-3,
            x_stop: None,
            t_max: 200.0,
            max_step_ratio: 0.05,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.tau_min > 0.0 && self.tau_min < self.initial_step) {
            return Err(Error::Config(format!(
                "need 0 < tau_min < initial_step, got tau_min = {}, initial_step = {}",
                self.tau_min, self.initial_step
            )));
        }
        if self.record_stride == 0 || self.max_steps == 0 {
            return Err(Error::Config("record_stride and max_steps must be positive".into()));
        }
        if !(self.max_step_ratio > 0.0 && self.max_step_ratio <= 1.0) {
            return Err(Error::Config("max_step_ratio must lie in (0, 1]".into()));
        }
        if !(self.w_min > 0.0 && self.w_min < 1.0) {
            return Err(Error::Config("w_min must lie in (0, 1)".into()));
        }
        if let Some(x) = self.x_stop {
            if !(x > 0.0) {
                return Err(Error::Config("x_stop must be positive".into()));
            }
        }
        if !(self.t_max > 0.0) {
            return Err(Error::Config("t_max must be positive".into()));
        }
        Ok(())
    }

    pub fn x_stop_for(&self, chart: &FermiChart) -> f64 {
        self.x_stop.unwrap_or(1e-3 * chart.domain().delta)
    }
}

/// Arclength steps are capped so that decay-rate fits see enough samples.
const T_MAX_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterKind {
    Arclength,
    Tau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedBoundary,
    /// Reached the requested end parameter (`t_max` or `tau_end`).
    ReachedEnd,
    /// An arclength run reached the handoff depth `x⁰ = −x_stop`.
    Handoff,
    LeftChart,
    LeftInboundRegime,
    StepFailure,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::ReachedBoundary => "reached_boundary",
            Termination::ReachedEnd => "reached_end",
            Termination::Handoff => "handoff",
            Termination::LeftChart => "left_chart",
            Termination::LeftInboundRegime => "left_inbound_regime",
            Termination::StepFailure => "step_failure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sample {
    pub param: f64,
    /// `[x, ξ]` for arclength runs, `[x', w⁰, w]` for boundary-system runs.
    pub state: Vec<f64>,
}

/// Recorded samples of one run. The parameter is strictly monotone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub chart_id: String,
    pub parameter_kind: ParameterKind,
    pub samples: Vec<Sample>,
    pub termination: Termination,
    /// Free-form explanation when the run did not finish normally.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories are never empty")
    }

    pub fn params(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.param).collect()
    }

    pub fn cotangent_state(&self, i: usize) -> CotangentState {
        CotangentState::from_vec(self.samples[i].param, &self.samples[i].state)
    }

    pub fn tau_state(&self, i: usize) -> TauState {
        TauState::from_vec(self.samples[i].param, &self.samples[i].state)
    }

    /// Boundary coordinates of sample `i` (for either kind).
    pub fn boundary_coords(&self, i: usize, n: usize) -> &[f64] {
        match self.parameter_kind {
            ParameterKind::Tau => &self.samples[i].state[..n],
            ParameterKind::Arclength => &self.samples[i].state[1..=n],
        }
    }

    /// `x⁰` of sample `i`.
    pub fn normal_coord(&self, i: usize) -> f64 {
        match self.parameter_kind {
            ParameterKind::Tau => self.samples[i].param,
            ParameterKind::Arclength => self.samples[i].state[0],
        }
    }

    /// Column names of [`Trajectory::write_csv`] for a chart of boundary dimension `n`.
    pub fn csv_columns(&self, n: usize) -> Vec<String> {
        let mut cols = Vec::new();
        match self.parameter_kind {
            ParameterKind::Arclength => {
                cols.push("t".to_string());
                cols.extend((0..=n).map(|i| format!("x{i}")));
                cols.extend((0..=n).map(|i| format!("xi{i}")));
            }
            ParameterKind::Tau => {
                cols.push("tau".to_string());
                cols.extend((1..=n).map(|i| format!("x{i}")));
                cols.push("w0".to_string());
                cols.extend((1..=n).map(|i| format!("w{i}")));
            }
        }
        cols.push("rho".into());
        cols.push("energy".into());
        cols
    }

    /// CSV: parameter, state components, `ρ`, energy `2H`.
    pub fn write_csv<W: Write>(&self, chart: &FermiChart, mut out: W) -> Result<()> {
        let n = chart.boundary_dim();
        writeln!(out, "{}", self.csv_columns(n).join(","))?;
        for (i, s) in self.samples.iter().enumerate() {
            let (rho, energy) = match self.parameter_kind {
                ParameterKind::Arclength => {
                    let cs = self.cotangent_state(i);
                    (chart.metric().rho(cs.x[0], &cs.x[1..]), chart.energy(&cs).unwrap_or(f64::NAN))
                }
                ParameterKind::Tau => {
                    let ts = self.tau_state(i);
                    (chart.metric().rho(ts.tau, &ts.x), chart.energy(&ts).unwrap_or(f64::NAN))
                }
            };
            let mut row = vec![format!("{:.17e}", s.param)];
            row.extend(s.state.iter().map(|v| format!("{v:.17e}")));
            row.push(format!("{rho:.17e}"));
            row.push(format!("{energy:.17e}"));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// JSON with metadata and column names.
    pub fn to_json(&self, chart: &FermiChart) -> serde_json::Value {
        serde_json::json!({
            "chart_id": self.chart_id,
            "parameter_kind": self.parameter_kind,
            "termination": self.termination,
            "columns": self.csv_columns(chart.boundary_dim())[..1 + self.samples[0].state.len()].to_vec(),
            "samples": self.samples.iter().map(|s| {
                let mut row = vec![s.param];
                row.extend(&s.state);
                row
            }).collect::<Vec<_>>(),
        })
    }
}

fn thin(samples: Vec<(f64, Vec<f64>)>, stride: usize, keep: &[f64]) -> Vec<Sample> {
    let last = samples.len().saturating_sub(1);
    samples
        .into_iter()
        .enumerate()
        .filter(|(i, (p, _))| *i == 0 || *i == last || i % stride == 0 || keep.contains(p))
        .map(|(_, (param, state))| Sample { param, state })
        .collect()
}

fn outside_box(chart: &FermiChart, xp: &[f64]) -> bool {
    !chart.domain().contains_boundary_point(xp)
}

fn stop_to_termination(stop: &Stop, on_end: Termination) -> (Termination, Option<String>) {
    match stop {
        Stop::End => (on_end, None),
        Stop::Event => (Termination::Handoff, None),
        Stop::Guard(r) if r.starts_with("left_inbound") => (Termination::LeftInboundRegime, Some(r.clone())),
        Stop::Guard(r) => (Termination::LeftChart, Some(r.clone())),
        Stop::Failure(e @ Error::NotInbound(_)) => (Termination::LeftInboundRegime, Some(e.to_string())),
        Stop::Failure(e) => (Termination::StepFailure, Some(e.to_string())),
    }
}

/// Arclength flow from `s0` until `t_max`, the handoff depth, or chart exit.
pub fn integrate_t(chart: &FermiChart, s0: &CotangentState, t_max: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let d = chart.dim();
    if s0.x.len() != d || s0.xi.len() != d {
        return Err(Error::Domain("initial state has the wrong dimension".into()));
    }
    chart.check_interior_point(s0.x[0], &s0.x[1..])?;
    let e = chart.energy(s0)?;
    if (e - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!("initial state is off the unit energy surface: 2H = {e}")));
    }
    let x_stop = cfg.x_stop_for(chart);
    let depth = chart.domain().interior_depth;
    let sys = CogeodesicSystem { chart };
    let cap = |_: f64| T_MAX_STEP;
    let event = |_: f64, y: &[f64]| if y[d] > 0.0 { y[0] + x_stop } else { -1.0 };
    let guard = |_: f64, y: &[f64]| {
        if outside_box(chart, &y[1..d]) {
            Some(format!("x' = {:?} left the chart box", &y[1..d]))
        } else if y[0] < -depth {
            Some(format!("x0 = {} is deeper than the chart", y[0]))
        } else if y[0] >= 0.0 {
            Some(format!("x0 = {} reached the boundary in arclength", y[0]))
        } else {
            None
        }
    };
    let run = AdaptiveRun {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        max_steps: cfg.max_steps,
        initial_step: cfg.initial_step,
        max_step: &cap,
        outputs: &[],
        event: if s0.x[0] >= -x_stop { None } else { Some(&event) },
        guard: &guard,
    };
    let out = run.solve(&sys, s0.t, &s0.to_vec(), s0.t + t_max);
    let (termination, note) = stop_to_termination(&out.stop, Termination::ReachedEnd);
    Ok(Trajectory {
        chart_id: chart.id().to_string(),
        parameter_kind: ParameterKind::Arclength,
        samples: thin(out.samples, cfg.record_stride, &[]),
        termination,
        note,
    })
}

fn tau_guard<'a>(chart: &'a FermiChart, cfg: &'a IntegratorConfig) -> impl Fn(f64, &[f64]) -> Option<String> + 'a {
    let n = chart.boundary_dim();
    move |_: f64, y: &[f64]| {
        if outside_box(chart, &y[..n]) {
            Some(format!("x' = {:?} left the chart box", &y[..n]))
        } else if y[n] <= cfg.w_min {
            Some(format!("left_inbound_regime: w0 = {} <= w_min", y[n]))
        } else {
            None
        }
    }
}

fn tau_run<'a>(
    cfg: &'a IntegratorConfig,
    cap: &'a dyn Fn(f64) -> f64,
    outputs: &'a [f64],
    guard: &'a dyn Fn(f64, &[f64]) -> Option<String>,
) -> AdaptiveRun<'a> {
    AdaptiveRun {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        max_steps: cfg.max_steps,
        initial_step: cfg.initial_step,
        max_step: cap,
        outputs,
        event: None,
        guard,
    }
}

fn check_tau_start(chart: &FermiChart, s0: &TauState) -> Result<()> {
    let n = chart.boundary_dim();
    if s0.x.len() != n || s0.w.len() != n {
        return Err(Error::Domain("initial state has the wrong dimension".into()));
    }
    if !(s0.w0 > 0.0) {
        return Err(Error::NotInbound(format!("w0 = {}", s0.w0)));
    }
    if outside_box(chart, &s0.x) {
        return Err(Error::Domain(format!("x' = {:?} is outside the chart box", s0.x)));
    }
    Ok(())
}

/// Boundary system from `s0.tau < 0` to `τ = 0`, recording samples at `outputs` too.
pub fn integrate_tau_to_boundary_with_outputs(
    chart: &FermiChart,
    s0: &TauState,
    outputs: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_tau_start(chart, s0)?;
    if !(s0.tau < 0.0 && s0.tau >= -chart.domain().delta * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!("start tau = {} must lie in [-delta, 0)", s0.tau)));
    }
    let sys = TauSystem { chart };
    let ratio = cfg.max_step_ratio;
    let cap = move |s: f64| (ratio * s.abs()).max(1e-300);
    let guard = tau_guard(chart, cfg);
    let id = chart.id().to_string();
    let mut samples = Vec::new();
    let mut stop = Stop::End;
    let y_last;
    if -cfg.tau_min > s0.tau {
        let out = tau_run(cfg, &cap, outputs, &guard).solve(&sys, s0.tau, &s0.to_vec(), -cfg.tau_min);
        samples = out.samples;
        stop = out.stop;
        y_last = samples.last().cloned();
    } else {
        samples.push((s0.tau, s0.to_vec()));
        y_last = samples.last().cloned();
    }
    if !matches!(stop, Stop::End) {
        let (termination, note) = stop_to_termination(&stop, Termination::ReachedBoundary);
        return Ok(Trajectory {
            chart_id: id,
            parameter_kind: ParameterKind::Tau,
            samples: thin(samples, cfg.record_stride, outputs),
            termination,
            note,
        });
    }
    let (tl, yl) = y_last.expect("at least the initial sample");
    let (termination, note) = match heun_step(&sys, tl, &yl, -tl) {
        Ok(y0) => {
            samples.push((0.0, y0));
            (Termination::ReachedBoundary, None)
        }
        Err(e @ Error::NotInbound(_)) => (Termination::LeftInboundRegime, Some(e.to_string())),
        Err(e) => (Termination::StepFailure, Some(e.to_string())),
    };
    Ok(Trajectory {
        chart_id: id,
        parameter_kind: ParameterKind::Tau,
        samples: thin(samples, cfg.record_stride, outputs),
        termination,
        note,
    })
}

/// Boundary system from `s0.tau < 0` to `τ = 0`.
pub fn integrate_tau_to_boundary(chart: &FermiChart, s0: &TauState, cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_tau_to_boundary_with_outputs(chart, s0, &[], cfg)
}

/// Boundary system from `(τ = 0, x' = q, w⁰ = 1, w = w_init)` down to `tau_end`,
/// also landing on every parameter in `outputs`.
pub fn integrate_tau_from_boundary_with_outputs(
    chart: &FermiChart,
    q: &[f64],
    w_init: &[f64],
    tau_end: f64,
    outputs: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let s0 = TauState {
        tau: 0.0,
        x: q.to_vec(),
        w0: 1.0,
        w: w_init.to_vec(),
    };
    check_tau_start(chart, &s0)?;
    if !(tau_end < 0.0 && tau_end >= -chart.domain().delta * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!("tau_end = {tau_end} must lie in [-delta, 0)")));
    }
    let sys = TauSystem { chart };
    let h0 = -(cfg.initial_step * 1e-4).min(-tau_end);
    let y1 = heun_step(&sys, 0.0, &s0.to_vec(), h0)?;
    let mut samples = vec![(0.0, s0.to_vec()), (h0, y1.clone())];
    let ratio = cfg.max_step_ratio;
    let cap = move |s: f64| (ratio * s.abs()).max(1e-300);
    let guard = tau_guard(chart, cfg);
    let mut stop = Stop::End;
    if h0 > tau_end {
        let out = tau_run(cfg, &cap, outputs, &guard).solve(&sys, h0, &y1, tau_end);
        samples.extend(out.samples.into_iter().skip(1));
        stop = out.stop;
    }
    let (termination, note) = stop_to_termination(&stop, Termination::ReachedEnd);
    Ok(Trajectory {
        chart_id: chart.id().to_string(),
        parameter_kind: ParameterKind::Tau,
        samples: thin(samples, cfg.record_stride, outputs),
        termination,
        note,
    })
}

pub fn integrate_tau_from_boundary(
    chart: &FermiChart,
    q: &[f64],
    w_init: &[f64],
    tau_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_tau_from_boundary_with_outputs(chart, q, w_init, tau_end, &[], cfg)
}

/// Boundary system between two negative parameters (either direction), landing on `outputs`.
pub fn integrate_tau_interval(
    chart: &FermiChart,
    s0: &TauState,
    tau_end: f64,
    outputs: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_tau_start(chart, s0)?;
    let delta = chart.domain().delta * (1.0 + 1e-12);
    if !(s0.tau <= 0.0 && s0.tau >= -delta && tau_end <= 0.0 && tau_end >= -delta) {
        return Err(Error::Domain("interval must lie in [-delta, 0]".into()));
    }
    let sys = TauSystem { chart };
    let ratio = cfg.max_step_ratio;
    let cap = move |s: f64| (ratio * s.abs()).max(cfg.tau_min);
    let guard = tau_guard(chart, cfg);
    let out = tau_run(cfg, &cap, outputs, &guard).solve(&sys, s0.tau, &s0.to_vec(), tau_end);
    let (termination, note) = stop_to_termination(&out.stop, Termination::ReachedEnd);
    Ok(Trajectory {
        chart_id: chart.id().to_string(),
        parameter_kind: ParameterKind::Tau,
        samples: thin(out.samples, cfg.record_stride, outputs),
        termination,
        note,
    })
}
