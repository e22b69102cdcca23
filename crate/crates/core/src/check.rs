//! The invariant battery behind `ccgeo check`.
//!
//! Each row names an invariant, the measured quantity, its tolerance and
//! whether it held. Rows that fail to compute are reported as failures.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotics::{
    boundary_grid, estimate_lipschitz_constant, fit_expansion, flow_c1_check, flow_lipschitz_check,
    is_asymptotically_hyperbolic, obstruction, DEFAULT_WINDOW,
};
use crate::chart::{FermiChart, FermiMetric, MetricDerivatives};
use crate::error::{Error, Result};
use crate::integrate::{integrate_t, integrate_tau_interval, IntegratorConfig, Trajectory};
use crate::models::{
    asymptotic_curve, epsilon_tau_rhs_reference, geometric_grid, hyperbolic_endpoint_oracle, make_epsilon_chart,
    make_warped_ah_chart, EpsilonFamily, FIGURE1_THETAS,
};
use crate::shoot::{
    boundary_shoot, boundary_shoot_with_outputs, direction_from_angles, endpoint_from_angles, endpoint_map,
    expmap_jacobian,
};
use crate::systems::{cotangent_from_velocity, rhs_tau_regular, to_tau_state, TauState, TauSystem};

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub chart: String,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub seed: u64,
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    /// Fixed-width text table, one row per invariant.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<12} {:<44} {:>12} {:>10}  {}\n",
            "chart", "invariant", "measured", "tolerance", "result"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<12} {:<44} {:>12.4e} {:>10.1e}  {}{}\n",
                r.chart,
                r.name,
                r.measured,
                r.tolerance,
                if r.passed { "pass" } else { "FAIL" },
                if r.detail.is_empty() { String::new() } else { format!("  ({})", r.detail) }
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub cfg: IntegratorConfig,
    pub seed: u64,
    pub lipschitz_pairs: usize,
    pub lipschitz_samples: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            cfg: IntegratorConfig::default(),
            seed: 0,
            lipschitz_pairs: 20,
            lipschitz_samples: 1000,
        }
    }
}

struct Rows<'a> {
    chart: &'a str,
    rows: Vec<CheckRow>,
}

impl Rows<'_> {
    /// Records `measured ≤ tolerance`.
    fn at_most(&mut self, name: &str, measured: Result<f64>, tolerance: f64) {
        self.push(name, measured.map(|m| (m, m <= tolerance, String::new())), tolerance);
    }

    fn push(&mut self, name: &str, outcome: Result<(f64, bool, String)>, tolerance: f64) {
        let row = match outcome {
            Ok((measured, passed, detail)) => CheckRow {
                chart: self.chart.to_string(),
                name: name.to_string(),
                measured,
                tolerance,
                passed: passed && measured.is_finite(),
                detail,
            },
            Err(e) => CheckRow {
                chart: self.chart.to_string(),
                name: name.to_string(),
                measured: f64::NAN,
                tolerance,
                passed: false,
                detail: e.to_string(),
            },
        };
        self.rows.push(row);
    }
}

/// Wraps a metric with `ρ ↦ −ρ`; used to exercise the integrity checks.
#[derive(Debug)]
struct FlippedRho(Arc<dyn FermiMetric>);

impl FermiMetric for FlippedRho {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn h(&self, x0: f64, xp: &[f64]) -> DMatrix<f64> {
        self.0.h(x0, xp)
    }
    fn dh(&self, x0: f64, xp: &[f64]) -> MetricDerivatives {
        self.0.dh(x0, xp)
    }
    fn rho(&self, x0: f64, xp: &[f64]) -> f64 {
        -self.0.rho(x0, xp)
    }
    fn drho(&self, x0: f64, xp: &[f64]) -> (f64, DVector<f64>) {
        let (r0, r) = self.0.drho(x0, xp);
        (-r0, -r)
    }
}

/// The same chart with the sign of `ρ` flipped.
pub fn corrupt_rho_sign(chart: &FermiChart) -> Result<FermiChart> {
    FermiChart::new(
        format!("{}-flipped", chart.id()),
        Arc::new(FlippedRho(chart.metric_arc())),
        chart.domain().clone(),
    )
}

/// `max |2H − 1|` over the samples of a boundary-system trajectory.
pub fn tau_energy_drift(chart: &FermiChart, traj: &Trajectory) -> Result<f64> {
    let mut drift = 0.0f64;
    for i in 0..traj.len() {
        drift = drift.max((chart.energy(&traj.tau_state(i))? - 1.0).abs());
    }
    Ok(drift)
}

/// Sup-norm distance between the arclength trace and the boundary-system trace of
/// the geodesic through `(p, v)`, compared at equal `x⁰` on the collar.
pub fn parametrization_consistency(chart: &FermiChart, p: &[f64], v: &[f64], cfg: &IntegratorConfig) -> Result<f64> {
    let s0 = cotangent_from_velocity(chart, p, v)?;
    let t = integrate_t(chart, &s0, cfg.t_max, cfg)?;
    let delta = chart.domain().delta;
    let i0 = t
        .samples
        .iter()
        .position(|s| s.state[0] >= -delta)
        .ok_or_else(|| Error::Numeric("arclength trace never enters the collar".into()))?;
    let start = to_tau_state(chart, &t.cotangent_state(i0))?;
    let outputs: Vec<f64> = t.samples[i0 + 1..].iter().map(|s| s.state[0]).collect();
    let tau_end = *outputs.last().ok_or_else(|| Error::Numeric("no overlap".into()))?;
    let tr = integrate_tau_interval(chart, &start, tau_end, &outputs, cfg)?;
    let by_tau: HashMap<u64, &[f64]> = tr.samples.iter().map(|s| (s.param.to_bits(), &s.state[..])).collect();
    let n = chart.boundary_dim();
    let mut worst = 0.0f64;
    let mut matched = 0;
    for s in &t.samples[i0 + 1..] {
        if let Some(y) = by_tau.get(&s.state[0].to_bits()) {
            matched += 1;
            for a in 0..n {
                worst = worst.max((y[a] - s.state[1 + a]).abs());
            }
        }
    }
    if matched < outputs.len() {
        return Err(Error::Numeric(format!("matched {matched} of {} samples", outputs.len())));
    }
    Ok(worst)
}

/// Second divided differences of `θ ↦ endpoint` along the first angle at steps `hs`.
pub fn endpoint_second_differences(
    chart: &FermiChart,
    p: &[f64],
    angles: &[f64],
    hs: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>> {
    let at = |d: f64| -> Result<f64> {
        let mut a = angles.to_vec();
        a[0] += d;
        Ok(endpoint_from_angles(chart, p, &a, cfg)?[0])
    };
    let f0 = at(0.0)?;
    hs.iter()
        .map(|&h| Ok((at(h)? - 2.0 * f0 + at(-h)?) / (h * h)))
        .collect()
}

/// Tolerances tight enough for second differences at `h ≈ 2.5·10⁻⁴`.
pub fn smoothness_config(cfg: &IntegratorConfig) -> IntegratorConfig {
    IntegratorConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        ..cfg.clone()
    }
}

/// Largest relative change between successive second differences.
pub fn relative_spread(d2: &[f64]) -> f64 {
    d2.windows(2)
        .map(|w| (w[0] - w[1]).abs() / w[1].abs().max(1e-3))
        .fold(0.0, f64::max)
}

/// `max |v_x(t) − v_x(0) + ε t|` over `t ∈ [0, t_end]` on the ε-family, `v_x = ρ⁻² ẋ`.
pub fn vx_linearity(epsilon: f64, theta: f64, t_end: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let chart = make_epsilon_chart(&EpsilonFamily::new(epsilon))?;
    let p = [-1.0, 0.0];
    let v = direction_from_angles(&chart, &p, &[theta])?;
    let s0 = cotangent_from_velocity(&chart, &p, &v)?;
    let cfg = IntegratorConfig { x_stop: Some(1e-12), ..cfg.clone() };
    let traj = integrate_t(&chart, &s0, t_end, &cfg)?;
    // ẋ = ρ² ξ_x, so v_x = ρ⁻² ẋ = ξ_x
    let vx = |i: usize| traj.cotangent_state(i).xi[1];
    let v0 = vx(0);
    let mut worst = 0.0f64;
    for i in 0..traj.len() {
        let t = traj.samples[i].param;
        if t <= t_end {
            worst = worst.max((vx(i) - v0 + epsilon * t).abs());
        }
    }
    Ok(worst)
}

/// `max |generic − closed form|` of the ε-family boundary system at random states.
pub fn specialized_system_agreement(epsilon: f64, samples: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let chart = make_epsilon_chart(&EpsilonFamily::new(epsilon))?;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let y: f64 = rng.random_range(1e-3..0.85);
        let x: f64 = rng.random_range(-1.5..1.5);
        let w0: f64 = rng.random_range(0.3..1.5);
        let wx: f64 = rng.random_range(-1.0..1.0);
        let d = rhs_tau_regular(
            &chart,
            &TauState {
                tau: -y,
                x: vec![x],
                w0,
                w: vec![wx],
            },
        )?;
        let r = epsilon_tau_rhs_reference(epsilon, y, x, -w0, wx);
        // d/dτ = −d/dy; w_y = −w⁰; w_x = w
        let diffs = [d.dx[0] + r[0], d.dw0 - r[1], d.dw[0] + r[2]];
        let scale = r.iter().map(|v| v.abs()).fold(1.0, f64::max);
        worst = worst.max(diffs.iter().map(|v| v.abs()).fold(0.0, f64::max) / scale);
    }
    Ok(worst)
}

/// Random pairs for the flow Lipschitz check and the empirical `C_est`, both on the
/// region `x' ∈ q ± r`, `w⁰ ∈ [0.5, 1.5]`, `w ∈ [−1, 1]`.
pub struct LipschitzSetup {
    pub c_est: f64,
    pub tau0: f64,
    pub interval_len: f64,
    pub pairs: Vec<(Vec<f64>, Vec<f64>)>,
}

pub fn lipschitz_setup(chart: &FermiChart, samples: usize, pairs: usize, rng: &mut ChaCha8Rng) -> Result<LipschitzSetup> {
    let n = chart.boundary_dim();
    let center: Vec<f64> = chart.domain().x_box.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    let radius: Vec<f64> = chart.domain().x_box.iter().map(|(lo, hi)| 0.25 * (hi - lo)).collect();
    let tau0 = -0.8 * chart.domain().delta;
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut y: Vec<f64> = (0..n).map(|a| center[a] + radius[a] * rng.random_range(-1.0..1.0)).collect();
        y.push(rng.random_range(0.5..1.5));
        y.extend((0..n).map(|_| rng.random_range(-1.0..1.0)));
        y
    };
    let sys = TauSystem { chart };
    let c_est = estimate_lipschitz_constant(
        &sys,
        |rng: &mut ChaCha8Rng| (rng.random_range(tau0..-1e-9), draw(rng)),
        samples,
        1e-6,
        rng,
    )?;
    let interval_len = (0.5 / c_est).min(-tau0);
    let pairs = (0..pairs)
        .map(|_| {
            let a = draw(rng);
            let b: Vec<f64> = a.iter().map(|v| v + 1e-3 * rng.random_range(-1.0..1.0)).collect();
            (a, b)
        })
        .collect();
    Ok(LipschitzSetup {
        c_est,
        tau0,
        interval_len,
        pairs,
    })
}

/// Checks that apply to any chart.
fn chart_rows(chart: &FermiChart, opts: &CheckOptions, rng: &mut ChaCha8Rng) -> Vec<CheckRow> {
    let mut rows = Rows { chart: chart.id(), rows: Vec::new() };
    let report = chart.validate(8);
    for c in &report.checks {
        rows.push(
            &format!("integrity: {}", c.name),
            Ok((c.measured, c.passed, c.criterion.clone())),
            0.0,
        );
    }
    if !report.is_ok() {
        return rows.rows;
    }
    let cfg = &opts.cfg;
    let n = chart.boundary_dim();
    let q: Vec<f64> = chart.domain().x_box.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    let u = vec![0.0; n];
    let delta = chart.domain().delta;

    let shot = boundary_shoot(chart, &q, &u, -0.5 * delta, cfg);
    match &shot {
        Ok(traj) => {
            rows.at_most("energy along boundary shot |2H-1|", tau_energy_drift(chart, traj), 1e-9);
            let fit = fit_expansion(traj, DEFAULT_WINDOW, true);
            let o = obstruction(chart, &q);
            rows.push(
                "obstruction fit consistency",
                fit.and_then(|f| {
                    let o = o?;
                    let err = f.o_fit.iter().zip(&o).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    let onorm = o.iter().map(|v| v.abs()).fold(0.0, f64::max);
                    let tol = (0.02 * onorm).max(5e-3);
                    Ok((err, err <= tol, format!("tolerance {tol:.1e}")))
                }),
                5e-3,
            );
        }
        Err(e) => rows.push("boundary shot", Err(Error::Numeric(e.to_string())), 0.0),
    }

    let p: Vec<f64> = std::iter::once(-0.5 * delta).chain(q.iter().copied()).collect();
    let mut angles = vec![0.0; n];
    angles[0] = 0.3;
    let v = direction_from_angles(chart, &p, &angles);
    if let Ok(v) = &v {
        rows.at_most(
            "t/tau trace agreement (sup-norm)",
            parametrization_consistency(chart, &p, v, cfg),
            1e-7,
        );
        let p_deep: Vec<f64> = std::iter::once(-(0.5 * chart.domain().interior_depth).min(1.0))
            .chain(q.iter().copied())
            .collect();
        rows.push(
            "rho decay slope vs -kappa(endpoint)",
            direction_from_angles(chart, &p_deep, &angles).and_then(|vd| {
                let shot = endpoint_map(chart, &p_deep, &vd, cfg)?;
                let slope = shot.diagnostics.get("rho_decay_slope").copied();
                let kappa = shot.diagnostics.get("kappa_endpoint").copied();
                match (slope, kappa) {
                    (Some(s), Some(k)) => {
                        let rel = (s + k).abs() / k;
                        Ok((rel, rel <= 1e-2, format!("slope {s:.6}, kappa {k:.6}")))
                    }
                    _ => Err(Error::Numeric("decay slope unavailable".into())),
                }
            }),
            1e-2,
        );
        rows.push(
            "expmap Jacobian nonsingular",
            expmap_jacobian(chart, &p, v, cfg, 1e-4).map(|j| {
                (
                    j.min_singular_value,
                    j.min_singular_value > 0.0,
                    format!("condition {:.3e}", j.condition),
                )
            }),
            0.0,
        );
        rows.push(
            "endpoint second differences stable",
            endpoint_second_differences(chart, &p, &angles, &[1e-3, 5e-4, 2.5e-4], &smoothness_config(cfg)).map(|d2| {
                let spread = relative_spread(&d2);
                (spread, spread <= 1e-3, format!("{d2:.6?}"))
            }),
            1e-3,
        );
    }

    let setup = lipschitz_setup(chart, opts.lipschitz_samples, opts.lipschitz_pairs, rng);
    rows.push(
        "flow Lipschitz ratio <= e",
        setup.and_then(|s| {
            let r = flow_lipschitz_check(chart, s.tau0, s.interval_len, &s.pairs, cfg)?;
            Ok((r.max_ratio, r.bound_ok, format!("C_est {:.4}, interval {:.4}", s.c_est, s.interval_len)))
        }),
        std::f64::consts::E,
    );
    if let Ok(traj) = &shot {
        let tau0 = -0.5 * delta;
        let base = traj
            .samples
            .iter()
            .find(|s| s.param == tau0)
            .map(|s| TauState::from_vec(s.param, &s.state));
        rows.push(
            "flow C1: divided differences vs variational",
            base.ok_or_else(|| Error::Numeric("boundary shot misses tau0".into()))
                .and_then(|b| flow_c1_check(chart, tau0, 0.0, &b, cfg))
                .map(|r| {
                    (
                        r.max_discrepancy,
                        r.max_discrepancy <= 1e-5,
                        format!("observed order {:.2}", r.observed_order),
                    )
                }),
            1e-5,
        );
    }
    let ah = is_asymptotically_hyperbolic(chart, &boundary_grid(chart, 9), 1e-8);
    rows.push(
        "sup |obstruction| (informational)",
        ah.map(|r| (r.sup_obstruction, true, format!("asymptotically hyperbolic: {}", r.is_ah))),
        1e-8,
    );
    rows.rows
}

/// Checks specific to the ε-family at `epsilon`.
fn epsilon_rows(epsilon: f64, opts: &CheckOptions, rng: &mut ChaCha8Rng) -> Vec<CheckRow> {
    let id = format!("epsilon:{epsilon}");
    let mut rows = Rows { chart: &id, rows: Vec::new() };
    let cfg = &opts.cfg;
    rows.at_most(
        "specialized system agreement",
        specialized_system_agreement(epsilon, 200, rng),
        1e-12,
    );
    rows.at_most("v_x linearity on t in [0, 5]", vx_linearity(epsilon, 0.3, 5.0, cfg), 1e-8);
    if let Ok(chart) = make_epsilon_chart(&EpsilonFamily::new(epsilon)) {
        let want = -0.5 * epsilon;
        rows.push(
            "obstruction equals -epsilon/2",
            obstruction(&chart, &[0.3]).map(|o| {
                let err = (o[0] - want).abs();
                (err, err <= 1e-12, String::new())
            }),
            1e-12,
        );
        if epsilon > 0.0 {
            let us = [-1.0, -0.5, 0.0, 0.5, 1.0];
            rows.push(
                "u round trip |u_fit - u|",
                us.iter()
                    .map(|&u| {
                        let traj = boundary_shoot(&chart, &[0.0], &[u], -0.1, cfg)?;
                        Ok((fit_expansion(&traj, DEFAULT_WINDOW, true)?.u_fit[0] - u).abs())
                    })
                    .collect::<Result<Vec<f64>>>()
                    .map(|errs| {
                        let m = errs.iter().copied().fold(0.0, f64::max);
                        (m, m <= 5e-2, String::new())
                    }),
                5e-2,
            );
        }
        if epsilon == 0.0 {
            rows.push(
                "hyperbolic endpoints vs semicircle",
                [std::f64::consts::FRAC_PI_8, std::f64::consts::FRAC_PI_4]
                    .iter()
                    .map(|&th| Ok((endpoint_from_angles(&chart, &[-1.0, 0.0], &[th], cfg)?[0] - hyperbolic_endpoint_oracle(0.0, 1.0, th)).abs()))
                    .collect::<Result<Vec<f64>>>()
                    .map(|e| {
                        let m = e.iter().copied().fold(0.0, f64::max);
                        (m, m <= 1e-6, String::new())
                    }),
                1e-6,
            );
        }
    }
    rows.rows
}

/// Cross-chart checks of the default battery.
fn default_rows(opts: &CheckOptions) -> Vec<CheckRow> {
    let mut rows = Rows { chart: "all", rows: Vec::new() };
    let cfg = &opts.cfg;
    let eps = [0.0, 0.5, 1.0];
    rows.push(
        "figure 1 leftward drift with epsilon",
        (|| {
            let mut worst = f64::INFINITY;
            for &th in &FIGURE1_THETAS {
                let mut prev: Option<f64> = None;
                for &e in &eps {
                    let chart = make_epsilon_chart(&EpsilonFamily::new(e))?;
                    let x = endpoint_from_angles(&chart, &[-1.0, 0.0], &[th], cfg)?[0];
                    if let Some(px) = prev {
                        worst = worst.min(px - x);
                    }
                    prev = Some(x);
                }
            }
            Ok((worst, worst > 0.0, "min endpoint decrease".to_string()))
        })(),
        0.0,
    );
    rows.push(
        "figure 3 residual / y^2 bounded",
        (|| {
            let chart = make_epsilon_chart(&EpsilonFamily::new(1.0))?;
            let grid = geometric_grid(1e-1, 1e-4, 61);
            let outputs: Vec<f64> = grid.iter().map(|y| -y).collect();
            let traj = boundary_shoot_with_outputs(&chart, &[0.0], &[0.0], -0.1, &outputs, cfg)?;
            let worst = traj
                .samples
                .iter()
                .filter(|s| outputs.contains(&s.param))
                .map(|s| {
                    let y = -s.param;
                    ((s.state[0] - asymptotic_curve(1.0, 0.0, y)) / (y * y)).abs()
                })
                .fold(0.0, f64::max);
            Ok((worst, worst <= 1.5, String::new()))
        })(),
        1.5,
    );
    let ah_cases: [(&str, Result<FermiChart>, bool, Option<f64>); 4] = [
        ("epsilon:0", make_epsilon_chart(&EpsilonFamily::new(0.0)), true, None),
        ("warped_ah", Ok(make_warped_ah_chart()), true, None),
        ("epsilon:0.5", make_epsilon_chart(&EpsilonFamily::new(0.5)), false, Some(0.25)),
        ("epsilon:1", make_epsilon_chart(&EpsilonFamily::new(1.0)), false, Some(0.5)),
    ];
    for (name, chart, expect_ah, expect_sup) in ah_cases {
        rows.push(
            &format!("AH detection on {name}"),
            chart.and_then(|c| {
                let r = is_asymptotically_hyperbolic(&c, &boundary_grid(&c, 9), 1e-8)?;
                let sup_ok = expect_sup.is_none_or(|s| (r.sup_obstruction - s).abs() <= 1e-10);
                Ok((r.sup_obstruction, r.is_ah == expect_ah && sup_ok, format!("is_ah {}", r.is_ah)))
            }),
            1e-8,
        );
    }
    rows.rows
}

fn epsilon_of(chart: &FermiChart) -> Option<f64> {
    chart.id().strip_prefix("epsilon:")?.parse().ok()
}

/// Runs the battery on `charts`, or on the built-in charts plus the cross-chart
/// checks when `charts` is `None`.
pub fn run_checks(charts: Option<Vec<FermiChart>>, opts: &CheckOptions) -> Result<CheckReport> {
    opts.cfg.validate()?;
    let default_run = charts.is_none();
    let charts = match charts {
        Some(c) => c,
        None => vec![
            make_epsilon_chart(&EpsilonFamily::new(0.0))?,
            make_epsilon_chart(&EpsilonFamily::new(0.5))?,
            make_epsilon_chart(&EpsilonFamily::new(1.0))?,
            make_warped_ah_chart(),
        ],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let seeds: Vec<u64> = charts.iter().map(|_| rng.random()).collect();
    let per_chart: Vec<Vec<CheckRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = charts
            .iter()
            .zip(&seeds)
            .map(|(chart, &seed)| {
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let mut rows = chart_rows(chart, opts, &mut rng);
                    let intact = rows.iter().filter(|r| r.name.starts_with("integrity")).all(|r| r.passed);
                    if intact {
                        if let Some(e) = epsilon_of(chart) {
                            rows.extend(epsilon_rows(e, opts, &mut rng));
                        }
                    }
                    rows
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("check worker panicked")).collect()
    });
    let mut rows: Vec<CheckRow> = per_chart.into_iter().flatten().collect();
    if default_run {
        rows.extend(default_rows(opts));
    }
    Ok(CheckReport { seed: opts.seed, rows })
}
