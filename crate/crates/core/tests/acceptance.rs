//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::time::{Duration, Instant};

use conformal_geodesics::asymptotics::{
    boundary_grid, estimate_lipschitz_constant, fit_expansion, flow_c1_check, flow_lipschitz_check,
    is_asymptotically_hyperbolic,
};
use conformal_geodesics::chart::FermiChart;
use conformal_geodesics::integrate::{
    integrate_t, integrate_tau_to_boundary_with_outputs, IntegratorConfig, ParameterKind, Trajectory,
};
use conformal_geodesics::models::{
    figure_data, geometric_grid, make_epsilon_chart, make_warped_ah_chart, EpsilonFamily, FigureOptions,
};
use conformal_geodesics::shoot::{boundary_shoot_with_outputs, direction_from_angles, endpoint_map, expmap_jacobian};
use conformal_geodesics::systems::{cotangent_from_velocity, to_tau_state, TauSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

type Run = Result<Outcome, String>;

fn eps_chart(eps: f64) -> FermiChart {
    make_epsilon_chart(&EpsilonFamily::new(eps)).expect("epsilon chart")
}

/// Start point `(x, y) = (0, 1)` in chart coordinates.
const P: [f64; 2] = [-1.0, 0.0];

/// Collected boundary-system trajectories, with the ε of their chart.
type Pool = Vec<(f64, Trajectory)>;

fn window_outputs() -> Vec<f64> {
    geometric_grid(1e-2, 1e-3, 60).into_iter().map(|y| -y).collect()
}

fn criterion_1(pool: &mut Pool) -> Run {
    let chart = eps_chart(0.0);
    let cfg = IntegratorConfig::default();
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for theta in [FRAC_PI_8, FRAC_PI_4] {
        let start = Instant::now();
        let v = direction_from_angles(&chart, &P, &[theta]).map_err(|e| e.to_string())?;
        let shot = endpoint_map(&chart, &P, &v, &cfg).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        // the semicircle through (0, 1) leaving at angle θ from the downward vertical
        let oracle = (0.5 * theta).tan();
        worst = worst.max((shot.endpoint[0] - oracle).abs());
        pool.push((0.0, shot.trajectory));
    }
    Ok(outcome(
        worst <= 1e-6 && slowest < Duration::from_secs(1),
        format!("max |endpoint - tan(theta/2)| = {worst:.2e} (tol 1e-6), slowest shot {slowest:.2?}"),
    ))
}

fn criterion_2(pool: &mut Pool) -> Run {
    let cfg = IntegratorConfig::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for eps in [1.0, 0.5] {
        let chart = eps_chart(eps);
        let traj = boundary_shoot_with_outputs(&chart, &[0.0], &[0.0], -0.05, &window_outputs(), &cfg)
            .map_err(|e| e.to_string())?;
        let fit = fit_expansion(&traj, (1e-3, 1e-2), true).map_err(|e| e.to_string())?;
        // κ = e^{εx}, so −κ'/(2κ) = −ε/2
        let expected = -0.5 * eps;
        let rel = (fit.o_fit[0] - expected).abs() / expected.abs();
        ok &= rel <= 0.02;
        parts.push(format!("g_{eps}: O_fit = {:.6} (expected {expected}, rel err {rel:.1e})", fit.o_fit[0]));
        pool.push((eps, traj));
    }
    Ok(outcome(ok, parts.join("; ")))
}

fn criterion_3(pool: &mut Pool) -> Run {
    let chart = eps_chart(1.0);
    let cfg = IntegratorConfig::default();
    let mut worst = 0.0f64;
    for u in [0.0, 0.5, -0.5, 1.0, -1.0] {
        let traj = boundary_shoot_with_outputs(&chart, &[0.0], &[u], -0.02, &window_outputs(), &cfg)
            .map_err(|e| format!("u = {u}: {e}"))?;
        let fit = fit_expansion(&traj, (1e-3, 1e-2), true).map_err(|e| e.to_string())?;
        worst = worst.max((fit.u_fit[0] - u).abs());
        pool.push((1.0, traj));
    }
    Ok(outcome(worst <= 5e-2, format!("max |u_fit - u| = {worst:.2e} over 5 values (tol 5e-2)")))
}

/// `2H` of a boundary-system state of `g_ε`, from the closed form of the family.
fn epsilon_energy(eps: f64, tau: f64, state: &[f64]) -> f64 {
    let (x, w0, w) = (state[0], state[1], state[2]);
    if tau == 0.0 {
        return w0 * w0;
    }
    let rho = -tau * (eps * x).exp();
    let v = w + eps * (-eps * x).exp() * tau.abs().ln() / w0;
    w0 * w0 + rho * rho * v * v
}

fn criterion_4(pool: &Pool) -> Run {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (eps, traj) in pool {
        assert_eq!(traj.parameter_kind, ParameterKind::Tau);
        for s in &traj.samples {
            worst = worst.max((epsilon_energy(*eps, s.param, &s.state) - 1.0).abs());
            count += 1;
        }
    }
    Ok(outcome(
        worst <= 1e-9 && !pool.is_empty(),
        format!("max |2H - 1| = {worst:.2e} over {} trajectories, {count} samples (tol 1e-9)", pool.len()),
    ))
}

fn criterion_5(pool: &mut Pool) -> Run {
    let cfg = IntegratorConfig::default();
    let mut worst = 0.0f64;
    let mut compared = 0;
    for (eps, theta) in [(1.0, 0.3), (0.5, -0.4), (0.0, 0.6)] {
        let chart = eps_chart(eps);
        let v = direction_from_angles(&chart, &P, &[theta]).map_err(|e| e.to_string())?;
        let s0 = cotangent_from_velocity(&chart, &P, &v).map_err(|e| e.to_string())?;
        let t = integrate_t(&chart, &s0, cfg.t_max, &cfg).map_err(|e| e.to_string())?;
        // start the τ-flow from the t-flow once inside the collar
        let i0 = (0..t.len())
            .find(|&i| t.samples[i].state[0] > -0.8)
            .ok_or("t-flow never entered the collar")?;
        let start = to_tau_state(&chart, &t.cotangent_state(i0)).map_err(|e| e.to_string())?;
        let outputs: Vec<f64> = t.samples[i0 + 1..].iter().map(|s| s.state[0]).collect();
        let tau = integrate_tau_to_boundary_with_outputs(&chart, &start, &outputs, &cfg).map_err(|e| e.to_string())?;
        for i in i0 + 1..t.len() {
            let x0 = t.samples[i].state[0];
            let Some(hit) = tau.samples.iter().find(|s| s.param == x0) else {
                continue;
            };
            let from_t = to_tau_state(&chart, &t.cotangent_state(i)).map_err(|e| e.to_string())?;
            for (a, b) in from_t.to_vec().iter().zip(&hit.state) {
                worst = worst.max((a - b).abs());
            }
            compared += 1;
        }
        pool.push((eps, tau));
    }
    Ok(outcome(
        worst <= 1e-7 && compared > 30,
        format!("sup-norm difference {worst:.2e} over {compared} matched depths (tol 1e-7)"),
    ))
}

fn criterion_6() -> Run {
    let chart = eps_chart(1.0);
    let cfg = IntegratorConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        ..IntegratorConfig::default()
    };
    let endpoint = |theta: f64| -> Result<f64, String> {
        let v = direction_from_angles(&chart, &P, &[theta]).map_err(|e| e.to_string())?;
        Ok(endpoint_map(&chart, &P, &v, &cfg).map_err(|e| e.to_string())?.endpoint[0])
    };
    let mut worst_spread = 0.0f64;
    let mut min_sv = f64::INFINITY;
    for theta in [-FRAC_PI_8, 0.0, FRAC_PI_8, FRAC_PI_4] {
        let f0 = endpoint(theta)?;
        let mut d2 = Vec::new();
        for h in [1e-3, 5e-4, 2.5e-4] {
            d2.push((endpoint(theta + h)? - 2.0 * f0 + endpoint(theta - h)?) / (h * h));
        }
        let hi = d2.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = d2.iter().copied().fold(f64::INFINITY, f64::min);
        let scale = d2.iter().map(|v| v.abs()).fold(0.0, f64::max);
        worst_spread = worst_spread.max((hi - lo) / scale);
        let v = direction_from_angles(&chart, &P, &[theta]).map_err(|e| e.to_string())?;
        let jac = expmap_jacobian(&chart, &P, &v, &IntegratorConfig::default(), 1e-4).map_err(|e| e.to_string())?;
        min_sv = min_sv.min(jac.min_singular_value);
    }
    Ok(outcome(
        worst_spread <= 5e-4 && min_sv > 0.0,
        format!("second-difference relative spread {worst_spread:.2e} (tol 5e-4), min singular value {min_sv:.4}"),
    ))
}

fn criterion_7() -> Run {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, chart) in [("g_0", eps_chart(0.0)), ("warped", make_warped_ah_chart())] {
        let rep = is_asymptotically_hyperbolic(&chart, &boundary_grid(&chart, 21), 1e-8).map_err(|e| e.to_string())?;
        ok &= rep.is_ah && rep.sup_obstruction <= 1e-8;
        parts.push(format!("{name}: AH={} sup={:.1e}", rep.is_ah, rep.sup_obstruction));
    }
    let chart = eps_chart(0.5);
    let rep = is_asymptotically_hyperbolic(&chart, &boundary_grid(&chart, 21), 1e-8).map_err(|e| e.to_string())?;
    ok &= !rep.is_ah && (rep.sup_obstruction - 0.25).abs() <= 1e-10;
    parts.push(format!("g_0.5: AH={} sup={:.12}", rep.is_ah, rep.sup_obstruction));
    Ok(outcome(ok, parts.join("; ")))
}

/// Least-squares slope of `log ρ` against `t` over the last two units of arclength.
fn log_rho_slope(eps: f64, traj: &Trajectory) -> f64 {
    let t_end = traj.samples.last().expect("samples").param;
    let pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|s| s.param >= t_end - 2.0)
        .map(|s| (s.param, (-s.state[0] * (eps * s.state[1]).exp()).ln()))
        .collect();
    let m = pts.len() as f64;
    let tb = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let lb = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tb) * (p.1 - lb)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tb).powi(2)).sum();
    sxy / sxx
}

fn criterion_8(pool: &mut Pool) -> Run {
    let cfg = IntegratorConfig::default();
    let mut worst = 0.0f64;
    for eps in [0.0, 1.0] {
        let chart = eps_chart(eps);
        for theta in [-FRAC_PI_4, 0.0, FRAC_PI_8] {
            let v = direction_from_angles(&chart, &P, &[theta]).map_err(|e| e.to_string())?;
            let shot = endpoint_map(&chart, &P, &v, &cfg).map_err(|e| e.to_string())?;
            let kappa = (eps * shot.endpoint[0]).exp();
            let slope = log_rho_slope(eps, &shot.arclength);
            worst = worst.max((slope + kappa).abs() / kappa);
            pool.push((eps, shot.trajectory));
        }
    }
    Ok(outcome(worst <= 0.01, format!("max relative error of slope vs -kappa = {worst:.2e} (tol 1e-2)")))
}

fn criterion_9() -> Run {
    let chart = eps_chart(1.0);
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let tau0 = -0.8 * chart.domain().delta;
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        vec![rng.random_range(-1.0..1.0), rng.random_range(0.5..1.5), rng.random_range(-1.0..1.0)]
    };
    let sys = TauSystem { chart: &chart };
    let c_est = estimate_lipschitz_constant(
        &sys,
        |rng: &mut ChaCha8Rng| (rng.random_range(tau0..-1e-9), draw(rng)),
        1000,
        1e-6,
        &mut rng,
    )
    .map_err(|e| e.to_string())?;
    let len = 0.5 / c_est;
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..20)
        .map(|_| {
            let a = draw(&mut rng);
            let b = a.iter().map(|v| v + 1e-3 * rng.random_range(-1.0..1.0)).collect();
            (a, b)
        })
        .collect();
    let lip = flow_lipschitz_check(&chart, tau0, len, &pairs, &cfg).map_err(|e| e.to_string())?;

    let traj = boundary_shoot_with_outputs(&chart, &[0.0], &[0.3], -0.3, &[], &cfg).map_err(|e| e.to_string())?;
    let base = traj.tau_state(traj.len() - 1);
    let c1 = flow_c1_check(&chart, -0.3, 0.0, &base, &cfg).map_err(|e| e.to_string())?;
    Ok(outcome(
        lip.max_ratio <= std::f64::consts::E && lip.ratios.len() == 20 && c1.max_discrepancy <= 1e-5,
        format!(
            "C_est = {c_est:.1}, interval {len:.2e}, max ratio {:.4} (bound e); Jacobian discrepancy {:.2e} (tol 1e-5)",
            lip.max_ratio, c1.max_discrepancy
        ),
    ))
}

fn criterion_10(suite_start: Instant) -> Run {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let opts = FigureOptions::default();
    let fig1 = figure_data(1, &[0.0, 0.5, 1.0], dir.path(), &opts).map_err(|e| e.to_string())?;
    let mut ordering = true;
    for k in 0..5 {
        let ends: Vec<f64> = (0..3).map(|e| fig1[5 * e + k].endpoint.unwrap_or(f64::NAN)).collect();
        ordering &= ends[0] > ends[1] && ends[1] > ends[2];
    }
    let fig3 = figure_data(3, &[], dir.path(), &opts).map_err(|e| e.to_string())?;
    let curve = fig3
        .iter()
        .find(|c| c.kind == "u" && c.value == 0.0)
        .ok_or("figure 3 has no u = 0 curve")?;
    let mut worst = 0.0f64;
    let mut covered = (f64::INFINITY, 0.0f64);
    for &(y, x) in &curve.points {
        if (1e-4..=1e-1).contains(&y) {
            worst = worst.max(((x + 0.5 * y * y * y.ln()) / (y * y)).abs());
            covered = (covered.0.min(y), covered.1.max(y));
        }
    }
    let full_range = covered.0 <= 1e-4 * (1.0 + 1e-12) && covered.1 >= 1e-1 * (1.0 - 1e-12);
    let elapsed = suite_start.elapsed();
    Ok(outcome(
        ordering && worst <= 1.5 && full_range && elapsed < Duration::from_secs(300),
        format!(
            "fig 1 ordering {}; fig 3 max |residual|/y^2 = {worst:.3e} on [{:.0e}, {:.0e}] (tol 1.5); elapsed {elapsed:.1?}",
            if ordering { "strict" } else { "violated" },
            covered.0,
            covered.1
        ),
    ))
}

fn report(id: usize, name: &str, run: Run) -> bool {
    let (passed, detail) = match run {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!("criterion {id:>2} {} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}

fn main() {
    let start = Instant::now();
    let mut pool = Pool::new();
    let mut all = true;
    all &= report(1, "hyperbolic endpoints", criterion_1(&mut pool));
    all &= report(2, "obstruction recovery", criterion_2(&mut pool));
    all &= report(3, "u round trip", criterion_3(&mut pool));
    all &= report(5, "parametrization consistency", criterion_5(&mut pool));
    all &= report(6, "endpoint smoothness", criterion_6());
    all &= report(7, "AH detection", criterion_7());
    all &= report(8, "rho decay", criterion_8(&mut pool));
    all &= report(9, "flow bounds", criterion_9());
    all &= report(4, "energy conservation", criterion_4(&pool));
    all &= report(10, "figure reproduction", criterion_10(start));
    println!("acceptance: {} in {:.1?}", if all { "all criteria passed" } else { "FAILED" }, start.elapsed());
    if !all {
        std::process::exit(1);
    }
}
