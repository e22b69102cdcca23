use super::*;
use crate::models::{
    hyperbolic_endpoint_derivative, hyperbolic_endpoint_oracle, make_epsilon_chart, make_hyperbolic_chart,
    make_warped_ah_chart, EpsilonFamily,
};
use crate::systems::rhs_tau_regular;

fn eps_chart(eps: f64) -> FermiChart {
    make_epsilon_chart(&EpsilonFamily::new(eps)).unwrap()
}

fn deep_cfg() -> IntegratorConfig {
    IntegratorConfig {
        x_stop: Some(1e-7),
        ..IntegratorConfig::default()
    }
}

#[test]
fn hyperbolic_endpoints_match_closed_form() {
    let chart = make_hyperbolic_chart();
    let cfg = IntegratorConfig::default();
    for theta in [-1.2, -0.5, 0.0, 0.3, 1.0] {
        let got = endpoint_from_angles(&chart, &[-1.0, 0.0], &[theta], &cfg).unwrap()[0];
        let want = hyperbolic_endpoint_oracle(0.0, 1.0, theta);
        assert!((got - want).abs() < 1e-6, "theta {theta}: {got} vs {want}");
    }
    let got = endpoint_from_angles(&chart, &[-0.5, 0.3], &[0.4], &cfg).unwrap()[0];
    assert!((got - (0.3 + 0.5 * 0.2f64.tan())).abs() < 1e-6);
}

#[test]
fn direction_from_angles_is_unit_in_h() {
    let chart = make_warped_ah_chart();
    let p = [-0.4, 0.3];
    let d = direction_from_angles(&chart, &p, &[0.7]).unwrap();
    let h = chart.local_geometry(p[0], &p[1..]).unwrap().h;
    let norm2 = d[0] * d[0] + d[1] * d[1] * h[(0, 0)];
    assert!((norm2 - 1.0).abs() < 1e-14);
    assert!((d[0] - 0.7f64.cos()).abs() < 1e-15);
    assert!(direction_from_angles(&chart, &p, &[0.1, 0.2]).is_err());
}

#[test]
fn hyperbolic_jacobian_matches_derivative_of_oracle() {
    let chart = make_hyperbolic_chart();
    let cfg = IntegratorConfig::default();
    for theta in [0.0, 0.6, -0.9] {
        let p = [-1.0, 0.0];
        let v = direction_from_angles(&chart, &p, &[theta]).unwrap();
        let rep = expmap_jacobian(&chart, &p, &v, &cfg, 1e-4).unwrap();
        let want = hyperbolic_endpoint_derivative(1.0, theta);
        assert!((rep.matrix[0][0] - want).abs() < 1e-6, "theta {theta}: {} vs {want}", rep.matrix[0][0]);
        assert!((rep.min_singular_value - want).abs() < 1e-6);
    }
}

#[test]
fn jacobian_is_stable_under_step_halving() {
    let chart = eps_chart(1.0);
    let cfg = IntegratorConfig::default();
    let p = [-0.5, 0.0];
    let v = direction_from_angles(&chart, &p, &[0.3]).unwrap();
    let a = expmap_jacobian(&chart, &p, &v, &cfg, 1e-4).unwrap().matrix[0][0];
    let b = expmap_jacobian(&chart, &p, &v, &cfg, 5e-5).unwrap().matrix[0][0];
    assert!(a > 0.0);
    assert!((a - b).abs() < 1e-4 * a.abs(), "{a} vs {b}");
    assert!(expmap_jacobian(&chart, &p, &v, &cfg, 0.0).is_err());
}

#[test]
fn w_and_u_are_inverse() {
    for chart in [eps_chart(1.0), eps_chart(0.5), make_warped_ah_chart()] {
        for u in [-1.0, 0.0, 0.7] {
            let w = w_from_u(&chart, &[0.2], &[u]).unwrap();
            let back = u_from_w(&chart, &[0.2], &w).unwrap();
            assert!((back[0] - u).abs() < 1e-14);
        }
    }
    let w = w_from_u(&eps_chart(1.0), &[0.0], &[0.0]).unwrap();
    assert!((w[0] - 0.5).abs() < 1e-15);
}

#[test]
fn boundary_shoot_starts_from_prescribed_data() {
    let chart = eps_chart(1.0);
    let traj = boundary_shoot(&chart, &[0.0], &[0.0], -0.2, &IntegratorConfig::default()).unwrap();
    assert_eq!(traj.first().state, vec![0.0, 1.0, 0.5]);
    assert_eq!(traj.last().param, -0.2);
}

#[test]
fn boundary_shoot_reports_early_stop() {
    let chart = make_hyperbolic_chart();
    match boundary_shoot(&chart, &[0.0], &[1.0], -0.8, &IntegratorConfig::default()) {
        Err(Error::Integration { termination, partial, .. }) => {
            assert_eq!(termination, Termination::LeftInboundRegime);
            assert!(partial.unwrap().len() > 10);
        }
        other => panic!("expected an integration error, got {other:?}"),
    }
}

#[test]
fn vertical_ray_decay_rate_is_one() {
    let chart = make_hyperbolic_chart();
    let s0 = crate::systems::cotangent_from_velocity(&chart, &[-1.0, 0.0], &[1.0, 0.0]).unwrap();
    let traj = integrate_t(&chart, &s0, 6.0, &IntegratorConfig::default()).unwrap();
    let a = rho_decay_rate(&chart, &traj, (2.0, 6.0)).unwrap();
    let b = rho_decay_rate(&chart, &traj, (1.0, 5.0)).unwrap();
    assert!((a + 1.0).abs() < 1e-8);
    assert!((a - b).abs() < 1e-8);
    assert!(rho_decay_rate(&chart, &traj, (5.95, 6.0)).is_err());
}

#[test]
fn decay_rate_tends_to_kappa_at_endpoint() {
    for eps in [0.5, 1.0] {
        let chart = eps_chart(eps);
        let shot = endpoint_map(&chart, &[-0.5, 0.0], &[1.0, 0.3], &deep_cfg()).unwrap();
        let t_end = shot.arclength.last().param;
        let slope = rho_decay_rate(&chart, &shot.arclength, (t_end - 2.0, t_end)).unwrap();
        let kappa = chart.kappa(&shot.endpoint).unwrap();
        assert!((slope + kappa).abs() < 1e-3 * kappa, "eps {eps}: slope {slope}, kappa {kappa}");
        let third = t_end / 3.0;
        let early = rho_decay_rate(&chart, &shot.arclength, (third, 2.0 * third)).unwrap();
        let late = rho_decay_rate(&chart, &shot.arclength, (2.0 * third, t_end)).unwrap();
        assert!((early - late).abs() < 5e-3 * late.abs(), "eps {eps}: {early} vs {late}");
    }
}

#[test]
fn normal_momentum_tends_to_one() {
    let chart = eps_chart(1.0);
    let s0 = crate::systems::cotangent_from_velocity(&chart, &[-0.5, 0.0], &[1.0, -0.5]).unwrap();
    let traj = integrate_t(&chart, &s0, 200.0, &deep_cfg()).unwrap();
    let mut seen = 0;
    for i in 0..traj.len() {
        let s = traj.cotangent_state(i);
        if chart.metric().rho(s.x[0], &s.x[1..]) < 1e-4 {
            assert!(s.zeta0(&chart) > 1.0 - 1e-3);
            seen += 1;
        }
    }
    assert!(seen > 5);
}

#[test]
fn tangential_velocity_grows_logarithmically() {
    for eps in [0.5, 1.0] {
        let chart = eps_chart(eps);
        let shot = endpoint_map(&chart, &[-0.5, 0.0], &[1.0, 0.2], &deep_cfg()).unwrap();
        let pts: Vec<(f64, f64)> = shot
            .arclength
            .samples
            .iter()
            .map(|s| (chart.metric().rho(s.state[0], &s.state[1..2]).ln(), s.state[3]))
            .filter(|(l, _)| *l < 1e-4f64.ln() && *l > 1e-6f64.ln())
            .collect();
        assert!(pts.len() > 10);
        let (a, b) = (pts[0], pts[pts.len() - 1]);
        let slope = (b.1 - a.1) / (b.0 - a.0);
        let want = eps / chart.kappa(&shot.endpoint).unwrap();
        assert!((slope - want).abs() < 0.05 * want, "eps {eps}: {slope} vs {want}");
    }
}

#[test]
fn geodesics_meet_the_boundary_orthogonally() {
    for chart in [eps_chart(1.0), make_warped_ah_chart()] {
        let cfg = IntegratorConfig {
            x_stop: Some(0.05),
            ..IntegratorConfig::default()
        };
        let shot = endpoint_map(&chart, &[-0.5, 0.0], &[1.0, 0.8], &cfg).unwrap();
        let traj = &shot.trajectory;
        assert_eq!(rhs_tau_regular(&chart, &traj.tau_state(traj.len() - 1)).unwrap().dx[0], 0.0);
        let ratio = |i: usize| {
            let s = traj.tau_state(i);
            let d = rhs_tau_regular(&chart, &s).unwrap();
            (s.tau.abs(), d.dx[0].abs() / (s.tau * s.tau.abs().ln()).abs())
        };
        let pts: Vec<(f64, f64)> = (0..traj.len() - 1).map(ratio).collect();
        let c = pts
            .iter()
            .filter(|p| p.0 >= 1e-3 && p.0 <= 1e-2)
            .map(|p| p.1)
            .fold(0.0, f64::max);
        assert!(c > 0.0 || chart.id() == "warped_ah");
        for &(t, r) in pts.iter().filter(|p| p.0 < 1e-3) {
            assert!(r <= 1.5 * c + 1e-12, "{}: ratio {r} at |tau| {t}, fitted C {c}", chart.id());
        }
        assert!((shot.diagnostics["w0_boundary"] - 1.0).abs() < 1e-9);
        assert!(shot.diagnostics["energy_drift"] < 1e-9);
    }
}

#[test]
fn shot_from_inside_handoff_layer() {
    let chart = make_hyperbolic_chart();
    let shot = endpoint_map(&chart, &[-1e-4, 0.0], &[1.0, 0.5], &IntegratorConfig::default()).unwrap();
    assert_eq!(shot.arclength.len(), 1);
    let theta = 0.5f64.atan();
    let want = hyperbolic_endpoint_oracle(0.0, 1e-4, theta);
    assert!((shot.endpoint[0] - want).abs() < 1e-10);
}

#[test]
fn outward_direction_is_rejected() {
    let chart = make_hyperbolic_chart();
    let cfg = IntegratorConfig::default();
    assert!(matches!(endpoint_map(&chart, &[-0.5, 0.0], &[-1.0, 0.0], &cfg), Err(Error::Domain(_))));
    assert!(matches!(endpoint_map(&chart, &[-0.5, 0.0], &[0.0, 1.0], &cfg), Err(Error::Domain(_))));
}

#[test]
fn velocity_ratio_approaches_its_limit() {
    let chart = eps_chart(1.0);
    for th in [0.2, 0.785, -0.5] {
        let shot = endpoint_map(&chart, &[-1.0, 0.0], &[f64::cos(th), f64::sin(th)], &deep_cfg()).unwrap();
        let bd = chart.boundary_data(&shot.endpoint).unwrap();
        let want = bd.kappa_up[0] / (bd.kappa * bd.kappa);
        let errs: Vec<f64> = shot
            .arclength
            .samples
            .iter()
            .filter_map(|s| {
                let rho = chart.metric().rho(s.state[0], &s.state[1..2]);
                let xdot = rho * rho * s.state[3];
                (rho < 1e-4 && rho > 1e-6).then(|| (xdot / (rho * rho * rho.ln()) - want).abs() / want)
            })
            .collect();
        assert!(errs.len() > 20);
        assert!(errs.windows(2).all(|e| e[1] < e[0]), "theta {th}: error not decreasing");
        assert!(errs[0] < 0.1 && *errs.last().unwrap() < 0.05, "theta {th}: {errs:?}");
    }
}
