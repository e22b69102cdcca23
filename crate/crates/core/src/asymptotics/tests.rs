use super::*;
use crate::integrate::{Sample, Termination};
use crate::models::{geometric_grid, make_epsilon_chart, make_hyperbolic_chart, make_warped_ah_chart, EpsilonFamily};
use crate::shoot::{boundary_shoot, boundary_shoot_with_outputs};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn synthetic(taus: &[f64], f: impl Fn(f64) -> f64) -> Trajectory {
    let mut samples = vec![Sample {
        param: 0.0,
        state: vec![0.25, 1.0, 0.0],
    }];
    samples.extend(taus.iter().map(|&t| Sample {
        param: t,
        state: vec![0.25 + f(t), 1.0, 0.0],
    }));
    Trajectory {
        chart_id: "synthetic".into(),
        parameter_kind: ParameterKind::Tau,
        samples,
        termination: Termination::ReachedEnd,
        note: None,
    }
}

fn window_taus(n: usize) -> Vec<f64> {
    geometric_grid(1e-2, 1e-3, n).into_iter().map(|y| -y).collect()
}

#[test]
fn synthetic_expansion_is_recovered() {
    let traj = synthetic(&window_taus(60), |t| -0.5 * t * t * t.abs().ln() + 0.3 * t * t);
    let fit = fit_expansion(&traj, DEFAULT_WINDOW, false).unwrap();
    assert!((fit.o_fit[0] + 0.5).abs() < 1e-10);
    assert!((fit.u_fit[0] - 0.3).abs() < 1e-10);
    assert_eq!(fit.samples, 60);
    assert_eq!(fit.window, (-1e-2, -1e-3));
    assert!(fit.residual_rms < 1e-9);
}

#[test]
fn nuisance_terms_are_absorbed() {
    let f = |t: f64| {
        let l = t.abs().ln();
        0.2 * t * t * l - 0.7 * t * t + 3.0 * t * t * t * l + 5.0 * t * t * t
    };
    let traj = synthetic(&window_taus(80), f);
    let with = fit_expansion(&traj, DEFAULT_WINDOW, true).unwrap();
    assert!((with.o_fit[0] - 0.2).abs() < 1e-7);
    assert!((with.u_fit[0] + 0.7).abs() < 1e-7);
    assert!((with.nuisance[0][0] - 3.0).abs() < 1e-4);
    assert!((with.nuisance[0][1] - 5.0).abs() < 1e-4);
    let without = fit_expansion(&traj, DEFAULT_WINDOW, false).unwrap();
    assert!((without.o_fit[0] - 0.2).abs() > (with.o_fit[0] - 0.2).abs());
}

#[test]
fn fit_rejects_bad_windows() {
    let traj = synthetic(&window_taus(20), |t| t * t);
    assert!(matches!(fit_expansion(&traj, DEFAULT_WINDOW, false), Err(Error::Numeric(_))));
    let narrow: Vec<f64> = (0..40).map(|i| -1e-3 * (1.0 + 1e-9 * i as f64)).collect();
    let traj = synthetic(&narrow, |t| t * t);
    assert!(matches!(
        fit_expansion(&traj, (1e-3, 1.1e-3), false),
        Err(Error::IllConditioned(c)) if c > MAX_CONDITION
    ));
    assert!(matches!(fit_expansion(&traj, (0.0, 1e-2), false), Err(Error::Domain(_))));
}

#[test]
fn semicircle_has_no_log_term() {
    let chart = make_hyperbolic_chart();
    let cfg = IntegratorConfig::default();
    for u in [-0.5, 0.5] {
        let outputs = window_taus(60);
        let traj = boundary_shoot_with_outputs(&chart, &[0.0], &[u], -0.05, &outputs, &cfg).unwrap();
        let fit = fit_expansion(&traj, DEFAULT_WINDOW, true).unwrap();
        assert!(fit.o_fit[0].abs() < 1e-4, "u {u}: O_fit {}", fit.o_fit[0]);
        assert!((fit.u_fit[0] - u).abs() < 1e-3, "u {u}: u_fit {}", fit.u_fit[0]);
    }
}

#[test]
fn fitted_log_coefficient_matches_obstruction() {
    let cfg = IntegratorConfig::default();
    for eps in [0.5, 1.0] {
        let chart = make_epsilon_chart(&EpsilonFamily::new(eps)).unwrap();
        for q in [0.0, 0.4] {
            let traj = boundary_shoot_with_outputs(&chart, &[q], &[0.2], -0.05, &window_taus(60), &cfg).unwrap();
            let fit = fit_expansion(&traj, DEFAULT_WINDOW, true).unwrap();
            let o = obstruction(&chart, &[q]).unwrap()[0];
            assert!((o + eps / 2.0).abs() < 1e-12);
            assert!((fit.o_fit[0] - o).abs() < 1e-4, "eps {eps}, q {q}: {} vs {o}", fit.o_fit[0]);
        }
    }
}

#[test]
fn fit_needs_a_boundary_sample() {
    let mut traj = synthetic(&window_taus(40), |t| t * t);
    traj.samples.remove(0);
    assert!(matches!(fit_expansion(&traj, DEFAULT_WINDOW, false), Err(Error::Domain(_))));
}

#[test]
fn ah_detection() {
    for chart in [make_hyperbolic_chart(), make_warped_ah_chart()] {
        let grid = boundary_grid(&chart, 9);
        let rep = is_asymptotically_hyperbolic(&chart, &grid, 1e-10).unwrap();
        assert!(rep.is_ah, "{}: sup {}", chart.id(), rep.sup_obstruction);
    }
    let chart = make_epsilon_chart(&EpsilonFamily::new(1.0)).unwrap();
    let rep = is_asymptotically_hyperbolic(&chart, &boundary_grid(&chart, 9), 1e-10).unwrap();
    assert!(!rep.is_ah);
    assert!((rep.sup_obstruction - 0.5).abs() < 1e-12);
    assert!(is_asymptotically_hyperbolic(&chart, &[], 1e-10).is_err());
}

#[test]
fn boundary_grid_covers_the_box() {
    let chart = make_hyperbolic_chart();
    let g = boundary_grid(&chart, 5);
    assert_eq!(g.len(), 5);
    assert_eq!(g[0], vec![-2.0]);
    assert_eq!(g[4], vec![2.0]);
}

struct Linear(f64);

impl OdeSystem for Linear {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _s: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy[0] = self.0 * y[0];
        dy[1] = self.0 * y[1];
        Ok(())
    }
}

#[test]
fn linear_flow_stretches_by_exponential() {
    let pairs = vec![
        (vec![1.0, 0.0], vec![1.1, 0.2]),
        (vec![0.0, 0.0], vec![0.0, 0.0]),
        (vec![-3.0, 2.0], vec![-2.0, 2.5]),
    ];
    let rep = flow_lipschitz_check_system(&Linear(1.0), 0.0, 0.9, &pairs, &IntegratorConfig::default()).unwrap();
    assert!((rep.ratios[0] - 0.9f64.exp()).abs() < 1e-8);
    assert_eq!(rep.ratios[1], 1.0);
    assert!(rep.bound_ok);
    assert!((rep.margin - (std::f64::consts::E - 0.9f64.exp())).abs() < 1e-8);
    let rep = flow_lipschitz_check_system(&Linear(1.0), 0.0, 1.1, &pairs, &IntegratorConfig::default()).unwrap();
    assert!(!rep.bound_ok);
}

#[test]
fn lipschitz_estimate_of_linear_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let c = estimate_lipschitz_constant(&Linear(2.0), |_| (0.0, vec![0.5, -0.5]), 10, 1e-3, &mut rng).unwrap();
    assert!((c - 2.0).abs() < 1e-9);
}

#[test]
fn boundary_flow_is_lipschitz_near_the_boundary() {
    let chart = make_epsilon_chart(&EpsilonFamily::new(1.0)).unwrap();
    let base = vec![0.0, 1.0, 0.5];
    let pairs: Vec<_> = (0..5)
        .map(|i| {
            let mut b = base.clone();
            b[i % 3] += 1e-3;
            (base.clone(), b)
        })
        .collect();
    let rep = flow_lipschitz_check(&chart, -0.01, 0.005, &pairs, &IntegratorConfig::default()).unwrap();
    assert!(rep.bound_ok, "max ratio {}", rep.max_ratio);
    assert!(flow_lipschitz_check(&chart, -0.01, 0.5, &pairs, &IntegratorConfig::default()).is_err());
}

#[test]
fn normal_ray_jacobian_has_closed_form() {
    let chart = make_hyperbolic_chart();
    let base = TauState {
        tau: 0.0,
        x: vec![0.0],
        w0: 1.0,
        w: vec![0.0],
    };
    let cfg = IntegratorConfig::default();
    for (t0, t1) in [(-0.5, 0.0), (-0.6, -0.2)] {
        let rep = flow_c1_check(&chart, t0, t1, &base, &cfg).unwrap();
        let want = [[1.0, 0.0, (t0 * t0 - t1 * t1) / 2.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((rep.variational_jacobian[i][j] - want[i][j]).abs() < 1e-6, "({i},{j})");
                assert!((rep.fd_jacobians[2][i][j] - want[i][j]).abs() < 1e-6, "({i},{j})");
            }
        }
        assert!(rep.max_discrepancy < 1e-6);
    }
    assert!(flow_c1_check(&chart, -0.2, -0.5, &base, &cfg).is_err());
}

#[test]
fn obstructed_flow_is_c1_up_to_the_boundary() {
    let chart = make_epsilon_chart(&EpsilonFamily::new(1.0)).unwrap();
    let traj = boundary_shoot(&chart, &[0.0], &[0.3], -0.3, &IntegratorConfig::default()).unwrap();
    let start = traj.tau_state(traj.len() - 1);
    let rep = flow_c1_check(&chart, -0.3, 0.0, &start, &IntegratorConfig::default()).unwrap();
    assert!(rep.max_discrepancy < 1e-6, "discrepancy {}", rep.max_discrepancy);
    assert!(rep.observed_order > 1.5, "order {}", rep.observed_order);
}
