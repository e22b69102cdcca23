//! Recovers the log-term coefficient of boundary geodesics in ρ = y·e^{εx} by a
//! least-squares fit and compares it with the obstruction −ε/2.

use conformal_geodesics::asymptotics::{fit_expansion, obstruction};
use conformal_geodesics::integrate::IntegratorConfig;
use conformal_geodesics::models::{geometric_grid, make_epsilon_chart, EpsilonFamily};
use conformal_geodesics::shoot::boundary_shoot_with_outputs;

fn main() -> conformal_geodesics::Result<()> {
    let cfg = IntegratorConfig::default();
    let outputs: Vec<f64> = geometric_grid(1e-2, 1e-3, 60).into_iter().map(|t| -t).collect();
    println!("{:>5} {:>6} {:>12} {:>12} {:>10}", "eps", "u", "O", "O_fit", "u_fit");
    for eps in [0.0, 0.25, 0.5, 1.0] {
        let chart = make_epsilon_chart(&EpsilonFamily::new(eps))?;
        let o = obstruction(&chart, &[0.0])?[0];
        for u in [-0.5, 0.0, 0.5] {
            let traj = boundary_shoot_with_outputs(&chart, &[0.0], &[u], -0.05, &outputs, &cfg)?;
            let fit = fit_expansion(&traj, (1e-3, 1e-2), true)?;
            println!("{eps:>5.2} {u:>6.2} {o:>12.8} {:>12.8} {:>10.6}", fit.o_fit[0], fit.u_fit[0]);
        }
    }
    Ok(())
}
