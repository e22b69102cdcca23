//! Lipschitz and C¹ behaviour of the boundary flow for ρ = y·e^{x}: displacement
//! ratios over a short interval ending at τ = 0, and the flow Jacobian from divided
//! differences against the variational equations.

use conformal_geodesics::asymptotics::{flow_c1_check, flow_lipschitz_check};
use conformal_geodesics::integrate::IntegratorConfig;
use conformal_geodesics::models::{make_epsilon_chart, EpsilonFamily};
use conformal_geodesics::shoot::boundary_shoot;

fn main() -> conformal_geodesics::Result<()> {
    let chart = make_epsilon_chart(&EpsilonFamily::new(1.0))?;
    let cfg = IntegratorConfig::default();

    let base = vec![0.0, 1.0, 0.5];
    let pairs: Vec<_> = (0..3)
        .map(|i| {
            let mut b = base.clone();
            b[i] += 1e-4;
            (base.clone(), b)
        })
        .collect();
    let lip = flow_lipschitz_check(&chart, -0.05, 0.05, &pairs, &cfg)?;
    println!("displacement ratios {:?}", lip.ratios);
    println!("max ratio {:.6}, below e: {}", lip.max_ratio, lip.bound_ok);

    let traj = boundary_shoot(&chart, &[0.0], &[0.3], -0.3, &cfg)?;
    let start = traj.tau_state(traj.len() - 1);
    let c1 = flow_c1_check(&chart, -0.3, 0.0, &start, &cfg)?;
    println!("variational Jacobian:");
    for row in &c1.variational_jacobian {
        println!("  {row:>12.8?}");
    }
    println!("successive differences {:?}", c1.successive_diffs);
    println!("observed order {:.2}, discrepancy {:.2e}", c1.observed_order, c1.max_discrepancy);
    Ok(())
}
