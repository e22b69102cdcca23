//! Launches a geodesic from the boundary point q = 0 with prescribed second-order
//! data u and prints it as (y, x) pairs.

use conformal_geodesics::integrate::IntegratorConfig;
use conformal_geodesics::models::{make_epsilon_chart, EpsilonFamily};
use conformal_geodesics::shoot::boundary_shoot;

fn main() -> conformal_geodesics::Result<()> {
    let eps: f64 = std::env::args().nth(1).map_or(Ok(1.0), |s| s.parse()).expect("epsilon");
    let u: f64 = std::env::args().nth(2).map_or(Ok(0.0), |s| s.parse()).expect("u");
    let chart = make_epsilon_chart(&EpsilonFamily::new(eps))?;
    let traj = boundary_shoot(&chart, &[0.0], &[u], -0.5, &IntegratorConfig::default())?;
    println!("# eps {eps}, u {u}, termination {:?}, {} samples", traj.termination, traj.len());
    println!("y,x,w0,w");
    let stride = (traj.len() / 40).max(1);
    for s in traj.samples.iter().step_by(stride) {
        println!("{:.6e},{:.10},{:.10},{:.10}", 0.0 - s.param, s.state[0], s.state[1], s.state[2]);
    }
    Ok(())
}
