//! Finite-difference Jacobian of the boundary exponential map, checked against the
//! closed form ½·sec²(θ/2) on the hyperbolic chart and reported for ε = 1.

use conformal_geodesics::integrate::IntegratorConfig;
use conformal_geodesics::models::{hyperbolic_endpoint_derivative, make_epsilon_chart, EpsilonFamily};
use conformal_geodesics::shoot::{direction_from_angles, expmap_jacobian};

fn main() -> conformal_geodesics::Result<()> {
    let cfg = IntegratorConfig::default();
    let p = [-1.0, 0.0];
    for eps in [0.0, 1.0] {
        let chart = make_epsilon_chart(&EpsilonFamily::new(eps))?;
        println!("eps = {eps}");
        for theta in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let v = direction_from_angles(&chart, &p, &[theta])?;
            let rep = expmap_jacobian(&chart, &p, &v, &cfg, 1e-4)?;
            let exact = if eps == 0.0 {
                format!("{:.8}", hyperbolic_endpoint_derivative(1.0, theta))
            } else {
                "-".into()
            };
            println!(
                "  theta {theta:>5.2}  endpoint {:>11.8}  dE/ds {:>11.8}  exact {exact}",
                rep.endpoint[0], rep.matrix[0][0]
            );
        }
    }
    Ok(())
}
