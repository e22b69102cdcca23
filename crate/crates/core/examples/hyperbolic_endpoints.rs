//! Shoots geodesics of the hyperbolic half-plane from (x, y) = (0, 1) and compares
//! the boundary endpoints with tan(θ/2).

use conformal_geodesics::integrate::IntegratorConfig;
use conformal_geodesics::models::{hyperbolic_endpoint_oracle, make_hyperbolic_chart};
use conformal_geodesics::shoot::endpoint_from_angles;

fn main() -> conformal_geodesics::Result<()> {
    let chart = make_hyperbolic_chart();
    let cfg = IntegratorConfig::default();
    println!("{:>8} {:>14} {:>14} {:>10}", "theta", "endpoint", "tan(theta/2)", "error");
    for k in -4..=4 {
        let theta = k as f64 * std::f64::consts::PI / 10.0;
        let got = endpoint_from_angles(&chart, &[-1.0, 0.0], &[theta], &cfg)?[0];
        let want = hyperbolic_endpoint_oracle(0.0, 1.0, theta);
        println!("{theta:>8.4} {got:>14.10} {want:>14.10} {:>10.2e}", (got - want).abs());
    }
    Ok(())
}
