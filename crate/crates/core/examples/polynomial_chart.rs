//! Builds a chart from a JSON document with polynomial ρ and h, validates it and
//! shoots a geodesic to its boundary.

use conformal_geodesics::chart::ChartSpec;
use conformal_geodesics::integrate::IntegratorConfig;
use conformal_geodesics::shoot::{direction_from_angles, endpoint_map};

// ρ = −x⁰(1 + x¹/4), h = diag((1 + x⁰)², 1) in three dimensions
const DOC: &str = r#"{
  "type": "polynomial", "dim": 3, "delta": 0.5, "x_box": [[-1, 1], [-1, 1]],
  "rho": [[-1.0, [1, 0, 0]], [-0.25, [1, 1, 0]]],
  "h": [[[[1.0, [0, 0, 0]], [2.0, [1, 0, 0]], [1.0, [2, 0, 0]]], []],
        [[], [[1.0, [0, 0, 0]]]]]
}"#;

fn main() -> conformal_geodesics::Result<()> {
    let chart = ChartSpec::parse(DOC)?.build()?;
    let report = chart.validate(6);
    println!("{}: integrity ok = {}", chart.id(), report.is_ok());
    let bd = chart.boundary_data(&[0.2, -0.4])?;
    println!("kappa {:.6}, obstruction {:?}", bd.kappa, bd.obstruction().as_slice());

    let p = [-0.4, 0.0, 0.0];
    let v = direction_from_angles(&chart, &p, &[0.3, -0.2])?;
    let shot = endpoint_map(&chart, &p, &v, &IntegratorConfig::default())?;
    println!("endpoint {:?}", shot.endpoint);
    for (k, val) in &shot.diagnostics {
        println!("  {k:<16} {val:.3e}");
    }
    Ok(())
}
