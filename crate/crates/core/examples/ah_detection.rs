//! Classifies the built-in charts as asymptotically hyperbolic or not from the
//! supremum of the obstruction over a boundary grid.

use conformal_geodesics::asymptotics::{boundary_grid, is_asymptotically_hyperbolic};
use conformal_geodesics::models::{make_epsilon_chart, make_hyperbolic_chart, make_warped_ah_chart, EpsilonFamily};

fn main() -> conformal_geodesics::Result<()> {
    let charts = [
        make_hyperbolic_chart(),
        make_warped_ah_chart(),
        make_epsilon_chart(&EpsilonFamily::new(0.5))?,
        make_epsilon_chart(&EpsilonFamily::new(1.0))?,
    ];
    for chart in &charts {
        let rep = is_asymptotically_hyperbolic(chart, &boundary_grid(chart, 21), 1e-10)?;
        println!("{:<12} sup|O| = {:.3e}  AH: {}", chart.id(), rep.sup_obstruction, rep.is_ah);
    }
    Ok(())
}
