//! Runs the invariant battery on one chart (default `epsilon:0.5`) and prints the
//! table. Pass a chart spec as the first argument to choose another.

use conformal_geodesics::chart::ChartSpec;
use conformal_geodesics::check::{run_checks, CheckOptions};

fn main() -> conformal_geodesics::Result<()> {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "epsilon:0.5".into());
    let chart = ChartSpec::parse(&spec)?.build()?;
    let report = run_checks(Some(vec![chart]), &CheckOptions::default())?;
    print!("{}", report.table());
    println!("all passed: {}", report.all_passed());
    Ok(())
}
