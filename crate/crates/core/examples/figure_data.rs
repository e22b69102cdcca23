//! Writes the CSV data behind the three figures into a directory (default
//! `figures/`) and prints one summary line per curve.

use std::path::PathBuf;

use conformal_geodesics::models::{figure_data, FigureOptions};

fn main() -> conformal_geodesics::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&out)?;
    let opts = FigureOptions::default();
    let eps = [0.0, 0.5, 1.0];
    for id in 1..=3 {
        for c in figure_data(id, &eps, &out, &opts)? {
            let end = c.endpoint.map_or("-".to_string(), |e| format!("{e:.6}"));
            println!(
                "fig {} eps {:.2} {} {:>7.4}: {:>4} points, endpoint {end}, {} -> {}",
                c.figure,
                c.epsilon,
                c.kind,
                c.value,
                c.points.len(),
                c.termination,
                c.file.display()
            );
        }
    }
    Ok(())
}
