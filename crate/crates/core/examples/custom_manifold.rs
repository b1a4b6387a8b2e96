//! Load manifolds from files and analyze them like catalog entries.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;
use weakhelix::cli::parse_manifold_file;
use weakhelix::helix::{check_helix, find_helix_directions, SearchOptions};
use weakhelix::Grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");
    for file in ["steep_cone.mfd", "paraboloid.mfd"] {
        let path = format!("{dir}/{file}");
        let m = parse_manifold_file(file, &std::fs::read_to_string(&path)?)?;
        let grid = Grid::uniform(m.domain(), 20);
        let v = check_helix(&m, &DVector::from_column_slice(&[0.0, 0.0, 1.0]), &grid, 1e-8)?;
        println!("{}: helix w.r.t. e3: {} (θ = {:.10}, spread {:.1e})", m.name(), v.is_helix, v.theta_mean, v.theta_spread);
        let found = find_helix_directions(&m, &grid, &SearchOptions::default())?;
        println!("  search finds r = {}", found.r());
    }
    println!("expected steep-cone θ = {:.10}", FRAC_PI_2 - (2.0f64).atan());
    let broken = std::fs::read_to_string(format!("{dir}/broken.mfd"))?;
    if let Err(e) = parse_manifold_file("broken.mfd", &broken) {
        println!("diagnostic: {e}");
    }
    Ok(())
}
