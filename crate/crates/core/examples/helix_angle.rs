//! Helix angles of every known catalog direction, and a negative control.

use nalgebra::DVector;
use weakhelix::{catalog, helix, Grid};

fn main() -> weakhelix::Result<()> {
    let start = std::time::Instant::now();
    for name in catalog::list() {
        let e = catalog::get(name)?;
        let m = &e.immersion;
        let grid = Grid::uniform(m.domain(), 20);
        for k in &e.directions {
            let v = helix::check_helix(m, &k.direction, &grid, 1e-9)?;
            println!(
                "{name:>20} d = {:?}: helix {} θ = {:.10} (expected {:.10}) spread {:.1e}",
                k.direction.as_slice(), v.is_helix, v.theta_mean, k.theta, v.theta_spread
            );
        }
    }
    let sphere = catalog::immersion("sphere")?;
    let v = helix::check_helix(&sphere, &DVector::from_column_slice(&[0.0, 0.0, 1.0]), &Grid::uniform(sphere.domain(), 20), 1e-6)?;
    println!("{:>20} d = [0, 0, 1]: helix {} θ ∈ [{:.4}, {:.4}]", "sphere", v.is_helix, v.theta_min, v.theta_max);
    println!("elapsed {:?}", start.elapsed());
    Ok(())
}
