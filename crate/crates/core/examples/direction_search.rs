//! Search for independent helix directions on every catalog manifold.

use weakhelix::helix::{find_helix_directions, SearchOptions};
use weakhelix::{catalog, Grid};

fn main() -> weakhelix::Result<()> {
    let opts = SearchOptions::default();
    for name in catalog::list() {
        let m = catalog::immersion(name)?;
        let res = find_helix_directions(&m, &Grid::uniform(m.domain(), 20), &opts)?;
        println!("{name}: weak {}-helix", res.r());
        for (d, theta) in res.directions.iter().zip(&res.thetas) {
            let clean: Vec<f64> = d.iter().map(|x| if x.abs() < 1e-12 { 0.0 } else { *x }).collect();
            println!("    d = {clean:.6?}  θ = {theta:.9}");
        }
    }
    Ok(())
}
