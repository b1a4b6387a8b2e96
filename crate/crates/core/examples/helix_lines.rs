//! Integrate helix lines and compare their Frenet curvature with the
//! normal curvature ‖V(T, T)‖.

use nalgebra::DVector;
use weakhelix::connection::InducedField;
use weakhelix::{catalog, curves};

fn main() -> weakhelix::Result<()> {
    for (name, d, seed) in [
        ("cone", vec![0.0, 0.0, 1.0], [0.0, 1.0]),
        ("helix-cylinder-4d", vec![0.0, 0.0, 1.0, 0.0], [0.0, 0.0]),
        ("circle-cylinder-4d", vec![0.0, 0.0, 1.0, 1.0], [0.2, -0.5]),
    ] {
        let m = catalog::immersion(name)?;
        let d = DVector::from_vec(d).normalize();
        let c = curves::integral_curve(&m, &InducedField::tangent_of(&d), &seed, 2.0, 0.01)?;
        let fr = curves::frenet(&c)?;
        let nc = curves::normal_curvature(&m, &c)?;
        let last = c.samples.last().expect("non-empty curve");
        println!("{name}: {} samples, ends at p = {:.6?}", c.len(), last.p.as_slice());
        println!("  k ∈ [{:.6}, {:.6}]", fr.samples.iter().map(|s| s.k).fold(f64::INFINITY, f64::min), fr.max_curvature());
        println!("  ‖V(T,T)‖ ∈ [{:.6}, {:.6}]", nc.iter().copied().fold(f64::INFINITY, f64::min), nc.iter().copied().fold(0.0, f64::max));
        println!("  geodesic residual {:.2e}", curves::geodesic_residual(&m, &c)?);
        if name == "helix-cylinder-4d" {
            let mut out = Vec::new();
            c.write_csv(&fr, &mut out).expect("in-memory csv");
            let text = String::from_utf8(out).expect("utf-8");
            println!("  csv head:");
            for line in text.lines().take(3) {
                println!("    {line}");
            }
        }
    }
    Ok(())
}
