//! Tangent and normal frames of catalog manifolds at a point.

use nalgebra::DVector;
use weakhelix::catalog;

fn main() -> weakhelix::Result<()> {
    for (name, u) in [("cone", [0.4, 1.0]), ("helix-cylinder-4d", [0.3, 0.5]), ("sphere", [1.0, 1.2])] {
        let m = catalog::immersion(name)?;
        let f = m.frame_at(&u)?;
        println!("{name} at u = {u:?}: p = {:.6?}", f.p.as_slice());
        println!("  tangent basis {:.6}", f.tangent_basis);
        println!("  normal basis  {:.6}", f.normal_basis);
        let w = DVector::from_iterator(m.n(), (1..=m.n()).map(|i| i as f64));
        let (t, nrm) = f.project(&w);
        println!("  w = {:?} splits into |tang| = {:.6}, |nor| = {:.6}, <tang, nor> = {:.1e}\n",
            w.as_slice(), t.norm(), nrm.norm(), t.dot(&nrm));
    }
    Ok(())
}
