//! Second fundamental form, shape operators and second normal spaces.

use nalgebra::DVector;
use weakhelix::{catalog, connection};

fn main() -> weakhelix::Result<()> {
    let cone = catalog::immersion("cone")?;
    let u = [0.0, 1.0];
    let xi = DVector::from_column_slice(&[1.0, 0.0, -1.0]) / 2f64.sqrt();
    let s = connection::shape_operator_matrix(&cone, &u, &xi)?;
    println!("cone shape operator for the unit normal at {u:?} (orthonormal tangent basis):{s:.9}");
    println!("eigenvalues {:?}\n", s.symmetric_eigenvalues().as_slice());

    for name in catalog::list() {
        let m = catalog::immersion(name)?;
        let mid: Vec<f64> = m.domain().bounds().iter().map(|&(a, b)| 0.4 * a + 0.6 * b).collect();
        let basis = connection::second_normal_space(&m, &mid)?;
        println!("{name:>20}: second normal space dimension {}", basis.len());
        for b in basis {
            println!("{:>22}{:.6}", "", b.transpose());
        }
    }
    Ok(())
}
