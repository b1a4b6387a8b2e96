//! Built-in immersions with closed-form ground truth.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::manifold::Immersion;

#[derive(Debug, Clone, PartialEq)]
pub struct KnownDirection {
    pub direction: DVector<f64>,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub immersion: Immersion,
    pub directions: Vec<KnownDirection>,
    pub second_normal_dim: usize,
    pub full: bool,
    pub notes: &'static str,
}

struct Spec {
    name: &'static str,
    components: &'static [&'static str],
    domain: &'static [(f64, f64)],
    directions: &'static [(&'static [f64], f64)],
    second_normal_dim: usize,
    full: bool,
    notes: &'static str,
}

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

const ENTRIES: &[Spec] = &[
    Spec {
        name: "plane",
        components: &["u1", "u2", "0"],
        domain: &[(-2.0, 2.0), (-2.0, 2.0)],
        directions: &[(&[1.0, 0.0, 0.0], 0.0), (&[0.0, 0.0, 1.0], FRAC_PI_2)],
        second_normal_dim: 1,
        full: false,
        notes: "Helix for every direction d, with cos θ the length of the horizontal part of d. A^ξ = 0.",
    },
    Spec {
        name: "cylinder",
        components: &["cos(u1)", "sin(u1)", "u2"],
        domain: &[(-PI, PI), (-2.0, 2.0)],
        directions: &[(&[0.0, 0.0, 1.0], 0.0)],
        second_normal_dim: 0,
        full: true,
        notes: "Outward normal (cos u, sin u, 0) is orthogonal to the axis, so θ = 0. Principal curvatures -1 and 0.",
    },
    Spec {
        name: "cone",
        components: &["u2*cos(u1)", "u2*sin(u1)", "u2"],
        domain: &[(-PI, PI), (0.2, 3.0)],
        directions: &[(&[0.0, 0.0, 1.0], FRAC_PI_4)],
        second_normal_dim: 0,
        full: true,
        notes: "Unit normal (cos u, sin u, -1)/√2 gives ⟨e3, ξ⟩ = -1/√2, so θ = π/4. Helix lines are the rulings.",
    },
    Spec {
        name: "helix-curve",
        components: &["cos(u1)", "sin(u1)", "u1"],
        domain: &[(-PI, PI)],
        directions: &[(&[0.0, 0.0, 1.0], FRAC_PI_4)],
        second_normal_dim: 1,
        full: true,
        notes: "Unit tangent (-sin t, cos t, 1)/√2 has constant slope 1/√2 against e3. The binormal spans the second normal space.",
    },
    Spec {
        name: "helix-cylinder-4d",
        components: &["cos(u1)", "sin(u1)", "u1", "u2"],
        domain: &[(-PI, PI), (-2.0, 2.0)],
        directions: &[(&[0.0, 0.0, 1.0, 0.0], FRAC_PI_4), (&[0.0, 0.0, H, H], FRAC_PI_6)],
        second_normal_dim: 1,
        full: true,
        notes: "Tangent columns (-sin t, cos t, 1, 0) and e4. Projections give cos θ = 1/√2 for e3 and √3/2 for (e3+e4)/√2. Helix lines of e3 have k = 1/2.",
    },
    Spec {
        name: "circle-cylinder-4d",
        components: &["cos(u1)", "sin(u1)", "u2", "0"],
        domain: &[(-PI, PI), (-2.0, 2.0)],
        directions: &[
            (&[0.0, 0.0, 1.0, 0.0], 0.0),
            (&[0.0, 0.0, 0.0, 1.0], FRAC_PI_2),
            (&[0.0, 0.0, H, H], FRAC_PI_4),
        ],
        second_normal_dim: 1,
        full: false,
        notes: "Lies in the hyperplane x4 = 0. The constant normal e4 has A^e4 = 0.",
    },
    Spec {
        name: "sphere",
        components: &["cos(u1)*sin(u2)", "sin(u1)*sin(u2)", "cos(u2)"],
        domain: &[(-PI, PI), (0.3, 2.8)],
        directions: &[],
        second_normal_dim: 0,
        full: true,
        notes: "Normal is the position vector, so ⟨d, p⟩ varies for every d. No helix direction.",
    },
];

pub fn list() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

pub fn get(name: &str) -> Result<CatalogEntry> {
    let spec = ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownManifold(name.to_string()))?;
    let immersion = Immersion::parse(spec.name, spec.components, spec.domain.to_vec())?;
    Ok(CatalogEntry {
        name: spec.name,
        immersion,
        directions: spec
            .directions
            .iter()
            .map(|&(d, theta)| KnownDirection {
                direction: DVector::from_column_slice(d),
                theta,
            })
            .collect(),
        second_normal_dim: spec.second_normal_dim,
        full: spec.full,
        notes: spec.notes,
    })
}

/// Convenience for `get(name)?.immersion`.
pub fn immersion(name: &str) -> Result<Immersion> {
    Ok(get(name)?.immersion)
}
