//! Helix angles, helix checks over grids and the search for independent
//! helix directions.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::connection::{InducedField, TangentField, VectorField};
use crate::error::{Error, Result};
use crate::linalg;
use crate::manifold::{Grid, Immersion, LocalGeometry};

/// Parts shorter than this are reported absent.
pub const PART_FLOOR: f64 = 1e-10;
/// Allowed deviation of `‖d‖` from 1.
pub const UNIT_TOL: f64 = 1e-10;
/// Relative singular value threshold for direction independence.
pub const RANK_TOL: f64 = 1e-8;

/// `d = cos θ · T + sin θ · ξ` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct HelixDecomposition {
    pub theta: f64,
    pub tangent: Option<DVector<f64>>,
    pub normal: Option<DVector<f64>>,
    pub tangential_norm: f64,
}

impl HelixDecomposition {
    /// True when both parts exist, i.e. `0 < θ < π/2`.
    pub fn is_proper(&self) -> bool {
        self.tangent.is_some() && self.normal.is_some()
    }

    pub fn reconstruct(&self) -> Option<DVector<f64>> {
        let n = self.tangent.as_ref().or(self.normal.as_ref())?.len();
        let mut d = DVector::zeros(n);
        if let Some(t) = &self.tangent {
            d += t * self.theta.cos();
        }
        if let Some(x) = &self.normal {
            d += x * self.theta.sin();
        }
        Some(d)
    }
}

fn check_unit(d: &DVector<f64>) -> Result<()> {
    let norm = d.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit { norm });
    }
    Ok(())
}

pub fn decompose_at(geo: &LocalGeometry, d: &DVector<f64>) -> Result<HelixDecomposition> {
    if d.len() != geo.frame.n() {
        return Err(Error::DimensionMismatch {
            expected: geo.frame.n(),
            got: d.len(),
        });
    }
    check_unit(d)?;
    let (t, x) = geo.frame.project(d);
    let (tn, xn) = (t.norm(), x.norm());
    // atan2 keeps full accuracy at both ends, where arccos of the
    // tangential norm loses half the digits.
    let theta = xn.atan2(tn).clamp(0.0, std::f64::consts::FRAC_PI_2);
    Ok(HelixDecomposition {
        theta,
        tangent: (tn >= PART_FLOOR).then(|| t / tn),
        normal: (xn >= PART_FLOOR).then(|| x / xn),
        tangential_norm: tn.min(1.0),
    })
}

pub fn decompose_direction(immersion: &Immersion, u: &[f64], d: &DVector<f64>) -> Result<HelixDecomposition> {
    decompose_at(&immersion.local(u)?, d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HelixVerdict {
    pub is_helix: bool,
    pub theta_mean: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_spread: f64,
    pub grid_size: usize,
    pub skipped: usize,
    pub tolerance: f64,
}

fn is_pointwise_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::RankDeficient { .. } | Error::OutOfDomain { .. } | Error::Eval(_)
    )
}

/// Local geometry at every grid point where the immersion is regular.
pub fn regular_points(immersion: &Immersion, grid: &Grid) -> Result<(Vec<LocalGeometry>, usize)> {
    let mut out = Vec::with_capacity(grid.len());
    let mut skipped = 0;
    for u in &grid.points {
        match immersion.local(u.as_slice()) {
            Ok(g) => out.push(g),
            Err(e) if is_pointwise_failure(&e) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(Error::AllSingular);
    }
    Ok((out, skipped))
}

/// Tests whether the angle between `d` and the tangent spaces is constant
/// over `grid` (spread of θ at most `tol`).
pub fn check_helix(immersion: &Immersion, d: &DVector<f64>, grid: &Grid, tol: f64) -> Result<HelixVerdict> {
    let (geos, skipped) = regular_points(immersion, grid)?;
    if geos.len() < 4 {
        return Err(Error::TooFewSamples {
            needed: 4,
            got: geos.len(),
        });
    }
    let thetas = geos
        .iter()
        .map(|g| decompose_at(g, d).map(|h| h.theta))
        .collect::<Result<Vec<_>>>()?;
    let min = thetas.iter().copied().fold(f64::INFINITY, f64::min);
    let max = thetas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Offsets from the minimum keep the mean inside [min, max] under rounding.
    let mean = (min + thetas.iter().map(|t| t - min).sum::<f64>() / thetas.len() as f64).min(max);
    let spread = max - min;
    Ok(HelixVerdict {
        is_helix: spread <= tol,
        theta_mean: mean,
        theta_min: min,
        theta_max: max,
        theta_spread: spread,
        grid_size: geos.len(),
        skipped,
        tolerance: tol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// A direction is accepted when the variance of ‖P d‖² is below `tol²`.
    pub tol: f64,
    /// Random starts per round, in addition to the ambient basis vectors.
    pub max_starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            tol: 1e-6,
            max_starts: 8,
            seed: 42,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakHelixResult {
    pub directions: Vec<DVector<f64>>,
    pub thetas: Vec<f64>,
    pub independence_rank: usize,
    /// Final objective value for each returned direction.
    pub variances: Vec<f64>,
}

impl WeakHelixResult {
    pub fn r(&self) -> usize {
        self.directions.len()
    }
}

/// Variance over the grid of `g_q(y) = yᵀ B_q y`.
struct Objective {
    blocks: Vec<DMatrix<f64>>,
}

impl Objective {
    fn values(&self, y: &DVector<f64>) -> Vec<f64> {
        self.blocks.iter().map(|b| y.dot(&(b * y))).collect()
    }

    fn variance(&self, y: &DVector<f64>) -> f64 {
        let g = self.values(y);
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        g.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / g.len() as f64
    }

    /// Damped Gauss-Newton on the residuals `g_q − ḡ`, constrained to the
    /// unit sphere, with step halving.
    fn minimize(&self, start: DVector<f64>, opts: &SearchOptions) -> (DVector<f64>, f64) {
        let k = start.len();
        let count = self.blocks.len() as f64;
        let mut y = start.normalize();
        let mut f = self.variance(&y);
        for _ in 0..opts.max_iterations {
            if f == 0.0 {
                break;
            }
            let g = self.values(&y);
            let mean = g.iter().sum::<f64>() / count;
            let grads: Vec<DVector<f64>> = self.blocks.iter().map(|b| b * &y * 2.0).collect();
            let mean_grad = grads.iter().fold(DVector::zeros(k), |a, x| a + x) / count;
            let radial = DMatrix::identity(k, k) - &y * y.transpose();
            let mut jtj = DMatrix::zeros(k, k);
            let mut jtr = DVector::zeros(k);
            for (gq, dq) in g.iter().zip(&grads) {
                let row = &radial * (dq - &mean_grad);
                jtj += &row * row.transpose();
                jtr += &row * (gq - mean);
            }
            let damping = 1e-12 * jtj.diagonal().max().max(1e-300) + 1e-300;
            jtj += DMatrix::identity(k, k) * damping;
            let Some(step) = jtj.cholesky().map(|c| c.solve(&(-jtr))) else {
                break;
            };
            let mut alpha = 1.0;
            let mut improved = false;
            while alpha * step.norm() > 1e-14 {
                let cand = (&y + &step * alpha).normalize();
                let fc = self.variance(&cand);
                if fc < f {
                    let moved = (&cand - &y).norm();
                    y = cand;
                    f = fc;
                    improved = moved > 1e-12;
                    break;
                }
                alpha *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (y, f)
    }
}

fn canonical_sign(mut d: DVector<f64>) -> DVector<f64> {
    if let Some(first) = d.iter().copied().find(|x| x.abs() > 1e-9) {
        if first < 0.0 {
            d = -d;
        }
    }
    d
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Searches for linearly independent helix directions.
///
/// Each round runs a local descent of the variance of `‖P(q) d‖²` over the
/// unit sphere of the orthogonal complement of the directions already
/// found, from every projected ambient basis vector plus
/// `opts.max_starts` random points. The best accepted candidate (lowest
/// variance, then lexicographic) is kept and the next round excludes it.
/// Helix directions that are independent but not orthogonal to earlier ones
/// are not reported.
pub fn find_helix_directions(immersion: &Immersion, grid: &Grid, opts: &SearchOptions) -> Result<WeakHelixResult> {
    let (geos, _) = regular_points(immersion, grid)?;
    let n = immersion.n();
    let projectors: Vec<DMatrix<f64>> = geos.iter().map(|g| g.frame.tangent_projector()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut found: Vec<DVector<f64>> = Vec::new();
    let mut variances = Vec::new();
    let accept = opts.tol * opts.tol;

    while found.len() < n {
        let complement = if found.is_empty() {
            DMatrix::identity(n, n)
        } else {
            let q = linalg::gram_schmidt(&DMatrix::from_columns(&found), 1e-12)
                .expect("found directions are independent");
            linalg::orthonormal_complement(&q, 1e-8)
        };
        let k = complement.ncols();
        if k == 0 {
            break;
        }
        let objective = Objective {
            blocks: projectors
                .iter()
                .map(|p| complement.transpose() * p * &complement)
                .collect(),
        };
        let mut starts: Vec<DVector<f64>> = (0..n)
            .filter_map(|i| {
                let y = complement.row(i).transpose();
                (y.norm() > 1e-8).then(|| y.normalize())
            })
            .collect();
        for _ in 0..opts.max_starts {
            let y = DVector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
            if y.norm() > 1e-8 {
                starts.push(y);
            }
        }
        let mut candidates: Vec<(f64, DVector<f64>)> = starts
            .into_iter()
            .map(|s| objective.minimize(s, opts))
            .filter(|(_, f)| *f < accept)
            .map(|(y, f)| (f, canonical_sign((&complement * y).normalize())))
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex_cmp(&a.1, &b.1)));
        match candidates.into_iter().next() {
            Some((f, d)) => {
                found.push(d);
                variances.push(f);
            }
            None => break,
        }
    }

    let thetas = found
        .iter()
        .map(|d| {
            let sum = geos
                .iter()
                .map(|g| decompose_at(g, d).map(|h| h.theta))
                .sum::<Result<f64>>()?;
            Ok(sum / geos.len() as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let independence_rank = if found.is_empty() {
        0
    } else {
        linalg::numerical_rank(&DMatrix::from_columns(&found), RANK_TOL)
    };
    Ok(WeakHelixResult {
        directions: found,
        thetas,
        independence_rank,
        variances,
    })
}

/// Residual norms of the two equations satisfied by a helix direction:
/// `cos θ ∇_X T − sin θ A^ξ(X) = 0` and `cos θ V(X, T) + sin θ ∇⊥_X ξ = 0`.
pub fn helix_system_residual_at(geo: &LocalGeometry, d: &DVector<f64>, x: &DVector<f64>) -> Result<(f64, f64)> {
    let dec = decompose_at(geo, d)?;
    if !dec.is_proper() {
        return Err(Error::Degenerate(format!(
            "helix angle {} is at an endpoint of (0, π/2)",
            dec.theta
        )));
    }
    let (c, s) = (dec.theta.cos(), dec.theta.sin());
    let dt = InducedField::tangent_of(d).derivative(geo, x)?;
    let dxi = InducedField::normal_of(d).derivative(geo, x)?;
    let (nabla_t, v_xt) = geo.frame.project(&dt);
    let (tang_dxi, nabla_perp) = geo.frame.project(&dxi);
    let shape = -tang_dxi;
    let r1 = (nabla_t * c - shape * s).norm();
    let r2 = (v_xt * c + nabla_perp * s).norm();
    Ok((r1, r2))
}

pub fn helix_system_residual(immersion: &Immersion, u: &[f64], d: &DVector<f64>, x: &TangentField) -> Result<(f64, f64)> {
    let geo = immersion.local(u)?;
    let xc = x.chart_at(&geo)?;
    helix_system_residual_at(&geo, d, &xc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn cylinder() -> Immersion {
        Immersion::parse("cylinder", &["cos(u1)", "sin(u1)", "u2"], vec![(-3.0, 3.0), (-2.0, 2.0)]).unwrap()
    }

    fn cone() -> Immersion {
        Immersion::parse("cone", &["u2*cos(u1)", "u2*sin(u1)", "u2"], vec![(-3.0, 3.0), (0.2, 3.0)]).unwrap()
    }

    fn sphere() -> Immersion {
        Immersion::parse(
            "sphere",
            &["cos(u1)*sin(u2)", "sin(u1)*sin(u2)", "cos(u2)"],
            vec![(-3.0, 3.0), (0.3, 2.8)],
        )
        .unwrap()
    }

    fn plane() -> Immersion {
        Immersion::parse("plane", &["u1", "u2", "0"], vec![(-2.0, 2.0), (-2.0, 2.0)]).unwrap()
    }

    #[test]
    fn cylinder_axis_is_tangent() {
        let h = decompose_direction(&cylinder(), &[0.3, 0.1], &v(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(h.theta, 0.0);
        assert_abs_diff_eq!(h.tangent.unwrap(), v(&[0.0, 0.0, 1.0]), epsilon = 1e-15);
        assert!(h.normal.is_none());
    }

    #[test]
    fn cylinder_radial_is_normal() {
        let h = decompose_direction(&cylinder(), &[0.0, 0.0], &v(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(h.theta, FRAC_PI_2);
        assert!(h.tangent.is_none());
        assert_abs_diff_eq!(h.normal.unwrap(), v(&[1.0, 0.0, 0.0]), epsilon = 1e-15);
    }

    #[test]
    fn cone_axis_angle() {
        let u = 0.8_f64;
        let h = decompose_direction(&cone(), &[u, 1.7], &v(&[0.0, 0.0, 1.0])).unwrap();
        assert_abs_diff_eq!(h.theta, FRAC_PI_4, epsilon = 1e-15);
        let meridian = v(&[u.cos(), u.sin(), 1.0]) / SQRT_2;
        assert_abs_diff_eq!(h.tangent.clone().unwrap(), meridian, epsilon = 1e-14);
        assert_abs_diff_eq!(h.reconstruct().unwrap(), v(&[0.0, 0.0, 1.0]), epsilon = 1e-14);
    }

    #[test]
    fn non_unit_direction_rejected() {
        let err = decompose_direction(&cone(), &[0.0, 1.0], &v(&[0.0, 0.0, 2.0])).unwrap_err();
        assert!(matches!(err, Error::NotUnit { .. }));
    }

    #[test]
    fn helix_checks() {
        let cone = cone();
        let grid = Grid::uniform(cone.domain(), 20);
        let verdict = check_helix(&cone, &v(&[0.0, 0.0, 1.0]), &grid, 1e-8).unwrap();
        assert!(verdict.is_helix);
        assert_eq!(verdict.grid_size, 400);
        assert_abs_diff_eq!(verdict.theta_mean, FRAC_PI_4, epsilon = 1e-12);
        assert!(verdict.theta_spread < 1e-10);

        let s = sphere();
        let verdict = check_helix(&s, &v(&[0.0, 0.0, 1.0]), &Grid::uniform(s.domain(), 20), 1e-8).unwrap();
        assert!(!verdict.is_helix);
        assert!(verdict.theta_spread > 1.0);

        let p = plane();
        let d = v(&[1.0, 2.0, 2.0]) / 3.0;
        assert!(check_helix(&p, &d, &Grid::uniform(p.domain(), 5), 1e-8).unwrap().is_helix);
    }

    #[test]
    fn check_helix_needs_regular_points() {
        let cone = cone();
        let apex = Grid { points: vec![v(&[0.0, 0.0]); 5] };
        assert!(matches!(
            check_helix(&cone, &v(&[0.0, 0.0, 1.0]), &apex, 1e-8),
            Err(Error::AllSingular)
        ));
        let mut few = apex.clone();
        few.points[0] = v(&[0.0, 1.0]);
        assert!(matches!(
            check_helix(&cone, &v(&[0.0, 0.0, 1.0]), &few, 1e-8),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn search_on_plane_returns_basis() {
        let p = plane();
        let r = find_helix_directions(&p, &Grid::uniform(p.domain(), 6), &SearchOptions::default()).unwrap();
        assert_eq!(r.r(), 3);
        assert_eq!(r.independence_rank, 3);
    }

    #[test]
    fn search_on_sphere_is_empty() {
        let s = sphere();
        let r = find_helix_directions(&s, &Grid::uniform(s.domain(), 12), &SearchOptions::default()).unwrap();
        assert_eq!(r.r(), 0);
        assert_eq!(r.independence_rank, 0);
    }

    #[test]
    fn search_on_cone_finds_axis() {
        let c = cone();
        let r = find_helix_directions(&c, &Grid::uniform(c.domain(), 12), &SearchOptions::default()).unwrap();
        assert_eq!(r.r(), 1);
        assert_abs_diff_eq!(r.directions[0][2].abs(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.thetas[0], FRAC_PI_4, epsilon = 1e-9);
    }

    #[test]
    fn helix_system_on_cone() {
        let c = cone();
        let d = v(&[0.0, 0.0, 1.0]);
        for x in [TangentField::coordinate(0, 2), TangentField::coordinate(1, 2)] {
            let (r1, r2) = helix_system_residual(&c, &[0.5, 1.4], &d, &x).unwrap();
            assert!(r1 < 1e-12 && r2 < 1e-12, "{r1} {r2}");
        }
    }

    #[test]
    fn helix_system_fails_on_sphere() {
        // cos θ = sin v for d = e3; along the unit field ∂v the residuals are
        // |cos v| (tangential) and |sin v| (normal).
        let (r1, r2) = helix_system_residual(
            &sphere(),
            &[0.3, 1.0],
            &v(&[0.0, 0.0, 1.0]),
            &TangentField::coordinate(1, 2),
        )
        .unwrap();
        assert_abs_diff_eq!(r1, 1f64.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(r2, 1f64.sin(), epsilon = 1e-12);
    }

    #[test]
    fn helix_system_rejects_degenerate_angle() {
        let err = helix_system_residual(
            &cylinder(),
            &[0.0, 0.0],
            &v(&[0.0, 0.0, 1.0]),
            &TangentField::coordinate(0, 2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }
}
