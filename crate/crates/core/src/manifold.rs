//! Immersions `f: U ⊂ Rᵐ → Rⁿ`, their local frames and sampling grids.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{self, BinOp, Expr};
use crate::linalg;

/// Jacobians whose singular value ratio falls below this are singular.
pub const SINGULAR_RATIO: f64 = 1e-10;
/// Standard basis vectors with a smaller residual are dropped when completing
/// the normal basis.
pub const NORMAL_DROP_TOL: f64 = 1e-8;
/// Sample clouds whose smallest singular value ratio falls below this lie in
/// a hyperplane.
pub const FULLNESS_RATIO: f64 = 1e-8;

/// Open rectangular chart domain.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Domain {
    bounds: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Domain> {
        if bounds.is_empty() {
            return Err(Error::InvalidImmersion("domain has no axes".into()));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidImmersion(format!(
                    "domain axis {} has invalid bounds ({lo}, {hi})",
                    i + 1
                )));
            }
        }
        Ok(Domain { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim()
            && self
                .bounds
                .iter()
                .zip(u)
                .all(|(&(lo, hi), &x)| x > lo && x < hi)
    }

    /// Sub-box keeping the central `fraction` of every axis.
    pub fn shrink(&self, fraction: f64) -> Domain {
        let bounds = self
            .bounds
            .iter()
            .map(|&(lo, hi)| {
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo) * fraction;
                (mid - half, mid + half)
            })
            .collect();
        Domain { bounds }
    }
}

/// A finite set of chart points.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub points: Vec<DVector<f64>>,
}

impl Grid {
    /// Cell-centred tensor grid with `per_axis` points along every axis, so no
    /// point touches the (open) domain boundary.
    pub fn uniform(domain: &Domain, per_axis: usize) -> Grid {
        let m = domain.dim();
        let total = per_axis.pow(m as u32);
        let mut points = Vec::with_capacity(total);
        for mut flat in 0..total {
            let mut p = DVector::zeros(m);
            for (axis, &(lo, hi)) in domain.bounds().iter().enumerate() {
                let i = flat % per_axis;
                flat /= per_axis;
                p[axis] = lo + (hi - lo) * (i as f64 + 0.5) / per_axis as f64;
            }
            points.push(p);
        }
        Grid { points }
    }

    /// `count` uniformly random points in the domain, reproducible from `seed`.
    pub fn random(domain: &Domain, count: usize, seed: u64) -> Grid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..count)
            .map(|_| {
                DVector::from_iterator(
                    domain.dim(),
                    domain
                        .bounds()
                        .iter()
                        .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()),
                )
            })
            .collect();
        Grid { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A chart map given by `n` expressions in `m` variables over an open box.
#[derive(Debug, Clone, PartialEq)]
pub struct Immersion {
    name: String,
    m: usize,
    n: usize,
    components: Vec<Expr>,
    domain: Domain,
}

impl Immersion {
    pub fn new(name: impl Into<String>, m: usize, components: Vec<Expr>, domain: Domain) -> Result<Self> {
        let n = components.len();
        if m == 0 || n <= m {
            return Err(Error::InvalidImmersion(format!(
                "need n > m >= 1, got m = {m}, n = {n}"
            )));
        }
        if domain.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: domain.dim(),
            });
        }
        if let Some((i, c)) = components.iter().enumerate().find(|(_, c)| c.max_variable() > m) {
            return Err(Error::InvalidImmersion(format!(
                "component {} uses u{} but m = {m}",
                i + 1,
                c.max_variable()
            )));
        }
        Ok(Immersion {
            name: name.into(),
            m,
            n,
            components,
            domain,
        })
    }

    /// Builds an immersion from component source text; `m` is the number of
    /// domain axes.
    pub fn parse(name: impl Into<String>, components: &[&str], domain: Vec<(f64, f64)>) -> Result<Self> {
        let m = domain.len();
        let exprs = components
            .iter()
            .map(|c| expr::parse(c, m))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Immersion::new(name, m, exprs, Domain::new(domain)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn codim(&self) -> usize {
        self.n - self.m
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// The homothetic image `factor · f`.
    pub fn scaled(&self, factor: f64) -> Immersion {
        let components = self
            .components
            .iter()
            .map(|c| Expr::binary(BinOp::Mul, Expr::Const(factor), c.clone()))
            .collect();
        Immersion {
            name: format!("{}*{factor}", self.name),
            components,
            ..self.clone()
        }
    }

    fn check_dim(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: u.len(),
            });
        }
        Ok(())
    }

    pub fn point(&self, u: &[f64]) -> Result<DVector<f64>> {
        self.check_dim(u)?;
        let vals = self
            .components
            .iter()
            .map(|c| expr::eval(c, u))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// Point, frame and second derivatives at `u`.
    pub fn local(&self, u: &[f64]) -> Result<LocalGeometry> {
        self.check_dim(u)?;
        let (m, n) = (self.m, self.n);
        let mut p = DVector::zeros(n);
        let mut jacobian = DMatrix::zeros(n, m);
        let mut hessians = Vec::with_capacity(n);
        for (row, c) in self.components.iter().enumerate() {
            let j = expr::eval_jet2(c, u)?;
            p[row] = j.value;
            jacobian.row_mut(row).copy_from(&j.gradient.transpose());
            hessians.push(j.hessian);
        }
        let sv = linalg::singular_values(&jacobian);
        let ratio = if sv[0] > 0.0 { sv[m - 1] / sv[0] } else { 0.0 };
        if !(ratio >= SINGULAR_RATIO) {
            return Err(Error::RankDeficient { u: u.to_vec(), ratio });
        }
        if !self.domain.contains(u) {
            return Err(Error::OutOfDomain { u: u.to_vec() });
        }
        let tangent_basis = linalg::gram_schmidt(&jacobian, SINGULAR_RATIO).ok_or_else(|| {
            Error::RankDeficient {
                u: u.to_vec(),
                ratio,
            }
        })?;
        let normal_basis = linalg::orthonormal_complement(&tangent_basis, NORMAL_DROP_TOL);
        let metric = jacobian.transpose() * &jacobian;
        let metric_inverse = metric
            .clone()
            .cholesky()
            .ok_or_else(|| Error::RankDeficient {
                u: u.to_vec(),
                ratio,
            })?
            .inverse();
        Ok(LocalGeometry {
            frame: Frame {
                u: DVector::from_column_slice(u),
                p,
                jacobian,
                tangent_basis,
                normal_basis,
                metric,
                metric_inverse,
            },
            hessians,
        })
    }

    pub fn frame_at(&self, u: &[f64]) -> Result<Frame> {
        Ok(self.local(u)?.frame)
    }
}

/// First-order data of the immersion at one chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub u: DVector<f64>,
    pub p: DVector<f64>,
    pub jacobian: DMatrix<f64>,
    /// Orthonormal basis of the tangent space (n×m).
    pub tangent_basis: DMatrix<f64>,
    /// Orthonormal basis of the normal space (n×(n−m)).
    pub normal_basis: DMatrix<f64>,
    pub metric: DMatrix<f64>,
    metric_inverse: DMatrix<f64>,
}

impl Frame {
    pub fn m(&self) -> usize {
        self.jacobian.ncols()
    }

    pub fn n(&self) -> usize {
        self.jacobian.nrows()
    }

    pub fn metric_inverse(&self) -> &DMatrix<f64> {
        &self.metric_inverse
    }

    pub fn tangential(&self, w: &DVector<f64>) -> DVector<f64> {
        let q = &self.tangent_basis;
        q * (q.transpose() * w)
    }

    /// Splits `w` into tangential and normal parts; the parts sum to `w`.
    pub fn project(&self, w: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let t = self.tangential(w);
        let nrm = w - &t;
        (t, nrm)
    }

    pub fn normal(&self, w: &DVector<f64>) -> DVector<f64> {
        w - self.tangential(w)
    }

    /// Chart components `c` of a tangent vector `x = J c` (least squares for
    /// non-tangent `x`).
    pub fn chart_components(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.metric_inverse * (self.jacobian.transpose() * x)
    }

    pub fn push_forward(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.jacobian * c
    }

    /// Orthogonal projector onto the tangent space.
    pub fn tangent_projector(&self) -> DMatrix<f64> {
        &self.tangent_basis * self.tangent_basis.transpose()
    }
}

/// A [`Frame`] together with the second derivatives of every component.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalGeometry {
    pub frame: Frame,
    /// `hessians[k]` holds ∂²f_k/∂u_i∂u_j.
    pub hessians: Vec<DMatrix<f64>>,
}

impl LocalGeometry {
    /// Σ a_i b_j ∂²f/∂u_i∂u_j for chart vectors `a`, `b`.
    pub fn second_derivative(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.hessians.len(),
            self.hessians.iter().map(|h| (a.transpose() * h * b)[(0, 0)]),
        )
    }

    /// Derivative of the Jacobian along the chart velocity `w`.
    pub fn jacobian_derivative(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let m = self.frame.m();
        let mut dj = DMatrix::zeros(self.hessians.len(), m);
        for (k, h) in self.hessians.iter().enumerate() {
            dj.row_mut(k).copy_from(&(h * w).transpose());
        }
        dj
    }
}

pub fn frame_at(immersion: &Immersion, u: &[f64]) -> Result<Frame> {
    immersion.frame_at(u)
}

pub fn project(frame: &Frame, w: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    frame.project(w)
}

/// Whether the image of the sampled points spans Rⁿ affinely, i.e. the
/// submanifold is not contained in a hyperplane.
pub fn is_full(immersion: &Immersion, grid: &Grid) -> Result<bool> {
    let n = immersion.n();
    let pts: Vec<DVector<f64>> = grid
        .points
        .iter()
        .filter_map(|u| immersion.point(u.as_slice()).ok())
        .collect();
    if pts.len() < n + 1 {
        return Err(Error::TooFewSamples {
            needed: n + 1,
            got: pts.len(),
        });
    }
    let mean = pts.iter().fold(DVector::zeros(n), |acc, p| acc + p) / pts.len() as f64;
    let mut cloud = DMatrix::zeros(pts.len(), n);
    for (i, p) in pts.iter().enumerate() {
        cloud.row_mut(i).copy_from(&(p - &mean).transpose());
    }
    let sv = linalg::singular_values(&cloud);
    Ok(sv[0] > 0.0 && sv[n - 1] > FULLNESS_RATIO * sv[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cylinder() -> Immersion {
        Immersion::parse("cylinder", &["cos(u1)", "sin(u1)", "u2"], vec![(-3.0, 3.0), (-2.0, 2.0)]).unwrap()
    }

    fn cone() -> Immersion {
        Immersion::parse(
            "cone",
            &["u2*cos(u1)", "u2*sin(u1)", "u2"],
            vec![(-3.0, 3.0), (0.2, 3.0)],
        )
        .unwrap()
    }

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn cylinder_frame_at_origin() {
        let f = frame_at(&cylinder(), &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(f.p, v(&[1.0, 0.0, 0.0]), epsilon = 1e-15);
        // tangent span {(0,1,0), (0,0,1)}: both vectors reproduce under the projector
        for t in [v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])] {
            assert_abs_diff_eq!(f.tangential(&t), t, epsilon = 1e-14);
        }
        assert_eq!(f.normal_basis.ncols(), 1);
        assert_abs_diff_eq!(f.normal_basis[(0, 0)].abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn plane_normal_is_e3() {
        let plane = Immersion::parse("plane", &["u1", "u2", "0"], vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        let f = frame_at(&plane, &[0.3, -0.2]).unwrap();
        assert_abs_diff_eq!(f.normal_basis.column(0).into_owned(), v(&[0.0, 0.0, 1.0]), epsilon = 0.0);
    }

    #[test]
    fn cone_apex_is_singular() {
        let err = frame_at(&cone(), &[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }), "{err:?}");
    }

    #[test]
    fn regular_point_outside_domain() {
        let err = frame_at(&cylinder(), &[0.0, 5.0]).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { .. }));
        assert!(matches!(
            frame_at(&cylinder(), &[0.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn projections_on_cylinder() {
        let f = frame_at(&cylinder(), &[0.0, 0.0]).unwrap();
        let (t, n) = project(&f, &v(&[0.0, 0.0, 1.0]));
        assert_abs_diff_eq!(t, v(&[0.0, 0.0, 1.0]), epsilon = 1e-15);
        assert_abs_diff_eq!(n.norm(), 0.0, epsilon = 1e-15);
        let (t, n) = project(&f, &v(&[1.0, 0.0, 0.0]));
        assert_abs_diff_eq!(t.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n, v(&[1.0, 0.0, 0.0]), epsilon = 1e-15);
    }

    #[test]
    fn cone_axis_splits_evenly() {
        let f = frame_at(&cone(), &[0.4, 1.3]).unwrap();
        let (t, n) = project(&f, &v(&[0.0, 0.0, 1.0]));
        assert_abs_diff_eq!(t.norm(), FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(n.norm(), FRAC_1_SQRT_2, epsilon = 1e-14);
    }

    #[test]
    fn fullness() {
        let plane = Immersion::parse("plane", &["u1", "u2", "0"], vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        let g = Grid::uniform(plane.domain(), 10);
        assert!(!is_full(&plane, &g).unwrap());
        assert!(is_full(&cylinder(), &Grid::uniform(cylinder().domain(), 10)).unwrap());
        let s1r = Immersion::parse(
            "s1r",
            &["cos(u1)", "sin(u1)", "u2", "0"],
            vec![(-3.0, 3.0), (-2.0, 2.0)],
        )
        .unwrap();
        assert!(!is_full(&s1r, &Grid::uniform(s1r.domain(), 10)).unwrap());
        let few = Grid { points: vec![v(&[0.0, 0.0]); 3] };
        assert!(matches!(is_full(&plane, &few), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn invalid_immersions() {
        assert!(Immersion::parse("bad", &["u1", "u2"], vec![(0.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(Immersion::parse("bad", &["u1", "u3", "0"], vec![(0.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(Immersion::parse("bad", &["u1", "u2", "0"], vec![(1.0, 0.0), (0.0, 1.0)]).is_err());
    }

    #[test]
    fn uniform_grid_stays_inside() {
        let d = Domain::new(vec![(0.2, 3.0), (-1.0, 1.0)]).unwrap();
        let g = Grid::uniform(&d, 20);
        assert_eq!(g.len(), 400);
        assert!(g.points.iter().all(|p| d.contains(p.as_slice())));
        let r = Grid::random(&d, 50, 42);
        assert_eq!(r, Grid::random(&d, 50, 42));
        assert!(r.points.iter().all(|p| d.contains(p.as_slice())));
    }
}
