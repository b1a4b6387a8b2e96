//! Gauss and Weingarten decompositions of ambient derivatives.
//!
//! For tangent fields `X, Y` and a normal field `ξ`:
//!
//! ```text
//! D_X Y = ∇_X Y + V(X, Y)          (tangential + normal)
//! D_X ξ = −A^ξ(X) + ∇⊥_X ξ         (tangential + normal)
//! ```
//!
//! All derivatives are exact: they are assembled from first and second
//! derivatives of the immersion and of the field expressions.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::linalg;
use crate::manifold::{Immersion, LocalGeometry};

/// Normal fields may carry at most this much tangential component
/// (relative to `max(1, ‖ξ‖)`).
pub const NORMALITY_TOL: f64 = 1e-8;
/// Relative singular value threshold for the second normal space.
pub const KERNEL_TOL: f64 = 1e-8;
/// Norm below which a normalized field is considered undefined.
pub const VANISHING_TOL: f64 = 1e-10;

/// An ambient-valued field along the submanifold with a computable
/// directional derivative.
pub trait VectorField {
    /// Ambient value at the point described by `geo`.
    fn value(&self, geo: &LocalGeometry) -> Result<DVector<f64>>;
    /// Ambient derivative `D_X` of the field, where `w` holds the chart
    /// components of `X`.
    fn derivative(&self, geo: &LocalGeometry, w: &DVector<f64>) -> Result<DVector<f64>>;
}

fn eval_jets(exprs: &[Expr], u: &DVector<f64>) -> Result<Vec<expr::Jet2>> {
    exprs
        .iter()
        .map(|e| expr::eval_jet2(e, u.as_slice()).map_err(Error::from))
        .collect()
}

/// Tangent field `Σ aⁱ ∂f/∂uᵢ` given by its chart components.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    components: Vec<Expr>,
}

impl TangentField {
    pub fn new(components: Vec<Expr>) -> Result<Self> {
        let m = components.len();
        if m == 0 {
            return Err(Error::InvalidImmersion("tangent field needs components".into()));
        }
        if let Some(c) = components.iter().find(|c| c.max_variable() > m) {
            return Err(Error::InvalidImmersion(format!(
                "tangent field component uses u{} but m = {m}",
                c.max_variable()
            )));
        }
        Ok(TangentField { components })
    }

    pub fn parse(components: &[&str]) -> Result<Self> {
        let m = components.len();
        let exprs = components
            .iter()
            .map(|c| expr::parse(c, m))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        TangentField::new(exprs)
    }

    /// The coordinate field ∂/∂u_{index+1}.
    pub fn coordinate(index: usize, m: usize) -> Self {
        let components = (0..m).map(|i| Expr::Const(if i == index { 1.0 } else { 0.0 })).collect();
        TangentField { components }
    }

    /// A field with constant chart components.
    pub fn constant(chart: &[f64]) -> Self {
        TangentField {
            components: chart.iter().map(|&c| Expr::Const(c)).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    fn check(&self, geo: &LocalGeometry) -> Result<()> {
        if self.arity() != geo.frame.m() {
            return Err(Error::DimensionMismatch {
                expected: geo.frame.m(),
                got: self.arity(),
            });
        }
        Ok(())
    }

    /// Chart components at the point of `geo`.
    pub fn chart_at(&self, geo: &LocalGeometry) -> Result<DVector<f64>> {
        self.check(geo)?;
        let vals = self
            .components
            .iter()
            .map(|e| expr::eval(e, geo.frame.u.as_slice()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(DVector::from_vec(vals))
    }
}

impl VectorField for TangentField {
    fn value(&self, geo: &LocalGeometry) -> Result<DVector<f64>> {
        Ok(geo.frame.push_forward(&self.chart_at(geo)?))
    }

    fn derivative(&self, geo: &LocalGeometry, w: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(geo)?;
        let jets = eval_jets(&self.components, &geo.frame.u)?;
        let a = DVector::from_iterator(jets.len(), jets.iter().map(|j| j.value));
        let da = DVector::from_iterator(jets.len(), jets.iter().map(|j| j.gradient.dot(w)));
        Ok(geo.second_derivative(&a, w) + geo.frame.push_forward(&da))
    }
}

/// Normal field given by its ambient components as functions of the chart.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalField {
    components: Vec<Expr>,
    m: usize,
}

impl NormalField {
    pub fn new(components: Vec<Expr>, m: usize) -> Result<Self> {
        if let Some(c) = components.iter().find(|c| c.max_variable() > m) {
            return Err(Error::InvalidImmersion(format!(
                "normal field component uses u{} but m = {m}",
                c.max_variable()
            )));
        }
        Ok(NormalField { components, m })
    }

    pub fn parse(components: &[&str], m: usize) -> Result<Self> {
        let exprs = components
            .iter()
            .map(|c| expr::parse(c, m))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        NormalField::new(exprs, m)
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    fn check(&self, geo: &LocalGeometry) -> Result<()> {
        if self.components.len() != geo.frame.n() {
            return Err(Error::DimensionMismatch {
                expected: geo.frame.n(),
                got: self.components.len(),
            });
        }
        if self.m != geo.frame.m() {
            return Err(Error::DimensionMismatch {
                expected: geo.frame.m(),
                got: self.m,
            });
        }
        Ok(())
    }
}

impl VectorField for NormalField {
    fn value(&self, geo: &LocalGeometry) -> Result<DVector<f64>> {
        self.check(geo)?;
        let vals = self
            .components
            .iter()
            .map(|e| expr::eval(e, geo.frame.u.as_slice()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(DVector::from_vec(vals))
    }

    fn derivative(&self, geo: &LocalGeometry, w: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(geo)?;
        let jets = eval_jets(&self.components, &geo.frame.u)?;
        Ok(DVector::from_iterator(jets.len(), jets.iter().map(|j| j.gradient.dot(w))))
    }
}

/// Which part of a fixed ambient vector an [`InducedField`] follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Tangential,
    Normal,
}

/// Tangential or normal part of a constant ambient vector `d`, optionally
/// normalized. With `unit = true` these are the fields `T` and `ξ` of the
/// decomposition `d = cos θ T + sin θ ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedField {
    pub direction: DVector<f64>,
    pub part: Part,
    pub unit: bool,
}

impl InducedField {
    pub fn tangent_of(direction: &DVector<f64>) -> Self {
        InducedField {
            direction: direction.clone(),
            part: Part::Tangential,
            unit: true,
        }
    }

    pub fn normal_of(direction: &DVector<f64>) -> Self {
        InducedField {
            direction: direction.clone(),
            part: Part::Normal,
            unit: true,
        }
    }

    fn raw(&self, geo: &LocalGeometry) -> Result<DVector<f64>> {
        if self.direction.len() != geo.frame.n() {
            return Err(Error::DimensionMismatch {
                expected: geo.frame.n(),
                got: self.direction.len(),
            });
        }
        let t = geo.frame.tangential(&self.direction);
        Ok(match self.part {
            Part::Tangential => t,
            Part::Normal => &self.direction - t,
        })
    }

    /// D_w(P d) = (I − P) dJ G⁻¹ Jᵀ d + J G⁻¹ dJᵀ (I − P) d.
    fn raw_derivative(&self, geo: &LocalGeometry, w: &DVector<f64>) -> DVector<f64> {
        let f = &geo.frame;
        let d = &self.direction;
        let dj = geo.jacobian_derivative(w);
        let coeffs = f.chart_components(d);
        let normal_d = f.normal(d);
        let first = f.normal(&(&dj * coeffs));
        let second = f.push_forward(&(f.metric_inverse() * (dj.transpose() * normal_d)));
        let dp = first + second;
        match self.part {
            Part::Tangential => dp,
            Part::Normal => -dp,
        }
    }
}

impl VectorField for InducedField {
    fn value(&self, geo: &LocalGeometry) -> Result<DVector<f64>> {
        let x = self.raw(geo)?;
        if !self.unit {
            return Ok(x);
        }
        let norm = x.norm();
        if norm < VANISHING_TOL {
            return Err(Error::VanishingField { norm });
        }
        Ok(x / norm)
    }

    fn derivative(&self, geo: &LocalGeometry, w: &DVector<f64>) -> Result<DVector<f64>> {
        let x = self.raw(geo)?;
        let dx = self.raw_derivative(geo, w);
        if !self.unit {
            return Ok(dx);
        }
        let norm = x.norm();
        if norm < VANISHING_TOL {
            return Err(Error::VanishingField { norm });
        }
        let xhat = x / norm;
        let along = xhat.dot(&dx);
        Ok((dx - xhat * along) / norm)
    }
}

/// `D_X Y = ∇_X Y + V(X, Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussSplit {
    pub nabla: DVector<f64>,
    pub second_fundamental: DVector<f64>,
}

impl GaussSplit {
    pub fn ambient(&self) -> DVector<f64> {
        &self.nabla + &self.second_fundamental
    }
}

/// `D_X ξ = −A^ξ(X) + ∇⊥_X ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeingartenSplit {
    pub shape: DVector<f64>,
    pub nabla_perp: DVector<f64>,
}

impl WeingartenSplit {
    pub fn ambient(&self) -> DVector<f64> {
        &self.nabla_perp - &self.shape
    }
}

/// Gauss split of `D_X Y` where `x` holds the chart components of `X`.
pub fn gauss_split_at(geo: &LocalGeometry, x: &DVector<f64>, y: &dyn VectorField) -> Result<GaussSplit> {
    let dy = y.derivative(geo, x)?;
    let (nabla, second_fundamental) = geo.frame.project(&dy);
    Ok(GaussSplit {
        nabla,
        second_fundamental,
    })
}

pub fn gauss_split(immersion: &Immersion, u: &[f64], x: &TangentField, y: &dyn VectorField) -> Result<GaussSplit> {
    let geo = immersion.local(u)?;
    let xc = x.chart_at(&geo)?;
    gauss_split_at(&geo, &xc, y)
}

/// `V(X, Y)` from chart components: the normal part of Σ xⁱ yʲ ∂²f/∂uᵢ∂uⱼ.
/// Depends only on the values of `X` and `Y` at the point.
pub fn second_fundamental_at(geo: &LocalGeometry, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    geo.frame.normal(&geo.second_derivative(x, y))
}

pub fn second_fundamental_form(immersion: &Immersion, u: &[f64], x: &TangentField, y: &TangentField) -> Result<DVector<f64>> {
    Ok(gauss_split(immersion, u, x, y)?.second_fundamental)
}

fn check_normal(geo: &LocalGeometry, xi: &DVector<f64>) -> Result<()> {
    let tangential_norm = geo.frame.tangential(xi).norm();
    if tangential_norm > NORMALITY_TOL * xi.norm().max(1.0) {
        return Err(Error::NotNormal { tangential_norm });
    }
    Ok(())
}

pub fn weingarten_split_at(geo: &LocalGeometry, x: &DVector<f64>, xi: &dyn VectorField) -> Result<WeingartenSplit> {
    check_normal(geo, &xi.value(geo)?)?;
    let dxi = xi.derivative(geo, x)?;
    let (tangential, nabla_perp) = geo.frame.project(&dxi);
    Ok(WeingartenSplit {
        shape: -tangential,
        nabla_perp,
    })
}

pub fn weingarten_split(immersion: &Immersion, u: &[f64], x: &TangentField, xi: &dyn VectorField) -> Result<WeingartenSplit> {
    let geo = immersion.local(u)?;
    let xc = x.chart_at(&geo)?;
    weingarten_split_at(&geo, &xc, xi)
}

/// Shape operator of the normal vector `xi` in the orthonormal tangent
/// basis: `S_ij = ⟨V(E_i, E_j), ξ⟩`.
pub fn shape_operator_at(geo: &LocalGeometry, xi: &DVector<f64>) -> Result<DMatrix<f64>> {
    if xi.len() != geo.frame.n() {
        return Err(Error::DimensionMismatch {
            expected: geo.frame.n(),
            got: xi.len(),
        });
    }
    check_normal(geo, xi)?;
    let m = geo.frame.m();
    let charts: Vec<DVector<f64>> = (0..m)
        .map(|i| geo.frame.chart_components(&geo.frame.tangent_basis.column(i).into_owned()))
        .collect();
    let mut s = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = second_fundamental_at(geo, &charts[i], &charts[j]).dot(xi);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Ok(s)
}

pub fn shape_operator_matrix(immersion: &Immersion, u: &[f64], xi: &DVector<f64>) -> Result<DMatrix<f64>> {
    shape_operator_at(&immersion.local(u)?, xi)
}

/// Orthonormal basis of `{ξ normal : A^ξ = 0}` at the point of `geo`.
pub fn second_normal_space_at(geo: &LocalGeometry) -> Result<Vec<DVector<f64>>> {
    let normals = &geo.frame.normal_basis;
    let m = geo.frame.m();
    let q = normals.ncols();
    // Rows: upper-triangular entries of S(ξ), off-diagonals weighted by √2 so
    // the map is an isometry onto the Frobenius norm.
    let rows = m * (m + 1) / 2;
    let mut map = DMatrix::zeros(rows, q);
    for a in 0..q {
        let s = shape_operator_at(geo, &normals.column(a).into_owned())?;
        let mut r = 0;
        for i in 0..m {
            for j in i..m {
                map[(r, a)] = if i == j { s[(i, j)] } else { std::f64::consts::SQRT_2 * s[(i, j)] };
                r += 1;
            }
        }
    }
    Ok(linalg::kernel_basis(&map, KERNEL_TOL)
        .into_iter()
        .map(|c| normals * c)
        .collect())
}

pub fn second_normal_space(immersion: &Immersion, u: &[f64]) -> Result<Vec<DVector<f64>>> {
    second_normal_space_at(&immersion.local(u)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn cylinder() -> Immersion {
        Immersion::parse("cylinder", &["cos(u1)", "sin(u1)", "u2"], vec![(-3.0, 3.0), (-2.0, 2.0)]).unwrap()
    }

    fn plane() -> Immersion {
        Immersion::parse("plane", &["u1", "u2", "0"], vec![(-2.0, 2.0), (-2.0, 2.0)]).unwrap()
    }

    fn cone() -> Immersion {
        Immersion::parse("cone", &["u2*cos(u1)", "u2*sin(u1)", "u2"], vec![(-3.0, 3.0), (0.2, 3.0)]).unwrap()
    }

    fn s1r() -> Immersion {
        Immersion::parse("s1r", &["cos(u1)", "sin(u1)", "u2", "0"], vec![(-3.0, 3.0), (-2.0, 2.0)]).unwrap()
    }

    fn sorted_eigs(s: DMatrix<f64>) -> Vec<f64> {
        let mut e: Vec<f64> = s.symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn plane_is_flat() {
        let du = TangentField::coordinate(0, 2);
        let g = gauss_split(&plane(), &[0.1, 0.2], &du, &du).unwrap();
        assert_eq!(g.nabla.norm(), 0.0);
        assert_eq!(g.second_fundamental.norm(), 0.0);
        let s = shape_operator_matrix(&plane(), &[0.1, 0.2], &v(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(linalg::max_abs(&s), 0.0);
    }

    #[test]
    fn cylinder_circle_acceleration() {
        let du = TangentField::coordinate(0, 2);
        let u = 0.7_f64;
        let g = gauss_split(&cylinder(), &[u, 0.3], &du, &du).unwrap();
        assert_abs_diff_eq!(g.nabla.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.second_fundamental, v(&[-u.cos(), -u.sin(), 0.0]), epsilon = 1e-15);
        let dv = TangentField::coordinate(1, 2);
        let g = gauss_split(&cylinder(), &[u, 0.3], &du, &dv).unwrap();
        assert_eq!(g.ambient().norm(), 0.0);
        let sff = second_fundamental_form(&cylinder(), &[0.0, 0.0], &du, &du).unwrap();
        assert_abs_diff_eq!(sff, v(&[-1.0, 0.0, 0.0]), epsilon = 1e-15);
    }

    #[test]
    fn zero_field_gives_zero_form() {
        let zero = TangentField::constant(&[0.0, 0.0]);
        let x = TangentField::parse(&["1 + u2", "u1"]).unwrap();
        let sff = second_fundamental_form(&cone(), &[0.3, 1.1], &x, &zero).unwrap();
        assert_eq!(sff.norm(), 0.0);
    }

    #[test]
    fn cone_circle_direction() {
        // unit circle direction at v = 1 is ∂u / v
        let x = TangentField::constant(&[1.0, 0.0]);
        let sff = second_fundamental_form(&cone(), &[0.0, 1.0], &x, &x).unwrap();
        let nu = v(&[1.0, 0.0, -1.0]) / SQRT_2;
        assert_abs_diff_eq!(sff.norm(), FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(sff.dot(&nu).abs(), FRAC_1_SQRT_2, epsilon = 1e-14);
    }

    #[test]
    fn cylinder_weingarten() {
        let xi = NormalField::parse(&["cos(u1)", "sin(u1)", "0"], 2).unwrap();
        let du = TangentField::coordinate(0, 2);
        let w = weingarten_split(&cylinder(), &[0.4, 0.0], &du, &xi).unwrap();
        let x = v(&[-(0.4f64).sin(), 0.4f64.cos(), 0.0]);
        assert_abs_diff_eq!(w.shape, -x, epsilon = 1e-15);
        assert_abs_diff_eq!(w.nabla_perp.norm(), 0.0, epsilon = 1e-15);
        let dv = TangentField::coordinate(1, 2);
        let w = weingarten_split(&cylinder(), &[0.4, 0.0], &dv, &xi).unwrap();
        assert_eq!(w.shape.norm(), 0.0);
    }

    #[test]
    fn constant_normal_in_r4() {
        let xi = NormalField::parse(&["0", "0", "0", "1"], 2).unwrap();
        let x = TangentField::parse(&["u2", "1 - u1"]).unwrap();
        let w = weingarten_split(&s1r(), &[0.3, 0.5], &x, &xi).unwrap();
        assert_eq!(w.shape.norm(), 0.0);
        assert_eq!(w.nabla_perp.norm(), 0.0);
    }

    #[test]
    fn tangent_vector_is_not_normal() {
        let xi = NormalField::parse(&["0", "0", "1"], 2).unwrap();
        let du = TangentField::coordinate(0, 2);
        let err = weingarten_split(&cylinder(), &[0.0, 0.0], &du, &xi).unwrap_err();
        assert!(matches!(err, Error::NotNormal { .. }));
        let err = shape_operator_matrix(&cylinder(), &[0.0, 0.0], &v(&[0.0, 1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::NotNormal { .. }));
    }

    #[test]
    fn principal_curvatures() {
        let u = 0.9_f64;
        let inward = v(&[-u.cos(), -u.sin(), 0.0]);
        let e = sorted_eigs(shape_operator_matrix(&cylinder(), &[u, 0.0], &inward).unwrap());
        assert_abs_diff_eq!(e[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[1], 1.0, epsilon = 1e-14);

        let xi = v(&[u.cos(), u.sin(), -1.0]) / SQRT_2;
        let e = sorted_eigs(shape_operator_matrix(&cone(), &[u, 1.0], &xi).unwrap());
        assert_abs_diff_eq!(e[0], -FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(e[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn second_normal_spaces() {
        let k = second_normal_space(&s1r(), &[0.2, 0.1]).unwrap();
        assert_eq!(k.len(), 1);
        assert_abs_diff_eq!(k[0][3].abs(), 1.0, epsilon = 1e-12);
        assert!(second_normal_space(&cylinder(), &[0.2, 0.1]).unwrap().is_empty());
        assert_eq!(second_normal_space(&plane(), &[0.2, 0.1]).unwrap().len(), 1);
    }

    #[test]
    fn induced_field_derivative_matches_differences() {
        let m = cone();
        let d = v(&[0.3, -0.2, 0.9]).normalize();
        let u = [0.4, 1.2];
        let w = v(&[0.7, -0.3]);
        for field in [InducedField::tangent_of(&d), InducedField::normal_of(&d)] {
            let geo = m.local(&u).unwrap();
            let exact = field.derivative(&geo, &w).unwrap();
            let h = 1e-6;
            let at = |s: f64| {
                let p = [u[0] + s * w[0], u[1] + s * w[1]];
                field.value(&m.local(&p).unwrap()).unwrap()
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            assert_abs_diff_eq!(exact, fd, epsilon = 1e-8);
        }
    }
}
