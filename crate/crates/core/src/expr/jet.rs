use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::ast::{BinOp, Expr, Func};

/// Second-order truncated Taylor expansion of a scalar function of `m`
/// variables: value, gradient and (symmetric) hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainErrorKind {
    LogNonPositive,
    DivisionByZero,
    SqrtNonPositive,
    PowerDomain,
    NonFinite,
}

impl std::fmt::Display for DomainErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DomainErrorKind::LogNonPositive => "log of a non-positive value",
            DomainErrorKind::DivisionByZero => "division by zero",
            DomainErrorKind::SqrtNonPositive => "sqrt of a non-positive value",
            DomainErrorKind::PowerDomain => "power outside its real domain",
            DomainErrorKind::NonFinite => "non-finite result",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{subexpr}`")]
pub struct EvalError {
    pub kind: DomainErrorKind,
    pub subexpr: String,
}

impl Jet2 {
    pub fn constant(value: f64, m: usize) -> Jet2 {
        Jet2 {
            value,
            gradient: DVector::zeros(m),
            hessian: DMatrix::zeros(m, m),
        }
    }

    pub fn variable(index: usize, value: f64, m: usize) -> Jet2 {
        let mut j = Jet2::constant(value, m);
        j.gradient[index] = 1.0;
        j
    }

    pub fn arity(&self) -> usize {
        self.gradient.len()
    }

    fn with(value: f64, gradient: DVector<f64>, hessian: DMatrix<f64>) -> Jet2 {
        Jet2 {
            value,
            gradient,
            hessian,
        }
    }

    /// Composition with a scalar function given its first two derivatives at
    /// `self.value`: h = f'(v) H + f''(v) g gᵀ.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let m = self.arity();
        let g = &self.gradient;
        let hessian = DMatrix::from_fn(m, m, |i, j| {
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            f1 * self.hessian[(i, j)] + f2 * (g[i] * g[j])
        });
        Jet2::with(f0, g * f1, hessian)
    }

    pub fn add(&self, o: &Jet2) -> Jet2 {
        Jet2::with(
            self.value + o.value,
            &self.gradient + &o.gradient,
            &self.hessian + &o.hessian,
        )
    }

    pub fn sub(&self, o: &Jet2) -> Jet2 {
        Jet2::with(
            self.value - o.value,
            &self.gradient - &o.gradient,
            &self.hessian - &o.hessian,
        )
    }

    pub fn mul(&self, o: &Jet2) -> Jet2 {
        let m = self.arity();
        let (a, b) = (self, o);
        let gradient = &b.gradient * a.value + &a.gradient * b.value;
        let hessian = DMatrix::from_fn(m, m, |i, j| {
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            a.value * b.hessian[(i, j)]
                + b.value * a.hessian[(i, j)]
                + (a.gradient[i] * b.gradient[j] + a.gradient[j] * b.gradient[i])
        });
        Jet2::with(a.value * b.value, gradient, hessian)
    }

    pub fn recip(&self) -> Jet2 {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|x| x.is_finite())
            && self.hessian.iter().all(|x| x.is_finite())
    }
}

fn fail(kind: DomainErrorKind, e: &Expr) -> EvalError {
    EvalError {
        kind,
        subexpr: e.to_string(),
    }
}

/// Evaluates `e` at chart point `u` with exact first and second derivatives.
///
/// Domain violations (log or sqrt of non-positive values, division by zero,
/// real powers of negative bases) are returned as errors naming the failing
/// subexpression.
pub fn eval_jet2(e: &Expr, u: &[f64]) -> Result<Jet2, EvalError> {
    let m = u.len();
    let jet = match e {
        Expr::Const(c) => Jet2::constant(*c, m),
        Expr::Var(i) => Jet2::variable(*i, u[*i], m),
        Expr::Unary(f, a) => {
            let x = eval_jet2(a, u)?;
            let v = x.value;
            match f {
                Func::Neg => Jet2::with(-v, -&x.gradient, -&x.hessian),
                Func::Sin => x.chain(v.sin(), v.cos(), -v.sin()),
                Func::Cos => x.chain(v.cos(), -v.sin(), -v.cos()),
                Func::Tan => {
                    let c = v.cos();
                    if c == 0.0 {
                        return Err(fail(DomainErrorKind::DivisionByZero, e));
                    }
                    let t = v.tan();
                    let sec2 = 1.0 + t * t;
                    x.chain(t, sec2, 2.0 * t * sec2)
                }
                Func::Atan => {
                    let d = 1.0 / (1.0 + v * v);
                    x.chain(v.atan(), d, -2.0 * v * d * d)
                }
                Func::Exp => {
                    let ex = v.exp();
                    x.chain(ex, ex, ex)
                }
                Func::Log => {
                    if !(v > 0.0) {
                        return Err(fail(DomainErrorKind::LogNonPositive, e));
                    }
                    x.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
                }
                Func::Sqrt => {
                    if !(v > 0.0) {
                        return Err(fail(DomainErrorKind::SqrtNonPositive, e));
                    }
                    let s = v.sqrt();
                    x.chain(s, 0.5 / s, -0.25 / (s * v))
                }
            }
        }
        Expr::Binary(op, a, b) => {
            let x = eval_jet2(a, u)?;
            match op {
                BinOp::Add => x.add(&eval_jet2(b, u)?),
                BinOp::Sub => x.sub(&eval_jet2(b, u)?),
                BinOp::Mul => x.mul(&eval_jet2(b, u)?),
                BinOp::Div => {
                    let y = eval_jet2(b, u)?;
                    if y.value == 0.0 {
                        return Err(fail(DomainErrorKind::DivisionByZero, e));
                    }
                    x.mul(&y.recip())
                }
                BinOp::Pow => power(&x, b, u, e)?,
            }
        }
    };
    if !jet.is_finite() {
        return Err(fail(DomainErrorKind::NonFinite, e));
    }
    Ok(jet)
}

fn power(base: &Jet2, exponent: &Expr, u: &[f64], whole: &Expr) -> Result<Jet2, EvalError> {
    let v = base.value;
    if exponent.is_closed() {
        let p = eval_jet2(exponent, u)?.value;
        if p == 0.0 {
            return Ok(Jet2::constant(1.0, base.arity()));
        }
        if p == 1.0 {
            return Ok(base.clone());
        }
        if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
            let k = p as i32;
            if v == 0.0 && k < 0 {
                return Err(fail(DomainErrorKind::DivisionByZero, whole));
            }
            let f0 = v.powi(k);
            let f1 = p * v.powi(k - 1);
            let f2 = if k == 1 { 0.0 } else { p * (p - 1.0) * v.powi(k - 2) };
            return Ok(base.chain(f0, f1, f2));
        }
        // Real exponent: needs a positive base, or a zero base with p >= 2 so
        // that both derivatives stay finite.
        if v < 0.0 || (v == 0.0 && p < 2.0) {
            return Err(fail(DomainErrorKind::PowerDomain, whole));
        }
        if v == 0.0 {
            let f2 = if p == 2.0 { 2.0 } else { 0.0 };
            return Ok(base.chain(0.0, 0.0, f2));
        }
        return Ok(base.chain(
            v.powf(p),
            p * v.powf(p - 1.0),
            p * (p - 1.0) * v.powf(p - 2.0),
        ));
    }
    // Variable exponent: a^b = exp(b log a).
    if !(v > 0.0) {
        return Err(fail(DomainErrorKind::PowerDomain, whole));
    }
    let log_a = base.chain(v.ln(), 1.0 / v, -1.0 / (v * v));
    let prod = log_a.mul(&eval_jet2(exponent, u)?);
    let ex = prod.value.exp();
    Ok(prod.chain(ex, ex, ex))
}

/// Plain value of `e` at `u`, with the same domain checks as [`eval_jet2`].
pub fn eval(e: &Expr, u: &[f64]) -> Result<f64, EvalError> {
    eval_jet2(e, u).map(|j| j.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use approx::assert_abs_diff_eq;

    fn jet(text: &str, u: &[f64]) -> Jet2 {
        eval_jet2(&parse(text, u.len()).unwrap(), u).unwrap()
    }

    #[test]
    fn square() {
        let j = jet("u1^2", &[3.0]);
        assert_eq!(j.value, 9.0);
        assert_eq!(j.gradient[0], 6.0);
        assert_eq!(j.hessian[(0, 0)], 2.0);
    }

    #[test]
    fn sine_at_zero() {
        let j = jet("sin(u1)", &[0.0]);
        assert_eq!(j.value, 0.0);
        assert_eq!(j.gradient[0], 1.0);
        assert_eq!(j.hessian[(0, 0)], 0.0);
    }

    // Expected values frozen from central differences (step 1e-5) of the
    // plain value at (1, 0): grad (0, 2), hessian [[0, 1], [1, 1]].
    #[test]
    fn mixed_product_and_exponential() {
        let j = jet("u1*u2 + exp(u2)", &[1.0, 0.0]);
        assert_abs_diff_eq!(j.value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j.gradient[0], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(j.gradient[1], 2.0, epsilon = 1e-6);
        let want = [[0.0, 1.0], [1.0, 1.0]];
        for (i, row) in want.iter().enumerate() {
            for (k, w) in row.iter().enumerate() {
                assert_abs_diff_eq!(j.hessian[(i, k)], *w, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn constant_has_no_derivatives() {
        let j = jet("3.5 * pi", &[1.0, 2.0]);
        assert!(j.gradient.iter().all(|g| *g == 0.0));
        assert!(j.hessian.iter().all(|h| *h == 0.0));
    }

    #[test]
    fn quadratic_is_exact() {
        // 2 + 3u1 - u2 + 4u1^2 - 5u1u2 + 0.5u2^2
        let j = jet("2 + 3*u1 - u2 + 4*u1*u1 - 5*u1*u2 + 0.5*u2^2", &[0.7, -1.3]);
        let (x, y) = (0.7_f64, -1.3_f64);
        assert_abs_diff_eq!(
            j.value,
            2.0 + 3.0 * x - y + 4.0 * x * x - 5.0 * x * y + 0.5 * y * y,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(j.gradient[0], 3.0 + 8.0 * x - 5.0 * y, epsilon = 1e-14);
        assert_abs_diff_eq!(j.gradient[1], -1.0 - 5.0 * x + y, epsilon = 1e-14);
        assert_eq!(j.hessian[(0, 0)], 8.0);
        assert_eq!(j.hessian[(0, 1)], -5.0);
        assert_eq!(j.hessian[(1, 0)], -5.0);
        assert_eq!(j.hessian[(1, 1)], 1.0);
    }

    #[test]
    fn hessian_is_exactly_symmetric() {
        let j = jet("sin(u1*u2)*exp(u3/u1) + atan(u2^u1)", &[0.7, 1.3, -0.4]);
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(j.hessian[(i, k)], j.hessian[(k, i)]);
            }
        }
    }

    #[test]
    fn domain_errors_are_reported() {
        let e = parse("1 + log(u1 - 1)", 1).unwrap();
        let err = eval_jet2(&e, &[0.5]).unwrap_err();
        assert_eq!(err.kind, DomainErrorKind::LogNonPositive);
        assert_eq!(err.subexpr, "log((u1 - 1))");

        let e = parse("u1 / (u1 - u1)", 1).unwrap();
        assert_eq!(eval_jet2(&e, &[2.0]).unwrap_err().kind, DomainErrorKind::DivisionByZero);

        let e = parse("sqrt(u1)", 1).unwrap();
        assert_eq!(eval_jet2(&e, &[-1.0]).unwrap_err().kind, DomainErrorKind::SqrtNonPositive);

        let e = parse("u1^0.5", 1).unwrap();
        assert_eq!(eval_jet2(&e, &[-1.0]).unwrap_err().kind, DomainErrorKind::PowerDomain);
    }

    #[test]
    fn integer_powers_of_negative_bases() {
        let j = jet("u1^3", &[-2.0]);
        assert_eq!(j.value, -8.0);
        assert_eq!(j.gradient[0], 12.0);
        assert_eq!(j.hessian[(0, 0)], -12.0);
        let j = jet("u1^-2", &[-2.0]);
        assert_abs_diff_eq!(j.value, 0.25);
        assert_abs_diff_eq!(j.gradient[0], 0.25);
        assert_abs_diff_eq!(j.hessian[(0, 0)], 6.0 / 16.0);
    }

    #[test]
    fn variable_exponent() {
        // u1^u2 at (2, 3): value 8, d/du1 = 12, d/du2 = 8 ln 2
        let j = jet("u1^u2", &[2.0, 3.0]);
        assert_abs_diff_eq!(j.value, 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j.gradient[0], 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j.gradient[1], 8.0 * 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(j.hessian[(0, 0)], 12.0, epsilon = 1e-12);
    }
}
