//! Arc-length curves on an immersion: integral curves of tangent fields,
//! discrete Frenet data and the curve predicates built on the connection.

use std::io::Write;

use nalgebra::DVector;

use crate::connection::{self, VectorField};
use crate::error::{Error, Result};
use crate::manifold::{Immersion, LocalGeometry};

/// First curvature below which the principal normal is undefined.
pub const K_FLOOR: f64 = 1e-6;
/// Frenet data needs at least this many samples.
pub const MIN_SAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub s: f64,
    pub u: DVector<f64>,
    pub p: DVector<f64>,
    /// Unit tangent, in ambient coordinates.
    pub tangent: DVector<f64>,
}

/// Why integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    DomainExit,
    Singular,
    VanishingField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveOnManifold {
    pub samples: Vec<CurveSample>,
    pub step: f64,
    pub termination: Termination,
}

impl CurveOnManifold {
    pub fn is_truncated(&self) -> bool {
        self.termination != Termination::Completed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.s)
    }

    /// Writes `s, u1..um, p1..pn, T1..Tn, k` rows.
    pub fn write_csv<W: Write>(&self, frenet: &FrenetData, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let first = &self.samples[0];
        let (m, n) = (first.u.len(), first.p.len());
        let mut header = vec!["s".to_string()];
        header.extend((1..=m).map(|i| format!("u{i}")));
        header.extend((1..=n).map(|i| format!("p{i}")));
        header.extend((1..=n).map(|i| format!("T{i}")));
        header.push("k".into());
        w.write_record(&header)?;
        for (s, f) in self.samples.iter().zip(&frenet.samples) {
            let mut row = vec![s.s.to_string()];
            row.extend(s.u.iter().map(f64::to_string));
            row.extend(s.p.iter().map(f64::to_string));
            row.extend(s.tangent.iter().map(f64::to_string));
            row.push(f.k.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Velocity {
    chart: DVector<f64>,
    tangent: DVector<f64>,
    p: DVector<f64>,
}

fn unit_velocity(immersion: &Immersion, field: &dyn VectorField, u: &DVector<f64>) -> Result<Velocity> {
    let geo = immersion.local(u.as_slice())?;
    let raw = geo.frame.tangential(&field.value(&geo)?);
    let norm = raw.norm();
    if norm < connection::VANISHING_TOL {
        return Err(Error::VanishingField { norm });
    }
    let tangent = raw / norm;
    Ok(Velocity {
        chart: geo.frame.chart_components(&tangent),
        tangent,
        p: geo.frame.p,
    })
}

fn termination_for(e: &Error) -> Option<Termination> {
    match e {
        Error::OutOfDomain { .. } => Some(Termination::DomainExit),
        Error::RankDeficient { .. } | Error::Eval(_) => Some(Termination::Singular),
        Error::VanishingField { .. } => Some(Termination::VanishingField),
        _ => None,
    }
}

/// Unit-speed integral curve of `field` from `u0`, by classical RK4 in
/// chart coordinates with fixed arc-length `step`. The chart velocity is
/// `(JᵀJ)⁻¹Jᵀ X/‖X‖`. Leaving the domain or meeting a singular point ends
/// the curve early with the reason recorded.
pub fn integral_curve(
    immersion: &Immersion,
    field: &dyn VectorField,
    u0: &[f64],
    s_max: f64,
    step: f64,
) -> Result<CurveOnManifold> {
    if !(step > 0.0) || !(s_max >= 0.0) {
        return Err(Error::Degenerate(format!("invalid step {step} or length {s_max}")));
    }
    let mut u = DVector::from_column_slice(u0);
    let v0 = unit_velocity(immersion, field, &u)?;
    let mut samples = vec![CurveSample {
        s: 0.0,
        u: u.clone(),
        p: v0.p,
        tangent: v0.tangent,
    }];
    let mut k1 = v0.chart;
    let steps = (s_max / step + 1e-9).floor() as usize;
    let mut termination = Termination::Completed;
    for i in 1..=steps {
        let stage = |x: &DVector<f64>| unit_velocity(immersion, field, x).map(|v| v.chart);
        let next = (|| {
            let k2 = stage(&(&u + &k1 * (0.5 * step)))?;
            let k3 = stage(&(&u + &k2 * (0.5 * step)))?;
            let k4 = stage(&(&u + &k3 * step))?;
            let un = &u + (&k1 + &k2 * 2.0 + &k3 * 2.0 + &k4) * (step / 6.0);
            let v = unit_velocity(immersion, field, &un)?;
            Ok::<_, Error>((un, v))
        })();
        match next {
            Ok((un, v)) => {
                samples.push(CurveSample {
                    s: i as f64 * step,
                    u: un.clone(),
                    p: v.p,
                    tangent: v.tangent,
                });
                u = un;
                k1 = v.chart;
            }
            Err(e) => match termination_for(&e) {
                Some(t) => {
                    termination = t;
                    break;
                }
                None => return Err(e),
            },
        }
    }
    Ok(CurveOnManifold {
        samples,
        step,
        termination,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrenetSample {
    /// First curvature ‖dT/ds‖.
    pub k: f64,
    /// Unit principal normal, absent when `k < K_FLOOR`.
    pub principal_normal: Option<DVector<f64>>,
    /// dT/ds.
    pub acceleration: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrenetData {
    pub samples: Vec<FrenetSample>,
}

impl FrenetData {
    pub fn max_curvature(&self) -> f64 {
        self.samples.iter().map(|s| s.k).fold(0.0, f64::max)
    }
}

fn require_samples(c: &CurveOnManifold) -> Result<()> {
    if c.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_SAMPLES,
            got: c.len(),
        });
    }
    Ok(())
}

/// dT/ds by second-order differences (central inside, one-sided at the ends).
pub fn frenet(c: &CurveOnManifold) -> Result<FrenetData> {
    require_samples(c)?;
    let t: Vec<&DVector<f64>> = c.samples.iter().map(|s| &s.tangent).collect();
    let h = c.step;
    let last = t.len() - 1;
    let samples = (0..t.len())
        .map(|i| {
            let a = if i == 0 {
                (t[1] * 4.0 - t[0] * 3.0 - t[2]) / (2.0 * h)
            } else if i == last {
                (t[last] * 3.0 - t[last - 1] * 4.0 + t[last - 2]) / (2.0 * h)
            } else {
                (t[i + 1] - t[i - 1]) / (2.0 * h)
            };
            let k = a.norm();
            FrenetSample {
                k,
                principal_normal: (k >= K_FLOOR).then(|| &a / k),
                acceleration: a,
            }
        })
        .collect();
    Ok(FrenetData { samples })
}

/// Evaluates `f(geometry, chart tangent, sample index)` at every sample.
pub fn along<F>(immersion: &Immersion, c: &CurveOnManifold, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&LocalGeometry, &DVector<f64>, usize) -> Result<f64>,
{
    require_samples(c)?;
    c.samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let geo = immersion.local(s.u.as_slice())?;
            let tc = geo.frame.chart_components(&s.tangent);
            f(&geo, &tc, i)
        })
        .collect()
}

/// Maximum over interior samples of the tangential part of dT/ds.
pub fn geodesic_residual(immersion: &Immersion, c: &CurveOnManifold) -> Result<f64> {
    let fr = frenet(c)?;
    let last = c.len() - 1;
    let vals = along(immersion, c, |geo, _, i| {
        if i == 0 || i == last {
            return Ok(0.0);
        }
        Ok(geo.frame.tangential(&fr.samples[i].acceleration).norm())
    })?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// ‖V(T, T)‖ at every sample.
pub fn normal_curvature(immersion: &Immersion, c: &CurveOnManifold) -> Result<Vec<f64>> {
    along(immersion, c, |geo, tc, _| {
        Ok(connection::second_fundamental_at(geo, tc, tc).norm())
    })
}

/// Maximum of ‖dT/ds‖; zero for straight lines.
pub fn straightness_residual(c: &CurveOnManifold) -> Result<f64> {
    Ok(frenet(c)?.max_curvature())
}

/// Maximum over samples of |⟨A^ξ(T), T⟩|.
pub fn asymptotic_residual(immersion: &Immersion, c: &CurveOnManifold, xi: &dyn VectorField) -> Result<f64> {
    let vals = along(immersion, c, |geo, tc, i| {
        let w = connection::weingarten_split_at(geo, tc, xi)?;
        Ok(w.shape.dot(&c.samples[i].tangent).abs())
    })?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `λ = ⟨A^ξ(T), T⟩` per sample and the maximum of ‖A^ξ(T) − λT‖.
pub fn line_of_curvature_residual(
    immersion: &Immersion,
    c: &CurveOnManifold,
    xi: &dyn VectorField,
) -> Result<(f64, Vec<f64>)> {
    let mut lambdas = Vec::with_capacity(c.len());
    let vals = along(immersion, c, |geo, tc, i| {
        let t = &c.samples[i].tangent;
        let shape = connection::weingarten_split_at(geo, tc, xi)?.shape;
        let lambda = shape.dot(t);
        lambdas.push(lambda);
        Ok((shape - t * lambda).norm())
    })?;
    Ok((vals.into_iter().fold(0.0, f64::max), lambdas))
}
