//! Numeric verifiers for the helix-submanifold theorems.
//!
//! Each verifier evaluates its hypotheses as named checks, then its
//! conclusions, and derives a [`Verdict`]. A check either expects a
//! vanishing value (`≤ zero_tol`) or a clearly nonzero one (`> floor`);
//! values between the two thresholds are inconclusive. Equivalences are
//! judged on vanishing indicators only, never on equality of raw values.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::catalog;
use crate::connection::{self, InducedField, NormalField, TangentField, VectorField};
use crate::curves::{self, CurveOnManifold, K_FLOOR};
use crate::error::{Error, Result};
use crate::helix::{self, HelixVerdict};
use crate::manifold::{self, Grid, Immersion};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyParams {
    /// Threshold for residuals that should vanish.
    pub tol: f64,
    /// Values above this are clearly nonzero.
    pub nonzero_floor: f64,
    /// Points per axis of the uniform helix-check grid.
    pub grid: usize,
    pub step: f64,
    pub s_max: f64,
    pub seed: u64,
    /// Number of random seeds, test curves and tangent probes.
    pub probes: usize,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            tol: 1e-6,
            nonzero_floor: 1e-3,
            grid: 20,
            step: 1e-2,
            s_max: 1.0,
            seed: 42,
            probes: 5,
        }
    }
}

impl VerifyParams {
    /// Zero threshold for quantities taken from finite differences of
    /// sampled curves, whose error is of order `step²`.
    pub fn fd_tol(&self) -> f64 {
        self.tol.max(self.step * self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremId {
    HelixLinesGeodesic,
    ParallelNormal,
    NormalCurvature,
    PrincipalNormal,
    SecondNormalAsymptotic,
    ParallelTangent,
    HelixLinesAsymptotic,
    SpanExclusion,
    RuledHelix,
    HypersurfaceRuled,
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        TheoremId::HelixLinesGeodesic,
        TheoremId::ParallelNormal,
        TheoremId::NormalCurvature,
        TheoremId::PrincipalNormal,
        TheoremId::SecondNormalAsymptotic,
        TheoremId::ParallelTangent,
        TheoremId::HelixLinesAsymptotic,
        TheoremId::SpanExclusion,
        TheoremId::RuledHelix,
        TheoremId::HypersurfaceRuled,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::HelixLinesGeodesic => "2.1",
            TheoremId::ParallelNormal => "3.1",
            TheoremId::NormalCurvature => "3.2",
            TheoremId::PrincipalNormal => "lemma-3.1",
            TheoremId::SecondNormalAsymptotic => "3.3",
            TheoremId::ParallelTangent => "3.4",
            TheoremId::HelixLinesAsymptotic => "3.5",
            TheoremId::SpanExclusion => "3.6",
            TheoremId::RuledHelix => "3.8",
            TheoremId::HypersurfaceRuled => "cor-3.2",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            TheoremId::HelixLinesGeodesic => "helix lines are geodesics",
            TheoremId::ParallelNormal => "ξ parallel along T iff T_j' is tangent",
            TheoremId::NormalCurvature => "normal curvature of a helix line equals its first curvature",
            TheoremId::PrincipalNormal => "principal normal of a helix line is normal to M",
            TheoremId::SecondNormalAsymptotic => "every curve is asymptotic for ξ in the second normal space",
            TheoremId::ParallelTangent => "T_j parallel iff every X is asymptotic for ξ_j",
            TheoremId::HelixLinesAsymptotic => "helix lines are asymptotic for ξ_j",
            TheoremId::SpanExclusion => "helix directions avoid span{ξ, T} on non-straight lines of curvature",
            TheoremId::RuledHelix => "ruled iff ∇⊥_T ξ = 0 iff helix lines have zero normal curvature",
            TheoremId::HypersurfaceRuled => "helix lines of a helix hypersurface are straight",
        }
    }

    /// Whether the verifier needs a helix direction.
    pub fn needs_direction(self) -> bool {
        !matches!(self, TheoremId::SecondNormalAsymptotic | TheoremId::SpanExclusion)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for TheoremId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "3.7" {
            return Err("3.7 has no separate verifier; its criterion is leg (i) of 3.8".into());
        }
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| {
                let ids: Vec<_> = TheoremId::ALL.iter().map(|t| t.as_str()).collect();
                format!("unknown theorem `{s}` (expected one of {})", ids.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Zero,
    Nonzero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expect: Expect,
    pub zero_tol: f64,
    pub floor: f64,
    pub outcome: Outcome,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, expect: Expect, zero_tol: f64, floor: f64) -> Check {
        let outcome = if value.is_nan() {
            Outcome::Inconclusive
        } else if value <= zero_tol {
            if expect == Expect::Zero { Outcome::Holds } else { Outcome::Fails }
        } else if value > floor {
            if expect == Expect::Zero { Outcome::Fails } else { Outcome::Holds }
        } else {
            Outcome::Inconclusive
        };
        Check {
            name: name.into(),
            value,
            expect,
            zero_tol,
            floor,
            outcome,
        }
    }

    /// A yes/no condition, recorded as 1 or 0.
    pub fn flag(name: impl Into<String>, holds: bool) -> Check {
        Check::new(name, if holds { 1.0 } else { 0.0 }, Expect::Nonzero, 0.5, 0.5)
    }
}

/// A raw quantity reported alongside the checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Confirmed,
    HypothesisNotMet,
    Inconclusive,
    Violated,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Confirmed => "confirmed",
            Verdict::HypothesisNotMet => "hypothesis-not-met",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Violated => "violated",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub manifold: String,
    pub directions: Vec<Vec<f64>>,
    pub seeds: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve_field: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_field: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub theorem: TheoremId,
    pub statement: &'static str,
    pub instance: Instance,
    pub hypotheses: Vec<Check>,
    pub conclusions: Vec<Check>,
    pub observations: Vec<Observation>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub samples: usize,
    pub notes: Vec<String>,
}

fn judge(hypotheses: &[Check], conclusions: &[Check]) -> Verdict {
    let any = |cs: &[Check], o: Outcome| cs.iter().any(|c| c.outcome == o);
    if any(hypotheses, Outcome::Fails) {
        Verdict::HypothesisNotMet
    } else if any(hypotheses, Outcome::Inconclusive) {
        Verdict::Inconclusive
    } else if any(conclusions, Outcome::Fails) {
        Verdict::Violated
    } else if any(conclusions, Outcome::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Confirmed
    }
}

struct Builder<'p> {
    params: &'p VerifyParams,
    theorem: TheoremId,
    instance: Instance,
    hypotheses: Vec<Check>,
    conclusions: Vec<Check>,
    observations: Vec<Observation>,
    samples: usize,
    notes: Vec<String>,
}

impl<'p> Builder<'p> {
    fn new(theorem: TheoremId, immersion: &Immersion, params: &'p VerifyParams) -> Self {
        Builder {
            params,
            theorem,
            instance: Instance {
                manifold: immersion.name().to_string(),
                directions: Vec::new(),
                seeds: Vec::new(),
                curve_field: None,
                normal_field: None,
            },
            hypotheses: Vec::new(),
            conclusions: Vec::new(),
            observations: Vec::new(),
            samples: 0,
            notes: Vec::new(),
        }
    }

    fn zero_hyp(&mut self, name: &str, value: f64, zero_tol: f64) {
        self.hypotheses.push(Check::new(name, value, Expect::Zero, zero_tol, self.params.nonzero_floor));
    }

    fn nonzero_hyp(&mut self, name: &str, value: f64) {
        self.hypotheses.push(Check::new(name, value, Expect::Nonzero, self.params.tol, self.params.nonzero_floor));
    }

    fn zero(&mut self, name: &str, value: f64, zero_tol: f64) {
        self.conclusions.push(Check::new(name, value, Expect::Zero, zero_tol, self.params.nonzero_floor));
    }

    fn nonzero(&mut self, name: &str, value: f64) {
        self.conclusions.push(Check::new(name, value, Expect::Nonzero, self.params.tol, self.params.nonzero_floor));
    }

    fn observe(&mut self, name: &str, value: f64) {
        self.observations.push(Observation {
            name: name.to_string(),
            value,
        });
    }

    fn hypotheses_met(&self) -> bool {
        !self.hypotheses.iter().any(|c| c.outcome == Outcome::Fails)
    }

    /// All indicators vanish together or are clearly nonzero together.
    /// Each indicator is `(name, value, zero_tol)`.
    fn equivalence(&mut self, name: &str, indicators: &[(&str, f64, f64)]) {
        let floor = self.params.nonzero_floor;
        for &(n, v, _) in indicators {
            self.observe(n, v);
        }
        let band = indicators.iter().any(|&(_, v, z)| v.is_nan() || (v > z && v <= floor));
        let zeros = indicators.iter().filter(|&&(_, v, z)| v <= z).count();
        let mixed = zeros != 0 && zeros != indicators.len();
        let mut check = Check::new(name, if mixed { 1.0 } else { 0.0 }, Expect::Zero, 0.5, 0.5);
        if band {
            check.outcome = Outcome::Inconclusive;
        }
        self.conclusions.push(check);
    }

    /// Runs the conclusion stage. When hypotheses already failed, errors
    /// there are recorded as notes instead of aborting the report.
    fn finish<F>(mut self, conclude: F) -> Result<TheoremReport>
    where
        F: FnOnce(&mut Self) -> Result<()>,
    {
        if let Err(e) = conclude(&mut self) {
            if self.hypotheses_met() {
                return Err(e);
            }
            self.notes.push(format!("conclusions not evaluated: {e}"));
        }
        let verdict = judge(&self.hypotheses, &self.conclusions);
        Ok(TheoremReport {
            theorem: self.theorem,
            statement: self.theorem.summary(),
            instance: self.instance,
            hypotheses: self.hypotheses,
            conclusions: self.conclusions,
            observations: self.observations,
            tolerance: self.params.tol,
            verdict,
            samples: self.samples,
            notes: self.notes,
        })
    }
}

fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

/// Default curve seeds: `params.probes` random points in the central half
/// of the chart domain.
pub fn default_seeds(immersion: &Immersion, params: &VerifyParams) -> Vec<DVector<f64>> {
    Grid::random(&immersion.domain().shrink(0.5), params.probes, params.seed).points
}

fn check_grid(immersion: &Immersion, params: &VerifyParams) -> Grid {
    Grid::uniform(immersion.domain(), params.grid)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum AngleRange {
    /// θ < π/2: helix lines exist.
    BelowRight,
    /// θ > 0: ξ exists.
    AboveZero,
    /// 0 < θ < π/2.
    Open,
}

fn helix_hypotheses(b: &mut Builder, immersion: &Immersion, d: &DVector<f64>, range: AngleRange) -> Result<HelixVerdict> {
    let v = helix::check_helix(immersion, d, &check_grid(immersion, b.params), b.params.tol)?;
    b.instance.directions.push(to_vec(d));
    b.samples += v.grid_size;
    b.zero_hyp("helix-angle-spread", v.theta_spread, b.params.tol);
    b.observe("theta", v.theta_mean);
    if range != AngleRange::BelowRight {
        b.nonzero_hyp("theta-above-zero", v.theta_mean);
    }
    if range != AngleRange::AboveZero {
        b.nonzero_hyp("theta-below-right-angle", FRAC_PI_2 - v.theta_mean);
    }
    Ok(v)
}

fn helix_lines(b: &mut Builder, immersion: &Immersion, d: &DVector<f64>, seeds: &[DVector<f64>]) -> Result<Vec<CurveOnManifold>> {
    let field = InducedField::tangent_of(d);
    let mut out = Vec::with_capacity(seeds.len());
    for seed in seeds {
        let c = curves::integral_curve(immersion, &field, seed.as_slice(), b.params.s_max, b.params.step)?;
        if c.is_truncated() {
            b.notes.push(format!("helix line from {:?} truncated ({:?}) at s = {}", seed.as_slice(), c.termination, c.length()));
        }
        if c.len() < curves::MIN_SAMPLES {
            b.notes.push(format!("helix line from {:?} too short, skipped", seed.as_slice()));
            continue;
        }
        b.samples += c.len();
        out.push(c);
    }
    if out.is_empty() {
        return Err(Error::TooFewSamples {
            needed: curves::MIN_SAMPLES,
            got: 0,
        });
    }
    Ok(out)
}

fn record_seeds(b: &mut Builder, seeds: &[DVector<f64>]) {
    b.instance.seeds = seeds.iter().map(to_vec).collect();
}

/// Helix lines are geodesics: tangential part of their acceleration.
pub fn verify_helix_lines_geodesic(
    immersion: &Immersion,
    d: &DVector<f64>,
    seeds: &[DVector<f64>],
    params: &VerifyParams,
) -> Result<TheoremReport> {
    let mut b = Builder::new(TheoremId::HelixLinesGeodesic, immersion, params);
    record_seeds(&mut b, seeds);
    helix_hypotheses(&mut b, immersion, d, AngleRange::BelowRight)?;
    b.finish(|b| {
        let lines = helix_lines(b, immersion, d, seeds)?;
        let r = max_of(lines.iter().map(|c| curves::geodesic_residual(immersion, c)).collect::<Result<Vec<_>>>()?);
        b.zero("geodesic-residual", r, params.fd_tol());
        Ok(())
    })
}

/// Along each helix line of `d`: `∇⊥_T ξ_j = 0` iff `nor(D_T T_j) = 0`.
pub fn verify_parallel_normal(
    immersion: &Immersion,
    d: &DVector<f64>,
    seeds: &[DVector<f64>],
    params: &VerifyParams,
) -> Result<TheoremReport> {
    let mut b = Builder::new(TheoremId::ParallelNormal, immersion, params);
    record_seeds(&mut b, seeds);
    helix_hypotheses(&mut b, immersion, d, AngleRange::Open)?;
    b.finish(|b| {
        let xi = InducedField::normal_of(d);
        let t = InducedField::tangent_of(d);
        let (mut perp, mut normal_part) = (0.0_f64, 0.0_f64);
        for c in helix_lines(b, immersion, d, seeds)? {
            curves::along(immersion, &c, |geo, tc, _| {
                perp = perp.max(connection::weingarten_split_at(geo, tc, &xi)?.nabla_perp.norm());
                normal_part = normal_part.max(connection::gauss_split_at(geo, tc, &t)?.second_fundamental.norm());
                Ok(0.0)
            })?;
        }
        b.equivalence(
            "parallel-normal-iff-tangent-derivative",
            &[("normal-connection-of-xi", perp, params.tol), ("normal-part-of-tj-derivative", normal_part, params.tol)],
        );
        Ok(())
    })
}

/// Normal curvature of each helix line equals its Frenet curvature.
pub fn verify_normal_curvature(
    immersion: &Immersion,
    d: &DVector<f64>,
    seeds: &[DVector<f64>],
    params: &VerifyParams,
) -> Result<TheoremReport> {
    let mut b = Builder::new(TheoremId::NormalCurvature, immersion, params);
    record_seeds(&mut b, seeds);
    helix_hypotheses(&mut b, immersion, d, AngleRange::BelowRight)?;
    b.finish(|b| {
        let (mut diff, mut kmax, mut nmax) = (0.0_f64, 0.0_f64, 0.0_f64);
        for c in helix_lines(b, immersion, d, seeds)? {
            let fr = curves::frenet(&c)?;
            let nc = curves::normal_curvature(immersion, &c)?;
            for (f, n) in fr.samples.iter().zip(&nc) {
                diff = diff.max((f.k - n).abs());
                kmax = kmax.max(f.k);
                nmax = nmax.max(*n);
            }
        }
        b.observe("max-first-curvature", kmax);
        b.observe("max-normal-curvature", nmax);
        b.zero("normal-curvature-minus-curvature", diff, params.fd_tol());
        Ok(())
    })
}

/// The principal normal of a curved helix line has no tangential part.
pub fn verify_principal_normal(
    immersion: &Immersion,
    d: &DVector<f64>,
    seeds: &[DVector<f64>],
    params: &VerifyParams,
) -> Result<TheoremReport> {
    let mut b = Builder::new(TheoremId::PrincipalNormal, immersion, params);
    record_seeds(&mut b, seeds);
    helix_hypotheses(&mut b, immersion, d, AngleRange::BelowRight)?;
    // Curvature is a hypothesis here, so the lines are needed up front.
    let lines = match helix_lines(&mut b, immersion, d, seeds) {
        Ok(l) => l,
        Err(e) if !b.hypotheses_met() => {
            b.notes.push(format!("helix lines unavailable: {e}"));
            return b.finish(|_| Ok(()));
        }
        Err(e) => return Err(e),
    };
    let frenets = lines.iter().map(curves::frenet).collect::<Result<Vec<_>>>()?;
    let kmin = frenets
        .iter()
        .flat_map(|f| f.samples.iter().map(|s| s.k))
        .fold(f64::INFINITY, f64::min);
    b.hypotheses.push(Check::new("min-first-curvature", kmin, Expect::Nonzero, K_FLOOR, K_FLOOR));
    b.finish(|b| {
        let mut r = 0.0_f64;
        for (c, fr) in lines.iter().zip(&frenets) {
            curves::along(immersion, c, |geo, _, i| {
                if let Some(v2) = &fr.samples[i].principal_normal {
                    r = r.max(geo.frame.tangential(v2).norm());
                }
                Ok(0.0)
            })?;
        }
        b.zero("tangential-part-of-principal-normal", r, params.fd_tol());
        Ok(())
    })
}

/// Test curves: integral curves of the coordinate fields from the first
/// seed and of random constant chart fields from every seed.
fn test_curves(b: &mut Builder, immersion: &Immersion, seeds: &[DVector<f64>]) -> Result<Vec<CurveOnManifold>> {
    let m = immersion.m();
    let mut rng = ChaCha8Rng::seed_from_u64(b.params.seed);
    let mut fields: Vec<(TangentField, &DVector<f64>)> = (0..m).map(|i| (TangentField::coordinate(i, m), &seeds[0])).collect();
    for seed in seeds {
        let dir = DVector::from_iterator(m, (0..m).map(|_| StandardNormal.sample(&mut rng))).normalize();
        fields.push((TangentField::constant(dir.as_slice()), seed));
    }
    let mut out = Vec::new();
    for (f, seed) in fields {
        let c = curves::integral_curve(immersion, &f, seed.as_slice(), b.params.s_max, b.params.step)?;
        if c.len() >= curves::MIN_SAMPLES {
            b.samples += c.len();
            out.push(c);
        }
    }
    Ok(out)
}

/// Every curve is asymptotic for every ξ in the second normal space.
pub fn verify_second_normal_asymptotic(
    immersion: &Immersion,
    seeds: &[DVector<f64>],
    params: &VerifyParams,
) -> Result<TheoremReport> {
    let mut b = Builder::new(TheoremId::SecondNormalAsymptotic, immersion, params);
    record_seeds(&mut b, seeds);
    if seeds.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let dims = seeds
        .iter()
        .map(|u| connection::second_normal_space(immersion, u.as_slice()).map(|s| s.len()))
        .collect::<Result<Vec<_>>>()?;
    b.samples += seeds.len();
    let min_dim = dims.iter().copied().min().unwrap_or(0);
    b.observe("second-normal-dimension", min_dim as f64);
    b.hypotheses.push(Check::flag("second-normal-space-nonempty", min_dim > 0));
    b.finish(|b| {
        let curves = test_curves(b, immersion, seeds)?;
        b.observe("test-curves", curves.len() as f64);
        let mut r = 0.0_f64;
        for c in &curves {
            curves::along(immersion, c, |geo, _, i| {
                let t = geo.frame.tangent_basis.transpose() * &c.samples[i].tangent;
                for xi in connection::second_normal_space_at(geo)? {
                    let s = connection::shape_operator_at(geo, &xi)?;
                    r = r.max(t.dot(&(s * &t)).abs());
                }
                Ok(0.0)
            })?;
        }
        b.zero("asymptotic-residual", r, params.tol);
        Ok(())
    })
}

/// `∇_X T_j = 0` for all X iff `⟨A^ξ_j X, X⟩ = 0` for all X.
pub fn verify_parallel_tangent(
    immersion: &Immersion,
    d: &DVector<f64>,
    points: &[DVector<f64>],
    params: &VerifyParams,
) -> Result<TheoremReport> {
    let mut b = Builder::new(TheoremId::ParallelTangent, immersion, params);
    record_seeds(&mut b, points);
    helix_hypotheses(&mut b, immersion, d, AngleRange::Open)?;
    b.finish(|b| {
        let t = InducedField::tangent_of(d);
        let xi = InducedField::normal_of(d);
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let (mut nabla, mut asym) = (0.0_f64, 0.0_f64);
        for u in points {
            let geo = immersion.local(u.as_slice())?;
            let e = &geo.frame.tangent_basis;
            let mut probes: Vec<DVector<f64>> = (0..e.ncols()).map(|i| e.column(i).into_owned()).collect();
            for _ in 0..params.probes {
                let w = DVector::from_iterator(e.ncols(), (0..e.ncols()).map(|_| StandardNormal.sample(&mut rng)));
                probes.push((e * w).normalize());
            }
            for x in &probes {
                let xc = geo.frame.chart_components(x);
                nabla = nabla.max(connection::gauss_split_at(&geo, &xc, &t)?.nabla.norm());
                asym = asym.max(connection::weingarten_split_at(&geo, &xc, &xi)?.shape.dot(x).abs());
            }
            b.samples += probes.len();
        }
        b.equivalence(
            "tangent-parallel-iff-all-asymptotic",
            &[("covariant-derivative-of-tj", nabla, params.tol), ("asymptotic-form-of-xi", asym, params.tol)],
        );
        Ok(())
    })
}

/// Helix lines are asymptotic curves for the normal direction `ξ_j`.
pub fn verify_helix_lines_asymptotic(
    immersion: &Immersion,
    d: &DVector<f64>,
    seeds: &[DVector<f64>],
    params: &VerifyParams,
) -> Result<TheoremReport> {
    let mut b = Builder::new(TheoremId::HelixLinesAsymptotic, immersion, params);
    record_seeds(&mut b, seeds);
    helix_hypotheses(&mut b, immersion, d, AngleRange::Open)?;
    b.finish(|b| {
        let xi = InducedField::normal_of(d);
        let r = max_of(
            helix_lines(b, immersion, d, seeds)?
                .iter()
                .map(|c| curves::asymptotic_residual(immersion, c, &xi))
                .collect::<Result<Vec<_>>>()?,
        );
        b.zero("asymptotic-residual", r, params.tol);
        Ok(())
    })
}

/// On a non-straight line of curvature for `ξ` with `ξ'` tangential, no
/// helix direction lies in `span{ξ, T}`.
pub fn verify_span_exclusion(
    immersion: &Immersion,
    directions: &[DVector<f64>],
    curve_field: &TangentField,
    seed: &DVector<f64>,
    xi: &NormalField,
    params: &VerifyParams,
) -> Result<TheoremReport> {
    let mut b = Builder::new(TheoremId::SpanExclusion, immersion, params);
    record_seeds(&mut b, std::slice::from_ref(seed));
    b.instance.curve_field = Some(curve_field.components().iter().map(|e| e.to_string()).collect());
    b.instance.normal_field = Some(xi.components().iter().map(|e| e.to_string()).collect());
    let grid = check_grid(immersion, params);
    for (j, d) in directions.iter().enumerate() {
        let v = helix::check_helix(immersion, d, &grid, params.tol)?;
        b.instance.directions.push(to_vec(d));
        b.samples += v.grid_size;
        b.zero_hyp(&format!("helix-angle-spread[{j}]"), v.theta_spread, params.tol);
    }
    let c = curves::integral_curve(immersion, curve_field, seed.as_slice(), params.s_max, params.step)?;
    if c.is_truncated() {
        b.notes.push(format!("curve truncated ({:?}) at s = {}", c.termination, c.length()));
    }
    b.samples += c.len();
    let fr = curves::frenet(&c)?;
    let (loc, _) = curves::line_of_curvature_residual(immersion, &c, xi)?;
    let perp = max_of(curves::along(immersion, &c, |geo, tc, _| {
        Ok(connection::weingarten_split_at(geo, tc, xi)?.nabla_perp.norm())
    })?);
    let kmin = fr.samples.iter().map(|s| s.k).fold(f64::INFINITY, f64::min);
    b.zero_hyp("line-of-curvature-residual", loc, params.tol);
    b.hypotheses.push(Check::new("min-first-curvature", kmin, Expect::Nonzero, K_FLOOR, K_FLOOR));
    b.zero_hyp("normal-part-of-xi-derivative", perp, params.tol);
    b.finish(|b| {
        for (j, d) in directions.iter().enumerate() {
            let dist = curves::along(immersion, &c, |geo, _, i| {
                let t = &c.samples[i].tangent;
                let x = xi.value(geo)?;
                let xn = x.norm();
                if xn < connection::VANISHING_TOL {
                    return Err(Error::VanishingField { norm: xn });
                }
                let x = x / xn;
                Ok((d - t * d.dot(t) - &x * d.dot(&x)).norm())
            })?;
            let min = dist.into_iter().fold(f64::INFINITY, f64::min);
            b.nonzero(&format!("distance-to-span[{j}]"), min);
        }
        Ok(())
    })
}

/// Three-way equivalence along helix lines: `∇⊥_T ξ = 0`, zero normal
/// curvature, straight lines.
pub fn verify_ruled_helix(
    immersion: &Immersion,
    d: &DVector<f64>,
    seeds: &[DVector<f64>],
    params: &VerifyParams,
) -> Result<TheoremReport> {
    let mut b = Builder::new(TheoremId::RuledHelix, immersion, params);
    record_seeds(&mut b, seeds);
    helix_hypotheses(&mut b, immersion, d, AngleRange::Open)?;
    let full = manifold::is_full(immersion, &check_grid(immersion, params))?;
    b.hypotheses.push(Check::flag("full", full));
    b.finish(|b| {
        let xi = InducedField::normal_of(d);
        let (mut perp, mut normal, mut straight) = (0.0_f64, 0.0_f64, 0.0_f64);
        for c in helix_lines(b, immersion, d, seeds)? {
            curves::along(immersion, &c, |geo, tc, _| {
                perp = perp.max(connection::weingarten_split_at(geo, tc, &xi)?.nabla_perp.norm());
                Ok(0.0)
            })?;
            normal = normal.max(max_of(curves::normal_curvature(immersion, &c)?));
            straight = straight.max(curves::straightness_residual(&c)?);
        }
        b.equivalence(
            "ruled-equivalence",
            &[
                ("normal-connection-of-xi", perp, params.tol),
                ("normal-curvature", normal, params.tol),
                ("straightness-residual", straight, params.fd_tol()),
            ],
        );
        Ok(())
    })
}

/// Helix lines of a helix hypersurface are straight.
pub fn verify_hypersurface_ruled(
    immersion: &Immersion,
    d: &DVector<f64>,
    seeds: &[DVector<f64>],
    params: &VerifyParams,
) -> Result<TheoremReport> {
    let mut b = Builder::new(TheoremId::HypersurfaceRuled, immersion, params);
    record_seeds(&mut b, seeds);
    b.hypotheses.push(Check::flag("hypersurface", immersion.codim() == 1));
    helix_hypotheses(&mut b, immersion, d, AngleRange::BelowRight)?;
    b.finish(|b| {
        let (mut normal, mut straight) = (0.0_f64, 0.0_f64);
        for c in helix_lines(b, immersion, d, seeds)? {
            normal = normal.max(max_of(curves::normal_curvature(immersion, &c)?));
            straight = straight.max(curves::straightness_residual(&c)?);
        }
        b.zero("straightness-residual", straight, params.fd_tol());
        b.zero("normal-curvature", normal, params.tol);
        Ok(())
    })
}

/// Inputs for one verifier run.
#[derive(Debug, Clone)]
pub struct Request {
    pub theorem: TheoremId,
    pub immersion: Immersion,
    /// Helix directions. Only the first is used except by [`TheoremId::SpanExclusion`].
    pub directions: Vec<DVector<f64>>,
    /// Curve seeds or sample points; defaults from [`default_seeds`] when empty.
    pub seeds: Vec<DVector<f64>>,
    pub curve_field: Option<TangentField>,
    pub normal_field: Option<NormalField>,
}

impl Request {
    pub fn new(theorem: TheoremId, immersion: Immersion) -> Self {
        Request {
            theorem,
            immersion,
            directions: Vec::new(),
            seeds: Vec::new(),
            curve_field: None,
            normal_field: None,
        }
    }

    pub fn direction(mut self, d: &[f64]) -> Self {
        self.directions.push(DVector::from_column_slice(d).normalize());
        self
    }

    pub fn seed(mut self, u: &[f64]) -> Self {
        self.seeds.push(DVector::from_column_slice(u));
        self
    }

    pub fn curve(mut self, field: TangentField) -> Self {
        self.curve_field = Some(field);
        self
    }

    pub fn normal(mut self, field: NormalField) -> Self {
        self.normal_field = Some(field);
        self
    }
}

fn missing(what: &str, theorem: TheoremId) -> Error {
    Error::MissingInput(format!("theorem {theorem} needs {what}"))
}

/// Dispatches a request to its verifier.
pub fn verify(req: &Request, params: &VerifyParams) -> Result<TheoremReport> {
    let m = &req.immersion;
    let seeds = if req.seeds.is_empty() { default_seeds(m, params) } else { req.seeds.clone() };
    let d = || req.directions.first().ok_or_else(|| missing("a direction", req.theorem));
    match req.theorem {
        TheoremId::HelixLinesGeodesic => verify_helix_lines_geodesic(m, d()?, &seeds, params),
        TheoremId::ParallelNormal => verify_parallel_normal(m, d()?, &seeds, params),
        TheoremId::NormalCurvature => verify_normal_curvature(m, d()?, &seeds, params),
        TheoremId::PrincipalNormal => verify_principal_normal(m, d()?, &seeds, params),
        TheoremId::SecondNormalAsymptotic => verify_second_normal_asymptotic(m, &seeds, params),
        TheoremId::ParallelTangent => verify_parallel_tangent(m, d()?, &seeds, params),
        TheoremId::HelixLinesAsymptotic => verify_helix_lines_asymptotic(m, d()?, &seeds, params),
        TheoremId::SpanExclusion => {
            let field = req.curve_field.as_ref().ok_or_else(|| missing("a curve field", req.theorem))?;
            let xi = req.normal_field.as_ref().ok_or_else(|| missing("a normal field", req.theorem))?;
            let seed = req.seeds.first().ok_or_else(|| missing("a curve seed", req.theorem))?;
            verify_span_exclusion(m, &req.directions, field, seed, xi, params)
        }
        TheoremId::RuledHelix => verify_ruled_helix(m, d()?, &seeds, params),
        TheoremId::HypersurfaceRuled => verify_hypersurface_ruled(m, d()?, &seeds, params),
    }
}

/// One catalog instance of the suite and the verdict it must produce.
#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub request: Request,
    pub expected: Verdict,
}

const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// The catalog instances of every verifier with their expected verdicts.
pub fn catalog_cases() -> Result<Vec<SuiteCase>> {
    use TheoremId::*;
    use Verdict::*;
    let cat = |name: &str| catalog::immersion(name);
    let case = |request: Request, expected: Verdict| SuiteCase { request, expected };
    let tilted = Immersion::parse("tilted-plane", &["u1", "u2", "(u1 + u2)/2"], vec![(-2.0, 2.0), (-2.0, 2.0)])?;
    let cone_normal = || NormalField::parse(&["cos(u1)/sqrt(2)", "sin(u1)/sqrt(2)", "-1/sqrt(2)"], 2);
    let outward = || NormalField::parse(&["cos(u1)", "sin(u1)", "0"], 2);
    let e3 = [0.0, 0.0, 1.0];
    let e3_4 = [0.0, 0.0, 1.0, 0.0];
    let mix = [0.0, 0.0, R, R];
    let diag = [1.0, 1.0, 1.0];
    Ok(vec![
        case(Request::new(HelixLinesGeodesic, cat("cone")?).direction(&e3), Confirmed),
        case(Request::new(HelixLinesGeodesic, cat("cylinder")?).direction(&e3), Confirmed),
        case(Request::new(HelixLinesGeodesic, cat("helix-cylinder-4d")?).direction(&e3_4), Confirmed),
        case(Request::new(HelixLinesGeodesic, cat("helix-cylinder-4d")?).direction(&mix), Confirmed),
        case(Request::new(HelixLinesGeodesic, cat("plane")?).direction(&diag), Confirmed),
        case(Request::new(HelixLinesGeodesic, cat("helix-curve")?).direction(&e3), Confirmed),
        case(Request::new(ParallelNormal, cat("helix-cylinder-4d")?).direction(&e3_4), Confirmed),
        case(Request::new(ParallelNormal, cat("circle-cylinder-4d")?).direction(&mix), Confirmed),
        case(Request::new(ParallelNormal, cat("cone")?).direction(&e3), Confirmed),
        case(Request::new(ParallelNormal, cat("plane")?).direction(&[1.0, 0.0, 0.0]), HypothesisNotMet),
        case(Request::new(NormalCurvature, cat("helix-cylinder-4d")?).direction(&e3_4), Confirmed),
        case(Request::new(NormalCurvature, cat("cone")?).direction(&e3), Confirmed),
        case(Request::new(NormalCurvature, cat("cylinder")?).direction(&e3), Confirmed),
        case(Request::new(NormalCurvature, cat("sphere")?).direction(&e3), HypothesisNotMet),
        case(Request::new(PrincipalNormal, cat("helix-cylinder-4d")?).direction(&e3_4), Confirmed),
        case(Request::new(PrincipalNormal, cat("cone")?).direction(&e3), HypothesisNotMet),
        case(Request::new(PrincipalNormal, cat("circle-cylinder-4d")?).direction(&mix), HypothesisNotMet),
        case(Request::new(SecondNormalAsymptotic, cat("circle-cylinder-4d")?), Confirmed),
        case(Request::new(SecondNormalAsymptotic, cat("plane")?), Confirmed),
        case(Request::new(SecondNormalAsymptotic, cat("cylinder")?), HypothesisNotMet),
        case(Request::new(ParallelTangent, cat("circle-cylinder-4d")?).direction(&mix), Confirmed),
        case(Request::new(ParallelTangent, cat("cone")?).direction(&e3), Confirmed),
        case(Request::new(ParallelTangent, cat("plane")?).direction(&[1.0, 0.0, 0.0]), HypothesisNotMet),
        case(Request::new(HelixLinesAsymptotic, cat("cone")?).direction(&e3), Confirmed),
        case(Request::new(HelixLinesAsymptotic, cat("helix-cylinder-4d")?).direction(&e3_4), Confirmed),
        case(Request::new(HelixLinesAsymptotic, cat("circle-cylinder-4d")?).direction(&mix), Confirmed),
        case(
            Request::new(SpanExclusion, cat("cone")?)
                .direction(&e3)
                .seed(&[-0.5, 1.0])
                .curve(TangentField::coordinate(0, 2))
                .normal(cone_normal()?),
            Confirmed,
        ),
        case(
            Request::new(SpanExclusion, cat("cylinder")?)
                .direction(&e3)
                .seed(&[-0.5, 0.0])
                .curve(TangentField::coordinate(0, 2))
                .normal(outward()?),
            Confirmed,
        ),
        case(
            Request::new(SpanExclusion, cat("cone")?)
                .direction(&e3)
                .seed(&[0.0, 1.0])
                .curve(TangentField::coordinate(1, 2))
                .normal(cone_normal()?),
            HypothesisNotMet,
        ),
        case(Request::new(RuledHelix, cat("cone")?).direction(&e3), Confirmed),
        case(Request::new(RuledHelix, cat("helix-cylinder-4d")?).direction(&e3_4), Confirmed),
        case(Request::new(RuledHelix, cat("plane")?).direction(&diag), HypothesisNotMet),
        case(Request::new(HypersurfaceRuled, cat("cone")?).direction(&e3), Confirmed),
        case(Request::new(HypersurfaceRuled, cat("cylinder")?).direction(&e3), Confirmed),
        case(Request::new(HypersurfaceRuled, tilted).direction(&e3), Confirmed),
    ])
}

/// Runs every catalog case.
pub fn catalog_suite(params: &VerifyParams) -> Result<Vec<(SuiteCase, TheoremReport)>> {
    catalog_cases()?
        .into_iter()
        .map(|case| verify(&case.request, params).map(|r| (case, r)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(req: Request) -> TheoremReport {
        verify(&req, &VerifyParams::default()).unwrap()
    }

    fn obs(r: &TheoremReport, name: &str) -> f64 {
        r.observations.iter().find(|o| o.name == name).unwrap().value
    }

    fn conclusion(r: &TheoremReport, name: &str) -> f64 {
        r.conclusions.iter().find(|o| o.name == name).unwrap().value
    }

    #[test]
    fn check_bands() {
        let c = |v, e| Check::new("x", v, e, 1e-6, 1e-3).outcome;
        assert_eq!(c(1e-9, Expect::Zero), Outcome::Holds);
        assert_eq!(c(1e-4, Expect::Zero), Outcome::Inconclusive);
        assert_eq!(c(1e-2, Expect::Zero), Outcome::Fails);
        assert_eq!(c(1e-2, Expect::Nonzero), Outcome::Holds);
        assert_eq!(c(1e-9, Expect::Nonzero), Outcome::Fails);
        assert_eq!(Check::flag("f", false).outcome, Outcome::Fails);
    }

    #[test]
    fn theorem_ids() {
        for t in TheoremId::ALL {
            assert_eq!(t.as_str().parse::<TheoremId>().unwrap(), t);
        }
        assert!("3.7".parse::<TheoremId>().unwrap_err().contains("3.8"));
        assert!("9.9".parse::<TheoremId>().is_err());
    }

    #[test]
    fn curved_helix_line_parallel_normal_both_nonzero() {
        let r = run(Request::new(TheoremId::ParallelNormal, catalog::immersion("helix-cylinder-4d").unwrap()).direction(&[0.0, 0.0, 1.0, 0.0]));
        assert_eq!(r.verdict, Verdict::Confirmed);
        assert!((obs(&r, "normal-part-of-tj-derivative") - 0.5).abs() < 1e-9);
        assert!(obs(&r, "normal-connection-of-xi") > 0.1);
    }

    #[test]
    fn span_distance_on_cone_circle() {
        let r = run(
            Request::new(TheoremId::SpanExclusion, catalog::immersion("cone").unwrap())
                .direction(&[0.0, 0.0, 1.0])
                .seed(&[-0.5, 1.0])
                .curve(TangentField::coordinate(0, 2))
                .normal(NormalField::parse(&["cos(u1)/sqrt(2)", "sin(u1)/sqrt(2)", "-1/sqrt(2)"], 2).unwrap()),
        );
        assert_eq!(r.verdict, Verdict::Confirmed);
        assert!((conclusion(&r, "distance-to-span[0]") - R).abs() < 1e-9);
    }

    #[test]
    fn parallel_tangent_on_cone_is_nonzero() {
        let r = run(Request::new(TheoremId::ParallelTangent, catalog::immersion("cone").unwrap()).direction(&[0.0, 0.0, 1.0]));
        assert_eq!(r.verdict, Verdict::Confirmed);
        assert!(obs(&r, "covariant-derivative-of-tj") > 1e-2);
        assert!(obs(&r, "asymptotic-form-of-xi") > 1e-2);
    }

    #[test]
    fn missing_inputs_are_input_errors() {
        let err = verify(&Request::new(TheoremId::RuledHelix, catalog::immersion("cone").unwrap()), &VerifyParams::default()).unwrap_err();
        assert!(err.is_input_error());
    }

    #[test]
    fn suite_matches_expected_verdicts() {
        for (case, report) in catalog_suite(&VerifyParams::default()).unwrap() {
            assert_eq!(
                report.verdict, case.expected,
                "{} on {}: {:#?}",
                report.theorem, report.instance.manifold, report
            );
        }
    }
}
