//! Direct quadrature of the K-energy integral on rational curves.
//!
//! A curve is covered by the charts `|z| ≤ 1` and `|w| ≤ 1`, `w = 1/z`. On a
//! chart, `F = σT` induces `ω = (h/π) dx dy` with
//! `h = |F ∧ F'|² / |F|⁴`, and `c_1(ω) = -(1/4π) Δ log h dx dy`.
//!
//! Along a path `σ_t` from the identity with `φ_t = log(|σ_t T|²/|T|²)`,
//!
//! ```text
//! M_1 = -2V ∫_0^1 ∫_X φ̇_t (c_1(ω_t) - μ_1 ω_t) dt.
//! ```

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::affine_fit;
use crate::catalog::{Parametrization, VarietyInstance};
use crate::error::{Error, Result};
use crate::pairing::OneParamSubgroup;

type CMat = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Chart {
    /// `|z| ≤ 1`.
    Finite,
    /// `|w| ≤ 1`, `w = 1/z`, with `T̃(w) = w^D T(1/w)`.
    Infinite,
}

/// A rational curve with its two affine charts.
#[derive(Clone, Debug)]
pub struct CurveChart {
    finite: Parametrization,
    infinite: Parametrization,
    degree: u32,
    mu1: f64,
}

impl CurveChart {
    pub fn new(param: Parametrization, degree: u32, mu1: f64) -> Result<Self> {
        if param.dim() != 1 {
            return Err(Error::invalid("numeric quadrature needs a curve"));
        }
        let infinite = param.at_infinity()?;
        let origin = Complex64::zero();
        for p in [&param, &infinite] {
            if p.eval(&[origin]).iter().all(|c| c.norm() == 0.0) {
                return Err(Error::invalid("parametrization vanishes at a chart origin"));
            }
        }
        Ok(Self {
            finite: param,
            infinite,
            degree,
            mu1,
        })
    }

    pub fn from_instance(inst: &VarietyInstance) -> Result<Self> {
        let param = inst
            .parametrization
            .clone()
            .ok_or_else(|| Error::Missing(format!("{} has no parametrization", inst.name)))?;
        if inst.data.n != 1 {
            return Err(Error::invalid("numeric quadrature needs a curve"));
        }
        let mu1 = inst.data.mu.mu[1]
            .to_f64()
            .ok_or_else(|| Error::Numerical("mu_1 does not fit in f64".into()))?;
        Self::new(param, inst.data.degree, mu1)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn param(&self, chart: Chart) -> &Parametrization {
        match chart {
            Chart::Finite => &self.finite,
            Chart::Infinite => &self.infinite,
        }
    }

    /// `(σT, σT', σT'')` at `z`.
    fn jet(&self, chart: Chart, sigma: &CMat, z: Complex64) -> [Vec<Complex64>; 3] {
        let [t0, t1, t2] = self.param(chart).eval_curve(z);
        [apply(sigma, &t0), apply(sigma, &t1), apply(sigma, &t2)]
    }
}

fn apply(m: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// `|a ∧ b|²` as a sum of 2×2 minors, free of cancellation.
fn wedge2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            s += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
        }
    }
    s
}

/// `|a ∧ b ∧ c|²` as a sum of 3×3 minors.
fn wedge3(a: &[Complex64], b: &[Complex64], c: &[Complex64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let d = a[i] * (b[j] * c[k] - b[k] * c[j]) - a[j] * (b[i] * c[k] - b[k] * c[i])
                    + a[k] * (b[i] * c[j] - b[j] * c[i]);
                s += d.norm_sqr();
            }
        }
    }
    s
}

fn check_sigma(chart: &CurveChart, sigma: &CMat) -> Result<()> {
    let size = chart.finite.components.len();
    if sigma.nrows() != size || sigma.ncols() != size {
        return Err(Error::shape(
            format!("{size}x{size}"),
            format!("{}x{}", sigma.nrows(), sigma.ncols()),
        ));
    }
    Ok(())
}

fn metric_from_jet(f: &[Complex64], f1: &[Complex64]) -> Result<f64> {
    let nf = norm_sq(f);
    if nf == 0.0 {
        return Err(Error::Numerical("σT vanishes at a chart point".into()));
    }
    Ok(wedge2(f, f1) / (nf * nf))
}

/// `h = (|F|²|F'|² - |⟨F', F⟩|²) / |F|⁴` for `F = σT`: `ω = (h/π) dx dy`.
pub fn bergman_metric(chart: &CurveChart, which: Chart, sigma: &CMat, z: Complex64) -> Result<f64> {
    check_sigma(chart, sigma)?;
    let [f, f1, _] = chart.jet(which, sigma, z);
    metric_from_jet(&f, &f1)
}

/// `(φ_t, φ̇_t)` on the path `e^{tξ}` at a chart point.
pub fn potential_path(chart: &CurveChart, which: Chart, xi: &CMat, t: f64, z: Complex64) -> Result<(f64, f64)> {
    check_sigma(chart, xi)?;
    let path = LinearPath::new(xi.clone())?;
    let (s, ds) = path.at(t);
    let [t0, _, _] = chart.param(which).eval_curve(z);
    let f = apply(&s, &t0);
    let nf = norm_sq(&f);
    let phi = (nf / norm_sq(&t0)).ln();
    let dphi = 2.0 * inner(&apply(&ds, &t0), &f).re / nf;
    Ok((phi, dphi))
}

/// Density of `c_1(ω)` from the Plücker formula
/// `-∂∂̄ log h = 2h - |F|²|F ∧ F' ∧ F''|² / |F ∧ F'|⁴`.
pub fn chern1_density_exact(chart: &CurveChart, which: Chart, sigma: &CMat, z: Complex64) -> Result<f64> {
    check_sigma(chart, sigma)?;
    let [f, f1, f2] = chart.jet(which, sigma, z);
    let h = metric_from_jet(&f, &f1)?;
    let g = wedge2(&f, &f1);
    if g == 0.0 {
        return Err(Error::Numerical("curve is not immersed at a chart point".into()));
    }
    Ok((2.0 * h - norm_sq(&f) * wedge3(&f, &f1, &f2) / (g * g)) / PI)
}

/// Density of `c_1(ω)` as `-(1/4π) Δ log h`, by fourth-order central
/// differences with a step scaled to the local length `h^{-1/2}`.
pub fn chern1_density(chart: &CurveChart, which: Chart, sigma: &CMat, z: Complex64) -> Result<f64> {
    check_sigma(chart, sigma)?;
    let lh = |p: Complex64| -> Result<f64> {
        let [f, f1, _] = chart.jet(which, sigma, p);
        Ok(metric_from_jet(&f, &f1)?.ln())
    };
    let h0 = lh(z)?;
    let step = 2e-3 * (-0.5 * h0).exp().min(1.0);
    if step < 1e-150 || z.norm() + step == z.norm() && step < f64::EPSILON * z.norm() {
        return Err(Error::Numerical("finite-difference step underflow".into()));
    }
    let mut lap = 0.0;
    for dir in [Complex64::new(step, 0.0), Complex64::new(0.0, step)] {
        let d2 = -lh(z + 2.0 * dir)? + 16.0 * lh(z + dir)? - 30.0 * h0 + 16.0 * lh(z - dir)?
            - lh(z - 2.0 * dir)?;
        lap += d2 / (12.0 * step * step);
    }
    Ok(-lap / (4.0 * PI))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CurvatureMethod {
    Exact,
    FiniteDifference,
}

/// Node counts for the chart quadrature. The radial variable is `s = -ln r`
/// on `[0, S]`, split into short panels of Gauss–Legendre nodes.
#[derive(Clone, Debug, Serialize)]
pub struct QuadratureSpec {
    pub angular: usize,
    pub panel_nodes: usize,
    pub time_nodes: usize,
    /// `S`; chosen from the conditioning of `σ` when absent.
    pub radial_extent: Option<f64>,
    /// Agreement required between this rule and a refined one.
    pub tolerance: f64,
    pub curvature: CurvatureMethod,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            angular: 32,
            panel_nodes: 8,
            time_nodes: 24,
            radial_extent: None,
            tolerance: 1e-7,
            curvature: CurvatureMethod::Exact,
        }
    }
}

impl QuadratureSpec {
    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.angular < 8 || self.panel_nodes < 8 || self.time_nodes < 8 {
            return Err(Error::invalid("quadrature node counts must be at least 8"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("quadrature tolerance must be positive"));
        }
        if matches!(self.radial_extent, Some(s) if !(s > 0.0)) {
            return Err(Error::invalid("radial extent must be positive"));
        }
        Ok(())
    }

    /// One and a half times as many nodes in every direction.
    pub fn refined(&self) -> Self {
        let up = |n: usize| n + n / 2;
        Self {
            angular: up(self.angular),
            panel_nodes: up(self.panel_nodes),
            time_nodes: up(self.time_nodes),
            radial_extent: self.radial_extent.map(|s| s + 10.0),
            ..self.clone()
        }
    }
}

fn gl(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(n).expect("validated")).as_node_weight_pairs().to_vec()
}

/// Chart points and area weights (for `dx dy`) covering one unit disk. The
/// integrand varies like `r^{2D}` for a degree-`D` chart, so panels shrink
/// with `D`.
fn disk_nodes(spec: &QuadratureSpec, extent: f64, degree: u32) -> Vec<(Complex64, f64)> {
    let rule = gl(spec.panel_nodes);
    let panels = (extent * degree.div_ceil(2).max(1) as f64).ceil() as usize;
    let width = extent / panels as f64;
    let dtheta = 2.0 * PI / spec.angular as f64;
    let mut out = Vec::with_capacity(panels * rule.len() * spec.angular);
    for p in 0..panels {
        let a = p as f64 * width;
        for &(x, w) in &rule {
            let s = a + 0.5 * width * (x + 1.0);
            let r = (-s).exp();
            let rw = 0.5 * width * w * r * r * dtheta;
            for m in 0..spec.angular {
                out.push((Complex64::from_polar(r, m as f64 * dtheta), rw));
            }
        }
    }
    out
}

/// `ln` of the 2-norm condition number.
fn log_condition(m: &CMat) -> f64 {
    let sv = m.clone().singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    (hi / lo).ln()
}

fn extent_for(spec: &QuadratureSpec, log_cond: f64) -> f64 {
    spec.radial_extent.unwrap_or(30.0 + 3.0 * log_cond.max(0.0))
}

/// Sum in a fixed pairwise order, independent of how the terms were computed.
fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn density(chart: &CurveChart, which: Chart, sigma: &CMat, z: Complex64, m: CurvatureMethod) -> Result<f64> {
    match m {
        CurvatureMethod::Exact => chern1_density_exact(chart, which, sigma, z),
        CurvatureMethod::FiniteDifference => chern1_density(chart, which, sigma, z),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceIntegrals {
    /// `∫ ω`.
    pub volume: f64,
    /// `∫ c_1(ω)`.
    pub chern1: f64,
    /// Smallest `h` over the nodes.
    pub min_metric: f64,
}

/// `∫ ω_σ` and `∫ c_1(ω_σ)` over both charts.
pub fn surface_integrals(chart: &CurveChart, sigma: &CMat, spec: &QuadratureSpec) -> Result<SurfaceIntegrals> {
    spec.validate()?;
    check_sigma(chart, sigma)?;
    let nodes = disk_nodes(spec, extent_for(spec, log_condition(sigma)), chart.finite.degree());
    let vals: Vec<(f64, f64, f64)> = [Chart::Finite, Chart::Infinite]
        .iter()
        .flat_map(|&c| nodes.iter().map(move |n| (c, n)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(c, &(z, w))| {
            let h = bergman_metric(chart, c, sigma, z)?;
            let k = density(chart, c, sigma, z, spec.curvature)?;
            Ok((w * h / PI, w * k, h))
        })
        .collect::<Result<_>>()?;
    let vol: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let c1: Vec<f64> = vals.iter().map(|v| v.1).collect();
    Ok(SurfaceIntegrals {
        volume: pairwise_sum(&vol),
        chern1: pairwise_sum(&c1),
        min_metric: vals.iter().map(|v| v.2).fold(f64::INFINITY, f64::min),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MuReport {
    pub volume: f64,
    pub chern1: f64,
    pub mu1: f64,
}

/// `V = ∫ ω_0`, `∫ c_1(ω_0)` and `μ_1 = ∫ c_1 / V` at the identity; fails if
/// a refined rule disagrees by more than the tolerance.
pub fn mu_quadrature(chart: &CurveChart, spec: &QuadratureSpec) -> Result<MuReport> {
    let id = CMat::identity(chart.finite.components.len(), chart.finite.components.len());
    let a = surface_integrals(chart, &id, spec)?;
    let b = surface_integrals(chart, &id, &spec.refined())?;
    let err = (a.volume - b.volume).abs().max((a.chern1 - b.chern1).abs());
    if err > spec.tolerance {
        return Err(Error::Numerical(format!(
            "quadrature did not converge: refined rule differs by {err:.3e}"
        )));
    }
    Ok(MuReport {
        volume: b.volume,
        chern1: b.chern1,
        mu1: b.chern1 / b.volume,
    })
}

/// A path `t ↦ σ_t` in `GL(N+1)` with `σ_0 = 1`, returning `(σ_t, σ̇_t)`.
pub trait PotentialPath: Sync {
    fn at(&self, t: f64) -> (CMat, CMat);
}

fn expm(m: &CMat) -> CMat {
    m.clone().exp()
}

fn check_traceless(xi: &CMat) -> Result<()> {
    if !xi.is_square() {
        return Err(Error::invalid("generator must be square"));
    }
    if xi.trace().norm() > 1e-9 * (1.0 + xi.norm()) {
        return Err(Error::invalid("generator must be traceless"));
    }
    Ok(())
}

/// `σ_t = e^{tξ}`.
#[derive(Clone, Debug)]
pub struct LinearPath {
    xi: CMat,
}

impl LinearPath {
    pub fn new(xi: CMat) -> Result<Self> {
        check_traceless(&xi)?;
        Ok(Self { xi })
    }
}

impl PotentialPath for LinearPath {
    fn at(&self, t: f64) -> (CMat, CMat) {
        let s = expm(&(&self.xi * Complex64::new(t, 0.0)));
        let ds = &self.xi * &s;
        (s, ds)
    }
}

/// `σ_t = e^{t²ξ}`, the linear path run at a different speed.
#[derive(Clone, Debug)]
pub struct QuadraticPath {
    xi: CMat,
}

impl QuadraticPath {
    pub fn new(xi: CMat) -> Result<Self> {
        check_traceless(&xi)?;
        Ok(Self { xi })
    }
}

impl PotentialPath for QuadraticPath {
    fn at(&self, t: f64) -> (CMat, CMat) {
        let s = expm(&(&self.xi * Complex64::new(t * t, 0.0)));
        let ds = &self.xi * &s * Complex64::new(2.0 * t, 0.0);
        (s, ds)
    }
}

/// `σ_t = e^{tξ} e^{t(1-t)η}`: same endpoints as `e^{tξ}`, different path.
#[derive(Clone, Debug)]
pub struct DetourPath {
    xi: CMat,
    eta: CMat,
}

impl DetourPath {
    pub fn new(xi: CMat, eta: CMat) -> Result<Self> {
        check_traceless(&xi)?;
        check_traceless(&eta)?;
        if xi.shape() != eta.shape() {
            return Err(Error::shape(format!("{:?}", xi.shape()), format!("{:?}", eta.shape())));
        }
        Ok(Self { xi, eta })
    }
}

impl PotentialPath for DetourPath {
    fn at(&self, t: f64) -> (CMat, CMat) {
        let a = expm(&(&self.xi * Complex64::new(t, 0.0)));
        let b = expm(&(&self.eta * Complex64::new(t * (1.0 - t), 0.0)));
        let ds = &self.xi * &a * &b + &a * &self.eta * &b * Complex64::new(1.0 - 2.0 * t, 0.0);
        (a * b, ds)
    }
}

/// `M_1(σ_1)` by tensor quadrature in `t` and over both charts.
pub fn energy_quadrature(chart: &CurveChart, path: &dyn PotentialPath, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let times: Vec<(f64, f64, CMat, CMat)> = gl(spec.time_nodes)
        .into_iter()
        .map(|(x, w)| {
            let t = 0.5 * (x + 1.0);
            let (s, ds) = path.at(t);
            (t, 0.5 * w, s, ds)
        })
        .collect();
    let (s1, _) = path.at(1.0);
    check_sigma(chart, &s1)?;
    let log_cond = times
        .iter()
        .map(|(_, _, s, _)| log_condition(s))
        .fold(log_condition(&s1), f64::max);
    let nodes = disk_nodes(spec, extent_for(spec, log_cond), chart.finite.degree());
    let count = nodes.len();
    let jobs: Vec<(usize, Chart, usize)> = (0..times.len())
        .flat_map(|i| {
            [Chart::Finite, Chart::Infinite]
                .into_iter()
                .flat_map(move |c| (0..count).map(move |j| (i, c, j)))
        })
        .collect();
    let mu = chart.mu1;
    let vals: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, c, j)| {
            let (_, wt, s, ds) = &times[i];
            let (z, wz) = nodes[j];
            let [t0, t1, _] = chart.param(c).eval_curve(z);
            let f = apply(s, &t0);
            let nf = norm_sq(&f);
            let dphi = 2.0 * inner(&apply(ds, &t0), &f).re / nf;
            let h = metric_from_jet(&f, &apply(s, &t1))?;
            let k = density(chart, c, s, z, spec.curvature)?;
            let v = wt * wz * dphi * (k - mu * h / PI);
            if !v.is_finite() {
                return Err(Error::Numerical("non-finite integrand".into()));
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    Ok(-2.0 * chart.degree as f64 * pairwise_sum(&vals))
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergySlope {
    pub lambda: OneParamSubgroup,
    /// `(|t|, M_1(λ(t)))`.
    pub samples: Vec<(f64, f64)>,
    /// Least-squares slope against `log|t|²`.
    pub slope: f64,
    pub residual: f64,
}

/// `M_1(λ(t))` by quadrature along `e^{s ξ}`, `ξ = ln|t| · diag(a_i)`, and
/// its fitted slope against `log|t|²`.
pub fn energy_slope(
    chart: &CurveChart,
    lambda: &OneParamSubgroup,
    samples: &[f64],
    spec: &QuadratureSpec,
) -> Result<EnergySlope> {
    if samples.len() < 2 || samples.iter().any(|&t| !(0.0 < t && t < 1.0)) {
        return Err(Error::invalid("need at least 2 samples in (0, 1)"));
    }
    let gen = lambda.generator();
    let values = samples
        .iter()
        .map(|&t| {
            let path = LinearPath::new(&gen * Complex64::new(t.ln(), 0.0))?;
            Ok((t, energy_quadrature(chart, &path, spec)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = samples.iter().map(|t| 2.0 * t.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.1).collect();
    let (slope, _, residual) = affine_fit(&x, &y);
    Ok(EnergySlope {
        lambda: lambda.clone(),
        samples: values,
        slope,
        residual,
    })
}
