//! Higher K-energies `M_k(σ)` of Bergman metrics, evaluated three ways, and
//! a descent minimizer over `SL(N+1, ℂ)`.
//!
//! With `LR(P) = log ‖σ·P‖² - log ‖P‖²`, `R = Δ^{(n)}` the Chow form and
//! `d^∨_i = deg Δ^{(n-i)}`:
//!
//! ```text
//! M_k = Σ_{i=1}^k (-1)^{i+1} C(n-i, n-k) [deg R · LR(Δ^{(n-i)}) - d^∨_i · LR(R)]
//! ```
//!
//! Each evaluator is also available as an exact linear form in the symbols
//! `LR(Δ^{(n-i)})`, so their agreement can be checked as an identity.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::VarietyInstance;
use crate::chern::binomial;
use crate::error::{Error, Result};
use crate::exactpoly::{ExactPoly, FloatPoly};
use crate::invariants::VarietyData;
use crate::pairing::{
    log_fs_norm_sq, log_norm_derivative, log_norm_ratio, tensor_log_norm_ratio, FactorRef, FormalTensor,
    GroupElement,
};

fn ser_big<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v.to_i64() {
        Some(i) => s.serialize_i64(i),
        None => s.serialize_str(&v.to_string()),
    }
}

fn sign(i: u32) -> BigInt {
    if i % 2 == 0 {
        BigInt::from(1)
    } else {
        BigInt::from(-1)
    }
}

fn big_f64(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// `Σ_i c_i · LR(Δ^{(n-i)})` with exact integer coefficients; index 0 is
/// the Chow form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearForm(pub BTreeMap<u32, BigInt>);

impl Serialize for LinearForm {
    /// `{"0": c_0, "1": c_1, ...}` keyed by `i`.
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (i, c) in &self.0 {
            match c.to_i64() {
                Some(v) => m.serialize_entry(&i.to_string(), &v)?,
                None => m.serialize_entry(&i.to_string(), &c.to_string())?,
            }
        }
        m.end()
    }
}

impl LinearForm {
    fn add(&mut self, i: u32, c: BigInt) {
        let e = self.0.entry(i).or_default();
        *e += c;
        if e.is_zero() {
            self.0.remove(&i);
        }
    }

    fn add_form(&mut self, other: &LinearForm, scale: &BigInt) {
        for (&i, c) in &other.0 {
            self.add(i, c * scale);
        }
    }

    pub fn coefficient(&self, i: u32) -> BigInt {
        self.0.get(&i).cloned().unwrap_or_default()
    }

    /// Evaluates at `lr[i] = LR(Δ^{(n-i)})`.
    pub fn eval(&self, lr: &[f64]) -> f64 {
        self.0.iter().map(|(&i, c)| big_f64(c) * lr[i as usize]).sum()
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.0.iter().rev() {
            let sym = if *i == 0 { "LR(R)".to_string() } else { format!("LR(Δ{i})") };
            let (sgn, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                write!(f, "{}{mag}·{sym}", if sgn == "-" { "-" } else { "" })?;
            } else {
                write!(f, " {sgn} {mag}·{sym}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn check_k(data: &VarietyData, k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::OutOfRange {
            what: "k",
            detail: "k must be at least 1".into(),
        });
    }
    data.check_admissible(k)
}

/// The closed formula as a linear form.
pub fn formula_form(data: &VarietyData, k: u32) -> Result<LinearForm> {
    check_k(data, k)?;
    let dv = data.dual_degrees(k)?;
    let n = data.n as i64;
    let mut f = LinearForm::default();
    for i in 1..=k {
        let c = sign(i + 1) * binomial(n - i as i64, n - k as i64);
        f.add(i, &c * &dv[0]);
        f.add(0, -(&c * &dv[i as usize]));
    }
    Ok(f)
}

/// `M_k` from the recursion in `M_1, …, M_{k-1}`.
pub fn recursion_form(data: &VarietyData, k: u32) -> Result<LinearForm> {
    check_k(data, k)?;
    let dv = data.dual_degrees(k)?;
    let n = data.n as i64;
    let mut forms: Vec<LinearForm> = vec![LinearForm::default()];
    for j in 1..=k {
        let mut inner = LinearForm::default();
        inner.add(j, dv[0].clone());
        inner.add(0, -dv[j as usize].clone());
        for (i, m) in forms.iter().enumerate().skip(1) {
            inner.add_form(m, &(sign(i as u32) * binomial(n - i as i64, n - j as i64)));
        }
        let mut m = LinearForm::default();
        m.add_form(&inner, &sign(j + 1));
        forms.push(m);
    }
    Ok(forms.pop().expect("k >= 1"))
}

/// The pair `(v_k, w_k)` with `M_k(σ) = LR(σ, v_k) - LR(σ, w_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairVectors {
    pub k: u32,
    pub v: FormalTensor,
    pub w: FormalTensor,
    #[serde(serialize_with = "ser_big")]
    pub degree: BigInt,
}

impl PairVectors {
    pub fn form(&self) -> LinearForm {
        let mut f = LinearForm::default();
        for (r, e) in &self.v.factors {
            f.add(r.0, e.clone());
        }
        for (r, e) in &self.w.factors {
            f.add(r.0, -e.clone());
        }
        f
    }
}

pub fn build_pair_vectors(data: &VarietyData, k: u32) -> Result<PairVectors> {
    check_k(data, k)?;
    let dv = data.dual_degrees(k)?;
    let n = data.n as i64;
    let k64 = k as i64;
    let c = |a: i64| binomial(a, n - k64);
    let (half_dn, half_up) = (k / 2, k.div_ceil(2));

    let mut v = Vec::new();
    let r_v: BigInt = (1..=half_dn).map(|j| c(n - 2 * j as i64) * &dv[2 * j as usize]).sum();
    if r_v.is_positive() {
        v.push((FactorRef(0), r_v));
    }
    for j in 1..=half_up {
        v.push((FactorRef(2 * j - 1), c(n - 2 * j as i64 + 1) * &dv[0]));
    }

    let mut w = Vec::new();
    let r_w: BigInt = (1..=half_up)
        .map(|j| c(n - 2 * j as i64 + 1) * &dv[2 * j as usize - 1])
        .sum();
    if r_w.is_positive() {
        w.push((FactorRef(0), r_w));
    }
    for j in 1..=half_dn {
        w.push((FactorRef(2 * j), c(n - 2 * j as i64) * &dv[0]));
    }

    let deg = |fs: &[(FactorRef, BigInt)]| -> BigInt { fs.iter().map(|(r, e)| e * &dv[r.0 as usize]).sum() };
    let (dv_deg, dw_deg) = (deg(&v), deg(&w));
    let expected: BigInt = &dv[0] * (1..=k).map(|i| c(n - i as i64) * &dv[i as usize]).sum::<BigInt>();
    if dv_deg != dw_deg || dv_deg != expected {
        return Err(Error::DegreeMismatch {
            what: format!("pair vectors for k = {k}"),
            expected: expected.to_string(),
            found: format!("deg v = {dv_deg}, deg w = {dw_deg}"),
        });
    }
    Ok(PairVectors {
        k,
        v: FormalTensor::new(v)?,
        w: FormalTensor::new(w)?,
        degree: dv_deg,
    })
}

/// `[LR(σ, Δ^{(n-i)}) for i in 0..=k]`, computed in parallel.
pub fn log_ratios(inst: &VarietyInstance, sigma: &GroupElement, k: u32) -> Result<Vec<f64>> {
    let polys: Vec<&ExactPoly> = (0..=k).map(|i| inst.delta(i)).collect::<Result<_>>()?;
    polys.par_iter().map(|p| log_norm_ratio(sigma, p)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Contribution {
    pub i: u32,
    /// `(-1)^{i+1} C(n-i, n-k)`.
    #[serde(serialize_with = "ser_big")]
    pub coefficient: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub deg_chow: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub dual_degree: BigInt,
    pub lr_delta: f64,
    pub lr_chow: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyBreakdown {
    pub k: u32,
    pub contributions: Vec<Contribution>,
    pub total: f64,
}

/// The closed formula, term by term.
pub fn energy_via_formula(inst: &VarietyInstance, sigma: &GroupElement, k: u32) -> Result<EnergyBreakdown> {
    check_k(&inst.data, k)?;
    let lr = log_ratios(inst, sigma, k)?;
    breakdown_from(&inst.data, k, &lr)
}

/// Breakdown from precomputed log-ratios `lr[i] = LR(Δ^{(n-i)})`.
pub fn breakdown_from(data: &VarietyData, k: u32, lr: &[f64]) -> Result<EnergyBreakdown> {
    check_k(data, k)?;
    let dv = data.dual_degrees(k)?;
    let n = data.n as i64;
    let contributions: Vec<Contribution> = (1..=k)
        .map(|i| {
            let c = sign(i + 1) * binomial(n - i as i64, n - k as i64);
            let value = big_f64(&c) * (big_f64(&dv[0]) * lr[i as usize] - big_f64(&dv[i as usize]) * lr[0]);
            Contribution {
                i,
                coefficient: c,
                deg_chow: dv[0].clone(),
                dual_degree: dv[i as usize].clone(),
                lr_delta: lr[i as usize],
                lr_chow: lr[0],
                value,
            }
        })
        .collect();
    let total = contributions.iter().map(|c| c.value).sum();
    Ok(EnergyBreakdown { k, contributions, total })
}

/// `LR(σ, v_k) - LR(σ, w_k)` on the unexpanded tensors.
pub fn energy_via_pair(inst: &VarietyInstance, sigma: &GroupElement, k: u32) -> Result<f64> {
    let pair = build_pair_vectors(&inst.data, k)?;
    Ok(tensor_log_norm_ratio(sigma, &pair.v, inst)? - tensor_log_norm_ratio(sigma, &pair.w, inst)?)
}

/// The recursion `M_k = (-1)^{k+1}[deg R · LR(Δ^{(n-k)}) - d^∨_k LR(R) +
/// Σ_{i<k} (-1)^i C(n-i, n-k) M_i]`, evaluated numerically level by level.
pub fn energy_via_recursion(inst: &VarietyInstance, sigma: &GroupElement, k: u32) -> Result<f64> {
    check_k(&inst.data, k)?;
    let lr = log_ratios(inst, sigma, k)?;
    recursion_from(&inst.data, k, &lr)
}

pub fn recursion_from(data: &VarietyData, k: u32, lr: &[f64]) -> Result<f64> {
    check_k(data, k)?;
    let dv: Vec<f64> = data.dual_degrees(k)?.iter().map(big_f64).collect();
    let n = data.n as i64;
    let mut m = vec![0.0; k as usize + 1];
    for j in 1..=k as usize {
        let mut inner = dv[0] * lr[j] - dv[j] * lr[0];
        for (i, mi) in m.iter().enumerate().take(j).skip(1) {
            inner += big_f64(&(sign(i as u32) * binomial(n - i as i64, n - j as i64))) * mi;
        }
        m[j] = big_f64(&sign(j as u32 + 1)) * inner;
    }
    Ok(m[k as usize])
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Initial step length of each line search.
    pub step: f64,
    /// Stop when the gradient norm falls below this.
    pub tol: f64,
    /// Armijo constant.
    pub armijo: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            step: 0.5,
            tol: 1e-8,
            armijo: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub sigma: GroupElement,
    pub trace: Vec<TraceEntry>,
    pub converged: bool,
}

/// `M_k` as a smooth function on `SL(N+1, ℂ)`, with cached base norms.
pub struct EnergyFunction {
    form: LinearForm,
    polys: Vec<(f64, FloatPoly, f64)>,
}

impl EnergyFunction {
    pub fn new(inst: &VarietyInstance, k: u32) -> Result<Self> {
        let form = formula_form(&inst.data, k)?;
        let polys = form
            .0
            .iter()
            .map(|(&i, c)| {
                let p = inst.delta(i)?;
                Ok((big_f64(c), p.to_float(), log_fs_norm_sq(p)?))
            })
            .collect::<Result<_>>()?;
        Ok(Self { form, polys })
    }

    pub fn form(&self) -> &LinearForm {
        &self.form
    }

    fn acted(&self, sigma: &GroupElement) -> Result<Vec<FloatPoly>> {
        self.polys
            .par_iter()
            .map(|(_, p, _)| p.right_substitute(sigma.matrix()))
            .collect()
    }

    pub fn value(&self, sigma: &GroupElement) -> Result<f64> {
        let acted = self.acted(sigma)?;
        let mut s = 0.0;
        for ((c, _, base), q) in self.polys.iter().zip(&acted) {
            s += c * (log_fs_norm_sq(q)? - base);
        }
        if !s.is_finite() {
            return Err(Error::Numerical("non-finite energy".into()));
        }
        Ok(s)
    }

    /// `d/ds M_k(σ e^{sξ})` at `s = 0`.
    pub fn directional_derivative(&self, sigma: &GroupElement, xi: &DMatrix<Complex64>) -> Result<f64> {
        let eta = conjugate(sigma, xi)?;
        let acted = self.acted(sigma)?;
        let mut s = 0.0;
        for ((c, _, _), q) in self.polys.iter().zip(&acted) {
            s += c * log_norm_derivative(q, &eta)?;
        }
        Ok(s)
    }

    /// Riemannian gradient `G` (traceless) with `d/ds M(σ e^{sξ}) = Re tr(G^* ξ)`.
    pub fn gradient(&self, sigma: &GroupElement) -> Result<DMatrix<Complex64>> {
        let size = sigma.size();
        let acted = self.acted(sigma)?;
        let inv = sigma.inverse()?.matrix().clone();
        let m = sigma.matrix();
        let dirs: Vec<(usize, usize, bool)> = (0..size)
            .flat_map(|i| (0..size).flat_map(move |j| [(i, j, false), (i, j, true)]))
            .collect();
        let vals: Vec<f64> = dirs
            .par_iter()
            .map(|&(i, j, imag)| {
                let mut xi = DMatrix::from_element(size, size, Complex64::zero());
                xi[(i, j)] = if imag { Complex64::i() } else { Complex64::new(1.0, 0.0) };
                let eta = m * &xi * &inv;
                let mut s = 0.0;
                for ((c, _, _), q) in self.polys.iter().zip(&acted) {
                    s += c * log_norm_derivative(q, &eta)?;
                }
                Ok(s)
            })
            .collect::<Result<_>>()?;
        let mut g = DMatrix::from_element(size, size, Complex64::zero());
        for (&(i, j, imag), v) in dirs.iter().zip(vals) {
            if imag {
                g[(i, j)].im = v;
            } else {
                g[(i, j)].re = v;
            }
        }
        let tr = g.trace() / size as f64;
        for i in 0..size {
            g[(i, i)] -= tr;
        }
        Ok(g)
    }
}

fn conjugate(sigma: &GroupElement, xi: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    Ok(sigma.matrix() * xi * sigma.inverse()?.matrix())
}

/// Gradient descent on `M_k` with Armijo backtracking; each step is
/// `σ ← σ exp(-α G)` rescaled to determinant 1.
pub fn minimize_energy(
    inst: &VarietyInstance,
    k: u32,
    sigma0: &GroupElement,
    opts: &MinimizeOptions,
) -> Result<MinimizeResult> {
    let f = EnergyFunction::new(inst, k)?;
    let mut sigma = sigma0.to_float();
    let mut energy = f.value(&sigma)?;
    let mut trace = Vec::new();
    let mut step = opts.step;
    for iter in 0..opts.max_iters {
        let g = f.gradient(&sigma)?;
        let gn = g.norm();
        trace.push(TraceEntry {
            iter,
            energy,
            grad_norm: gn,
            step,
        });
        if gn < opts.tol {
            return Ok(MinimizeResult {
                sigma,
                trace,
                converged: true,
            });
        }
        let mut alpha = step;
        loop {
            let cand = sigma.compose(&GroupElement::exp(&(&g * Complex64::new(-alpha, 0.0)))?);
            let cand = GroupElement::normalized(cand.matrix().clone())?;
            let e = f.value(&cand)?;
            if e <= energy - opts.armijo * alpha * gn * gn {
                sigma = cand;
                energy = e;
                step = (alpha * 2.0).min(opts.step * 16.0);
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-16 {
                trace.push(TraceEntry {
                    iter: iter + 1,
                    energy,
                    grad_norm: gn,
                    step: alpha,
                });
                return Ok(MinimizeResult {
                    sigma,
                    trace,
                    converged: false,
                });
            }
        }
    }
    let gn = f.gradient(&sigma)?.norm();
    trace.push(TraceEntry {
        iter: opts.max_iters,
        energy,
        grad_norm: gn,
        step,
    });
    Ok(MinimizeResult {
        sigma,
        converged: gn < opts.tol,
        trace,
    })
}

/// Central finite difference of `s ↦ M_k(σ e^{sξ})`.
pub fn finite_difference(f: &EnergyFunction, sigma: &GroupElement, xi: &DMatrix<Complex64>, h: f64) -> Result<f64> {
    let at = |s: f64| -> Result<f64> {
        let e = sigma.compose(&GroupElement::exp(&(xi * Complex64::new(s, 0.0)))?);
        f.value(&e)
    };
    Ok((at(h)? - at(-h)?) / (2.0 * h))
}
