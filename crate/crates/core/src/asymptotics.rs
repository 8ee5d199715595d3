//! Asymptotic slopes of `M_k` along one-parameter subgroups.
//!
//! Along `λ(t) = diag(t^{a_i})`, `M_k(λ(t)) = A_k(λ) log|t|² + B_k(λ) + o(1)`
//! as `t → 0`, with the integer slope `A_k(λ) = w_λ(v_k) - w_λ(w_k)`. Since
//! `log|t|² → -∞`, `M_k` is bounded below along `λ` iff `A_k(λ) ≤ 0`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::VarietyInstance;
use crate::energy::{build_pair_vectors, formula_form};
use crate::error::{Error, Result};
use crate::pairing::{tensor_min_weight, torus_log_norm_ratio, OneParamSubgroup};

fn ser_big<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v.to_i64() {
        Some(i) => s.serialize_i64(i),
        None => s.serialize_str(&v.to_string()),
    }
}

fn check_lambda(inst: &VarietyInstance, lambda: &OneParamSubgroup) -> Result<()> {
    let size = inst.ambient() as usize + 1;
    if lambda.size() != size {
        return Err(Error::shape(
            format!("{size} weights"),
            format!("{} weights", lambda.size()),
        ));
    }
    Ok(())
}

/// `A_k(λ) = w_λ(v_k) - w_λ(w_k)`.
pub fn slope_integer(inst: &VarietyInstance, k: u32, lambda: &OneParamSubgroup) -> Result<BigInt> {
    check_lambda(inst, lambda)?;
    let pair = build_pair_vectors(&inst.data, k)?;
    Ok(tensor_min_weight(lambda, &pair.v, inst)? - tensor_min_weight(lambda, &pair.w, inst)?)
}

/// `M_k(λ(t))` for real `0 < t`, evaluated from exponents so that `t` can be
/// tiny without overflow.
pub fn energy_along(inst: &VarietyInstance, k: u32, lambda: &OneParamSubgroup, t: f64) -> Result<f64> {
    check_lambda(inst, lambda)?;
    let form = formula_form(&inst.data, k)?;
    let mut s = 0.0;
    for (&i, c) in &form.0 {
        let c = c.to_f64().ok_or_else(|| Error::Numerical("coefficient overflow".into()))?;
        s += c * torus_log_norm_ratio(lambda, t, inst.delta(i)?)?;
    }
    Ok(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeReport {
    pub lambda: OneParamSubgroup,
    #[serde(rename = "Ak", serialize_with = "ser_big")]
    pub a_k: BigInt,
    /// Least-squares slope of `M_k(λ(t))` against `log|t|²`.
    pub fit_slope: f64,
    /// Root-mean-square residual of the affine fit.
    pub fit_residual: f64,
    /// `max - min` of `M_k(λ(t)) - A_k log|t|²` over the samples.
    pub offset_spread: f64,
    pub bounded_below: bool,
    pub samples: Vec<(f64, f64)>,
}

/// `n` log-spaced values from `hi` down to `lo`, both included.
pub fn log_samples(hi: f64, lo: f64, n: usize) -> Result<Vec<f64>> {
    if !(0.0 < lo && lo < hi && hi < 1.0) || n < 2 {
        return Err(Error::invalid("need 0 < lo < hi < 1 and at least 2 samples"));
    }
    let (a, b) = (hi.ln(), lo.ln());
    Ok((0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

/// Ordinary least squares `y ≈ slope·x + intercept`; returns
/// `(slope, intercept, rms residual)`.
pub fn affine_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - icpt).powi(2))
        .sum();
    (slope, icpt, (rss / n).sqrt())
}

pub fn slope_fit(
    inst: &VarietyInstance,
    k: u32,
    lambda: &OneParamSubgroup,
    samples: &[f64],
) -> Result<SlopeReport> {
    if samples.len() < 4 || samples.iter().any(|&t| !(0.0 < t && t < 1.0)) {
        return Err(Error::invalid("need at least 4 samples in (0, 1)"));
    }
    let a_k = slope_integer(inst, k, lambda)?;
    let a = a_k.to_f64().unwrap_or(f64::NAN);
    let values: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|&t| Ok((t, energy_along(inst, k, lambda, t)?)))
        .collect::<Result<_>>()?;
    let x: Vec<f64> = samples.iter().map(|t| 2.0 * t.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.1).collect();
    let (fit_slope, _, fit_residual) = affine_fit(&x, &y);
    let offsets = x.iter().zip(&y).map(|(x, y)| y - a * x);
    let (lo, hi) = offsets.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| {
        (lo.min(b), hi.max(b))
    });
    Ok(SlopeReport {
        lambda: lambda.clone(),
        bounded_below: a_k <= BigInt::from(0),
        a_k,
        fit_slope,
        fit_residual,
        offset_spread: hi - lo,
        samples: values,
    })
}

/// All integer vectors of length `len` with entries in `[-w, w]` summing to
/// zero, in lexicographic order.
pub fn weight_vectors(len: usize, w: u32) -> Vec<Vec<i64>> {
    fn rec(len: usize, w: i64, prefix: &mut Vec<i64>, sum: i64, out: &mut Vec<Vec<i64>>) {
        let left = (len - prefix.len()) as i64;
        if left == 0 {
            if sum == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for a in -w..=w {
            let rest = sum + a;
            if rest.abs() <= (left - 1) * w {
                prefix.push(a);
                rec(len, w, prefix, rest, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(len, w as i64, &mut Vec::with_capacity(len), 0, &mut out);
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub k: u32,
    pub bound: u32,
    pub scanned: usize,
    #[serde(rename = "maxAk", serialize_with = "ser_big")]
    pub max_ak: BigInt,
    /// Lexicographically smallest `λ` attaining `max_ak`.
    pub worst: OneParamSubgroup,
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
    pub verdict: String,
}

impl ScanReport {
    pub fn no_destabilizer(&self) -> bool {
        self.positive == 0
    }
}

/// Evaluates `A_k` on every weight vector with `Σ a_i = 0` and
/// `max |a_i| ≤ bound`.
pub fn stability_scan(inst: &VarietyInstance, k: u32, bound: u32) -> Result<ScanReport> {
    build_pair_vectors(&inst.data, k)?;
    let vectors = weight_vectors(inst.ambient() as usize + 1, bound);
    let slopes: Vec<BigInt> = vectors
        .par_iter()
        .map(|w| slope_integer(inst, k, &OneParamSubgroup::new(w.clone())?))
        .collect::<Result<_>>()?;
    // `vectors` is sorted, so the first maximum is the lexicographic one.
    let (mut best, mut best_i) = (&slopes[0], 0);
    for (i, s) in slopes.iter().enumerate() {
        if s > best {
            best = s;
            best_i = i;
        }
    }
    let zero = BigInt::from(0);
    let positive = slopes.iter().filter(|s| **s > zero).count();
    let negative = slopes.iter().filter(|s| **s < zero).count();
    let verdict = if positive == 0 {
        format!("no destabilizer found at bound {bound}")
    } else {
        format!("{positive} destabilizing weight vectors at bound {bound}")
    };
    Ok(ScanReport {
        k,
        bound,
        scanned: vectors.len(),
        max_ak: best.clone(),
        worst: OneParamSubgroup::new(vectors[best_i].clone())?,
        positive,
        zero: vectors.len() - positive - negative,
        negative,
        verdict,
    })
}
