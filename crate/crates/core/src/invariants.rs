//! Hyperdiscriminant degrees from Chern numbers, and back.
//!
//! Degrees are total degrees in the entries of the `(n-i+1) × (N+1)`
//! variable matrix, so the Chow form (format `n`) has degree `(n+1)d`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::chern::{binomial_q, ChernProfile};
use crate::error::{Error, Result};

/// Numerical data of a smooth polarized `X^n ⊂ CP^N` of degree `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VarietyData {
    pub n: u32,
    pub ambient: u32,
    pub degree: u32,
    pub mu: ChernProfile,
    /// Dual defect `δ(X) = N - 1 - dim X^∨`.
    pub delta: u32,
}

impl VarietyData {
    pub fn new(n: u32, ambient: u32, degree: u32, mu: ChernProfile, delta: u32) -> Result<Self> {
        if n == 0 || n >= ambient {
            return Err(Error::invalid(format!(
                "need 0 < n < N, got n = {n}, N = {ambient}"
            )));
        }
        if degree < 2 {
            return Err(Error::invalid(format!(
                "X must be nonlinear, got degree {degree}"
            )));
        }
        if mu.n != n {
            return Err(Error::invalid(format!(
                "Chern profile has dimension {}, expected {n}",
                mu.n
            )));
        }
        if n == 1 && delta != 0 {
            return Err(Error::invalid("curves have dual defect 0"));
        }
        if n >= 2 && delta > n - 2 {
            return Err(Error::invalid(format!(
                "dual defect {delta} exceeds n - 2 = {}",
                n - 2
            )));
        }
        Ok(Self {
            n,
            ambient,
            degree,
            mu,
            delta,
        })
    }

    pub fn admissible(&self, k: u32) -> bool {
        k <= self.n && self.n - k >= self.delta
    }

    pub fn check_admissible(&self, k: u32) -> Result<()> {
        if k > self.n {
            return Err(Error::OutOfRange {
                what: "k",
                detail: format!("k = {k} exceeds n = {}", self.n),
            });
        }
        if !self.admissible(k) {
            return Err(Error::Inadmissible {
                k: k as usize,
                n: self.n as usize,
                delta: self.delta as usize,
            });
        }
        Ok(())
    }

    /// `d^∨_i = deg Δ^{(n-i)}` for `i = 0..=k`.
    pub fn dual_degrees(&self, k: u32) -> Result<Vec<BigInt>> {
        (0..=k).map(|i| hyperdiscriminant_degree(self, i)).collect()
    }
}

fn sign(i: u32) -> BigRational {
    if i % 2 == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

/// `deg Δ_X^{(n-k)} = d Σ_{i=0}^{k} (-1)^i (n-i+1) C(n-i, n-k) μ_i`.
///
/// Errors if the format `n-k` lies outside `[δ(X), n]`, or if the result is
/// not a positive integer (which means the `μ` input is inconsistent).
pub fn hyperdiscriminant_degree(data: &VarietyData, k: u32) -> Result<BigInt> {
    data.check_admissible(k)?;
    let n = data.n;
    let mut sum = BigRational::zero();
    for i in 0..=k {
        sum += sign(i)
            * BigRational::from_integer(BigInt::from(n - i + 1))
            * binomial_q((n - i) as i64, (n - k) as i64)
            * &data.mu.mu[i as usize];
    }
    let deg = sum * BigRational::from_integer(BigInt::from(data.degree));
    if !deg.is_integer() || !deg.is_positive() {
        return Err(Error::DegreeMismatch {
            what: format!("hyperdiscriminant of format {}", n - k),
            expected: "a positive integer".into(),
            found: deg.to_string(),
        });
    }
    Ok(deg.to_integer())
}

/// `μ_k = 1/(n-k+1) Σ_{i=0}^{k} (-1)^i C(n-i, n-k) d^∨_i / d`.
pub fn mu_from_degrees(degs: &[BigInt], degree: u32, n: u32, k: u32) -> Result<BigRational> {
    if k > n {
        return Err(Error::OutOfRange {
            what: "k",
            detail: format!("k = {k} exceeds n = {n}"),
        });
    }
    if degs.len() <= k as usize {
        return Err(Error::invalid(format!(
            "need d_0..d_{k}, got {} degrees",
            degs.len()
        )));
    }
    if degs.iter().any(|d| !d.is_positive()) {
        return Err(Error::invalid("degrees must be positive"));
    }
    let d = BigRational::from_integer(BigInt::from(degree));
    let mut sum = BigRational::zero();
    for i in 0..=k {
        sum += sign(i)
            * binomial_q((n - i) as i64, (n - k) as i64)
            * BigRational::from_integer(degs[i as usize].clone())
            / &d;
    }
    Ok(sum / BigRational::from_integer(BigInt::from(n - k + 1)))
}

/// Solves `Y_j = Σ_{i<=j} C(n-i, n-j) X_i` for `X`:
/// `X_j = Σ_{i<=j} (-1)^{i+j} C(n-i, n-j) Y_i`.
pub fn binomial_inverse(y: &[BigRational], n: u32) -> Result<Vec<BigRational>> {
    check_len(y, n)?;
    Ok((0..y.len() as u32)
        .map(|j| {
            (0..=j)
                .map(|i| sign(i + j) * binomial_q((n - i) as i64, (n - j) as i64) * &y[i as usize])
                .sum()
        })
        .collect())
}

/// The forward system `Y_j = Σ_{i<=j} C(n-i, n-j) X_i`.
pub fn binomial_forward(x: &[BigRational], n: u32) -> Result<Vec<BigRational>> {
    check_len(x, n)?;
    Ok((0..x.len() as u32)
        .map(|j| {
            (0..=j)
                .map(|i| binomial_q((n - i) as i64, (n - j) as i64) * &x[i as usize])
                .sum()
        })
        .collect())
}

fn check_len(v: &[BigRational], n: u32) -> Result<()> {
    if v.len() > n as usize + 1 {
        return Err(Error::OutOfRange {
            what: "system size",
            detail: format!("{} unknowns exceed n + 1 = {}", v.len(), n + 1),
        });
    }
    Ok(())
}

/// Formats `[δ(X), n]` for which the hyperdiscriminant exists, and the
/// orders `k` for which every `Δ^{(n-i)}`, `i <= k`, exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormatRange {
    pub min_format: u32,
    pub max_format: u32,
    pub computable_k: Vec<u32>,
}

pub fn format_range(data: &VarietyData) -> FormatRange {
    FormatRange {
        min_format: data.delta,
        max_format: data.n,
        computable_k: (1..=data.n).filter(|&k| data.admissible(k)).collect(),
    }
}
