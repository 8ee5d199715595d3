//! Truncated graded Chern-class calculus on `X × CP^{n-k}`.
//!
//! Classes are polynomials in three kinds of symbols: the Chern classes
//! `c_i = c_i(T X)` of an `n`-dimensional `X`, the polarization `ω` pulled
//! back from `X`, and the hyperplane class `ω_FS` pulled back from
//! `CP^{n-k}`. Products are truncated eagerly: anything of degree above `n`
//! on `X` or above `n - k` on the projective factor vanishes.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// `C(n, k)`, zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

pub(crate) fn binomial_q(n: i64, k: i64) -> BigRational {
    BigRational::from_integer(binomial(n, k))
}

/// One monomial `c_{i_1} ⋯ c_{i_r} ∧ ω^p ∧ ω_FS^q`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassMonomial {
    /// Sorted indices of the Chern classes of `X`, each at least 1.
    pub chern: Vec<u32>,
    pub p: u32,
    pub q: u32,
}

impl ClassMonomial {
    fn x_degree(&self) -> u32 {
        self.chern.iter().sum::<u32>() + self.p
    }

    pub fn grading(&self) -> u32 {
        self.x_degree() + self.q
    }

    fn mul(&self, o: &Self) -> Self {
        let mut chern = self.chern.clone();
        chern.extend_from_slice(&o.chern);
        chern.sort_unstable();
        ClassMonomial {
            chern,
            p: self.p + o.p,
            q: self.q + o.q,
        }
    }

    /// The single Chern index if this monomial carries at most one `c_i`
    /// (`0` stands for no Chern factor).
    pub fn single_chern(&self) -> Option<u32> {
        match self.chern.as_slice() {
            [] => Some(0),
            [i] => Some(*i),
            _ => None,
        }
    }
}

/// A class on `X × CP^{n-k}` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedClass {
    n: u32,
    k: u32,
    terms: BTreeMap<ClassMonomial, BigRational>,
}

impl GradedClass {
    pub fn zero(n: u32, k: u32) -> Self {
        assert!(k <= n, "format parameter k must not exceed n");
        Self {
            n,
            k,
            terms: BTreeMap::new(),
        }
    }

    fn monomial(n: u32, k: u32, m: ClassMonomial, c: BigRational) -> Self {
        let mut out = Self::zero(n, k);
        out.insert(m, c);
        out
    }

    pub fn one(n: u32, k: u32) -> Self {
        Self::monomial(
            n,
            k,
            ClassMonomial {
                chern: vec![],
                p: 0,
                q: 0,
            },
            BigRational::one(),
        )
    }

    pub fn omega(n: u32, k: u32) -> Self {
        Self::monomial(
            n,
            k,
            ClassMonomial {
                chern: vec![],
                p: 1,
                q: 0,
            },
            BigRational::one(),
        )
    }

    pub fn omega_fs(n: u32, k: u32) -> Self {
        Self::monomial(
            n,
            k,
            ClassMonomial {
                chern: vec![],
                p: 0,
                q: 1,
            },
            BigRational::one(),
        )
    }

    /// `c_i(T X)`; `c_0 = 1`.
    pub fn chern(n: u32, k: u32, i: u32) -> Self {
        if i == 0 {
            return Self::one(n, k);
        }
        Self::monomial(
            n,
            k,
            ClassMonomial {
                chern: vec![i],
                p: 0,
                q: 0,
            },
            BigRational::one(),
        )
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    fn admissible(&self, m: &ClassMonomial) -> bool {
        m.x_degree() <= self.n && m.q <= self.n - self.k
    }

    fn insert(&mut self, m: ClassMonomial, c: BigRational) {
        if c.is_zero() || !self.admissible(&m) {
            return;
        }
        let e = self
            .terms
            .entry(m.clone())
            .or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ClassMonomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &ClassMonomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check(&self, o: &Self) {
        assert_eq!(
            (self.n, self.k),
            (o.n, o.k),
            "classes live on different spaces"
        );
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        let mut out = Self::zero(self.n, self.k);
        for (m, c) in &self.terms {
            out.insert(m.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let mut out = Self::zero(self.n, self.k);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.insert(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(self.n, self.k), |acc, _| acc.mul(self))
    }

    /// Homogeneous part of the given total grading.
    pub fn graded_part(&self, grading: u32) -> Self {
        let mut out = Self::zero(self.n, self.k);
        for (m, c) in &self.terms {
            if m.grading() == grading {
                out.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// Coefficients `(i, a_i)` of a class of the form
    /// `Σ a_i c_i ∧ ω^{n-i} ∧ ω_FS^{n-k}`. Fails if other monomials occur.
    pub fn top_coefficients(&self) -> Result<Vec<(u32, BigRational)>> {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            let i = m
                .single_chern()
                .ok_or_else(|| Error::invalid(format!("not a top-degree class: {self}")))?;
            if m.p + i != self.n || m.q != self.n - self.k {
                return Err(Error::invalid(format!("not a top-degree class: {self}")));
            }
            out.push((i, c.clone()));
        }
        out.sort_by_key(|(i, _)| *i);
        Ok(out)
    }
}

impl fmt::Display for GradedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (j, (m, c)) in self.terms.iter().enumerate() {
            if j > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for i in &m.chern {
                write!(f, "·c{i}")?;
            }
            if m.p > 0 {
                write!(f, "·ω^{}", m.p)?;
            }
            if m.q > 0 {
                write!(f, "·ωFS^{}", m.q)?;
            }
        }
        Ok(())
    }
}

/// `c_p(E ⊗ L) = Σ_{i=0}^{p} C(r-i, p-i) c_i(E) ∧ c_1(L)^{p-i}` for a rank
/// `r` bundle `E` and a line bundle `L`. `chern_e[i]` is `c_i(E)`.
pub fn tensor_line_chern(
    r: u32,
    p: u32,
    chern_e: &[GradedClass],
    c1_line: &GradedClass,
) -> Result<GradedClass> {
    if p > r {
        return Err(Error::OutOfRange {
            what: "Chern index",
            detail: format!("p = {p} exceeds rank {r}"),
        });
    }
    if chern_e.len() <= p as usize {
        return Err(Error::invalid(format!(
            "need c_0..c_{p} of E, got {} classes",
            chern_e.len()
        )));
    }
    let mut out = GradedClass::zero(c1_line.n, c1_line.k);
    for i in 0..=p {
        let b = binomial_q((r - i) as i64, (p - i) as i64);
        let term = chern_e[i as usize].mul(&c1_line.pow(p - i)).scale(&b);
        out = out.add(&term);
    }
    Ok(out)
}

/// Total Chern class `c(E ⊗ L)`.
pub fn total_tensor_line_chern(
    r: u32,
    chern_e: &[GradedClass],
    c1_line: &GradedClass,
) -> Result<GradedClass> {
    let mut out = GradedClass::zero(c1_line.n, c1_line.k);
    for p in 0..=r {
        out = out.add(&tensor_line_chern(r, p, chern_e, c1_line)?);
    }
    Ok(out)
}

/// The factors of the total Chern class of the jet bundle of the Segre
/// hyperplane bundle on `X × CP^{n-k}`, before and after the Euler
/// splitting has been applied.
pub struct JetFactors {
    /// `c(pr₁*Ω_X ⊗ L)`, `L = pr₁*O_X(1) ⊗ pr₂*O(1)`.
    pub cotangent_x: GradedClass,
    /// `c(pr₂*Ω_P ⊗ L)`.
    pub cotangent_p: GradedClass,
    /// `c(L)`.
    pub line: GradedClass,
    /// `c(pr₁*O_X(1))^{n-k+1}`, what the Euler splitting turns
    /// `cotangent_p · line` into.
    pub euler_split: GradedClass,
}

fn check_format(n: u32, k: u32) -> Result<()> {
    if k < 1 || k > n {
        return Err(Error::OutOfRange {
            what: "k",
            detail: format!("need 1 <= k <= n, got n = {n}, k = {k}"),
        });
    }
    Ok(())
}

pub fn jet_factors(n: u32, k: u32) -> Result<JetFactors> {
    check_format(n, k)?;
    let m = n - k;
    let omega = GradedClass::omega(n, k);
    let omega_fs = GradedClass::omega_fs(n, k);
    let c1_line = omega.add(&omega_fs);

    // c_i(Ω_X) = (-1)^i c_i(T X)
    let chern_omega_x: Vec<_> = (0..=n)
        .map(|i| GradedClass::chern(n, k, i).scale(&sign(i)))
        .collect();
    // Euler sequence on CP^m: c(Ω_P) = (1 - ω_FS)^{m+1}
    let chern_omega_p: Vec<_> = (0..=m)
        .map(|j| {
            omega_fs
                .pow(j)
                .scale(&(binomial_q((m + 1) as i64, j as i64) * sign(j)))
        })
        .collect();

    let one = GradedClass::one(n, k);
    Ok(JetFactors {
        cotangent_x: total_tensor_line_chern(n, &chern_omega_x, &c1_line)?,
        cotangent_p: total_tensor_line_chern(m, &chern_omega_p, &c1_line)?,
        line: one.add(&c1_line),
        euler_split: one.add(&omega).pow(m + 1),
    })
}

fn sign(i: u32) -> BigRational {
    if i % 2 == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

/// `c_{2n-k}` of the jet bundle `J_1` of the Segre hyperplane bundle on
/// `X × CP^{n-k}`, computed from the jet sequence and the product splitting
/// of the cotangent bundle, without using the closed form.
pub fn derive_jet_top_chern(n: u32, k: u32) -> Result<GradedClass> {
    let f = jet_factors(n, k)?;
    let total = f.cotangent_x.mul(&f.cotangent_p).mul(&f.line);
    Ok(total.graded_part(2 * n - k))
}

/// `Σ_{i=0}^{k} (-1)^i (n-i+1) C(n-i, n-k) c_i ∧ ω^{n-i} ∧ ω_FS^{n-k}`.
pub fn closed_form_jet_top_chern(n: u32, k: u32) -> Result<GradedClass> {
    check_format(n, k)?;
    let mut out = GradedClass::zero(n, k);
    for i in 0..=k {
        let c = sign(i)
            * BigRational::from_integer(BigInt::from(n - i + 1))
            * binomial_q((n - i) as i64, (n - k) as i64);
        let m = ClassMonomial {
            chern: if i == 0 { vec![] } else { vec![i] },
            p: n - i,
            q: n - k,
        };
        out.insert(m, c);
    }
    Ok(out)
}

/// Normalized Chern numbers `μ_i = (1/V) ∫ c_i ∧ ω^{n-i}` of a polarized
/// variety of dimension `n` and degree `d` in `CP^N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChernProfile {
    pub n: u32,
    #[serde(serialize_with = "ser_rationals")]
    pub mu: Vec<BigRational>,
    pub degree: u32,
    pub ambient: u32,
}

fn ser_rationals<S: serde::Serializer>(
    v: &[BigRational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for r in v {
        seq.serialize_element(&crate::exactpoly::format_rational(r))?;
    }
    seq.end()
}

impl ChernProfile {
    pub fn new(n: u32, mu: Vec<BigRational>, degree: u32, ambient: u32) -> Result<Self> {
        if mu.len() != n as usize + 1 {
            return Err(Error::invalid(format!(
                "need {} values of mu, got {}",
                n + 1,
                mu.len()
            )));
        }
        if !mu[0].is_one() {
            return Err(Error::invalid("mu_0 must equal 1"));
        }
        Ok(Self {
            n,
            mu,
            degree,
            ambient,
        })
    }
}

/// Chern numbers of a smooth degree-`d` hypersurface in `CP^{n+1}`:
/// `c(T X) = (1+h)^{n+2} / (1+dh)`, so `μ_k = Σ_j C(n+2, k-j) (-d)^j`.
pub fn hypersurface_mu(n: u32, d: u32) -> Result<ChernProfile> {
    if n < 1 || d < 2 {
        return Err(Error::OutOfRange {
            what: "hypersurface",
            detail: format!("need n >= 1 and d >= 2, got n = {n}, d = {d}"),
        });
    }
    let mu = (0..=n as i64)
        .map(|k| {
            let s: BigInt = (0..=k)
                .map(|j| {
                    binomial(n as i64 + 2, k - j)
                        * num_traits::pow(BigInt::from(-(d as i64)), j as usize)
                })
                .sum();
            BigRational::from_integer(s)
        })
        .collect();
    ChernProfile::new(n, mu, d, n + 1)
}

/// Degree-`d` rational normal curve in `CP^d`: `μ_1 = χ(P¹)/d = 2/d`.
pub fn rational_curve_mu(d: u32) -> Result<ChernProfile> {
    if d < 2 {
        return Err(Error::OutOfRange {
            what: "rational normal curve",
            detail: format!("need d >= 2, got {d}"),
        });
    }
    let mu1 = BigRational::new(BigInt::from(2), BigInt::from(d));
    ChernProfile::new(1, vec![BigRational::one(), mu1], d, d)
}

impl ChernProfile {
    pub fn has_negative(&self) -> bool {
        self.mu.iter().any(|m| m.is_negative())
    }
}
