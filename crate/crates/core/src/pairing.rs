//! Factorial-weighted Fubini–Study norms, weights of one-parameter
//! subgroups, and unexpanded tensor products of polynomials.
//!
//! `σ ∈ SL(N+1)` acts on a polynomial in the entries of an `r × (N+1)`
//! matrix by `(σ·P)(A) = P(Aσ)`.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::VarietyInstance;
use crate::error::{Error, Result};
use crate::exactpoly::{
    ln_rational, parse_rational, Coeff, ExactPoly, FloatPoly, GaussianRational, MatrixExponent,
    MatrixPoly,
};

/// `Π α_rc!` exactly.
pub fn factorial_product(e: &MatrixExponent) -> BigInt {
    e.as_flat()
        .iter()
        .map(|&k| (1..=k as u64).fold(BigInt::one(), |acc, j| acc * j))
        .fold(BigInt::one(), |acc, f| acc * f)
}

/// `‖P‖² = Σ |c_α|² / Π α_rc!`, exactly.
pub fn fs_norm_sq_exact(p: &ExactPoly) -> Result<BigRational> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(p.terms()
        .map(|(e, c)| c.norm_sqr() / BigRational::from_integer(factorial_product(e)))
        .sum())
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `log ‖P‖²` in floating point, summed with the largest term factored out.
pub fn log_fs_norm_sq<C: Coeff>(p: &MatrixPoly<C>) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let v = log_sum_exp(p.terms().filter_map(|(e, c)| {
        let a = c.ln_abs();
        a.is_finite().then(|| 2.0 * a - e.ln_factorial_product())
    }));
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical("norm underflow or overflow".into()))
    }
}

/// `‖P‖²` in floating point.
pub fn fs_norm_sq<C: Coeff>(p: &MatrixPoly<C>) -> Result<f64> {
    Ok(log_fs_norm_sq(p)?.exp())
}

/// `⟨P, Q⟩ = Σ P_α conj(Q_α) / α!`.
pub fn fs_inner<C: Coeff>(p: &MatrixPoly<C>, q: &MatrixPoly<C>) -> Result<Complex64> {
    if p.shape() != q.shape() {
        return Err(Error::shape(
            format!("{:?}", p.shape()),
            format!("{:?}", q.shape()),
        ));
    }
    let mut s = Complex64::zero();
    for (e, c) in p.terms() {
        if let Some(d) = q.coeff(e) {
            s += c.to_c64() * d.to_c64().conj() * (-e.ln_factorial_product()).exp();
        }
    }
    Ok(s)
}

/// Fubini–Study distance between `[x]` and `[y]` in the projectivized
/// orthogonal sum of the spaces of the listed polynomials.
pub fn fs_distance_sum(x: &[&FloatPoly], y: &[&FloatPoly]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(
            "distance needs matching direct-sum components",
        ));
    }
    let mut inner = Complex64::zero();
    let (mut nx, mut ny) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        inner += fs_inner(a, b)?;
        nx += fs_inner(a, a)?.re;
        ny += fs_inner(b, b)?.re;
    }
    if nx <= 0.0 || ny <= 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    let c = inner.norm();
    let s = (nx * ny - c * c).max(0.0).sqrt();
    Ok(s.atan2(c))
}

/// Fubini–Study distance `arccos(|⟨x,y⟩| / ‖x‖‖y‖)` in `[0, π/2]`.
pub fn fs_distance(x: &FloatPoly, y: &FloatPoly) -> Result<f64> {
    fs_distance_sum(&[x], &[y])
}

/// An element of `SL(N+1, ℂ)`, with its exact entries when it has them.
#[derive(Clone, Debug)]
pub struct GroupElement {
    float: DMatrix<Complex64>,
    exact: Option<DMatrix<GaussianRational>>,
}

impl GroupElement {
    pub fn identity(size: usize) -> Self {
        Self::from_exact(DMatrix::from_fn(size, size, |i, j| {
            if i == j {
                GaussianRational::one()
            } else {
                GaussianRational::zero()
            }
        }))
        .expect("identity has determinant 1")
    }

    /// Requires `det = 1` exactly.
    pub fn from_exact(m: DMatrix<GaussianRational>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid("group element must be square"));
        }
        let det = crate::catalog::classical::exact_det_inverse(&m)
            .map(|(d, _)| d)
            .unwrap_or_else(GaussianRational::zero);
        if det != GaussianRational::one() {
            return Err(Error::invalid(format!(
                "determinant must be exactly 1, got {det}"
            )));
        }
        Ok(Self {
            float: m.map(|c| c.to_c64()),
            exact: Some(m),
        })
    }

    /// Requires `|det - 1| < 1e-12`.
    pub fn from_float(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid("group element must be square"));
        }
        let det = m.determinant();
        if (det - 1.0).norm() >= 1e-12 {
            return Err(Error::invalid(format!(
                "determinant must be 1 within 1e-12, got {det}"
            )));
        }
        Ok(Self {
            float: m,
            exact: None,
        })
    }

    /// Rescales an invertible matrix by `det^{-1/(N+1)}`.
    pub fn normalized(m: DMatrix<Complex64>) -> Result<Self> {
        let n = m.nrows();
        let det = m.determinant();
        if det.norm() < 1e-300 || !det.is_finite() {
            return Err(Error::Singular("matrix is not invertible".into()));
        }
        let s = det.powf(-1.0 / n as f64);
        let mut g = m * s;
        // one Newton-like correction for rounding in the root
        let d = g.determinant();
        g *= d.powf(-1.0 / n as f64);
        Self::from_float(g)
    }

    /// `exp(ξ)` for traceless `ξ`.
    pub fn exp(xi: &DMatrix<Complex64>) -> Result<Self> {
        if !xi.is_square() {
            return Err(Error::invalid("Lie algebra element must be square"));
        }
        if xi.trace().norm() > 1e-12 * (1.0 + xi.norm()) {
            return Err(Error::invalid("Lie algebra element must be traceless"));
        }
        Self::normalized(xi.clone().exp())
    }

    pub fn size(&self) -> usize {
        self.float.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.float
    }

    pub fn exact(&self) -> Option<&DMatrix<GaussianRational>> {
        self.exact.as_ref()
    }

    pub fn is_identity(&self) -> bool {
        match &self.exact {
            Some(m) => m.iter().enumerate().all(|(k, c)| {
                let (i, j) = (k % m.nrows(), k / m.nrows());
                *c == if i == j {
                    GaussianRational::one()
                } else {
                    GaussianRational::zero()
                }
            }),
            None => self.float == DMatrix::identity(self.size(), self.size()),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            float: &self.float * &other.float,
            exact: match (&self.exact, &other.exact) {
                (Some(a), Some(b)) => Some(a * b),
                _ => None,
            },
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        if let Some(m) = &self.exact {
            let (_, inv) = crate::catalog::classical::exact_det_inverse(m)
                .ok_or_else(|| Error::Singular("group element".into()))?;
            return Self::from_exact(inv);
        }
        let inv = self
            .float
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("group element".into()))?;
        Ok(Self {
            float: inv,
            exact: None,
        })
    }

    /// Drops the exact entries, so later work is in floating point.
    pub fn to_float(&self) -> Self {
        Self {
            float: self.float.clone(),
            exact: None,
        }
    }

    /// `exp(ξ)` for a random traceless `ξ` with entries of size about `scale`.
    pub fn random<R: Rng>(rng: &mut R, size: usize, scale: f64) -> Self {
        let mut xi = DMatrix::from_fn(size, size, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
        });
        let tr = xi.trace() / size as f64;
        for i in 0..size {
            xi[(i, i)] -= tr;
        }
        Self::exp(&xi).expect("random exponential")
    }

    /// Random exact element `L · D · U` with unit-triangular `L`, `U` and
    /// diagonal `D` of determinant 1, entries small rationals.
    pub fn random_exact<R: Rng>(rng: &mut R, size: usize) -> Self {
        let mut small = |num: i64, den: i64| {
            GaussianRational::from_ratio(rng.gen_range(-num..=num), rng.gen_range(1..=den))
        };
        let l = DMatrix::from_fn(size, size, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => GaussianRational::one(),
            std::cmp::Ordering::Greater => small(2, 3),
            std::cmp::Ordering::Less => GaussianRational::zero(),
        });
        let u = DMatrix::from_fn(size, size, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => GaussianRational::one(),
            std::cmp::Ordering::Less => small(2, 3),
            std::cmp::Ordering::Greater => GaussianRational::zero(),
        });
        let mut diag = Vec::with_capacity(size);
        let mut prod = GaussianRational::one();
        for _ in 0..size - 1 {
            let mut x = small(3, 2);
            if x.is_zero() {
                x = GaussianRational::from_ratio(3, 2);
            }
            prod = &prod * &x;
            diag.push(x);
        }
        diag.push(prod.inv().expect("nonzero"));
        let d = DMatrix::from_fn(size, size, |i, j| {
            if i == j {
                diag[i].clone()
            } else {
                GaussianRational::zero()
            }
        });
        Self::from_exact(&(&l * &d) * &u).expect("unit determinant by construction")
    }
}

#[derive(Serialize, Deserialize)]
struct EntryFile {
    re: serde_json::Value,
    #[serde(default)]
    im: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    entries: Vec<EntryFile>,
}

enum Parsed {
    Exact(BigRational),
    Float(f64),
}

fn parse_number(v: &serde_json::Value) -> Result<Parsed> {
    match v {
        serde_json::Value::Null => Ok(Parsed::Exact(BigRational::zero())),
        serde_json::Value::String(s) => Ok(Parsed::Exact(parse_rational(s)?)),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Parsed::Exact(BigRational::from_integer(i.into())))
            } else {
                Ok(Parsed::Float(
                    n.as_f64().ok_or_else(|| Error::invalid("bad number"))?,
                ))
            }
        }
        _ => Err(Error::invalid(format!(
            "matrix entries must be strings or numbers, got {v}"
        ))),
    }
}

impl GroupElement {
    /// Parses `{"rows": r, "cols": r, "entries": [{"re": .., "im": ..}, ..]}`
    /// in row-major order. Entries given as integers or rational/decimal
    /// strings are kept exact; any non-integer JSON number makes the whole
    /// matrix floating. With `normalize`, the matrix is rescaled to
    /// determinant 1 (in floating point).
    pub fn from_json(s: &str, normalize: bool) -> Result<Self> {
        let f: MatrixFile = serde_json::from_str(s)?;
        if f.rows != f.cols || f.rows == 0 {
            return Err(Error::invalid(
                "group element must be a nonempty square matrix",
            ));
        }
        if f.entries.len() != f.rows * f.cols {
            return Err(Error::shape(
                format!("{} entries", f.rows * f.cols),
                f.entries.len().to_string(),
            ));
        }
        let mut exact = Vec::new();
        let mut float = Vec::new();
        let mut all_exact = true;
        for e in &f.entries {
            let parts = [parse_number(&e.re)?, parse_number(&e.im)?];
            let f64s: Vec<f64> = parts
                .iter()
                .map(|p| match p {
                    Parsed::Exact(r) => crate::exactpoly::ratio_to_f64(r),
                    Parsed::Float(x) => *x,
                })
                .collect();
            float.push(Complex64::new(f64s[0], f64s[1]));
            match parts {
                [Parsed::Exact(a), Parsed::Exact(b)] => exact.push(GaussianRational::new(a, b)),
                _ => all_exact = false,
            }
        }
        let n = f.rows;
        if all_exact {
            let m = DMatrix::from_row_slice(n, n, &exact);
            match Self::from_exact(m) {
                Ok(g) => return Ok(g),
                Err(e) if !normalize => return Err(e),
                Err(_) => {}
            }
        }
        let m = DMatrix::from_row_slice(n, n, &float);
        if normalize {
            Self::normalized(m)
        } else {
            Self::from_float(m)
        }
    }

    pub fn to_json(&self) -> String {
        let n = self.size();
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| match &self.exact {
                Some(m) => EntryFile {
                    re: crate::exactpoly::format_rational(&m[(i, j)].re).into(),
                    im: crate::exactpoly::format_rational(&m[(i, j)].im).into(),
                },
                None => EntryFile {
                    re: self.float[(i, j)].re.into(),
                    im: self.float[(i, j)].im.into(),
                },
            })
            .collect();
        serde_json::to_string(&MatrixFile {
            rows: n,
            cols: n,
            entries,
        })
        .expect("matrix serialization")
    }
}

/// `σ·P`, exactly when `σ` is exact.
pub enum Acted {
    Exact(ExactPoly),
    Float(FloatPoly),
}

pub fn act(sigma: &GroupElement, p: &ExactPoly) -> Result<Acted> {
    if p.cols() != sigma.size() {
        return Err(Error::shape(
            format!("polynomial on {} columns", sigma.size()),
            format!("{} columns", p.cols()),
        ));
    }
    Ok(match sigma.exact() {
        Some(m) => Acted::Exact(p.right_substitute(m)?),
        None => Acted::Float(p.to_float().right_substitute(sigma.matrix())?),
    })
}

/// `LR(σ, P) = log ‖σ·P‖² - log ‖P‖²`. Exact norms are used when `σ` is
/// exact, so only the final logarithm rounds.
pub fn log_norm_ratio(sigma: &GroupElement, p: &ExactPoly) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if sigma.is_identity() {
        if p.cols() != sigma.size() {
            return Err(Error::shape(
                format!("{} columns", sigma.size()),
                format!("{} columns", p.cols()),
            ));
        }
        return Ok(0.0);
    }
    match act(sigma, p)? {
        Acted::Exact(q) => Ok(ln_rational(&(fs_norm_sq_exact(&q)? / fs_norm_sq_exact(p)?))),
        Acted::Float(q) => Ok(log_fs_norm_sq(&q)? - log_fs_norm_sq(p)?),
    }
}

/// Integer weights `(a_0, …, a_N)` with `Σ a_i = 0`; `λ(t) = diag(t^{a_i})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneParamSubgroup {
    weights: Vec<i64>,
}

impl OneParamSubgroup {
    pub fn new(weights: Vec<i64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("weights must be nonempty"));
        }
        let s: i64 = weights.iter().sum();
        if s != 0 {
            return Err(Error::invalid(format!("weights must sum to 0, got {s}")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.weights.iter().all(|&a| a == 0)
    }

    /// `λ(t)` for real `t > 0`, as a floating group element.
    pub fn at(&self, t: f64) -> Result<GroupElement> {
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::invalid("t must be positive and finite"));
        }
        let n = self.size();
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(t.powf(self.weights[i] as f64), 0.0)
            } else {
                Complex64::zero()
            }
        });
        GroupElement::normalized(m)
    }

    /// `ξ = diag(a_i)`, so that `λ(e^s) = exp(s ξ)`.
    pub fn generator(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.size(),
            self.weights.iter().map(|&a| Complex64::new(a as f64, 0.0)),
        ))
    }
}

impl fmt::Display for OneParamSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn term_weight(e: &MatrixExponent, lambda: &OneParamSubgroup) -> i64 {
    e.column_degrees()
        .iter()
        .zip(lambda.weights())
        .map(|(&c, &a)| c as i64 * a)
        .sum()
}

/// `min_α ⟨column degrees of α, λ⟩`: `‖λ(t)·P‖² ~ |t|^{2w}` as `t → 0`.
pub fn min_weight<C: Coeff>(lambda: &OneParamSubgroup, p: &MatrixPoly<C>) -> Result<i64> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.cols() != lambda.size() {
        return Err(Error::shape(
            format!("{} columns", lambda.size()),
            format!("{} columns", p.cols()),
        ));
    }
    Ok(p.terms()
        .map(|(e, _)| term_weight(e, lambda))
        .min()
        .expect("nonzero"))
}

/// `LR(λ(t), P)` for `t > 0`, computed from the exponents without forming
/// `λ(t)`, so `t` may be far below `1e-100`.
pub fn torus_log_norm_ratio<C: Coeff>(
    lambda: &OneParamSubgroup,
    t: f64,
    p: &MatrixPoly<C>,
) -> Result<f64> {
    min_weight(lambda, p)?;
    if t <= 0.0 || !t.is_finite() {
        return Err(Error::invalid("t must be positive and finite"));
    }
    let lt = 2.0 * t.ln();
    let acted = log_sum_exp(p.terms().filter_map(|(e, c)| {
        let a = c.ln_abs();
        a.is_finite()
            .then(|| 2.0 * a - e.ln_factorial_product() + term_weight(e, lambda) as f64 * lt)
    }));
    Ok(acted - log_fs_norm_sq(p)?)
}

/// `D_η Q (A) = d/ds Q(A e^{sη})|_{s=0} = Σ (Aη)_rc ∂Q/∂A_rc`.
pub fn derivation(q: &FloatPoly, eta: &DMatrix<Complex64>) -> Result<FloatPoly> {
    let (rows, cols) = q.shape();
    if eta.nrows() != cols || eta.ncols() != cols {
        return Err(Error::shape(
            format!("{cols}x{cols}"),
            format!("{}x{}", eta.nrows(), eta.ncols()),
        ));
    }
    let mut terms = Vec::new();
    for (e, c) in q.terms() {
        for (r, col, k) in e.nonzero() {
            for j in 0..cols {
                let h = eta[(j, col)];
                if h == Complex64::zero() {
                    continue;
                }
                let mut flat = e.as_flat().to_vec();
                flat[r * cols + col] -= 1;
                flat[r * cols + j] += 1;
                terms.push((
                    MatrixExponent::from_flat(rows, cols, flat),
                    c * h * k as f64,
                ));
            }
        }
    }
    Ok(FloatPoly::from_terms(rows, cols, terms))
}

/// `d/ds log ‖Q(· e^{sη})‖²` at `s = 0`, i.e. `2 Re⟨D_η Q, Q⟩ / ‖Q‖²`.
pub fn log_norm_derivative(q: &FloatPoly, eta: &DMatrix<Complex64>) -> Result<f64> {
    let dq = derivation(q, eta)?;
    let num = fs_inner(&dq, q)?.re;
    let den = fs_inner(q, q)?.re;
    if den <= 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    Ok(2.0 * num / den)
}

/// Which polynomial a tensor factor refers to: `Δ^{(n-i)}`, with `i = 0`
/// the Chow form `R_X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FactorRef(pub u32);

/// `⨂ P_j^{e_j}`, never expanded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalTensor {
    pub factors: Vec<(FactorRef, BigInt)>,
}

impl Serialize for FormalTensor {
    /// `[{"index": i, "exponent": "e"}, ...]`, exponents as decimal strings.
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.factors.len()))?;
        for (f, e) in &self.factors {
            seq.serialize_element(&serde_json::json!({"index": f.0, "exponent": e.to_string()}))?;
        }
        seq.end()
    }
}

impl FormalTensor {
    pub fn new(factors: Vec<(FactorRef, BigInt)>) -> Result<Self> {
        if factors.iter().any(|(_, e)| !e.is_positive()) {
            return Err(Error::invalid("tensor exponents must be positive"));
        }
        Ok(Self { factors })
    }

    /// `Σ e_j deg P_j`.
    pub fn total_degree(&self, inst: &VarietyInstance) -> Result<BigInt> {
        let mut s = BigInt::zero();
        for (f, e) in &self.factors {
            let d = inst
                .delta(f.0)?
                .homogeneous_degree()
                .ok_or_else(|| Error::invalid("factor is not homogeneous"))?;
            s += e * BigInt::from(d);
        }
        Ok(s)
    }

    pub fn describe(&self, n: u32) -> String {
        self.factors
            .iter()
            .map(|(f, e)| {
                let base = if f.0 == 0 {
                    "R".to_string()
                } else {
                    format!("Δ^({})", n - f.0)
                };
                format!("{base}^{e}")
            })
            .collect::<Vec<_>>()
            .join(" ⊗ ")
    }
}

fn big_to_f64(e: &BigInt) -> f64 {
    e.to_f64().unwrap_or(f64::INFINITY)
}

/// `log ‖σ·v‖² - log ‖v‖² = Σ e_j LR(σ, P_j)`.
pub fn tensor_log_norm_ratio(
    sigma: &GroupElement,
    v: &FormalTensor,
    inst: &VarietyInstance,
) -> Result<f64> {
    let mut s = 0.0;
    for (f, e) in &v.factors {
        s += big_to_f64(e) * log_norm_ratio(sigma, inst.delta(f.0)?)?;
    }
    Ok(s)
}

/// `Σ e_j min_weight(λ, P_j)`.
pub fn tensor_min_weight(
    lambda: &OneParamSubgroup,
    v: &FormalTensor,
    inst: &VarietyInstance,
) -> Result<BigInt> {
    let mut s = BigInt::zero();
    for (f, e) in &v.factors {
        s += e * BigInt::from(min_weight(lambda, inst.delta(f.0)?)?);
    }
    Ok(s)
}
