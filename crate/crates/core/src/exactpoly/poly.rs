use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};

use super::exponent::MatrixExponent;
use super::gaussian::GaussianRational;
use crate::error::{Error, Result};

/// Coefficient ring of a [`MatrixPoly`]: exact Gaussian rationals or
/// floating complex numbers.
pub trait Coeff:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_i64(v: i64) -> Self;
    fn to_c64(&self) -> Complex64;
    /// `ln |c|`, `-inf` for zero.
    fn ln_abs(&self) -> f64 {
        self.to_c64().norm().ln()
    }
}

impl Coeff for GaussianRational {
    fn from_i64(v: i64) -> Self {
        GaussianRational::from_int(v)
    }
    fn to_c64(&self) -> Complex64 {
        GaussianRational::to_c64(self)
    }
    fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            0.5 * super::gaussian::ln_rational(&self.norm_sqr())
        }
    }
}

impl Coeff for Complex64 {
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

/// Polynomial in the entries of a `rows × cols` matrix of indeterminates.
///
/// Terms are kept in canonical form: no zero coefficients, exponents in
/// graded lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPoly<C: Coeff = GaussianRational> {
    rows: usize,
    cols: usize,
    terms: BTreeMap<MatrixExponent, C>,
}

/// Exact polynomial.
pub type ExactPoly = MatrixPoly<GaussianRational>;
/// Floating complex polynomial.
pub type FloatPoly = MatrixPoly<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

impl<C: Coeff> MatrixPoly<C> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(rows: usize, cols: usize, c: C) -> Self {
        Self::from_terms(rows, cols, [(MatrixExponent::zero(rows, cols), c)])
    }

    /// The indeterminate `x[r][c]`.
    pub fn var(rows: usize, cols: usize, r: usize, c: usize) -> Self {
        assert!(r < rows && c < cols, "variable index out of range");
        Self::from_terms(
            rows,
            cols,
            [(MatrixExponent::unit(rows, cols, r, c), C::one())],
        )
    }

    /// Sums duplicate exponents and drops zeros. Panics on an exponent of the
    /// wrong shape.
    pub fn from_terms(
        rows: usize,
        cols: usize,
        terms: impl IntoIterator<Item = (MatrixExponent, C)>,
    ) -> Self {
        let mut p = Self::zero(rows, cols);
        for (e, c) in terms {
            assert_eq!((e.rows(), e.cols()), (rows, cols), "exponent shape");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: MatrixExponent, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(
        &self,
    ) -> impl ExactSizeIterator<Item = (&MatrixExponent, &C)> + DoubleEndedIterator {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &MatrixExponent) -> Option<&C> {
        self.terms.get(e)
    }

    /// Highest total degree; `None` for zero.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|e| e.total_degree())
    }

    /// The common total degree of all terms, if there is one.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|e| e.total_degree());
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.homogeneous_degree().is_some()
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = Self::zero(self.rows, self.cols);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term(e1.mul(e2), c1.clone() * c2.clone());
            }
        }
        Ok(out)
    }

    pub fn arithmetic(&self, other: &Self, op: PolyOp) -> Result<Self> {
        match op {
            PolyOp::Add => self.try_add(other),
            PolyOp::Sub => self.try_sub(other),
            PolyOp::Mul => self.try_mul(other),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(
            self.rows,
            self.cols,
            self.terms
                .iter()
                .map(|(e, x)| (e.clone(), x.clone() * c.clone())),
        )
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.rows, self.cols, C::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Column-degree vector of every term, in canonical term order.
    pub fn column_degrees(&self) -> Result<Vec<Vec<u32>>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(self.terms.keys().map(|e| e.column_degrees()).collect())
    }

    /// Distinct column-degree vectors with the number of terms carrying each.
    pub fn column_degree_profile(&self) -> Result<BTreeMap<Vec<u32>, usize>> {
        let mut out = BTreeMap::new();
        for cd in self.column_degrees()? {
            *out.entry(cd).or_insert(0) += 1;
        }
        Ok(out)
    }

    /// `σ·p`, defined by `(σ·p)(A) = p(A·g)`: every row of the variable
    /// matrix is replaced by its product with `g` on the right.
    ///
    /// This is a left action on polynomials:
    /// `right_substitute(right_substitute(p, h), g) = right_substitute(p, g·h)`.
    pub fn right_substitute(&self, g: &DMatrix<C>) -> Result<Self> {
        if g.nrows() != self.cols || g.ncols() != self.cols {
            return Err(Error::shape(
                format!("{0}x{0}", self.cols),
                format!("{}x{}", g.nrows(), g.ncols()),
            ));
        }
        let (rows, cols) = self.shape();
        // image of x[r][c] is Σ_c' x[r][c'] g[c'][c]
        let image = |r: usize, c: usize| {
            Self::from_terms(
                rows,
                cols,
                (0..cols).map(|cp| (MatrixExponent::unit(rows, cols, r, cp), g[(cp, c)].clone())),
            )
        };
        let mut powers: HashMap<(usize, usize, u32), Self> = HashMap::new();
        let mut out = Self::zero(rows, cols);
        for (e, coeff) in &self.terms {
            let mut acc = Self::constant(rows, cols, coeff.clone());
            for (r, c, k) in e.nonzero() {
                let pw = powers
                    .entry((r, c, k))
                    .or_insert_with(|| image(r, c).pow(k));
                acc = &acc * pw;
            }
            for (e2, c2) in acc.terms {
                out.add_term(e2, c2);
            }
        }
        Ok(out)
    }

    /// Evaluates at a row-major `rows × cols` matrix. Terms are summed in
    /// canonical (graded lexicographic) order.
    pub fn evaluate(&self, a: &DMatrix<C>) -> Result<C> {
        if a.nrows() != self.rows || a.ncols() != self.cols {
            return Err(Error::shape(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", a.nrows(), a.ncols()),
            ));
        }
        let mut total = C::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (r, col, k) in e.nonzero() {
                for _ in 0..k {
                    t = t * a[(r, col)].clone();
                }
            }
            total = total + t;
        }
        Ok(total)
    }

    /// Evaluates at a flat row-major slice.
    pub fn evaluate_flat(&self, values: &[C]) -> Result<C> {
        if values.len() != self.rows * self.cols {
            return Err(Error::shape(self.rows * self.cols, values.len()));
        }
        self.evaluate(&DMatrix::from_row_slice(self.rows, self.cols, values))
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> MatrixPoly<D> {
        MatrixPoly::from_terms(
            self.rows,
            self.cols,
            self.terms.iter().map(|(e, c)| (e.clone(), f(c))),
        )
    }

    pub fn to_float(&self) -> FloatPoly {
        self.map_coeffs(|c| c.to_c64())
    }

    /// Embeds a polynomial on `rows × cols` into a larger row count, keeping
    /// the existing variables in the top rows.
    pub fn with_rows(&self, rows: usize) -> Result<Self> {
        if rows < self.rows {
            return Err(Error::shape(format!(">= {} rows", self.rows), rows));
        }
        Ok(Self::from_terms(
            rows,
            self.cols,
            self.terms.iter().map(|(e, c)| {
                let mut flat = e.as_flat().to_vec();
                flat.resize(rows * self.cols, 0);
                (MatrixExponent::from_flat(rows, self.cols, flat), c.clone())
            }),
        ))
    }

    /// Divides exactly by `c·x^e`, failing if some term is not divisible.
    pub fn div_monomial(&self, e: &MatrixExponent, c: &C) -> Result<Self>
    where
        C: std::ops::Div<Output = C>,
    {
        if c.is_zero() {
            return Err(Error::invalid("division by zero scalar"));
        }
        let mut out = Self::zero(self.rows, self.cols);
        for (te, tc) in &self.terms {
            let mut flat = Vec::with_capacity(te.as_flat().len());
            for (a, b) in te.as_flat().iter().zip(e.as_flat()) {
                if a < b {
                    return Err(Error::invalid("monomial division is not exact"));
                }
                flat.push(a - b);
            }
            out.add_term(
                MatrixExponent::from_flat(self.rows, self.cols, flat),
                tc.clone() / c.clone(),
            );
        }
        Ok(out)
    }
}

impl ExactPoly {
    /// Builds a one-row polynomial from integer terms `(coefficient, exponents)`.
    pub fn from_int_terms(rows: usize, cols: usize, terms: &[(i64, &[u32])]) -> Self {
        Self::from_terms(
            rows,
            cols,
            terms.iter().map(|(c, e)| {
                (
                    MatrixExponent::from_flat(rows, cols, e.to_vec()),
                    GaussianRational::from_int(*c),
                )
            }),
        )
    }
}

impl<C: Coeff> Add for &MatrixPoly<C> {
    type Output = MatrixPoly<C>;
    /// Panics on shape mismatch; use [`MatrixPoly::try_add`] otherwise.
    fn add(self, o: &MatrixPoly<C>) -> MatrixPoly<C> {
        self.try_add(o).expect("shape mismatch in add")
    }
}

impl<C: Coeff> Sub for &MatrixPoly<C> {
    type Output = MatrixPoly<C>;
    fn sub(self, o: &MatrixPoly<C>) -> MatrixPoly<C> {
        self.try_sub(o).expect("shape mismatch in sub")
    }
}

impl<C: Coeff> Mul for &MatrixPoly<C> {
    type Output = MatrixPoly<C>;
    fn mul(self, o: &MatrixPoly<C>) -> MatrixPoly<C> {
        self.try_mul(o).expect("shape mismatch in mul")
    }
}

impl<C: Coeff> Neg for &MatrixPoly<C> {
    type Output = MatrixPoly<C>;
    fn neg(self) -> MatrixPoly<C> {
        self.map_coeffs(|c| -c.clone())
    }
}

impl<C: Coeff> fmt::Display for MatrixPoly<C> {
    /// Variables print as `x{r}{c}` (`x{c}` for one-row polynomials), highest
    /// term first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (r, col, k) in e.nonzero() {
                if self.rows == 1 {
                    write!(f, "*x{col}")?;
                } else {
                    write!(f, "*x{r}{col}")?;
                }
                if k > 1 {
                    write!(f, "^{k}")?;
                }
            }
        }
        Ok(())
    }
}
