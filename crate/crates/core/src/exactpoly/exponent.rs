use std::cmp::Ordering;

/// Exponent array of a monomial in the entries of an `rows × cols` matrix of
/// indeterminates, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixExponent {
    rows: usize,
    cols: usize,
    degree: u32,
    exps: Box<[u32]>,
}

impl MatrixExponent {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            degree: 0,
            exps: vec![0; rows * cols].into_boxed_slice(),
        }
    }

    /// Builds from a row-major flat array. Panics if the length is not
    /// `rows * cols`.
    pub fn from_flat(rows: usize, cols: usize, exps: Vec<u32>) -> Self {
        assert_eq!(exps.len(), rows * cols, "exponent array length");
        let degree = exps.iter().sum();
        Self {
            rows,
            cols,
            degree,
            exps: exps.into_boxed_slice(),
        }
    }

    /// `x[r][c]^1`.
    pub fn unit(rows: usize, cols: usize, r: usize, c: usize) -> Self {
        let mut e = Self::zero(rows, cols);
        e.exps[r * cols + c] = 1;
        e.degree = 1;
        e
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn total_degree(&self) -> u32 {
        self.degree
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.exps[r * self.cols + c]
    }

    pub fn as_flat(&self) -> &[u32] {
        &self.exps
    }

    /// Per-row nested representation, as written to files.
    pub fn to_nested(&self) -> Vec<Vec<u32>> {
        self.exps.chunks(self.cols).map(|r| r.to_vec()).collect()
    }

    /// Sum of exponents in each column; the weight of a diagonal torus
    /// element on this monomial is the dot product with this vector.
    pub fn column_degrees(&self) -> Vec<u32> {
        let mut out = vec![0; self.cols];
        for row in self.exps.chunks(self.cols) {
            for (o, e) in out.iter_mut().zip(row) {
                *o += e;
            }
        }
        out
    }

    pub fn row_degrees(&self) -> Vec<u32> {
        self.exps
            .chunks(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let exps: Box<[u32]> = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            degree: self.degree + other.degree,
            exps,
        }
    }

    /// `Π α_rc!` as a float, the denominator of the factorial-weighted norm.
    pub fn ln_factorial_product(&self) -> f64 {
        self.exps.iter().map(|&e| ln_factorial(e)).sum()
    }

    /// Iterates `(row, col, exponent)` over nonzero exponents.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(move |(i, &e)| (i / self.cols, i % self.cols, e))
    }
}

pub(crate) fn ln_factorial(e: u32) -> f64 {
    (2..=e).map(|k| (k as f64).ln()).sum()
}

/// Graded lexicographic: total degree first, then the flattened arrays
/// compared lexicographically.
impl Ord for MatrixExponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for MatrixExponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
