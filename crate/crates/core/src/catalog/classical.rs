//! Closed-form resultants, discriminants and hyperdeterminants.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactpoly::{Coeff, ExactPoly, GaussianRational, MatrixExponent, MatrixPoly};

/// Determinant of a square matrix of polynomials by row-wise Laplace
/// expansion over column subsets. Fine for the sizes used here (≤ 12).
pub fn symbolic_det<C: Coeff>(m: &[Vec<MatrixPoly<C>>]) -> Result<MatrixPoly<C>> {
    let size = m.len();
    if size == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    if m.iter().any(|r| r.len() != size) {
        return Err(Error::invalid("matrix is not square"));
    }
    if size > 20 {
        return Err(Error::invalid("symbolic determinant too large"));
    }
    let (rows, cols) = m[0][0].shape();
    let mut minors: std::collections::BTreeMap<u32, MatrixPoly<C>> =
        std::collections::BTreeMap::new();
    minors.insert(0, MatrixPoly::constant(rows, cols, C::one()));
    for row in m {
        let mut next: std::collections::BTreeMap<u32, MatrixPoly<C>> =
            std::collections::BTreeMap::new();
        for (mask, minor) in &minors {
            for (c, entry) in row.iter().enumerate() {
                if mask & (1 << c) != 0 || entry.is_zero() {
                    continue;
                }
                let inversions = (mask >> (c + 1)).count_ones();
                let mut term = minor * entry;
                if inversions % 2 == 1 {
                    term = -&term;
                }
                let slot = next
                    .entry(mask | (1 << c))
                    .or_insert_with(|| MatrixPoly::zero(rows, cols));
                *slot = &*slot + &term;
            }
        }
        next.retain(|_, p| !p.is_zero());
        minors = next;
    }
    Ok(minors
        .into_values()
        .next()
        .unwrap_or_else(|| MatrixPoly::zero(rows, cols)))
}

/// Resultant of `f = Σ f_j z^j` (formal degree `len-1`) and `g`, as the
/// determinant of the Sylvester matrix whose rows list coefficients in
/// increasing degree. This equals `(-1)^{d₁d₂}` times the classical
/// leading-coefficient-first resultant, e.g. `Res(z-2, z-3) = 1`.
pub fn sylvester_resultant<C: Coeff>(
    f: &[MatrixPoly<C>],
    g: &[MatrixPoly<C>],
) -> Result<MatrixPoly<C>> {
    if f.len() < 2 || g.len() < 2 {
        return Err(Error::invalid("resultant needs polynomials of degree >= 1"));
    }
    let (d1, d2) = (f.len() - 1, g.len() - 1);
    let size = d1 + d2;
    let (rows, cols) = f[0].shape();
    let zero = MatrixPoly::zero(rows, cols);
    let mut m = vec![vec![zero; size]; size];
    for i in 0..d2 {
        for (j, c) in f.iter().enumerate() {
            m[i][i + j] = c.clone();
        }
    }
    for i in 0..d1 {
        for (j, c) in g.iter().enumerate() {
            m[d2 + i][i + j] = c.clone();
        }
    }
    symbolic_det(&m)
}

/// Resultant of two numeric univariate polynomials (coefficients in
/// increasing degree).
pub fn sylvester_resultant_scalar<C: Coeff>(f: &[C], g: &[C]) -> Result<C> {
    let lift = |v: &[C]| -> Vec<MatrixPoly<C>> {
        v.iter()
            .map(|c| MatrixPoly::constant(1, 1, c.clone()))
            .collect()
    };
    let r = sylvester_resultant(&lift(f), &lift(g))?;
    Ok(r.coeff(&MatrixExponent::zero(1, 1))
        .cloned()
        .unwrap_or_else(C::zero))
}

/// The discriminant of the binary form `Σ a_j z^j` of degree `d`, as a
/// polynomial on a `1 × (d+1)` matrix, normalized so that the coefficient of
/// `a_0^{d-1} a_d^{d-1}` is `(-1)^{d(d-1)/2} d^d`. For `d = 2` this is
/// `a₁² - 4a₀a₂`.
pub fn binary_discriminant(d: usize) -> Result<ExactPoly> {
    if d < 2 {
        return Err(Error::invalid("discriminant needs degree >= 2"));
    }
    let cols = d + 1;
    let f: Vec<ExactPoly> = (0..cols).map(|j| ExactPoly::var(1, cols, 0, j)).collect();
    let fp: Vec<ExactPoly> = (1..cols)
        .map(|j| f[j].scale(&GaussianRational::from_int(j as i64)))
        .collect();
    let res = sylvester_resultant(&f, &fp)?;
    let lead = MatrixExponent::unit(1, cols, 0, d);
    let disc = res
        .div_monomial(&lead, &GaussianRational::one())
        .map_err(|_| Error::invalid("resultant not divisible by the leading coefficient"))?;
    let mut key = vec![0u32; cols];
    key[0] = (d - 1) as u32;
    key[d] = (d - 1) as u32;
    let key = MatrixExponent::from_flat(1, cols, key);
    let expected_abs = num_traits::pow(BigInt::from(d), d);
    let c = disc
        .coeff(&key)
        .ok_or_else(|| Error::invalid("discriminant lacks the a_0^{d-1} a_d^{d-1} term"))?;
    if c.re.abs() != BigRational::from_integer(expected_abs) || !c.is_real() {
        return Err(Error::invalid(format!(
            "unexpected discriminant coefficient {c}"
        )));
    }
    let want_negative = (d * (d - 1) / 2) % 2 == 1;
    Ok(if c.re.is_negative() == want_negative {
        disc
    } else {
        -&disc
    })
}

/// Exact determinant and inverse by Gauss–Jordan elimination.
pub fn exact_det_inverse(
    q: &DMatrix<GaussianRational>,
) -> Option<(GaussianRational, DMatrix<GaussianRational>)> {
    let n = q.nrows();
    assert_eq!(n, q.ncols(), "square matrix expected");
    let mut a = q.clone();
    let mut inv = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            GaussianRational::one()
        } else {
            GaussianRational::zero()
        }
    });
    let mut det = GaussianRational::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
        if pivot != col {
            a.swap_rows(pivot, col);
            inv.swap_rows(pivot, col);
            det = -det;
        }
        let p = a[(col, col)].clone();
        det = &det * &p;
        let pinv = p.inv()?;
        for j in 0..n {
            a[(col, j)] = &a[(col, j)] * &pinv;
            inv[(col, j)] = &inv[(col, j)] * &pinv;
        }
        for r in 0..n {
            if r == col || a[(r, col)].is_zero() {
                continue;
            }
            let factor = a[(r, col)].clone();
            for j in 0..n {
                let t = &factor * &a[(col, j)];
                a[(r, j)] = &a[(r, j)] - &t;
                let t = &factor * &inv[(col, j)];
                inv[(r, j)] = &inv[(r, j)] - &t;
            }
        }
    }
    Some((det, inv))
}

/// Quadratic form `x ↦ xᵀ Q x` as a one-row polynomial.
pub fn quadric_from_matrix(q: &DMatrix<GaussianRational>) -> ExactPoly {
    let m = q.nrows();
    let mut out = ExactPoly::zero(1, m);
    for i in 0..m {
        for j in 0..m {
            if q[(i, j)].is_zero() {
                continue;
            }
            let mut e = vec![0u32; m];
            e[i] += 1;
            e[j] += 1;
            let t = ExactPoly::from_terms(
                1,
                m,
                [(MatrixExponent::from_flat(1, m, e), q[(i, j)].clone())],
            );
            out = &out + &t;
        }
    }
    out
}

/// Symmetric matrix of a homogeneous quadric: `Q_ii` is the coefficient of
/// `x_i²`, `Q_ij = Q_ji` is half the coefficient of `x_i x_j`.
pub fn matrix_from_quadric(q: &ExactPoly) -> Result<DMatrix<GaussianRational>> {
    if q.rows() != 1 || q.homogeneous_degree() != Some(2) {
        return Err(Error::invalid(
            "expected a homogeneous quadric in one row of variables",
        ));
    }
    let m = q.cols();
    let half = GaussianRational::from_ratio(1, 2);
    let mut out = DMatrix::from_element(m, m, GaussianRational::zero());
    for (e, c) in q.terms() {
        let idx: Vec<usize> = e
            .nonzero()
            .flat_map(|(_, col, k)| std::iter::repeat_n(col, k as usize))
            .collect();
        let (i, j) = (idx[0], idx[1]);
        if i == j {
            out[(i, i)] = c.clone();
        } else {
            out[(i, j)] = c * &half;
            out[(j, i)] = c * &half;
        }
    }
    Ok(out)
}

/// Dual of the smooth quadric `xᵀQx = 0`: `a ↦ aᵀ adj(Q) a`.
pub fn dual_quadric(q: &DMatrix<GaussianRational>) -> Result<ExactPoly> {
    if q.nrows() != q.ncols() {
        return Err(Error::invalid("quadric matrix must be square"));
    }
    if q != &q.transpose() {
        return Err(Error::invalid("quadric matrix must be symmetric"));
    }
    let (det, inv) = exact_det_inverse(q)
        .ok_or_else(|| Error::Singular("variety not smooth: singular quadric".into()))?;
    let adj = inv.map(|x| &x * &det);
    Ok(quadric_from_matrix(&adj))
}

/// Cayley's 2×2×2 hyperdeterminant on a `2 × 4` matrix, with
/// `a_{ijk} = A[i][2j+k]`.
pub fn cayley_hyperdet() -> ExactPoly {
    let a = |i: usize, j: usize, k: usize| ExactPoly::var(2, 4, i, 2 * j + k);
    let prod = |xs: [(usize, usize, usize); 4]| {
        xs.iter().map(|&(i, j, k)| a(i, j, k)).fold(
            ExactPoly::constant(2, 4, GaussianRational::one()),
            |acc, x| &acc * &x,
        )
    };
    let squares = [
        [(0, 0, 0), (0, 0, 0), (1, 1, 1), (1, 1, 1)],
        [(0, 0, 1), (0, 0, 1), (1, 1, 0), (1, 1, 0)],
        [(0, 1, 0), (0, 1, 0), (1, 0, 1), (1, 0, 1)],
        [(1, 0, 0), (1, 0, 0), (0, 1, 1), (0, 1, 1)],
    ];
    let mixed = [
        [(0, 0, 0), (0, 0, 1), (1, 1, 0), (1, 1, 1)],
        [(0, 0, 0), (0, 1, 0), (1, 0, 1), (1, 1, 1)],
        [(0, 0, 0), (1, 0, 0), (0, 1, 1), (1, 1, 1)],
        [(0, 0, 1), (0, 1, 0), (1, 0, 1), (1, 1, 0)],
        [(0, 0, 1), (1, 0, 0), (0, 1, 1), (1, 1, 0)],
        [(0, 1, 0), (1, 0, 0), (0, 1, 1), (1, 0, 1)],
    ];
    let quartic = [
        [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)],
        [(0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1)],
    ];
    let mut out = ExactPoly::zero(2, 4);
    for s in squares {
        out = &out + &prod(s);
    }
    let m2 = GaussianRational::from_int(-2);
    for s in mixed {
        out = &out + &prod(s).scale(&m2);
    }
    let p4 = GaussianRational::from_int(4);
    for s in quartic {
        out = &out + &prod(s).scale(&p4);
    }
    out
}

/// Generalized cross product of the rows of an `(m-1) × m` variable matrix:
/// `p_j = (-1)^j det(A without column j)`.
pub fn cross_product(m: usize) -> Result<Vec<ExactPoly>> {
    if m < 2 {
        return Err(Error::invalid("cross product needs at least 2 columns"));
    }
    let rows = m - 1;
    (0..m)
        .map(|j| {
            let minor: Vec<Vec<ExactPoly>> = (0..rows)
                .map(|r| {
                    (0..m)
                        .filter(|&c| c != j)
                        .map(|c| ExactPoly::var(rows, m, r, c))
                        .collect()
                })
                .collect();
            let d = symbolic_det(&minor)?;
            Ok(if j % 2 == 1 { -&d } else { d })
        })
        .collect()
}

/// `q(p_0, …, p_{m-1})` for a one-row polynomial `q` and argument
/// polynomials sharing one shape.
pub fn compose(q: &ExactPoly, args: &[ExactPoly]) -> Result<ExactPoly> {
    if q.rows() != 1 || q.cols() != args.len() || args.is_empty() {
        return Err(Error::invalid(
            "compose: argument count must match the variables of q",
        ));
    }
    let (rows, cols) = args[0].shape();
    let mut out = ExactPoly::zero(rows, cols);
    for (e, c) in q.terms() {
        let mut t = ExactPoly::constant(rows, cols, c.clone());
        for (_, j, k) in e.nonzero() {
            t = &t * &args[j].pow(k);
        }
        out = &out + &t;
    }
    Ok(out)
}

/// Chow form of the quadric hypersurface `q = 0` in Stiefel coordinates:
/// `R(A) = q(p(A))` where `p(A)` is the cross product of the `m-1` rows.
pub fn chow_form_hypersurface(q: &ExactPoly) -> Result<ExactPoly> {
    if q.rows() != 1 || q.homogeneous_degree() != Some(2) {
        return Err(Error::invalid("expected a homogeneous quadric"));
    }
    compose(q, &cross_product(q.cols())?)
}

/// Divides out the positive rational content, leaving primitive integer
/// coefficients with their signs. Non-real polynomials are first divided by
/// the coefficient of their smallest term (graded lexicographic order).
pub fn normalize(p: &ExactPoly) -> ExactPoly {
    let Some((_, first)) = p.terms().next() else {
        return p.clone();
    };
    let mut q = p.clone();
    if p.terms().any(|(_, c)| !c.is_real()) {
        q = q.scale(&first.inv().expect("nonzero coefficient"));
        if q.terms().any(|(_, c)| !c.is_real()) {
            return q;
        }
    }
    let mut lcm = BigInt::one();
    let mut gcd = BigInt::zero();
    for (_, c) in q.terms() {
        lcm = lcm.lcm(c.re.denom());
        gcd = gcd.gcd(c.re.numer());
    }
    q.scale(&GaussianRational::real(BigRational::new(lcm, gcd.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(v: i64) -> GaussianRational {
        GaussianRational::from_int(v)
    }

    fn scalars(v: &[i64]) -> Vec<GaussianRational> {
        v.iter().map(|&x| g(x)).collect()
    }

    #[test]
    fn scalar_resultants() {
        assert_eq!(
            sylvester_resultant_scalar(&scalars(&[-2, 1]), &scalars(&[-3, 1])).unwrap(),
            g(1)
        );
        assert_eq!(
            sylvester_resultant_scalar(&scalars(&[-1, 0, 1]), &scalars(&[-1, 1])).unwrap(),
            g(0)
        );
        assert_eq!(
            sylvester_resultant_scalar(&scalars(&[1, 0, 1]), &scalars(&[-1, 1])).unwrap(),
            g(2)
        );
        assert!(sylvester_resultant_scalar(&scalars(&[1]), &scalars(&[-1, 1])).is_err());
    }

    #[test]
    fn resultant_is_multiplicative() {
        let mut state = 3u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) % 9) as i64 - 4
        };
        let mul = |a: &[i64], b: &[i64]| {
            let mut out = vec![0i64; a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        };
        for _ in 0..40 {
            let (la, lb, lc) = (
                2 + (next().unsigned_abs() % 3) as usize,
                2 + (next().unsigned_abs() % 2) as usize,
                2 + (next().unsigned_abs() % 3) as usize,
            );
            let f: Vec<i64> = (0..la).map(|_| next()).collect();
            let g: Vec<i64> = (0..lb).map(|_| next()).collect();
            let h: Vec<i64> = (0..lc).map(|_| next()).collect();
            let lhs = sylvester_resultant_scalar(&scalars(&mul(&f, &g)), &scalars(&h)).unwrap();
            let rhs = &sylvester_resultant_scalar(&scalars(&f), &scalars(&h)).unwrap()
                * &sylvester_resultant_scalar(&scalars(&g), &scalars(&h)).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn quadratic_discriminant() {
        let d = binary_discriminant(2).unwrap();
        assert_eq!(
            d,
            ExactPoly::from_int_terms(1, 3, &[(1, &[0, 2, 0]), (-4, &[1, 0, 1])])
        );
        assert_eq!(d.evaluate_flat(&scalars(&[1, 0, 1])).unwrap(), g(-4));
    }

    #[test]
    fn cubic_discriminant() {
        let d = binary_discriminant(3).unwrap();
        assert_eq!(d.homogeneous_degree(), Some(4));
        // f = q + p z + z³  ->  -4p³ - 27q²
        for (qv, pv) in [(1, 1), (2, -3), (-5, 7), (0, 4)] {
            let v = d.evaluate_flat(&scalars(&[qv, pv, 0, 1])).unwrap();
            assert_eq!(v, g(-4 * pv * pv * pv - 27 * qv * qv));
        }
        // (z-1)²(z+2) = z³ - 3z + 2 has a double root
        assert_eq!(d.evaluate_flat(&scalars(&[2, -3, 0, 1])).unwrap(), g(0));
    }

    #[test]
    fn discriminant_degrees() {
        for d in 2..=5 {
            assert_eq!(
                binary_discriminant(d).unwrap().homogeneous_degree(),
                Some(2 * d as u32 - 2)
            );
        }
    }

    #[test]
    fn dual_quadrics() {
        let id = DMatrix::from_fn(3, 3, |i, j| if i == j { g(1) } else { g(0) });
        let dual = dual_quadric(&id).unwrap();
        assert_eq!(
            dual,
            ExactPoly::from_int_terms(1, 3, &[(1, &[0, 0, 2]), (1, &[0, 2, 0]), (1, &[2, 0, 0])])
        );

        let conic = ExactPoly::from_int_terms(1, 3, &[(1, &[1, 0, 1]), (-1, &[0, 2, 0])]);
        let dual = dual_quadric(&matrix_from_quadric(&conic).unwrap()).unwrap();
        assert_eq!(normalize(&dual), -&binary_discriminant(2).unwrap());

        let segre = ExactPoly::from_int_terms(1, 4, &[(1, &[1, 0, 0, 1]), (-1, &[0, 1, 1, 0])]);
        let dual = dual_quadric(&matrix_from_quadric(&segre).unwrap()).unwrap();
        // proportional to a0a3 - a1a2
        assert_eq!(normalize(&dual), normalize(&segre));
        assert_eq!(dual.homogeneous_degree(), Some(2));

        let singular = ExactPoly::from_int_terms(1, 3, &[(1, &[2, 0, 0]), (1, &[0, 2, 0])]);
        assert!(matches!(
            dual_quadric(&matrix_from_quadric(&singular).unwrap()),
            Err(Error::Singular(_))
        ));
    }

    fn tensor(v: [i64; 8]) -> Vec<GaussianRational> {
        // row-major 2×4: A[i][2j+k] = v[4i + 2j + k]
        scalars(&v)
    }

    #[test]
    fn hyperdeterminant_examples() {
        let h = cayley_hyperdet();
        assert_eq!(h.len(), 12);
        assert_eq!(h.homogeneous_degree(), Some(4));
        assert_eq!(
            h.evaluate_flat(&tensor([1, 0, 0, 0, 0, 0, 0, 1])).unwrap(),
            g(1)
        );
        assert_eq!(
            h.evaluate_flat(&tensor([1, 0, 0, 0, 0, 0, 0, 0])).unwrap(),
            g(0)
        );
        assert_eq!(h.evaluate_flat(&tensor([1; 8])).unwrap(), g(0));
    }

    #[test]
    fn hyperdeterminant_is_discriminant_of_slice_pencil() {
        // Det(A) = disc_t det(A_0 + t A_1), A_i the 2×2 slices in j,k.
        let mut state = 7u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) % 11) as i64 - 5
        };
        let h = cayley_hyperdet();
        let disc = binary_discriminant(2).unwrap();
        for _ in 0..50 {
            let v: [i64; 8] = std::array::from_fn(|_| next());
            let (a0, a1) = (&v[0..4], &v[4..8]);
            // det(a0 + t a1) = c0 + c1 t + c2 t²
            let c0 = a0[0] * a0[3] - a0[1] * a0[2];
            let c2 = a1[0] * a1[3] - a1[1] * a1[2];
            let c1 = a0[0] * a1[3] + a1[0] * a0[3] - a0[1] * a1[2] - a1[1] * a0[2];
            let expected = disc.evaluate_flat(&scalars(&[c0, c1, c2])).unwrap();
            assert_eq!(h.evaluate_flat(&tensor(v)).unwrap(), expected);
        }
    }

    #[test]
    fn conic_chow_form() {
        let conic = ExactPoly::from_int_terms(1, 3, &[(1, &[1, 0, 1]), (-1, &[0, 2, 0])]);
        let r = chow_form_hypersurface(&conic).unwrap();
        assert_eq!(r.homogeneous_degree(), Some(4));
        let profile: Vec<_> = r.column_degree_profile().unwrap().into_keys().collect();
        assert_eq!(profile, vec![vec![1, 2, 1], vec![2, 0, 2]]);
        // rows e0, e1 meet in [0:0:1], which lies on the conic
        assert_eq!(
            r.evaluate_flat(&scalars(&[1, 0, 0, 0, 1, 0])).unwrap(),
            g(0)
        );
        assert_eq!(
            r.evaluate_flat(&scalars(&[1, 0, 0, 0, 0, 1])).unwrap(),
            g(-1)
        );
        assert_eq!(
            r.evaluate_flat(&scalars(&[1, 2, 3, 2, 4, 6])).unwrap(),
            g(0)
        );
    }

    #[test]
    fn conic_chow_form_matches_resultant() {
        // the two descriptions of the conic's Chow form agree up to sign
        let conic = ExactPoly::from_int_terms(1, 3, &[(1, &[1, 0, 1]), (-1, &[0, 2, 0])]);
        let cross = chow_form_hypersurface(&conic).unwrap();
        let f: Vec<_> = (0..3).map(|j| ExactPoly::var(2, 3, 0, j)).collect();
        let h: Vec<_> = (0..3).map(|j| ExactPoly::var(2, 3, 1, j)).collect();
        let res = sylvester_resultant(&f, &h).unwrap();
        assert!(res == cross || res == -&cross);
    }

    #[test]
    fn normalization() {
        let p = ExactPoly::from_int_terms(1, 3, &[(2, &[0, 2, 0]), (-8, &[1, 0, 1])]);
        assert_eq!(normalize(&p), binary_discriminant(2).unwrap());
        assert_eq!(normalize(&-&p), -&binary_discriminant(2).unwrap());
        let half = p.scale(&GaussianRational::from_ratio(3, 7));
        assert_eq!(normalize(&half), binary_discriminant(2).unwrap());
        let complex = p.scale(&GaussianRational::i());
        assert_eq!(normalize(&complex), binary_discriminant(2).unwrap());
    }
}
