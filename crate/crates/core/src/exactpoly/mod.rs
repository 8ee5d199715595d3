//! Exact multivariate polynomials in the entries of a matrix of
//! indeterminates, with the group action by right multiplication.

mod exponent;
mod gaussian;
pub mod json;
mod poly;

pub use exponent::MatrixExponent;
pub use gaussian::{format_rational, ln_rational, parse_rational, ratio_to_f64, GaussianRational};
pub use poly::{Coeff, ExactPoly, FloatPoly, MatrixPoly, PolyOp};

#[cfg(test)]
mod props {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn small_q() -> impl Strategy<Value = GaussianRational> {
        (-5i64..=5, 1i64..=3, -2i64..=2, 1i64..=3).prop_map(|(a, b, c, d)| {
            GaussianRational::new(
                GaussianRational::from_ratio(a, b).re,
                GaussianRational::from_ratio(c, d).re,
            )
        })
    }

    /// Random polynomial on a 2×3 matrix with at most 4 terms of degree ≤ 2.
    fn small_poly() -> impl Strategy<Value = ExactPoly> {
        prop::collection::vec((prop::collection::vec(0u32..2, 6), small_q()), 0..4).prop_map(|ts| {
            ExactPoly::from_terms(
                2,
                3,
                ts.into_iter()
                    .map(|(e, c)| (MatrixExponent::from_flat(2, 3, e), c)),
            )
        })
    }

    fn small_matrix() -> impl Strategy<Value = DMatrix<GaussianRational>> {
        prop::collection::vec(small_q(), 9).prop_map(|v| DMatrix::from_row_slice(3, 3, &v))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn ring_axioms(p in small_poly(), q in small_poly(), r in small_poly()) {
            prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
            prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert!((&p - &p).is_zero());
        }

        #[test]
        fn substitution_is_an_action(p in small_poly(), g in small_matrix(), h in small_matrix()) {
            // (g·(h·p))(A) = (h·p)(A g) = p(A g h)
            let lhs = p.right_substitute(&h).unwrap().right_substitute(&g).unwrap();
            let rhs = p.right_substitute(&(&g * &h)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn substitution_preserves_degree(p in small_poly(), g in small_matrix()) {
            let q = p.right_substitute(&g).unwrap();
            if let Some(d) = p.homogeneous_degree() {
                prop_assert!(q.is_zero() || q.homogeneous_degree() == Some(d));
            }
            if let (Some(a), Some(b)) = (p.total_degree(), q.total_degree()) {
                prop_assert!(b <= a);
            }
        }

        #[test]
        fn substitution_commutes_with_evaluation(
            p in small_poly(),
            g in small_matrix(),
            a in prop::collection::vec(small_q(), 6),
        ) {
            let a = DMatrix::from_row_slice(2, 3, &a);
            let lhs = p.right_substitute(&g).unwrap().evaluate(&a).unwrap();
            let rhs = p.evaluate(&(&a * &g)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
