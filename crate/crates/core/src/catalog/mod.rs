//! Explicit varieties with their Chow forms and hyperdiscriminants.
//!
//! Every instance carries `R_X = Δ^{(n)}` on `(n+1) × (N+1)` matrices and
//! `Δ^{(n-i)}` on `(n-i+1) × (N+1)` matrices for the formats it can build.
//! Degrees are checked against the Chern-number formula when an instance is
//! assembled, whether it comes from the catalog or from disk.

pub mod classical;
mod io;
mod param;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

pub use classical::{
    binary_discriminant, cayley_hyperdet, chow_form_hypersurface, cross_product, dual_quadric,
    matrix_from_quadric, normalize, sylvester_resultant, sylvester_resultant_scalar, symbolic_det,
};
pub use io::{read_instance, write_instance};
pub use param::{Monomial, Parametrization};

use crate::chern::{hypersurface_mu, rational_curve_mu};
use crate::error::{Error, Result};
use crate::exactpoly::{ExactPoly, GaussianRational};
use crate::invariants::{hyperdiscriminant_degree, VarietyData};

/// Largest rational normal curve the catalog builds; the Sylvester
/// determinant grows quickly past this.
pub const MAX_CURVE_DEGREE: u32 = 6;
/// Largest quadric hypersurface dimension the catalog builds; the Chow form
/// of the next one has over a million terms.
pub const MAX_QUADRIC_DIM: u32 = 4;

/// `chow = Δ^{(n)}` and `hyper[i] = Δ^{(n-i)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminantSet {
    pub chow: ExactPoly,
    pub hyper: BTreeMap<u32, ExactPoly>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarietyInstance {
    pub name: String,
    pub data: VarietyData,
    pub parametrization: Option<Parametrization>,
    pub discriminants: DiscriminantSet,
}

impl VarietyInstance {
    /// Checks shapes, homogeneity and degrees of every stored polynomial.
    pub fn new(
        name: impl Into<String>,
        data: VarietyData,
        parametrization: Option<Parametrization>,
        discriminants: DiscriminantSet,
    ) -> Result<Self> {
        let inst = Self {
            name: name.into(),
            data,
            parametrization,
            discriminants,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        let n = self.data.n;
        let cols = self.data.ambient as usize + 1;
        check_poly(
            "Chow form",
            &self.discriminants.chow,
            n as usize + 1,
            cols,
            &self.data,
            0,
        )?;
        for (&i, p) in &self.discriminants.hyper {
            if i == 0 || i > n - self.data.delta {
                return Err(Error::OutOfRange {
                    what: "hyperdiscriminant index",
                    detail: format!("i = {i} outside 1..={}", n - self.data.delta),
                });
            }
            check_poly(
                &format!("hyperdiscriminant of format {}", n - i),
                p,
                (n - i) as usize + 1,
                cols,
                &self.data,
                i,
            )?;
        }
        if let Some(t) = &self.parametrization {
            if t.dim() != n as usize || t.components.len() != cols {
                return Err(Error::invalid(format!(
                    "parametrization must map C^{n} to C^{cols}, got C^{} to C^{}",
                    t.dim(),
                    t.components.len()
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.data.n
    }

    pub fn ambient(&self) -> u32 {
        self.data.ambient
    }

    /// `Δ^{(n-i)}`; `i = 0` is the Chow form.
    pub fn delta(&self, i: u32) -> Result<&ExactPoly> {
        if i == 0 {
            return Ok(&self.discriminants.chow);
        }
        self.data.check_admissible(i)?;
        self.discriminants.hyper.get(&i).ok_or_else(|| {
            Error::Missing(format!(
                "{}: hyperdiscriminant of format {} not available",
                self.name,
                self.data.n - i
            ))
        })
    }

    /// Whether every polynomial needed for `M_k` is present.
    pub fn supports(&self, k: u32) -> bool {
        k >= 1
            && self.data.admissible(k)
            && (1..=k).all(|i| self.discriminants.hyper.contains_key(&i))
    }

    /// The `k` for which `M_k` can be evaluated.
    pub fn supported_k(&self) -> Vec<u32> {
        (1..=self.data.n).filter(|&k| self.supports(k)).collect()
    }
}

fn check_poly(
    what: &str,
    p: &ExactPoly,
    rows: usize,
    cols: usize,
    data: &VarietyData,
    i: u32,
) -> Result<()> {
    if p.shape() != (rows, cols) {
        return Err(Error::shape(
            format!("{what} on {rows}x{cols}"),
            format!("{}x{}", p.rows(), p.cols()),
        ));
    }
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let Some(found) = p.homogeneous_degree() else {
        return Err(Error::invalid(format!("{what} is not homogeneous")));
    };
    let expected = hyperdiscriminant_degree(data, i)?;
    if expected != found.into() {
        return Err(Error::DegreeMismatch {
            what: what.to_string(),
            expected: expected.to_string(),
            found: found.to_string(),
        });
    }
    Ok(())
}

/// Names accepted by [`build_instance`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CatalogName {
    Conic,
    RationalNormalCurve(u32),
    QuadricSurface,
    QuadricHypersurface(u32),
    User(PathBuf),
}

impl fmt::Display for CatalogName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogName::Conic => write!(f, "conic"),
            CatalogName::RationalNormalCurve(d) => write!(f, "rational_normal_curve({d})"),
            CatalogName::QuadricSurface => write!(f, "quadric_surface"),
            CatalogName::QuadricHypersurface(n) => write!(f, "quadric_hypersurface({n})"),
            CatalogName::User(p) => write!(f, "user({})", p.display()),
        }
    }
}

impl FromStr for CatalogName {
    type Err = Error;

    /// Accepts `conic`, `twisted_cubic`, `rational_normal_curve(3)` (or
    /// `rational_normal_curve:3`), `quadric_surface`,
    /// `quadric_hypersurface(n)` and `user(path)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match (s.find('('), s.strip_suffix(')')) {
            (Some(i), Some(body)) => (&s[..i], Some(&body[i + 1..])),
            _ => match s.split_once(':') {
                Some((h, a)) => (h, Some(a)),
                None => (s, None),
            },
        };
        let int = |a: Option<&str>| -> Result<u32> {
            a.ok_or_else(|| Error::invalid(format!("{head} needs a parameter")))?
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad parameter in {s:?}")))
        };
        match head {
            "conic" if arg.is_none() => Ok(CatalogName::Conic),
            "twisted_cubic" if arg.is_none() => Ok(CatalogName::RationalNormalCurve(3)),
            "rational_normal_curve" | "rnc" => Ok(CatalogName::RationalNormalCurve(int(arg)?)),
            "quadric_surface" if arg.is_none() => Ok(CatalogName::QuadricSurface),
            "quadric_hypersurface" => Ok(CatalogName::QuadricHypersurface(int(arg)?)),
            "user" => {
                Ok(CatalogName::User(PathBuf::from(arg.ok_or_else(|| {
                    Error::invalid("user needs a directory")
                })?)))
            }
            _ => Err(Error::invalid(format!("unknown catalog entry {s:?}"))),
        }
    }
}

/// The built-in catalog entries, for listings and tests.
pub fn builtin_names() -> Vec<CatalogName> {
    vec![
        CatalogName::Conic,
        CatalogName::RationalNormalCurve(3),
        CatalogName::RationalNormalCurve(4),
        CatalogName::QuadricSurface,
        CatalogName::QuadricHypersurface(2),
        CatalogName::QuadricHypersurface(3),
    ]
}

pub fn build_instance(name: &CatalogName) -> Result<VarietyInstance> {
    match name {
        CatalogName::Conic => conic(),
        CatalogName::RationalNormalCurve(d) => rational_normal_curve(*d),
        CatalogName::QuadricSurface => quadric_surface(),
        CatalogName::QuadricHypersurface(n) => quadric_hypersurface(*n),
        CatalogName::User(dir) => read_instance(dir),
    }
}

fn g(v: i64) -> GaussianRational {
    GaussianRational::from_int(v)
}

/// `x₀x₂ - x₁²` with `T(z) = (1, z, z²)`.
pub fn conic() -> Result<VarietyInstance> {
    let q = ExactPoly::from_int_terms(1, 3, &[(1, &[1, 0, 1]), (-1, &[0, 2, 0])]);
    let data = VarietyData::new(1, 2, 2, rational_curve_mu(2)?, 0)?;
    let ds = DiscriminantSet {
        chow: chow_form_hypersurface(&q)?,
        hyper: BTreeMap::from([(1, binary_discriminant(2)?)]),
    };
    VarietyInstance::new(
        "conic",
        data,
        Some(Parametrization::rational_normal_curve(2)),
        ds,
    )
}

/// `T(z) = (1, z, …, z^d)`. The Chow form is the resultant of the binary
/// forms given by the two rows, the dual is the binary discriminant.
pub fn rational_normal_curve(d: u32) -> Result<VarietyInstance> {
    if !(2..=MAX_CURVE_DEGREE).contains(&d) {
        return Err(Error::OutOfRange {
            what: "rational normal curve degree",
            detail: format!("need 2 <= d <= {MAX_CURVE_DEGREE}, got {d}"),
        });
    }
    let cols = d as usize + 1;
    let row =
        |r: usize| -> Vec<ExactPoly> { (0..cols).map(|j| ExactPoly::var(2, cols, r, j)).collect() };
    let chow = sylvester_resultant(&row(0), &row(1))?;
    let data = VarietyData::new(1, d, d, rational_curve_mu(d)?, 0)?;
    let ds = DiscriminantSet {
        chow,
        hyper: BTreeMap::from([(1, binary_discriminant(d as usize)?)]),
    };
    let name = if d == 3 {
        "twisted_cubic".to_string()
    } else {
        format!("rational_normal_curve({d})")
    };
    VarietyInstance::new(
        name,
        data,
        Some(Parametrization::rational_normal_curve(d)),
        ds,
    )
}

/// Segre quadric `x₀x₃ = x₁x₂`, `T(u, v) = (1, u, v, uv)`.
pub fn quadric_surface() -> Result<VarietyInstance> {
    let q = ExactPoly::from_int_terms(1, 4, &[(1, &[1, 0, 0, 1]), (-1, &[0, 1, 1, 0])]);
    let data = VarietyData::new(2, 3, 2, hypersurface_mu(2, 2)?, 0)?;
    let ds = DiscriminantSet {
        chow: chow_form_hypersurface(&q)?,
        hyper: BTreeMap::from([
            (1, cayley_hyperdet()),
            (2, normalize(&dual_quadric(&matrix_from_quadric(&q)?)?)),
        ]),
    };
    let one = GaussianRational::from_int(1);
    let t = Parametrization::new(
        2,
        vec![
            vec![Monomial::new(one.clone(), vec![0, 0])],
            vec![Monomial::new(one.clone(), vec![1, 0])],
            vec![Monomial::new(one.clone(), vec![0, 1])],
            vec![Monomial::new(one, vec![1, 1])],
        ],
    )?;
    VarietyInstance::new("quadric_surface", data, Some(t), ds)
}

/// `x₀x_{n+1} = Σ_{i=1}^n x_i²` with `T(u) = (1, u, Σu_i²)`. For `n = 1`
/// this is the conic; for `n = 2` the format-1 hyperdiscriminant is the
/// Cayley hyperdeterminant carried over from Segre coordinates. For `n ≥ 3`
/// only the Chow form and the dual quadric are built.
pub fn quadric_hypersurface(n: u32) -> Result<VarietyInstance> {
    if !(1..=MAX_QUADRIC_DIM).contains(&n) {
        return Err(Error::OutOfRange {
            what: "quadric dimension",
            detail: format!("need 1 <= n <= {MAX_QUADRIC_DIM}, got {n}"),
        });
    }
    let m = n as usize + 2;
    let mut q = ExactPoly::zero(1, m);
    let mut e = vec![0u32; m];
    e[0] = 1;
    e[m - 1] = 1;
    q = &q + &ExactPoly::from_int_terms(1, m, &[(1, &e)]);
    for i in 1..=n as usize {
        let mut e = vec![0u32; m];
        e[i] = 2;
        q = &q + &ExactPoly::from_int_terms(1, m, &[(-1, &e)]);
    }
    let data = VarietyData::new(n, n + 1, 2, hypersurface_mu(n, 2)?, 0)?;
    let mut hyper = BTreeMap::new();
    hyper.insert(n, normalize(&dual_quadric(&matrix_from_quadric(&q)?)?));
    if n == 2 {
        hyper.insert(1, segre_to_round(&cayley_hyperdet())?);
    }
    let ds = DiscriminantSet {
        chow: chow_form_hypersurface(&q)?,
        hyper,
    };
    let one = GaussianRational::from_int(1);
    let nv = n as usize;
    let mut comps = vec![vec![Monomial::new(one.clone(), vec![0; nv])]];
    for i in 0..nv {
        let mut e = vec![0; nv];
        e[i] = 1;
        comps.push(vec![Monomial::new(one.clone(), e)]);
    }
    comps.push(
        (0..nv)
            .map(|i| {
                let mut e = vec![0; nv];
                e[i] = 2;
                Monomial::new(one.clone(), e)
            })
            .collect(),
    );
    let t = Parametrization::new(nv, comps)?;
    let name = if n == 1 {
        "conic".to_string()
    } else {
        format!("quadric_hypersurface({n})")
    };
    VarietyInstance::new(name, data, Some(t), ds)
}

/// Carries a polynomial on Segre coordinates (`x₀x₃ = x₁x₂`) to the round
/// coordinates `y₀y₃ = y₁² + y₂²` of `quadric_hypersurface(2)`, where
/// `x = M y` with `x₁ = y₁ + i y₂`, `x₂ = y₁ - i y₂`. A form on frames of
/// the Segre quadric becomes `B ↦ P(B M⁻¹)`.
fn segre_to_round(p: &ExactPoly) -> Result<ExactPoly> {
    let i = GaussianRational::i();
    let half = GaussianRational::from_ratio(1, 2);
    let mut minv = DMatrix::from_element(4, 4, g(0));
    // y₁ = (x₁ + x₂)/2, y₂ = (x₁ - x₂)/(2i)
    minv[(0, 0)] = g(1);
    minv[(3, 3)] = g(1);
    minv[(1, 1)] = half.clone();
    minv[(1, 2)] = half.clone();
    let h_over_i = &half * &(-i.clone());
    minv[(2, 1)] = h_over_i.clone();
    minv[(2, 2)] = -h_over_i.clone();
    let out = normalize(&p.right_substitute(&minv)?);
    if out.terms().any(|(_, c)| !c.is_real()) {
        return Err(Error::invalid("transformed hyperdeterminant is not real"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalars(v: &[i64]) -> Vec<GaussianRational> {
        v.iter().map(|&x| g(x)).collect()
    }

    #[test]
    fn conic_instance() {
        let c = conic().unwrap();
        assert_eq!((c.data.n, c.data.ambient, c.data.degree), (1, 2, 2));
        assert_eq!(
            c.delta(1).unwrap(),
            &ExactPoly::from_int_terms(1, 3, &[(1, &[0, 2, 0]), (-4, &[1, 0, 1])])
        );
        assert_eq!(c.discriminants.chow.homogeneous_degree(), Some(4));
        assert_eq!(c.supported_k(), vec![1]);
    }

    #[test]
    fn quadric_hypersurface_one_is_the_conic() {
        let a = conic().unwrap();
        let b = quadric_hypersurface(1).unwrap();
        assert_eq!(a.discriminants.chow, b.discriminants.chow);
        assert_eq!(a.parametrization, b.parametrization);
        // the dual quadric and the binary discriminant agree up to sign
        let (p, q) = (a.delta(1).unwrap(), b.delta(1).unwrap());
        assert!(p == q || *p == -q);
    }

    #[test]
    fn twisted_cubic() {
        let t = rational_normal_curve(3).unwrap();
        assert_eq!(t.name, "twisted_cubic");
        assert_eq!(t.delta(1).unwrap().homogeneous_degree(), Some(4));
        assert_eq!(t.discriminants.chow.homogeneous_degree(), Some(6));
    }

    #[test]
    fn quadric_surface_instance() {
        let s = quadric_surface().unwrap();
        assert_eq!(
            s.delta(2).unwrap(),
            &ExactPoly::from_int_terms(1, 4, &[(1, &[1, 0, 0, 1]), (-1, &[0, 1, 1, 0])])
        );
        assert_eq!(s.delta(1).unwrap().homogeneous_degree(), Some(4));
        assert_eq!(s.discriminants.chow.homogeneous_degree(), Some(6));
        assert_eq!(s.supported_k(), vec![1, 2]);
    }

    #[test]
    fn round_quadric_surface() {
        let s = quadric_hypersurface(2).unwrap();
        assert_eq!(s.supported_k(), vec![1, 2]);
        // rows spanning a plane tangent at T(u, v): the hyperdeterminant vanishes.
        // Tangent plane at (1, u, v, u²+v²) is (u²+v², -2u, -2v, 1)·y.
        let h = s.delta(1).unwrap();
        for (u, v) in [(1i64, 2i64), (-3, 1), (0, 5)] {
            let tangent = [u * u + v * v, -2 * u, -2 * v, 1];
            // a pencil with a member tangent at T whose base locus contains T
            let through = [-u, 1, 0, 0];
            let a = [tangent, through].concat();
            assert_eq!(h.evaluate_flat(&scalars(&a)).unwrap(), g(0));
        }
        let generic = [1, 0, 0, 0, 0, 1, 2, 3];
        assert_ne!(h.evaluate_flat(&scalars(&generic)).unwrap(), g(0));
    }

    #[test]
    fn every_catalog_entry_builds() {
        for name in builtin_names() {
            let inst = build_instance(&name).unwrap();
            assert!(inst.parametrization.is_some(), "{name}");
        }
        for d in 2..=MAX_CURVE_DEGREE {
            let inst = rational_normal_curve(d).unwrap();
            assert_eq!(inst.discriminants.chow.homogeneous_degree(), Some(2 * d));
        }
        for n in 1..=MAX_QUADRIC_DIM {
            quadric_hypersurface(n).unwrap();
        }
    }

    #[test]
    fn larger_quadrics_are_partial() {
        let s = quadric_hypersurface(3).unwrap();
        assert_eq!(s.supported_k(), Vec::<u32>::new());
        assert!(matches!(s.delta(1), Err(Error::Missing(_))));
        assert_eq!(s.delta(3).unwrap().homogeneous_degree(), Some(2));
        assert_eq!(s.discriminants.chow.homogeneous_degree(), Some(8));
    }

    #[test]
    fn name_parsing() {
        let cases = [
            ("conic", CatalogName::Conic),
            ("twisted_cubic", CatalogName::RationalNormalCurve(3)),
            (
                "rational_normal_curve(4)",
                CatalogName::RationalNormalCurve(4),
            ),
            (
                "rational_normal_curve:5",
                CatalogName::RationalNormalCurve(5),
            ),
            ("quadric_surface", CatalogName::QuadricSurface),
            (
                "quadric_hypersurface(3)",
                CatalogName::QuadricHypersurface(3),
            ),
            ("user(some/dir)", CatalogName::User("some/dir".into())),
        ];
        for (s, want) in cases {
            let got: CatalogName = s.parse().unwrap();
            assert_eq!(got, want);
            assert_eq!(got.to_string().parse::<CatalogName>().unwrap(), want);
        }
        assert!("veronese".parse::<CatalogName>().is_err());
        assert!("rational_normal_curve(x)".parse::<CatalogName>().is_err());
        assert!(build_instance(&CatalogName::RationalNormalCurve(1)).is_err());
    }

    #[test]
    fn degree_mismatch_is_rejected() {
        let c = conic().unwrap();
        let mut ds = c.discriminants.clone();
        ds.hyper
            .insert(1, &ds.hyper[&1] * &ExactPoly::var(1, 3, 0, 0));
        let err = VarietyInstance::new("bad", c.data.clone(), None, ds).unwrap_err();
        assert!(matches!(err, Error::DegreeMismatch { .. }), "{err:?}");

        let mut ds = c.discriminants.clone();
        ds.chow = ExactPoly::zero(2, 3);
        assert!(VarietyInstance::new("bad", c.data.clone(), None, ds).is_err());

        let mut ds = c.discriminants.clone();
        ds.chow = ds.chow.with_rows(3).unwrap();
        assert!(matches!(
            VarietyInstance::new("bad", c.data.clone(), None, ds),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn conic_tangent_hyperplanes() {
        // a·T(z) = 0 and a·T'(z) = 0 force a ∝ (z², -2z, 1)
        let d = conic().unwrap();
        let disc = d.delta(1).unwrap();
        let mut state = 11u64;
        let mut next = |m: i64| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) as i64 % (2 * m + 1)) - m
        };
        for _ in 0..200 {
            let (zn, zd, s) = (next(9), next(9).abs() + 1, next(5));
            let s = if s == 0 { 1 } else { s };
            let z = GaussianRational::from_ratio(zn, zd);
            let a = [&(&z * &z) * &g(s), &(&z * &g(-2)) * &g(s), g(s)];
            assert_eq!(disc.evaluate_flat(&a).unwrap(), g(0));
        }
        let mut nonzero = 0;
        for _ in 0..200 {
            let a = scalars(&[next(9), next(9), next(9)]);
            let expect = {
                let (a0, a1, a2) = (a[0].clone(), a[1].clone(), a[2].clone());
                &(&a1 * &a1) - &(&g(4) * &(&a0 * &a2))
            };
            let v = disc.evaluate_flat(&a).unwrap();
            assert_eq!(v, expect);
            if v != g(0) {
                nonzero += 1;
            }
        }
        assert!(nonzero > 150);
    }

    #[test]
    fn curve_chow_forms_detect_intersections() {
        // R(A) = 0 iff the two row hyperplanes share a point of the curve:
        // rows f, h vanish together at T(z) exactly when the binary forms
        // share the root z.
        for d in 2..=4u32 {
            let inst = rational_normal_curve(d).unwrap();
            let r = &inst.discriminants.chow;
            let cols = d as usize + 1;
            for z in [-2i64, 1, 3] {
                // f = (t - z)·(1 + t), h = (t - z)·(2 - t^{d-1})
                let mul = |a: &[i64], b: &[i64]| {
                    let mut out = vec![0i64; a.len() + b.len() - 1];
                    for (i, x) in a.iter().enumerate() {
                        for (j, y) in b.iter().enumerate() {
                            out[i + j] += x * y;
                        }
                    }
                    out
                };
                let mut other = vec![0i64; d as usize];
                other[0] = 2;
                other[d as usize - 1] -= 1;
                let mut f = mul(&[-z, 1], &[1, 1]);
                f.resize(cols, 0);
                let h = mul(&[-z, 1], &other);
                let a = [f.clone(), h].concat();
                assert_eq!(r.evaluate_flat(&scalars(&a)).unwrap(), g(0));
                let mut shifted = f;
                shifted[0] += 1;
                shifted[d as usize] += 1;
                let mut h2 = vec![0i64; cols];
                h2[1] = 1;
                h2[0] = -z;
                let b = [shifted, h2].concat();
                // f + 1 + t^d is nonzero at z and has full degree
                assert_ne!(r.evaluate_flat(&scalars(&b)).unwrap(), g(0));
            }
        }
    }
}
