//! Polynomial parametrizations `T: ℂ^n → ℂ^{N+1}` of an affine chart.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactpoly::{format_rational, parse_rational, GaussianRational};

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coef: GaussianRational,
    pub exp: Vec<u32>,
}

impl Monomial {
    pub fn new(coef: GaussianRational, exp: Vec<u32>) -> Self {
        Self { coef, exp }
    }
}

/// Each component is a sum of monomials in the `n` chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Parametrization {
    n: usize,
    pub components: Vec<Vec<Monomial>>,
}

impl Parametrization {
    pub fn new(n: usize, components: Vec<Vec<Monomial>>) -> Result<Self> {
        if n == 0 || components.is_empty() {
            return Err(Error::invalid(
                "parametrization needs at least one variable and one component",
            ));
        }
        if components.iter().flatten().any(|m| m.exp.len() != n) {
            return Err(Error::invalid(format!(
                "every monomial needs {n} exponents"
            )));
        }
        Ok(Self { n, components })
    }

    /// `z ↦ (1, z, …, z^d)`.
    pub fn rational_normal_curve(d: u32) -> Self {
        let one = GaussianRational::from_int(1);
        Self {
            n: 1,
            components: (0..=d)
                .map(|j| vec![Monomial::new(one.clone(), vec![j])])
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Largest total degree among the components.
    pub fn degree(&self) -> u32 {
        self.components
            .iter()
            .flatten()
            .map(|m| m.exp.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(z.len(), self.n, "wrong number of chart coordinates");
        self.components
            .iter()
            .map(|comp| {
                comp.iter()
                    .map(|m| {
                        m.exp
                            .iter()
                            .zip(z)
                            .fold(m.coef.to_c64(), |acc, (&e, &x)| acc * x.powu(e))
                    })
                    .sum()
            })
            .collect()
    }

    /// `(T, T', T'')` for a curve.
    pub fn eval_curve(&self, z: Complex64) -> [Vec<Complex64>; 3] {
        assert_eq!(self.n, 1, "eval_curve needs a one-variable parametrization");
        let mut out = [vec![], vec![], vec![]];
        for comp in &self.components {
            let mut v = [Complex64::new(0.0, 0.0); 3];
            for m in comp {
                let c = m.coef.to_c64();
                let e = m.exp[0];
                v[0] += c * z.powu(e);
                if e >= 1 {
                    v[1] += c * (e as f64) * z.powu(e - 1);
                }
                if e >= 2 {
                    v[2] += c * ((e * (e - 1)) as f64) * z.powu(e - 2);
                }
            }
            for (o, x) in out.iter_mut().zip(v) {
                o.push(x);
            }
        }
        out
    }

    /// For a curve of degree `D`, the chart at infinity `w ↦ w^D T(1/w)`.
    pub fn at_infinity(&self) -> Result<Self> {
        if self.n != 1 {
            return Err(Error::invalid(
                "the chart at infinity is defined for curves",
            ));
        }
        let d = self.degree();
        Ok(Self {
            n: 1,
            components: self
                .components
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|m| Monomial::new(m.coef.clone(), vec![d - m.exp[0]]))
                        .collect()
                })
                .collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct MonomialFile {
    re: String,
    #[serde(default = "zero_str")]
    im: String,
    exp: Vec<u32>,
}

fn zero_str() -> String {
    "0/1".into()
}

impl Parametrization {
    pub(crate) fn to_file(&self) -> Vec<Vec<MonomialFile>> {
        self.components
            .iter()
            .map(|c| {
                c.iter()
                    .map(|m| MonomialFile {
                        re: format_rational(&m.coef.re),
                        im: format_rational(&m.coef.im),
                        exp: m.exp.clone(),
                    })
                    .collect()
            })
            .collect()
    }

    pub(crate) fn from_file(n: usize, f: &[Vec<MonomialFile>]) -> Result<Self> {
        let components = f
            .iter()
            .map(|c| {
                c.iter()
                    .map(|m| {
                        Ok(Monomial::new(
                            GaussianRational::new(parse_rational(&m.re)?, parse_rational(&m.im)?),
                            m.exp.clone(),
                        ))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, components)
    }
}
