//! File format for exact polynomials:
//!
//! ```json
//! {"rows": 1, "cols": 3, "terms": [{"exp": [[0, 2, 0]], "re": "1/1", "im": "0/1"}]}
//! ```
//!
//! Exponent matrices are row-major, rationals are `"p/q"` strings and terms
//! are written in canonical order, so writing a parsed file reproduces it
//! byte for byte.

use serde::{Deserialize, Serialize};

use super::exponent::MatrixExponent;
use super::gaussian::{format_rational, parse_rational, GaussianRational};
use super::poly::ExactPoly;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PolyFile {
    pub rows: usize,
    pub cols: usize,
    pub terms: Vec<TermFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TermFile {
    pub exp: Vec<Vec<u32>>,
    pub re: String,
    pub im: String,
}

impl From<&ExactPoly> for PolyFile {
    fn from(p: &ExactPoly) -> Self {
        PolyFile {
            rows: p.rows(),
            cols: p.cols(),
            terms: p
                .terms()
                .map(|(e, c)| TermFile {
                    exp: e.to_nested(),
                    re: format_rational(&c.re),
                    im: format_rational(&c.im),
                })
                .collect(),
        }
    }
}

impl TryFrom<&PolyFile> for ExactPoly {
    type Error = Error;

    fn try_from(f: &PolyFile) -> Result<Self> {
        if f.rows == 0 || f.cols == 0 {
            return Err(Error::invalid("polynomial shape must be positive"));
        }
        let mut terms = Vec::with_capacity(f.terms.len());
        for t in &f.terms {
            if t.exp.len() != f.rows || t.exp.iter().any(|r| r.len() != f.cols) {
                return Err(Error::shape(
                    format!("{}x{} exponent matrix", f.rows, f.cols),
                    format!("{:?}", t.exp),
                ));
            }
            let flat = t.exp.iter().flatten().copied().collect();
            let c = GaussianRational::new(parse_rational(&t.re)?, parse_rational(&t.im)?);
            terms.push((MatrixExponent::from_flat(f.rows, f.cols, flat), c));
        }
        Ok(ExactPoly::from_terms(f.rows, f.cols, terms))
    }
}

pub fn to_json(p: &ExactPoly) -> String {
    serde_json::to_string(&PolyFile::from(p)).expect("polynomial serialization")
}

pub fn from_json(s: &str) -> Result<ExactPoly> {
    let f: PolyFile = serde_json::from_str(s)?;
    ExactPoly::try_from(&f)
}

pub fn read_poly(path: &std::path::Path) -> Result<ExactPoly> {
    from_json(&std::fs::read_to_string(path)?)
}

pub fn write_poly(path: &std::path::Path, p: &ExactPoly) -> Result<()> {
    std::fs::write(path, to_json(p) + "\n")?;
    Ok(())
}
