pub mod asymptotics;
pub mod catalog;
pub mod chern;
pub mod error;
pub mod energy;
pub mod exactpoly;
pub mod invariants;
pub mod numeric;
pub mod pairing;

pub use error::{Error, Result};

// The book's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/polynomials.md")]
    mod polynomials {}
    #[doc = include_str!("../../../book/src/discriminants.md")]
    mod discriminants {}
    #[doc = include_str!("../../../book/src/energy.md")]
    mod energy {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    mod asymptotics {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
}
