//! Copula mixed-membership stochastic blockmodel.
//!
//! Samplers for a mixed-membership blockmodel whose sender and receiver
//! indicators are coupled by a bivariate copula, with a synthetic-network
//! generator and a cross-validation harness. See the guide in `book/`.

pub mod copula;
pub mod error;
pub mod eval;
pub mod infer;
pub mod math;
pub mod model;
pub mod synth;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/copulas.md")]
    mod copulas {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/inference.md")]
    mod inference {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
}
