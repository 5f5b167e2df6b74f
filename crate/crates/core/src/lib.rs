//! Sparse multivariate polynomial multiplication through reversible
//! reduction to univariate polynomials.
//!
//! A product `f * g` is computed in three steps: both factors are mapped to
//! univariate polynomials by one of the reductions in [`reduce`], the images
//! are multiplied by a backend from [`unimul`], and the product is mapped
//! back with the inverse of the same reduction.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod pipeline;
pub mod poly;
pub mod reduce;
pub mod ring;
pub mod unimul;

pub use error::{Error, Result};
pub use pipeline::{multiply, verify, Method, MulStats};
pub use poly::{format_poly, format_unipoly, parse_poly, parse_unipoly, Degree, ExponentVector, MultiPoly, UniPoly};
pub use reduce::{Plan, ReductionOutcome};
pub use ring::RingSpec;
pub use unimul::{BackendChoice, BackendKind};
