//! Reversible reductions from multivariate to univariate polynomials.
//!
//! Four methods are provided: the standard Kronecker substitution ([`sks`]),
//! iterative Kronecker substitution along arbitrary substitution sequences
//! ([`iks`]), the Chinese-remainder reduction ([`crt`]) and the hybrid
//! reduction that picks between a two-variable CRT step and an iterative
//! Kronecker step in every round ([`hybrid`]). Each reduction returns both
//! univariate images together with the plan needed to recover the product.

pub mod crt;
pub mod hybrid;
pub mod iks;
mod plan;
pub mod sks;

use num_bigint::{BigInt, BigUint};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{ExponentVector, MultiPoly, UniPoly};
use crate::ring::RingSpec;

pub use crt::{adjust_coprime, crt_inverse, crt_reduce, modinv, CrtPlan};
pub use hybrid::{d_crt_estimate, hybrid_inverse, hybrid_reduce, CrtEstimate, HybridBranch, HybridPlan, HybridStep};
pub use iks::{
    all_sequences, apply_sequence, find_optimal_sequence, iks_bounds, iks_inverse, iks_reduce, is_straight, sequence_inverse, IksPlan,
    OptimalSequence, SequencePlan, SequenceStep, Substitution,
};
pub use sks::{sks_base, sks_bounds, sks_inverse, sks_reduce, SksPlan};

/// Loop-level integer operations spent in the reduction phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpCounts {
    pub mul: u64,
    pub add: u64,
}

/// Everything needed to invert one reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Plan {
    Sks(SksPlan),
    Iks(IksPlan),
    Sequence(SequencePlan),
    Crt(CrtPlan),
    Hybrid(HybridPlan),
}

impl Plan {
    pub fn method_name(&self) -> &'static str {
        match self {
            Plan::Sks(_) => "sks",
            Plan::Iks(_) => "iks",
            Plan::Sequence(_) => "seq",
            Plan::Crt(_) => "crt",
            Plan::Hybrid(_) => "hybrid",
        }
    }

    pub fn nvars(&self) -> usize {
        match self {
            Plan::Sks(p) => p.nvars,
            Plan::Iks(p) => p.exponents.len(),
            Plan::Sequence(p) => p.nvars,
            Plan::Crt(p) => p.bases.len(),
            Plan::Hybrid(p) => p.nvars,
        }
    }

    /// Recovers the multivariate product from the product of the two images.
    pub fn recover(&self, h_x: &UniPoly) -> Result<MultiPoly> {
        match self {
            Plan::Sks(p) => sks_inverse(h_x, p),
            Plan::Iks(p) => iks_inverse(h_x, p),
            Plan::Sequence(p) => sequence_inverse(h_x, p),
            Plan::Crt(p) => Ok(crt_inverse(h_x, p)?),
            Plan::Hybrid(p) => hybrid_inverse(h_x, p),
        }
    }

    /// Univariate exponent assigned to a monomial of the product `f*g`.
    /// `None` when the monomial lies outside the plan's domain (negative
    /// intermediate exponents in a hybrid CRT step).
    pub fn product_image(&self, k: &[u64]) -> Option<BigUint> {
        match self {
            Plan::Sks(p) => Some(p.image(k)),
            Plan::Iks(p) => Some(p.to_sequence().image(k)),
            Plan::Sequence(p) => Some(p.image(k)),
            Plan::Crt(p) => Some(p.image(k)),
            Plan::Hybrid(p) => p.product_image(k).map(|(e, _)| e),
        }
    }

    /// Whether the monomial lies in the region on which the plan's monomial
    /// map is carry-free, hence invertible. Every monomial of `f*g` does.
    pub fn admits(&self, k: &[u64]) -> bool {
        match self {
            Plan::Sks(p) => p.admits(k),
            Plan::Iks(p) => p.to_sequence().admits(k),
            Plan::Sequence(p) => p.admits(k),
            Plan::Crt(p) => p.admits(k),
            Plan::Hybrid(p) => p.product_image(k).is_some_and(|(_, ok)| ok),
        }
    }

    /// Self-describing one-line record, e.g. `method=iks n=3 exponents=1,16,256`.
    pub fn to_record(&self) -> String {
        plan::to_record(self)
    }

    pub fn from_record(text: &str) -> Result<Plan> {
        plan::from_record(text)
    }
}

/// Result of reducing a pair `(f, g)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionOutcome {
    pub f_x: UniPoly,
    pub g_x: UniPoly,
    pub plan: Plan,
    pub ops: OpCounts,
}

impl ReductionOutcome {
    /// `deg f_x + deg g_x`, the degree of the univariate product.
    pub fn d_hx(&self) -> BigUint {
        let df = self.f_x.degree().cloned().unwrap_or_default();
        let dg = self.g_x.degree().cloned().unwrap_or_default();
        df + dg
    }
}

/// Degree interval for a reduction method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeBounds {
    pub lower: BigUint,
    pub upper: BigUint,
    /// `true` for `lower <= d <= upper`, `false` for `lower <= d < upper`.
    pub upper_inclusive: bool,
}

impl DegreeBounds {
    pub fn contains(&self, d: &BigUint) -> bool {
        *d >= self.lower && if self.upper_inclusive { *d <= self.upper } else { *d < self.upper }
    }
}

pub(crate) fn check_pair(f: &MultiPoly, g: &MultiPoly) -> Result<()> {
    if f.ring() != g.ring() {
        return Err(Error::RingMismatch);
    }
    if f.nvars() != g.nvars() {
        return Err(Error::ArityMismatch { left: f.nvars(), right: g.nvars() });
    }
    if f.is_zero() || g.is_zero() {
        return Err(Error::EmptyPolynomial);
    }
    Ok(())
}

/// Per-variable degrees of `h = f*g`, obtained as `deg f + deg g`.
pub(crate) fn product_degrees(f: &MultiPoly, g: &MultiPoly) -> Result<Vec<BigUint>> {
    let df = f.degrees()?;
    let dg = g.degrees()?;
    Ok(df.iter().zip(&dg).map(|(a, b)| BigUint::from(*a) + *b).collect())
}

/// Partially reduced polynomial: every variable slot is unbounded.
#[derive(Debug, Clone)]
pub(crate) struct Work {
    pub ring: RingSpec,
    pub rows: Vec<Vec<BigUint>>,
    pub coeffs: Vec<BigInt>,
}

impl Work {
    pub fn from_poly(p: &MultiPoly) -> Self {
        let (rows, coeffs) = p.terms().map(|(e, c)| (e.as_slice().iter().map(|&k| BigUint::from(k)).collect(), c.clone())).unzip();
        Work { ring: p.ring(), rows, coeffs }
    }

    pub fn deg(&self, slot: usize) -> BigUint {
        self.rows.iter().map(|r| &r[slot]).max().cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn into_uni(self, slot: usize) -> UniPoly {
        UniPoly::from_reduced_terms(self.ring, self.rows.into_iter().map(|mut r| std::mem::take(&mut r[slot])).zip(self.coeffs).collect())
    }
}

/// Terms of `h_x` with machine-word exponents, or `None` if the degree is too large.
pub(crate) fn small_terms(h_x: &UniPoly) -> Option<Vec<(u64, BigInt)>> {
    u64::try_from(h_x.degree()?).ok()?;
    Some(h_x.terms().map(|(k, c)| (u64::try_from(k).unwrap(), c.clone())).collect())
}

pub(crate) fn small_rows_to_poly(ring: RingSpec, nvars: usize, rows: Vec<(Vec<u64>, BigInt)>) -> Result<MultiPoly> {
    if nvars == 0 || rows.iter().any(|(e, _)| e.len() != nvars) {
        return MultiPoly::from_terms(ring, nvars, rows.into_iter().map(|(e, c)| (ExponentVector::new(e), c)));
    }
    Ok(MultiPoly::from_reduced_rows(ring, nvars, rows.into_iter().map(|(e, c)| (ExponentVector::new(e), c)).collect()))
}

/// Converts recovered unbounded exponent rows back into a polynomial.
pub(crate) fn rows_to_poly(ring: RingSpec, nvars: usize, rows: Vec<(Vec<BigUint>, BigInt)>) -> Result<MultiPoly> {
    let mut terms = Vec::with_capacity(rows.len());
    for (row, c) in rows {
        let e = row.iter().map(|k| u64::try_from(k).map_err(|_| Error::ExponentOutOfRange)).collect::<Result<Vec<u64>>>()?;
        terms.push((ExponentVector::new(e), c));
    }
    MultiPoly::from_terms(ring, nvars, terms)
}
