use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::ring::RingSpec;

/// Sparse univariate polynomial with unbounded exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    ring: RingSpec,
    terms: BTreeMap<BigUint, BigInt>,
}

impl UniPoly {
    pub fn zero(ring: RingSpec) -> Self {
        UniPoly { ring, terms: BTreeMap::new() }
    }

    /// Normalized polynomial from raw terms; like terms merge, zeros drop.
    pub fn from_terms<I>(ring: RingSpec, terms: I) -> Self
    where
        I: IntoIterator<Item = (BigUint, BigInt)>,
    {
        UniPoly { ring, terms: super::normalize(ring, terms.into_iter().collect()) }
    }

    /// `from_terms` for coefficients that are already reduced in `ring`.
    pub(crate) fn from_reduced_terms(ring: RingSpec, terms: Vec<(BigUint, BigInt)>) -> Self {
        UniPoly { ring, terms: super::normalize_with(ring, terms, true) }
    }

    /// Builds from terms with distinct exponents and nonzero reduced
    /// coefficients, in any order.
    pub(crate) fn from_distinct(ring: RingSpec, terms: Vec<(BigUint, BigInt)>) -> Self {
        debug_assert!(terms.iter().all(|(_, c)| !c.is_zero() && ring.reduce(c.clone()) == *c));
        UniPoly { ring, terms: terms.into_iter().collect() }
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<&BigUint> {
        self.terms.keys().next_back()
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&BigUint, &BigInt)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &BigUint) -> BigInt {
        self.terms.get(e).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Fraction of exponent slots `0..=deg` that hold a nonzero term.
    pub fn density(&self) -> f64 {
        match self.degree() {
            None => 0.0,
            Some(d) => {
                let slots = num_traits::ToPrimitive::to_f64(d).unwrap_or(f64::INFINITY) + 1.0;
                self.terms.len() as f64 / slots
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_and_degree() {
        let p = UniPoly::from_terms(
            RingSpec::Integers,
            [(BigUint::from(3u8), BigInt::from(2)), (BigUint::from(3u8), BigInt::from(-2)), (BigUint::from(1u8), BigInt::from(1))],
        );
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.degree(), Some(&BigUint::from(1u8)));
        assert_eq!(UniPoly::zero(RingSpec::Integers).degree(), None);
    }
}
