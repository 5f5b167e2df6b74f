use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ring::{convolve_hashed, RingSpec};

/// Exponents `(k_1, ..., k_n)` of a monomial `x_1^k_1 ... x_n^k_n`.
///
/// Ordered lexicographically; canonical polynomial output walks this order
/// in reverse.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVector(Vec<u64>);

impl ExponentVector {
    pub fn new(exponents: Vec<u64>) -> Self {
        ExponentVector(exponents)
    }

    pub fn zero(nvars: usize) -> Self {
        ExponentVector(vec![0; nvars])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Componentwise sum; the exponent of a product of two monomials.
    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_add(*b).ok_or(Error::ExponentOverflow))
            .collect::<Result<Vec<_>>>()
            .map(ExponentVector)
    }
}

impl From<Vec<u64>> for ExponentVector {
    fn from(v: Vec<u64>) -> Self {
        ExponentVector(v)
    }
}

impl std::ops::Index<usize> for ExponentVector {
    type Output = u64;
    fn index(&self, i: usize) -> &u64 {
        &self.0[i]
    }
}

/// Degree of a polynomial in one variable. The zero polynomial has degree
/// `NegInfinity`, which sorts below every finite degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(u64),
}

impl Degree {
    pub fn finite(self) -> Option<u64> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Sparse multivariate polynomial in `x_1, ..., x_n` over a [`RingSpec`].
///
/// Always normalized: like terms are merged, zero coefficients never stored,
/// every exponent vector has length `nvars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    ring: RingSpec,
    nvars: usize,
    terms: BTreeMap<ExponentVector, BigInt>,
}

impl MultiPoly {
    pub fn zero(ring: RingSpec, nvars: usize) -> Self {
        assert!(nvars >= 1, "a polynomial needs at least one variable");
        MultiPoly { ring, nvars, terms: BTreeMap::new() }
    }

    pub fn one(ring: RingSpec, nvars: usize) -> Self {
        let mut p = Self::zero(ring, nvars);
        p.terms.insert(ExponentVector::zero(nvars), BigInt::one());
        p
    }

    /// Builds a normalized polynomial from raw terms: like terms are summed in
    /// the ring and cancelled terms dropped.
    pub fn from_terms<I, E>(ring: RingSpec, nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (E, BigInt)>,
        E: Into<ExponentVector>,
    {
        assert!(nvars >= 1, "a polynomial needs at least one variable");
        let terms = terms
            .into_iter()
            .map(|(e, c)| {
                let e = e.into();
                if e.len() != nvars {
                    return Err(Error::ArityMismatch { left: nvars, right: e.len() });
                }
                Ok((e, c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiPoly { ring, nvars, terms: super::normalize(ring, terms) })
    }

    /// `from_terms` for rows of the right arity whose coefficients are
    /// already reduced in `ring`.
    pub(crate) fn from_reduced_rows(ring: RingSpec, nvars: usize, rows: Vec<(ExponentVector, BigInt)>) -> Self {
        debug_assert!(rows.iter().all(|(e, _)| e.len() == nvars));
        MultiPoly { ring, nvars, terms: super::normalize_with(ring, rows, true) }
    }

    /// Single monomial `c * x^e`.
    pub fn monomial(ring: RingSpec, exponents: Vec<u64>, c: BigInt) -> Self {
        let nvars = exponents.len();
        let mut p = Self::zero(ring, nvars);
        p.add_term(ExponentVector(exponents), c);
        p
    }

    pub(crate) fn add_term(&mut self, e: ExponentVector, c: BigInt) {
        let c = self.ring.reduce(c);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = self.ring.add(o.get(), &c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending lexicographic order of exponents.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&ExponentVector, &BigInt)> + ExactSizeIterator {
        self.terms.iter()
    }

    /// Terms in canonical (descending lexicographic) order.
    pub fn canonical_terms(&self) -> impl Iterator<Item = (&ExponentVector, &BigInt)> {
        self.terms.iter().rev()
    }

    pub fn coeff(&self, exponents: &[u64]) -> BigInt {
        self.terms.get(&ExponentVector(exponents.to_vec())).cloned().unwrap_or_else(BigInt::zero)
    }

    fn check_index(&self, i: usize) -> Result<usize> {
        if i == 0 || i > self.nvars {
            Err(Error::IndexOutOfRange { index: i, nvars: self.nvars })
        } else {
            Ok(i - 1)
        }
    }

    /// Degree in `x_i` (1-based index).
    pub fn deg_var(&self, i: usize) -> Result<Degree> {
        let i = self.check_index(i)?;
        Ok(self.terms.keys().map(|e| e[i]).max().map_or(Degree::NegInfinity, Degree::Finite))
    }

    /// Per-variable degrees of a nonzero polynomial, `x_1` first.
    pub fn degrees(&self) -> Result<Vec<u64>> {
        if self.is_zero() {
            return Err(Error::EmptyPolynomial);
        }
        let mut d = vec![0u64; self.nvars];
        for e in self.terms.keys() {
            for (slot, k) in d.iter_mut().zip(e.as_slice()) {
                *slot = (*slot).max(*k);
            }
        }
        Ok(d)
    }

    /// `Max_F(i, j)`: the largest `k_j - k_i` over the terms (1-based indices).
    pub fn max_diff(&self, i: usize, j: usize) -> Result<i128> {
        let i = self.check_index(i)?;
        let j = self.check_index(j)?;
        self.terms.keys().map(|e| e[j] as i128 - e[i] as i128).max().ok_or(Error::EmptyPolynomial)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        if self.nvars != other.nvars {
            return Err(Error::ArityMismatch { left: self.nvars, right: other.nvars });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.ring, self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Direct term-by-term product. This is the reference every reduction
    /// method is checked against.
    pub fn mul_direct(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let a: Vec<(ExponentVector, BigInt)> = self.terms.iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        let b: Vec<(ExponentVector, BigInt)> = other.terms.iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        let prod = convolve_hashed(&self.ring, &a, &b, |x, y| x.checked_add(y))?;
        Ok(MultiPoly { ring: self.ring, nvars: self.nvars, terms: prod.into_iter().collect() })
    }
}
