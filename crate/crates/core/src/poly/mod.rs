//! Sparse polynomial representations and their text format.

mod multi;
mod text;
mod uni;

pub use multi::{Degree, ExponentVector, MultiPoly};
pub use text::{format_poly, format_unipoly, parse_poly, parse_unipoly};
pub use uni::UniPoly;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::ring::RingSpec;

/// Sorts, merges like terms in `ring` and drops zeros.
pub(crate) fn normalize<K: Ord>(ring: RingSpec, terms: Vec<(K, BigInt)>) -> BTreeMap<K, BigInt> {
    normalize_with(ring, terms, false)
}

/// Like `normalize`; with `reduced` set, coefficients are trusted to be
/// reduced already and only merged sums are reduced again.
pub(crate) fn normalize_with<K: Ord>(ring: RingSpec, mut terms: Vec<(K, BigInt)>, reduced: bool) -> BTreeMap<K, BigInt> {
    terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<(K, BigInt, bool)> = Vec::with_capacity(terms.len());
    for (k, c) in terms {
        match merged.last_mut() {
            Some((last, acc, dirty)) if *last == k => {
                *acc += c;
                *dirty = true;
            }
            _ => merged.push((k, c, !reduced)),
        }
    }
    merged
        .into_iter()
        .filter_map(|(k, c, dirty)| {
            let c = if dirty { ring.reduce(c) } else { c };
            (!c.is_zero()).then_some((k, c))
        })
        .collect()
}
