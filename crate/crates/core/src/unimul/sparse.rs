use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::poly::UniPoly;
use crate::ring::{convolve_dense, convolve_hashed};

/// Dense accumulation is used when the product length is at most this many
/// times the number of term pairs.
const DENSE_SLACK: u128 = 16;
const DENSE_MAX_LEN: usize = 1 << 24;

/// Term-by-term product with merging. Exact in both rings.
pub fn mul_sparse(a: &UniPoly, b: &UniPoly) -> Result<UniPoly> {
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch);
    }
    let ring = a.ring();
    let (Some(da), Some(db)) = (a.degree(), b.degree()) else {
        return Ok(UniPoly::zero(ring));
    };
    let len = (da + db + 1u32).to_u128();
    let pairs = a.num_terms() as u128 * b.num_terms() as u128;

    if let Some(len) = len.filter(|&l| l <= DENSE_MAX_LEN as u128 && l <= DENSE_SLACK * pairs) {
        let conv = |p: &UniPoly| -> Vec<(usize, BigInt)> { p.terms().map(|(e, c)| (e.to_usize().unwrap(), c.clone())).collect() };
        let out = convolve_dense(&ring, &conv(a), &conv(b), len as usize);
        return Ok(UniPoly::from_distinct(ring, out.into_iter().map(|(e, c)| (BigUint::from(e), c)).collect()));
    }
    if len.is_some() {
        let conv = |p: &UniPoly| -> Vec<(u128, BigInt)> { p.terms().map(|(e, c)| (e.to_u128().unwrap(), c.clone())).collect() };
        let mut out = convolve_hashed(&ring, &conv(a), &conv(b), |x, y| Ok(x + y))?;
        out.sort_unstable_by_key(|t| t.0);
        return Ok(UniPoly::from_distinct(ring, out.into_iter().map(|(e, c)| (BigUint::from(e), c)).collect()));
    }
    let conv = |p: &UniPoly| -> Vec<(BigUint, BigInt)> { p.terms().map(|(e, c)| (e.clone(), c.clone())).collect() };
    let out = convolve_hashed(&ring, &conv(a), &conv(b), |x, y| Ok(x + y))?;
    Ok(UniPoly::from_distinct(ring, out))
}
