//! Chinese-remainder reduction.
//!
//! With pairwise coprime bases `p_i > deg_{x_i}(f*g)`, the monomial
//! `x_1^k_1 ... x_n^k_n` maps to the unique `K < M = prod p_i` with
//! `K = k_i (mod p_i)` for every `i`. Because residues add, the image of a
//! product of monomials is congruent to the sum of the images, so recovery
//! reads `k_i = K mod p_i` directly from the univariate product.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{check_pair, product_degrees, rows_to_poly, small_rows_to_poly, small_terms, OpCounts, Plan, ReductionOutcome};
use crate::error::{Error, Result};
use crate::poly::{MultiPoly, UniPoly};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrtPlan {
    pub bases: Vec<BigUint>,
    /// `M`, the product of the bases.
    pub modulus: BigUint,
    /// `M_i = M / p_i`.
    pub cofactors: Vec<BigUint>,
    /// `a_i` with `M_i a_i = 1 (mod p_i)`, `0 < a_i < p_i`.
    pub inverses: Vec<BigUint>,
    weights: Vec<BigUint>,
}

impl CrtPlan {
    /// Builds the plan for explicit bases; they must be pairwise coprime.
    pub fn new(bases: Vec<BigUint>) -> Result<Self> {
        Self::with_ops(bases, &mut OpCounts::default())
    }

    fn with_ops(bases: Vec<BigUint>, ops: &mut OpCounts) -> Result<Self> {
        for (i, a) in bases.iter().enumerate() {
            if a.is_zero() {
                return Err(Error::BasesTooSmall { index: i + 1 });
            }
            for (j, b) in bases.iter().enumerate().skip(i + 1) {
                if !a.gcd(b).is_one() {
                    return Err(Error::BasesNotCoprime { i: i + 1, j: j + 1 });
                }
            }
        }
        let modulus = bases.iter().fold(BigUint::one(), |acc, p| acc * p);
        ops.mul += bases.len() as u64;
        let mut cofactors = Vec::with_capacity(bases.len());
        let mut inverses = Vec::with_capacity(bases.len());
        let mut weights = Vec::with_capacity(bases.len());
        for p in &bases {
            let m_i = &modulus / p;
            let a_i = if p.is_one() { BigUint::zero() } else { modinv_counted(&m_i, p, ops)? };
            weights.push(&m_i * &a_i);
            ops.mul += 2;
            cofactors.push(m_i);
            inverses.push(a_i);
        }
        Ok(CrtPlan { bases, modulus, cofactors, inverses, weights })
    }

    /// `(sum M_i a_i k_i) mod M`.
    pub fn image(&self, k: &[u64]) -> BigUint {
        let mut acc = BigUint::zero();
        for (w, &ki) in self.weights.iter().zip(k) {
            acc += w * ki;
        }
        acc % &self.modulus
    }

    pub fn admits(&self, k: &[u64]) -> bool {
        k.iter().zip(&self.bases).all(|(&ki, p)| BigUint::from(ki) < *p)
    }
}

fn modinv_counted(a: &BigUint, m: &BigUint, ops: &mut OpCounts) -> Result<BigUint> {
    if *m < BigUint::from(2u32) {
        return Err(Error::NotInvertible);
    }
    // extended Euclid on (a mod m, m), tracking the coefficient of a
    let mut r0 = BigInt::from_biguint(Sign::Plus, m.clone());
    let mut r1 = BigInt::from_biguint(Sign::Plus, a % m);
    let mut s0 = BigInt::zero();
    let mut s1 = BigInt::one();
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        let s = &s0 - &q * &s1;
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
        ops.mul += 2;
        ops.add += 1;
    }
    if !r0.is_one() {
        return Err(Error::NotInvertible);
    }
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    Ok(s0.mod_floor(&m).to_biguint().unwrap())
}

/// Inverse of `a` modulo `m` in `[1, m)` by the extended Euclidean algorithm.
pub fn modinv(a: &BigUint, m: &BigUint) -> Result<BigUint> {
    modinv_counted(a, m, &mut OpCounts::default())
}

/// Makes the list pairwise coprime: left to right, each entry is
/// incremented until it is coprime to every entry before it.
pub fn adjust_coprime(initial: &[BigUint]) -> Vec<BigUint> {
    let mut out: Vec<BigUint> = Vec::with_capacity(initial.len());
    for q in initial {
        let mut q = q.clone();
        while out.iter().any(|p| !p.gcd(&q).is_one()) {
            q += 1u32;
        }
        out.push(q);
    }
    out
}

/// CRT reduction. Without explicit bases they are `adjust_coprime` of
/// `deg_{x_i}(f*g) + 1`.
pub fn crt_reduce(f: &MultiPoly, g: &MultiPoly, bases: Option<&[BigUint]>) -> Result<ReductionOutcome> {
    check_pair(f, g)?;
    let d = product_degrees(f, g)?;
    let bases = match bases {
        Some(b) => {
            if b.len() != f.nvars() {
                return Err(Error::ArityMismatch { left: f.nvars(), right: b.len() });
            }
            if let Some(i) = b.iter().zip(&d).position(|(p, di)| p <= di) {
                return Err(Error::BasesTooSmall { index: i + 1 });
            }
            b.to_vec()
        }
        None => adjust_coprime(&d.iter().map(|di| di + 1u32).collect::<Vec<_>>()),
    };
    let mut ops = OpCounts::default();
    let plan = CrtPlan::with_ops(bases, &mut ops)?;
    let n = f.nvars() as u64;
    let mut image = |p: &MultiPoly| {
        ops.mul += (n + 1) * p.num_terms() as u64;
        ops.add += n * p.num_terms() as u64;
        UniPoly::from_reduced_terms(p.ring(), p.terms().map(|(e, c)| (plan.image(e.as_slice()), c.clone())).collect())
    };
    let f_x = image(f);
    let g_x = image(g);
    Ok(ReductionOutcome { f_x, g_x, plan: Plan::Crt(plan), ops })
}

/// `x^K -> x_1^(K mod p_1) ... x_n^(K mod p_n)`.
pub fn crt_inverse(h_x: &UniPoly, plan: &CrtPlan) -> Result<MultiPoly> {
    let small: Option<Vec<u64>> = plan.bases.iter().map(|p| u64::try_from(p).ok()).collect();
    if let (Some(ps), Some(terms)) = (small, small_terms(h_x)) {
        let rows = terms.into_iter().map(|(k, c)| (ps.iter().map(|p| k % p).collect(), c)).collect();
        return small_rows_to_poly(h_x.ring(), plan.bases.len(), rows);
    }
    let rows = h_x.terms().map(|(k, c)| (plan.bases.iter().map(|p| k % p).collect(), c.clone())).collect();
    rows_to_poly(h_x.ring(), plan.bases.len(), rows)
}
