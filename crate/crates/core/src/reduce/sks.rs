//! Standard Kronecker substitution: `x_i -> x^(D^(i-1))` with a single base
//! `D = max_i deg_{x_i}(f*g) + 1`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{check_pair, product_degrees, rows_to_poly, small_rows_to_poly, small_terms, DegreeBounds, OpCounts, Plan, ReductionOutcome};
use crate::error::{Error, Result};
use crate::poly::{MultiPoly, UniPoly};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SksPlan {
    pub base: BigUint,
    pub nvars: usize,
}

impl SksPlan {
    /// Base-`D` positional value of the exponent vector.
    pub fn image(&self, k: &[u64]) -> BigUint {
        let mut acc = BigUint::zero();
        for &ki in k.iter().rev() {
            acc = acc * &self.base + ki;
        }
        acc
    }

    pub fn admits(&self, k: &[u64]) -> bool {
        k.iter().all(|&ki| BigUint::from(ki) < self.base)
    }

    /// `D^n`, one past the largest representable exponent.
    pub fn capacity(&self) -> BigUint {
        num_traits::pow(self.base.clone(), self.nvars)
    }
}

pub fn sks_base(f: &MultiPoly, g: &MultiPoly) -> Result<BigUint> {
    check_pair(f, g)?;
    let d = product_degrees(f, g)?;
    Ok(d.into_iter().max().unwrap() + 1u32)
}

pub fn sks_reduce(f: &MultiPoly, g: &MultiPoly) -> Result<ReductionOutcome> {
    let base = sks_base(f, g)?;
    let n = f.nvars();
    let plan = SksPlan { base, nvars: n };
    // D_i = D^(i-1), one multiplication each
    let mut powers = Vec::with_capacity(n);
    let mut pw = BigUint::one();
    for _ in 0..n {
        powers.push(pw.clone());
        pw *= &plan.base;
    }
    let mut ops = OpCounts { mul: n as u64, add: 0 };
    let mut image = |p: &MultiPoly| {
        let ring = p.ring();
        let terms: Vec<_> = p
            .terms()
            .map(|(e, c)| {
                let mut k = BigUint::zero();
                for (ki, pi) in e.as_slice().iter().zip(&powers) {
                    k += pi * *ki;
                }
                (k, c.clone())
            })
            .collect();
        ops.mul += (n * p.num_terms()) as u64;
        ops.add += (n * p.num_terms()) as u64;
        UniPoly::from_reduced_terms(ring, terms)
    };
    let f_x = image(f);
    let g_x = image(g);
    Ok(ReductionOutcome { f_x, g_x, plan: Plan::Sks(plan), ops })
}

/// Reads the base-`D` digits of every exponent back into `x_1..x_n`.
pub fn sks_inverse(h_x: &UniPoly, plan: &SksPlan) -> Result<MultiPoly> {
    let cap = plan.capacity();
    if h_x.degree().is_some_and(|d| *d >= cap) {
        return Err(Error::ExponentOutOfRange);
    }
    if let (Ok(base), Some(terms)) = (u64::try_from(&plan.base), small_terms(h_x)) {
        let rows = terms
            .into_iter()
            .map(|(mut k, c)| {
                let row = (0..plan.nvars)
                    .map(|_| {
                        let r = k % base;
                        k /= base;
                        r
                    })
                    .collect();
                (row, c)
            })
            .collect();
        return small_rows_to_poly(h_x.ring(), plan.nvars, rows);
    }
    let mut rows = Vec::with_capacity(h_x.num_terms());
    for (k, c) in h_x.terms() {
        let mut rest = k.clone();
        let mut row = Vec::with_capacity(plan.nvars);
        for _ in 0..plan.nvars {
            let (q, r) = rest.div_rem(&plan.base);
            row.push(r);
            rest = q;
        }
        rows.push((row, c.clone()));
    }
    rows_to_poly(h_x.ring(), plan.nvars, rows)
}

/// `d_{h_{x_n}} D^(n-1) <= deg <= D^n - 1`.
pub fn sks_bounds(f: &MultiPoly, g: &MultiPoly) -> Result<DegreeBounds> {
    let base = sks_base(f, g)?;
    let d = product_degrees(f, g)?;
    let n = d.len();
    let lower = d[n - 1].clone() * num_traits::pow(base.clone(), n - 1);
    let upper = num_traits::pow(base, n) - 1u32;
    Ok(DegreeBounds { lower, upper, upper_inclusive: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, parse_unipoly};
    use crate::ring::RingSpec;

    const ZZ: RingSpec = RingSpec::Integers;

    fn ex1() -> (MultiPoly, MultiPoly) {
        (parse_poly("x1^7*x2^7*x3^7 + x1*x2^7*x3^17", 3, ZZ).unwrap(), parse_poly("x2^3*x3^34 + x1^8*x2^8*x3^8", 3, ZZ).unwrap())
    }

    #[test]
    fn base_examples() {
        let (f, g) = ex1();
        assert_eq!(sks_base(&f, &g).unwrap(), BigUint::from(52u32));
        let x = parse_poly("x1", 1, ZZ).unwrap();
        assert_eq!(sks_base(&x, &x).unwrap(), BigUint::from(3u32));
        let a = parse_poly("x1*x2", 2, ZZ).unwrap();
        let b = parse_poly("x1^2", 2, ZZ).unwrap();
        assert_eq!(sks_base(&a, &b).unwrap(), BigUint::from(4u32));
        assert_eq!(sks_base(&a, &MultiPoly::zero(ZZ, 2)), Err(Error::EmptyPolynomial));
    }

    #[test]
    fn positional_image() {
        let plan = SksPlan { base: BigUint::from(52u32), nvars: 3 };
        assert_eq!(plan.image(&[7, 7, 7]), BigUint::from(19299u32));
        assert_eq!(plan.image(&[0, 0, 0]), BigUint::zero());
    }

    #[test]
    fn example_degree_and_inverse() {
        let (f, g) = ex1();
        let out = sks_reduce(&f, &g).unwrap();
        assert_eq!(out.d_hx(), BigUint::from(138425u32));
        let Plan::Sks(plan) = &out.plan else { panic!() };
        let h = parse_unipoly("x^19299", ZZ).unwrap();
        assert_eq!(sks_inverse(&h, plan).unwrap(), parse_poly("x1^7*x2^7*x3^7", 3, ZZ).unwrap());
        let one = parse_unipoly("1", ZZ).unwrap();
        assert_eq!(sks_inverse(&one, plan).unwrap(), MultiPoly::one(ZZ, 3));
        assert_eq!(sks_inverse(&out.f_x, plan).unwrap(), f);
    }

    #[test]
    fn out_of_range_exponent_rejected() {
        let plan = SksPlan { base: BigUint::from(52u32), nvars: 3 };
        let h = parse_unipoly("x^140608", ZZ).unwrap(); // 52^3
        assert_eq!(sks_inverse(&h, &plan), Err(Error::ExponentOutOfRange));
    }

    #[test]
    fn bounds_of_example() {
        let (f, g) = ex1();
        let b = sks_bounds(&f, &g).unwrap();
        assert_eq!(b.lower, BigUint::from(137904u32));
        assert_eq!(b.upper, BigUint::from(140607u32));
        assert!(b.contains(&BigUint::from(138425u32)));
    }
}
