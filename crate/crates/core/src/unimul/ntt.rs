//! Dense convolution by number-theoretic transforms over word-size primes,
//! recombined coefficient-wise with Garner's algorithm.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::BackendChoice;
use crate::error::{Error, Result};
use crate::poly::UniPoly;
use crate::ring::RingSpec;

/// `(p, k)` with `p = c * 2^k + 1` prime, largest two-adic order first.
pub const NTT_PRIMES: [(u64, u32); 8] = [
    (2013265921, 27),
    (1811939329, 26),
    (469762049, 26),
    (2113929217, 25),
    (167772161, 25),
    (1107296257, 25),
    (754974721, 24),
    (998244353, 23),
];

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest generator of the multiplicative group mod `p`.
pub fn primitive_root(p: u64) -> u64 {
    let factors = prime_factors(p - 1);
    (2..p).find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1)).expect("p is prime")
}

fn roots() -> &'static [u64; 8] {
    static ROOTS: OnceLock<[u64; 8]> = OnceLock::new();
    ROOTS.get_or_init(|| NTT_PRIMES.map(|(p, _)| primitive_root(p)))
}

fn ntt(a: &mut [u64], p: u64, g: u64, invert: bool) {
    let n = a.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w = pow_mod(g, (p - 1) / len as u64, p);
        if invert {
            w = pow_mod(w, p - 2, p);
        }
        let half = len / 2;
        let mut tw = Vec::with_capacity(half);
        let mut cur = 1u64;
        for _ in 0..half {
            tw.push(cur);
            cur = cur * w % p;
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((x, y), &t) in lo.iter_mut().zip(hi.iter_mut()).zip(&tw) {
                let u = *x;
                let v = *y * t % p;
                *x = if u + v >= p { u + v - p } else { u + v };
                *y = if u >= v { u - v } else { u + p - v };
            }
        }
        len <<= 1;
    }
    if invert {
        let n_inv = pow_mod(n as u64, p - 2, p);
        for x in a.iter_mut() {
            *x = *x * n_inv % p;
        }
    }
}

fn convolve_mod(a: &[u64], b: &[u64], size: usize, p: u64, g: u64) -> Vec<u64> {
    let mut fa = a.iter().map(|&x| x % p).collect::<Vec<_>>();
    fa.resize(size, 0);
    let mut fb = b.iter().map(|&x| x % p).collect::<Vec<_>>();
    fb.resize(size, 0);
    ntt(&mut fa, p, g, false);
    ntt(&mut fb, p, g, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * y % p;
    }
    ntt(&mut fa, p, g, true);
    fa
}

/// Number of leading primes of [`NTT_PRIMES`] whose product exceeds `bound`.
pub fn ntt_prime_count(bound: &BigUint) -> Result<usize> {
    let mut prod = BigUint::one();
    for (i, (p, _)) in NTT_PRIMES.iter().enumerate() {
        prod *= *p;
        if prod > *bound {
            return Ok(i + 1);
        }
    }
    Err(Error::CoefficientBoundTooLarge)
}

fn max_abs(p: &UniPoly) -> BigUint {
    p.terms().map(|(_, c)| c.abs().to_biguint().unwrap()).max().unwrap_or_default()
}

/// `2 * max|a| * max|b| * min(terms)`: twice the largest possible magnitude
/// of a product coefficient, so signed values recombine uniquely.
pub fn coefficient_bound(a: &UniPoly, b: &UniPoly) -> BigUint {
    let t = a.num_terms().min(b.num_terms());
    let (ma, mb) = match a.ring() {
        RingSpec::Integers => (max_abs(a), max_abs(b)),
        RingSpec::PrimeField(q) => {
            let m = BigUint::from(q - 1);
            (m.clone(), m)
        }
    };
    BigUint::from(2u32) * ma * mb * t
}

/// Lifts coefficients to `[0, m)` for residue arithmetic.
fn lift(p: &UniPoly, len: usize, m: &BigInt) -> Vec<BigUint> {
    let mut v = vec![BigUint::zero(); len];
    for (e, c) in p.terms() {
        let r = ((c % m) + m) % m;
        v[e.to_usize().unwrap()] = r.to_biguint().unwrap();
    }
    v
}

struct Garner {
    primes: Vec<u64>,
    /// `inv[i][j] = p_j^{-1} mod p_i` for `j < i`.
    inv: Vec<Vec<u64>>,
    modulus: BigUint,
}

impl Garner {
    fn new(primes: Vec<u64>) -> Self {
        let inv = primes.iter().enumerate().map(|(i, &pi)| primes[..i].iter().map(|&pj| pow_mod(pj % pi, pi - 2, pi)).collect()).collect();
        let modulus = primes.iter().fold(BigUint::one(), |acc, &p| acc * p);
        Garner { primes, inv, modulus }
    }

    fn mixed_radix(&self, residues: &[u64]) -> Vec<u64> {
        let mut v: Vec<u64> = Vec::with_capacity(residues.len());
        for (i, &r) in residues.iter().enumerate() {
            let p = self.primes[i];
            let mut t = r;
            for (j, &vj) in v.iter().enumerate() {
                t = (t + p - vj % p) % p * self.inv[i][j] % p;
            }
            v.push(t);
        }
        v
    }

    /// Value in `[0, P)` with the given residues.
    fn combine_big(&self, residues: &[u64]) -> BigUint {
        let v = self.mixed_radix(residues);
        let mut x = BigUint::zero();
        for (vi, p) in v.iter().zip(&self.primes).rev() {
            x = x * *p + *vi;
        }
        x
    }

    fn combine_small(&self, residues: &[u64]) -> u128 {
        let v = self.mixed_radix(residues);
        let mut x = 0u128;
        for (vi, p) in v.iter().zip(&self.primes).rev() {
            x = x * *p as u128 + *vi as u128;
        }
        x
    }
}

/// Dense product through NTTs. Over the integers the number of primes is
/// chosen from [`coefficient_bound`]; over `GF(q)` the result is reduced mod `q`.
pub fn mul_ntt(a: &UniPoly, b: &UniPoly, choice: &BackendChoice) -> Result<UniPoly> {
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch);
    }
    let ring = a.ring();
    let (Some(da), Some(db)) = (a.degree(), b.degree()) else {
        return Ok(UniPoly::zero(ring));
    };
    let dsum = da + db;
    if dsum >= BigUint::from(choice.dense_threshold) {
        return Err(Error::DegreeTooLarge);
    }
    let (da, db) = (da.to_usize().unwrap(), db.to_usize().unwrap());
    let out_len = da + db + 1;
    let size = out_len.next_power_of_two();

    let count = ntt_prime_count(&coefficient_bound(a, b))?;
    let chosen = &NTT_PRIMES[..count];
    if chosen.iter().any(|&(_, k)| size > 1usize << k) {
        return Err(Error::DegreeTooLarge);
    }

    let m = match ring {
        RingSpec::PrimeField(q) => BigInt::from(q),
        RingSpec::Integers => BigInt::from_biguint(Sign::Plus, Garner::new(chosen.iter().map(|t| t.0).collect()).modulus),
    };
    let la = lift(a, da + 1, &m);
    let lb = lift(b, db + 1, &m);
    let rs = roots();
    let residues: Vec<Vec<u64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let p = NTT_PRIMES[i].0;
            let ra: Vec<u64> = la.iter().map(|x| (x % p).to_u64().unwrap()).collect();
            let rb: Vec<u64> = lb.iter().map(|x| (x % p).to_u64().unwrap()).collect();
            convolve_mod(&ra, &rb, size, p, rs[i])
        })
        .collect();

    let garner = Garner::new(chosen.iter().map(|t| t.0).collect());
    let modulus = BigInt::from_biguint(Sign::Plus, garner.modulus.clone());
    let half = &modulus >> 1u32;
    let mut terms = Vec::new();
    let mut res = vec![0u64; count];
    for e in 0..out_len {
        for (slot, r) in res.iter_mut().zip(&residues) {
            *slot = r[e];
        }
        if res.iter().all(|&r| r == 0) {
            continue;
        }
        let x =
            if count <= 4 { BigInt::from(garner.combine_small(&res)) } else { BigInt::from_biguint(Sign::Plus, garner.combine_big(&res)) };
        let c = match ring {
            RingSpec::Integers if x > half => x - &modulus,
            _ => x,
        };
        terms.push((BigUint::from(e), c));
    }
    Ok(UniPoly::from_terms(ring, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_unipoly;
    use crate::ring::is_prime_u64;
    use crate::unimul::mul_sparse;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dense(rng: &mut ChaCha8Rng, ring: RingSpec, deg: usize, lo: i64, hi: i64) -> UniPoly {
        UniPoly::from_terms(ring, (0..=deg).map(|e| (BigUint::from(e), BigInt::from(rng.gen_range(lo..=hi)))))
    }

    #[test]
    fn prime_table_is_sound() {
        for (p, k) in NTT_PRIMES {
            assert!(is_prime_u64(p), "{p}");
            assert!(k >= 23 && p < 1 << 31);
            assert_eq!((p - 1) % (1 << k), 0);
            assert_ne!(((p - 1) >> k) % 2, 0, "{p} has a larger two-adic order");
        }
        for (i, (p, _)) in NTT_PRIMES.iter().enumerate() {
            assert!(NTT_PRIMES[i + 1..].iter().all(|(q, _)| q != p));
            let g = roots()[i];
            assert_eq!(pow_mod(g, p - 1, *p), 1);
            assert_ne!(pow_mod(g, (p - 1) / 2, *p), 1);
        }
    }

    #[test]
    fn known_roots() {
        assert_eq!(primitive_root(998244353), 3);
        assert_eq!(primitive_root(469762049), 3);
        assert_eq!(primitive_root(2013265921), 31);
    }

    #[test]
    fn transform_round_trip() {
        let (p, g) = (NTT_PRIMES[7].0, roots()[7]);
        let orig: Vec<u64> = (0..64).map(|i| i * 7919 % p).collect();
        let mut a = orig.clone();
        ntt(&mut a, p, g, false);
        ntt(&mut a, p, g, true);
        assert_eq!(a, orig);
    }

    #[test]
    fn garner_recombines() {
        let g = Garner::new(NTT_PRIMES.iter().map(|t| t.0).collect());
        let x = BigUint::parse_bytes(b"123456789012345678901234567890123456789012345678901234567", 10).unwrap();
        assert!(x < g.modulus);
        let res: Vec<u64> = g.primes.iter().map(|&p| (&x % p).to_u64().unwrap()).collect();
        assert_eq!(g.combine_big(&res), x);
        let g4 = Garner::new(g.primes[..4].to_vec());
        let y = 98765432109876543210987654321u128;
        let res: Vec<u64> = g4.primes.iter().map(|&p| (y % p as u128) as u64).collect();
        assert_eq!(g4.combine_small(&res), y);
    }

    #[test]
    fn prime_count_follows_the_bound() {
        assert_eq!(ntt_prime_count(&BigUint::from(1u32)), Ok(1));
        assert_eq!(ntt_prime_count(&BigUint::from(2013265921u64)), Ok(2));
        let all = NTT_PRIMES.iter().fold(BigUint::one(), |a, t| a * t.0);
        assert_eq!(ntt_prime_count(&(&all - 1u32)), Ok(8));
        assert_eq!(ntt_prime_count(&all), Err(Error::CoefficientBoundTooLarge));
        let a = parse_unipoly("100*x^2 - 100", RingSpec::Integers).unwrap();
        assert_eq!(coefficient_bound(&a, &a), BigUint::from(40000u32));
    }

    #[test]
    fn matches_schoolbook_over_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ring = RingSpec::PrimeField(1_000_000_007);
        let a = random_dense(&mut rng, ring, 1000, 0, 1_000_000_006);
        let b = random_dense(&mut rng, ring, 1000, 0, 1_000_000_006);
        assert_eq!(mul_ntt(&a, &b, &BackendChoice::default()).unwrap(), mul_sparse(&a, &b).unwrap());
    }

    #[test]
    fn matches_schoolbook_over_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ring = RingSpec::Integers;
        let a = random_dense(&mut rng, ring, 512, -100, 100);
        let b = random_dense(&mut rng, ring, 512, -100, 100);
        assert_eq!(mul_ntt(&a, &b, &BackendChoice::default()).unwrap(), mul_sparse(&a, &b).unwrap());
        let big = random_dense(&mut rng, ring, 40, -(1 << 62), 1 << 62);
        assert_eq!(mul_ntt(&big, &big, &BackendChoice::default()).unwrap(), mul_sparse(&big, &big).unwrap());
    }

    #[test]
    fn identity_and_limits() {
        let ring = RingSpec::Integers;
        let one = parse_unipoly("1", ring).unwrap();
        let b = parse_unipoly("3*x^5 - x + 2", ring).unwrap();
        assert_eq!(mul_ntt(&one, &b, &BackendChoice::default()).unwrap(), b);
        let tight = BackendChoice { dense_threshold: 5, ..BackendChoice::default() };
        assert_eq!(mul_ntt(&one, &b, &tight), Err(Error::DegreeTooLarge));
        let huge = parse_unipoly(&format!("{}*x", BigUint::one() << 200u32), ring).unwrap();
        assert_eq!(mul_ntt(&huge, &huge, &BackendChoice::default()), Err(Error::CoefficientBoundTooLarge));
    }
}
