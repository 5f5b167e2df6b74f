//! Coefficient domains and the shared term-product kernel.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient ring of a polynomial: unbounded integers or a prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RingSpec {
    Integers,
    PrimeField(u64),
}

impl RingSpec {
    /// Prime field with modulus `q`; fails unless `q` is prime.
    pub fn prime_field(q: u64) -> Result<Self> {
        if is_prime_u64(q) {
            Ok(RingSpec::PrimeField(q))
        } else {
            Err(Error::InvalidModulus(q))
        }
    }

    pub fn modulus(&self) -> Option<u64> {
        match self {
            RingSpec::Integers => None,
            RingSpec::PrimeField(q) => Some(*q),
        }
    }

    /// Canonical representative: identity over the integers, `[0, q)` in the field.
    pub fn reduce(&self, c: BigInt) -> BigInt {
        match self {
            RingSpec::Integers => c,
            RingSpec::PrimeField(q) => c.mod_floor(&BigInt::from(*q)),
        }
    }

    pub fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.reduce(a + b)
    }

    pub fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.reduce(a * b)
    }

    pub fn neg(&self, a: &BigInt) -> BigInt {
        self.reduce(-a)
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Integers => write!(f, "ZZ"),
            RingSpec::PrimeField(q) => write!(f, "GF({q})"),
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the witness set is exact for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// The product kernel below runs in one of three coefficient lanes, picked once
// per call from the ring and the operand magnitudes.

pub(crate) trait Lane {
    type Value: Clone;
    type Acc: Clone;
    fn lift(&self, c: &BigInt) -> Self::Value;
    fn zero(&self) -> Self::Acc;
    fn mul_add(&self, acc: &mut Self::Acc, x: &Self::Value, y: &Self::Value);
    fn finish(&self, acc: Self::Acc) -> BigInt;
}

pub(crate) struct FieldLane(pub u64);

impl Lane for FieldLane {
    type Value = u64;
    type Acc = u128;
    fn lift(&self, c: &BigInt) -> u64 {
        c.mod_floor(&BigInt::from(self.0)).to_u64().unwrap()
    }
    fn zero(&self) -> u128 {
        0
    }
    fn mul_add(&self, acc: &mut u128, x: &u64, y: &u64) {
        let q = self.0 as u128;
        let p = *x as u128 * *y as u128;
        if self.0 < 1 << 63 {
            // products stay below 2^126, so reduce only near the top
            *acc += p;
            if *acc >= 1 << 127 {
                *acc %= q;
            }
        } else {
            *acc = (*acc % q + p % q) % q;
        }
    }
    fn finish(&self, acc: u128) -> BigInt {
        BigInt::from(acc % self.0 as u128)
    }
}

/// Integers whose partial sums provably fit in an `i128`.
pub(crate) struct SmallLane;

impl Lane for SmallLane {
    type Value = i64;
    type Acc = i128;
    fn lift(&self, c: &BigInt) -> i64 {
        c.to_i64().unwrap()
    }
    fn zero(&self) -> i128 {
        0
    }
    fn mul_add(&self, acc: &mut i128, x: &i64, y: &i64) {
        *acc += *x as i128 * *y as i128;
    }
    fn finish(&self, acc: i128) -> BigInt {
        BigInt::from(acc)
    }
}

pub(crate) struct BigLane;

impl Lane for BigLane {
    type Value = BigInt;
    type Acc = BigInt;
    fn lift(&self, c: &BigInt) -> BigInt {
        c.clone()
    }
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn mul_add(&self, acc: &mut BigInt, x: &BigInt, y: &BigInt) {
        *acc += x * y;
    }
    fn finish(&self, acc: BigInt) -> BigInt {
        acc
    }
}

pub(crate) enum LaneKind {
    Field(u64),
    Small,
    Big,
}

pub(crate) fn pick_lane<'a>(
    ring: &RingSpec,
    a: impl Iterator<Item = &'a BigInt>,
    b: impl Iterator<Item = &'a BigInt>,
    ta: usize,
    tb: usize,
) -> LaneKind {
    if let RingSpec::PrimeField(q) = ring {
        return LaneKind::Field(*q);
    }
    let bits = |it: &mut dyn Iterator<Item = &'a BigInt>| it.map(|c| c.abs().bits()).max().unwrap_or(0);
    let mut a = a;
    let mut b = b;
    let ba = bits(&mut a);
    let bb = bits(&mut b);
    let bt = (ta.min(tb).max(1) as u64).ilog2() as u64 + 1;
    if ba <= 63 && bb <= 63 && ba + bb + bt <= 126 {
        LaneKind::Small
    } else {
        LaneKind::Big
    }
}

/// Schoolbook product of two term lists with hashed accumulation. `combine`
/// maps a pair of exponents to the product exponent. Output terms are
/// normalized in `ring` and nonzero, in unspecified order.
pub(crate) fn convolve_hashed<K, F>(ring: &RingSpec, a: &[(K, BigInt)], b: &[(K, BigInt)], combine: F) -> Result<Vec<(K, BigInt)>>
where
    K: Hash + Eq + Clone,
    F: Fn(&K, &K) -> Result<K>,
{
    match pick_lane(ring, a.iter().map(|t| &t.1), b.iter().map(|t| &t.1), a.len(), b.len()) {
        LaneKind::Field(q) => convolve_hashed_in(&FieldLane(q), ring, a, b, combine),
        LaneKind::Small => convolve_hashed_in(&SmallLane, ring, a, b, combine),
        LaneKind::Big => convolve_hashed_in(&BigLane, ring, a, b, combine),
    }
}

fn convolve_hashed_in<L, K, F>(lane: &L, ring: &RingSpec, a: &[(K, BigInt)], b: &[(K, BigInt)], combine: F) -> Result<Vec<(K, BigInt)>>
where
    L: Lane,
    K: Hash + Eq + Clone,
    F: Fn(&K, &K) -> Result<K>,
{
    let bl: Vec<(&K, L::Value)> = b.iter().map(|(k, c)| (k, lane.lift(c))).collect();
    let mut acc: HashMap<K, L::Acc> = HashMap::with_capacity(a.len().saturating_mul(b.len()).min(1 << 20));
    for (ka, ca) in a {
        let va = lane.lift(ca);
        for (kb, vb) in &bl {
            let k = combine(ka, kb)?;
            let slot = acc.entry(k).or_insert_with(|| lane.zero());
            lane.mul_add(slot, &va, vb);
        }
    }
    Ok(acc
        .into_iter()
        .filter_map(|(k, v)| {
            let c = ring.reduce(lane.finish(v));
            (!c.is_zero()).then_some((k, c))
        })
        .collect())
}

/// Schoolbook product into a dense accumulator indexed by exponent.
/// `len` must exceed every product exponent.
pub(crate) fn convolve_dense(ring: &RingSpec, a: &[(usize, BigInt)], b: &[(usize, BigInt)], len: usize) -> Vec<(usize, BigInt)> {
    match pick_lane(ring, a.iter().map(|t| &t.1), b.iter().map(|t| &t.1), a.len(), b.len()) {
        LaneKind::Field(q) => convolve_dense_in(&FieldLane(q), ring, a, b, len),
        LaneKind::Small => convolve_dense_in(&SmallLane, ring, a, b, len),
        LaneKind::Big => convolve_dense_in(&BigLane, ring, a, b, len),
    }
}

fn convolve_dense_in<L: Lane>(lane: &L, ring: &RingSpec, a: &[(usize, BigInt)], b: &[(usize, BigInt)], len: usize) -> Vec<(usize, BigInt)> {
    let bl: Vec<(usize, L::Value)> = b.iter().map(|(k, c)| (*k, lane.lift(c))).collect();
    let mut acc = vec![lane.zero(); len];
    for (ka, ca) in a {
        let va = lane.lift(ca);
        for (kb, vb) in &bl {
            lane.mul_add(&mut acc[ka + kb], &va, vb);
        }
    }
    acc.into_iter()
        .enumerate()
        .filter_map(|(k, v)| {
            let c = ring.reduce(lane.finish(v));
            (!c.is_zero()).then_some((k, c))
        })
        .collect()
}
