//! Univariate multiplication backends: exact sparse schoolbook and dense NTT.

mod ntt;
mod sparse;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::Result;
use crate::poly::UniPoly;

pub use ntt::{coefficient_bound, mul_ntt, ntt_prime_count, primitive_root, NTT_PRIMES};
pub use sparse::mul_sparse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Sparse,
    Ntt,
    Auto,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Sparse => "sparse",
            BackendKind::Ntt => "ntt",
            BackendKind::Auto => "auto",
        })
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sparse" => Ok(BackendKind::Sparse),
            "ntt" => Ok(BackendKind::Ntt),
            "auto" => Ok(BackendKind::Auto),
            _ => Err(format!("unknown backend `{s}` (expected sparse, ntt or auto)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackendChoice {
    pub kind: BackendKind,
    /// Products of degree at or above this never take the dense path.
    pub dense_threshold: u64,
}

impl Default for BackendChoice {
    fn default() -> Self {
        BackendChoice { kind: BackendKind::Auto, dense_threshold: 1 << 22 }
    }
}

impl BackendChoice {
    pub fn new(kind: BackendKind) -> Self {
        BackendChoice { kind, ..Self::default() }
    }
}

fn dense_enough(p: &UniPoly) -> bool {
    match p.degree() {
        Some(d) => BigUint::from(p.num_terms()) * 64u32 > d + 1u32,
        None => false,
    }
}

/// Resolves `Auto` to a concrete backend; explicit choices pass through.
/// `Auto` picks the NTT when the product degree is below the threshold, both
/// inputs have more than one term per 64 exponents, and the coefficient bound
/// fits the prime table.
pub fn choose_backend(a: &UniPoly, b: &UniPoly, choice: &BackendChoice) -> BackendKind {
    if choice.kind != BackendKind::Auto {
        return choice.kind;
    }
    let (Some(da), Some(db)) = (a.degree(), b.degree()) else {
        return BackendKind::Sparse;
    };
    let small = da + db < BigUint::from(choice.dense_threshold);
    if small && dense_enough(a) && dense_enough(b) && ntt_prime_count(&coefficient_bound(a, b)).is_ok() {
        BackendKind::Ntt
    } else {
        BackendKind::Sparse
    }
}

/// Multiplies with the backend selected by `choice`.
pub fn multiply(a: &UniPoly, b: &UniPoly, choice: &BackendChoice) -> Result<UniPoly> {
    match choose_backend(a, b, choice) {
        BackendKind::Ntt => mul_ntt(a, b, choice),
        _ => mul_sparse(a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_unipoly;
    use crate::ring::RingSpec;
    use num_bigint::BigInt;

    #[test]
    fn auto_resolution() {
        let zz = RingSpec::Integers;
        let a = parse_unipoly("x^1911 + x^4465", zz).unwrap();
        let b = parse_unipoly("x^8752 + x^2184", zz).unwrap();
        let auto = BackendChoice::default();
        assert_eq!(choose_backend(&a, &b, &auto), BackendKind::Sparse);
        let dense = UniPoly::from_terms(zz, (0..=1000u32).map(|e| (BigUint::from(e), BigInt::from(e % 7 + 1))));
        assert_eq!(choose_backend(&dense, &dense, &auto), BackendKind::Ntt);
        assert_eq!(choose_backend(&a, &b, &BackendChoice::new(BackendKind::Ntt)), BackendKind::Ntt);
        assert_eq!(choose_backend(&dense, &dense, &BackendChoice::new(BackendKind::Sparse)), BackendKind::Sparse);
        let low = BackendChoice { dense_threshold: 2000, ..auto };
        assert_eq!(choose_backend(&dense, &dense, &low), BackendKind::Sparse);
        assert_eq!(multiply(&a, &b, &auto).unwrap(), mul_sparse(&a, &b).unwrap());
    }

    #[test]
    fn backend_names() {
        for k in [BackendKind::Sparse, BackendKind::Ntt, BackendKind::Auto] {
            assert_eq!(k.to_string().parse::<BackendKind>(), Ok(k));
        }
        assert!("fft".parse::<BackendKind>().is_err());
    }
}
