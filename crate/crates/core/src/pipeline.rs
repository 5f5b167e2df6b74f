//! The full mechanism: reduce, multiply the univariate images, recover.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::poly::{ExponentVector, MultiPoly};
use crate::reduce::{crt_reduce, hybrid_reduce, iks_reduce, sks_reduce, OpCounts, ReductionOutcome};
use crate::unimul::{choose_backend, multiply as uni_multiply, BackendChoice};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Method {
    Sks,
    Iks,
    /// Explicit bases, or `None` for the adjusted `deg + 1` bases.
    Crt {
        bases: Option<Vec<BigUint>>,
    },
    Hybrid,
    Direct,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sks => "sks",
            Method::Iks => "iks",
            Method::Crt { .. } => "crt",
            Method::Hybrid => "hybrid",
            Method::Direct => "direct",
        }
    }

    /// The four reductions, with automatic CRT bases.
    pub fn reductions() -> [Method; 4] {
        [Method::Sks, Method::Iks, Method::Crt { bases: None }, Method::Hybrid]
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sks" => Ok(Method::Sks),
            "iks" => Ok(Method::Iks),
            "crt" => Ok(Method::Crt { bases: None }),
            "hybrid" => Ok(Method::Hybrid),
            "direct" => Ok(Method::Direct),
            _ => Err(format!("unknown method `{s}` (expected sks, iks, crt, hybrid or direct)")),
        }
    }
}

/// Runs the reduction step only. `Direct` has no reduction.
pub fn reduce(f: &MultiPoly, g: &MultiPoly, method: &Method) -> Result<ReductionOutcome> {
    match method {
        Method::Sks => sks_reduce(f, g),
        Method::Iks => iks_reduce(f, g),
        Method::Crt { bases } => crt_reduce(f, g, bases.as_deref()),
        Method::Hybrid => hybrid_reduce(f, g),
        Method::Direct => Err(Error::InvalidSequence("the direct method has no reduction step".into())),
    }
}

/// Per-call measurements. Degrees are absent for `Direct`.
#[derive(Debug, Clone, PartialEq)]
pub struct MulStats {
    pub method: String,
    pub backend: Option<String>,
    pub nvars: usize,
    pub terms_f: usize,
    pub terms_g: usize,
    pub terms_h: usize,
    pub d_fx: Option<BigUint>,
    pub d_gx: Option<BigUint>,
    pub d_hx: Option<BigUint>,
    pub reduce_mul_count: u64,
    pub reduce_add_count: u64,
    pub reduce_secs: f64,
    pub multiply_secs: f64,
    pub recover_secs: f64,
    pub plan: Option<String>,
}

impl MulStats {
    fn fields(&self) -> Vec<(&'static str, String)> {
        let opt = |v: &Option<BigUint>| v.as_ref().map_or_else(String::new, ToString::to_string);
        vec![
            ("method", self.method.clone()),
            ("backend", self.backend.clone().unwrap_or_default()),
            ("nvars", self.nvars.to_string()),
            ("terms_f", self.terms_f.to_string()),
            ("terms_g", self.terms_g.to_string()),
            ("terms_h", self.terms_h.to_string()),
            ("d_fx", opt(&self.d_fx)),
            ("d_gx", opt(&self.d_gx)),
            ("d_hx", opt(&self.d_hx)),
            ("reduce_mul_count", self.reduce_mul_count.to_string()),
            ("reduce_add_count", self.reduce_add_count.to_string()),
            ("reduce_secs", format!("{:.6}", self.reduce_secs)),
            ("multiply_secs", format!("{:.6}", self.multiply_secs)),
            ("recover_secs", format!("{:.6}", self.recover_secs)),
        ]
    }

    /// Flat `key=value` record, one pair per line. The plan is omitted since
    /// it has its own record format.
    pub fn to_record(&self) -> String {
        self.fields().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// JSON object with the same keys as [`MulStats::to_record`] plus `plan`.
    /// Degrees too large for a JSON number are emitted as strings.
    pub fn to_json(&self) -> Value {
        let deg = |d: &Option<BigUint>| match d {
            None => Value::Null,
            Some(d) => d.to_u64().map_or_else(|| Value::String(d.to_string()), Value::from),
        };
        let mut m = Map::new();
        m.insert("method".into(), Value::from(self.method.clone()));
        m.insert("backend".into(), self.backend.clone().map_or(Value::Null, Value::String));
        m.insert("nvars".into(), Value::from(self.nvars));
        m.insert("terms_f".into(), Value::from(self.terms_f));
        m.insert("terms_g".into(), Value::from(self.terms_g));
        m.insert("terms_h".into(), Value::from(self.terms_h));
        m.insert("d_fx".into(), deg(&self.d_fx));
        m.insert("d_gx".into(), deg(&self.d_gx));
        m.insert("d_hx".into(), deg(&self.d_hx));
        m.insert("reduce_mul_count".into(), Value::from(self.reduce_mul_count));
        m.insert("reduce_add_count".into(), Value::from(self.reduce_add_count));
        m.insert("reduce_secs".into(), Value::from(self.reduce_secs));
        m.insert("multiply_secs".into(), Value::from(self.multiply_secs));
        m.insert("recover_secs".into(), Value::from(self.recover_secs));
        m.insert("plan".into(), self.plan.clone().map_or(Value::Null, Value::String));
        Value::Object(m)
    }
}

/// `f * g` through the chosen method.
pub fn multiply(f: &MultiPoly, g: &MultiPoly, method: &Method, backend: &BackendChoice) -> Result<(MultiPoly, MulStats)> {
    let mut stats = MulStats {
        method: method.name().to_string(),
        backend: None,
        nvars: f.nvars(),
        terms_f: f.num_terms(),
        terms_g: g.num_terms(),
        terms_h: 0,
        d_fx: None,
        d_gx: None,
        d_hx: None,
        reduce_mul_count: 0,
        reduce_add_count: 0,
        reduce_secs: 0.0,
        multiply_secs: 0.0,
        recover_secs: 0.0,
        plan: None,
    };
    if *method == Method::Direct {
        let t = Instant::now();
        let h = f.mul_direct(g)?;
        stats.multiply_secs = t.elapsed().as_secs_f64();
        stats.terms_h = h.num_terms();
        return Ok((h, stats));
    }
    let t = Instant::now();
    let out = reduce(f, g, method)?;
    stats.reduce_secs = t.elapsed().as_secs_f64();
    let h = finish(&out, backend, &mut stats)?;
    Ok((h, stats))
}

fn finish(out: &ReductionOutcome, backend: &BackendChoice, stats: &mut MulStats) -> Result<MultiPoly> {
    let OpCounts { mul, add } = out.ops;
    stats.reduce_mul_count = mul;
    stats.reduce_add_count = add;
    stats.d_fx = out.f_x.degree().cloned();
    stats.d_gx = out.g_x.degree().cloned();
    stats.d_hx = Some(out.d_hx());
    stats.plan = Some(out.plan.to_record());
    stats.backend = Some(choose_backend(&out.f_x, &out.g_x, backend).to_string());
    let t = Instant::now();
    let h_x = uni_multiply(&out.f_x, &out.g_x, backend)?;
    stats.multiply_secs = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let h = out.plan.recover(&h_x)?;
    stats.recover_secs = t.elapsed().as_secs_f64();
    stats.terms_h = h.num_terms();
    Ok(h)
}

/// First term, in canonical (descending) order, on which two polynomials disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub exponents: Vec<u64>,
    pub expected: BigInt,
    pub actual: BigInt,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.exponents.iter().map(ToString::to_string).collect();
        write!(f, "first divergence at exponents ({}): expected {}, got {}", e.join(","), self.expected, self.actual)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub ok: bool,
    pub divergence: Option<Divergence>,
    /// Error raised while computing the product, if any.
    pub error: Option<Error>,
}

impl fmt::Display for Verification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.divergence, &self.error) {
            _ if self.ok => f.write_str("ok"),
            (Some(d), _) => write!(f, "mismatch: {d}"),
            (None, Some(e)) => write!(f, "mismatch: {e}"),
            (None, None) => f.write_str("mismatch"),
        }
    }
}

pub fn first_divergence(expected: &MultiPoly, actual: &MultiPoly) -> Option<Divergence> {
    let keys: BTreeSet<&ExponentVector> = expected.terms().chain(actual.terms()).map(|(e, _)| e).collect();
    keys.into_iter().rev().find_map(|e| {
        let (a, b) = (expected.coeff(e.as_slice()), actual.coeff(e.as_slice()));
        (a != b).then(|| Divergence { exponents: e.as_slice().to_vec(), expected: a, actual: b })
    })
}

fn judge(expected: &MultiPoly, actual: Result<MultiPoly>) -> Verification {
    match actual {
        Ok(h) => {
            let divergence = first_divergence(expected, &h);
            Verification { ok: divergence.is_none(), divergence, error: None }
        }
        Err(e) => Verification { ok: false, divergence: None, error: Some(e) },
    }
}

/// Compares `multiply` against the direct product.
pub fn verify(f: &MultiPoly, g: &MultiPoly, method: &Method, backend: &BackendChoice) -> Result<Verification> {
    let expected = f.mul_direct(g)?;
    Ok(judge(&expected, multiply(f, g, method, backend).map(|(h, _)| h)))
}

/// Like [`verify`] for an already computed (possibly altered) reduction.
pub fn verify_outcome(f: &MultiPoly, g: &MultiPoly, out: &ReductionOutcome, backend: &BackendChoice) -> Result<Verification> {
    let expected = f.mul_direct(g)?;
    Ok(judge(&expected, uni_multiply(&out.f_x, &out.g_x, backend).and_then(|h| out.plan.recover(&h))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;
    use crate::reduce::Plan;
    use crate::ring::RingSpec;

    const ZZ: RingSpec = RingSpec::Integers;

    fn ex1() -> (MultiPoly, MultiPoly, MultiPoly) {
        (
            parse_poly("x1^7*x2^7*x3^7 + x1*x2^7*x3^17", 3, ZZ).unwrap(),
            parse_poly("x2^3*x3^34 + x1^8*x2^8*x3^8", 3, ZZ).unwrap(),
            parse_poly("x1^7*x2^10*x3^41 + x1^15*x2^15*x3^15 + x1*x2^10*x3^51 + x1^9*x2^15*x3^25", 3, ZZ).unwrap(),
        )
    }

    #[test]
    fn example_through_every_method() {
        let (f, g, h) = ex1();
        let auto = BackendChoice::default();
        let (got, stats) = multiply(&f, &g, &Method::Iks, &auto).unwrap();
        assert_eq!(got, h);
        assert_eq!(stats.d_hx, Some(BigUint::from(13217u32)));
        let bases = Some([17u32, 31, 52].map(BigUint::from).to_vec());
        let (got, stats) = multiply(&f, &g, &Method::Crt { bases }, &auto).unwrap();
        assert_eq!(got, h);
        assert_eq!(stats.d_hx, Some(BigUint::from(103u32)));
        let (got, stats) = multiply(&f, &g, &Method::Direct, &auto).unwrap();
        assert_eq!(got, h);
        assert_eq!((stats.reduce_mul_count, stats.reduce_add_count, stats.d_hx), (0, 0, None));
        for m in Method::reductions() {
            assert!(verify(&f, &g, &m, &auto).unwrap().ok, "{m}");
        }
    }

    #[test]
    fn stats_records() {
        let (f, g, _) = ex1();
        let (_, stats) = multiply(&f, &g, &Method::Sks, &BackendChoice::default()).unwrap();
        let rec = stats.to_record();
        assert!(rec.starts_with("method=sks\nbackend=sparse\n"));
        assert!(rec.contains("d_hx=138425\n"));
        let js = stats.to_json();
        assert_eq!(js["d_hx"], Value::from(138425u64));
        assert_eq!(js["plan"], Value::from("method=sks n=3 base=52"));
        assert_eq!(stats.d_fx.unwrap() + stats.d_gx.unwrap(), BigUint::from(138425u32));
    }

    #[test]
    fn mutated_plan_is_caught() {
        let (f, g, _) = ex1();
        let mut out = iks_reduce(&f, &g).unwrap();
        let Plan::Iks(p) = &mut out.plan else { panic!() };
        p.exponents[2] = BigUint::from(255u32);
        let v = verify_outcome(&f, &g, &out, &BackendChoice::default()).unwrap();
        assert!(!v.ok);
        let d = v.divergence.unwrap();
        assert!(d.to_string().starts_with("first divergence at exponents"));
    }

    #[test]
    fn divergence_order() {
        let a = parse_poly("x1^2 + 3*x1 + 1", 1, ZZ).unwrap();
        let b = parse_poly("x1^2 + 2*x1", 1, ZZ).unwrap();
        let d = first_divergence(&a, &b).unwrap();
        assert_eq!((d.exponents, d.expected, d.actual), (vec![1], BigInt::from(3), BigInt::from(2)));
        assert_eq!(first_divergence(&a, &a), None);
    }

    #[test]
    fn method_names() {
        for m in ["sks", "iks", "crt", "hybrid", "direct"] {
            assert_eq!(m.parse::<Method>().unwrap().name(), m);
        }
        assert!("fft".parse::<Method>().is_err());
    }
}
