//! Random instance generators and the degree-ratio experiments.
//!
//! Two regimes are covered. In the fully random one every exponent is
//! uniform on `[0, d_i]`; in the partially random one `|k_1 - k_2| <= L` for
//! every monomial. Both add one monomial per variable attaining its maximum
//! degree, so the per-variable degrees of `f * g` are exactly `2 d_i` and
//! the predicted ratios are deterministic.

use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::poly::{ExponentVector, MultiPoly};
use crate::reduce::{crt_reduce, hybrid_reduce, iks_reduce, sks_reduce, Plan};
use crate::ring::RingSpec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    /// Maximum degree of each variable; the length is the number of variables.
    pub degrees: Vec<u64>,
    /// Random monomials drawn before merging, excluding the forced maxima.
    pub terms: usize,
    /// Bound on `|k_1 - k_2|`, for the partially random regime.
    pub l: Option<u64>,
    pub seed: u64,
    pub ring: RingSpec,
}

impl GenConfig {
    pub fn new(degrees: Vec<u64>, terms: usize, seed: u64) -> Self {
        GenConfig { degrees, terms, l: None, seed, ring: RingSpec::Integers }
    }

    fn check(&self) -> Result<()> {
        if self.degrees.is_empty() || self.degrees.contains(&0) {
            return Err(Error::InfeasibleConstraint("every degree must be at least 1".into()));
        }
        if self.terms == 0 {
            return Err(Error::InfeasibleConstraint("at least one term is required".into()));
        }
        Ok(())
    }
}

fn coefficient(rng: &mut impl Rng, ring: RingSpec) -> BigInt {
    match ring {
        RingSpec::Integers => BigInt::from(rng.gen_range(1..=1000u32)),
        RingSpec::PrimeField(q) => BigInt::from(rng.gen_range(1..q)),
    }
}

/// Sums the monomials; forced ones keep a nonzero coefficient even if the
/// field sum cancels.
fn assemble(cfg: &GenConfig, rng: &mut impl Rng, random: Vec<Vec<u64>>, forced: Vec<Vec<u64>>) -> Result<MultiPoly> {
    let n = cfg.degrees.len();
    let mut terms = Vec::with_capacity(random.len() + forced.len());
    for e in random.into_iter().chain(forced.iter().cloned()) {
        terms.push((ExponentVector::new(e), coefficient(rng, cfg.ring)));
    }
    let mut p = MultiPoly::from_terms(cfg.ring, n, terms)?;
    for e in forced {
        if p.coeff(&e).is_zero() {
            p.add_term(ExponentVector::new(e), BigInt::one());
        }
    }
    Ok(p)
}

fn uniform_row(rng: &mut impl Rng, degrees: &[u64]) -> Vec<u64> {
    degrees.iter().map(|&d| rng.gen_range(0..=d)).collect()
}

/// `T` uniform monomials plus one monomial per variable at its maximum degree.
pub fn gen_fully_random(cfg: &GenConfig) -> Result<MultiPoly> {
    cfg.check()?;
    if cfg.l.is_some() {
        return Err(Error::InfeasibleConstraint("the fully random generator takes no L bound".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let random = (0..cfg.terms).map(|_| uniform_row(&mut rng, &cfg.degrees)).collect();
    let forced = (0..cfg.degrees.len())
        .map(|i| {
            let mut e = uniform_row(&mut rng, &cfg.degrees);
            e[i] = cfg.degrees[i];
            e
        })
        .collect();
    assemble(cfg, &mut rng, random, forced)
}

fn constrained_row(rng: &mut impl Rng, degrees: &[u64], l: u64) -> Vec<u64> {
    let (d1, d2) = (degrees[0], degrees[1]);
    let mut e = uniform_row(rng, degrees);
    // k_2 is drawn from the part of [0, d_2] that leaves room for k_1
    let k2 = rng.gen_range(0..=d2.min(d1.saturating_add(l)));
    let k1 = rng.gen_range(k2.saturating_sub(l)..=d1.min(k2.saturating_add(l)));
    e[0] = k1;
    e[1] = k2;
    e
}

/// Like [`gen_fully_random`] but with `|k_1 - k_2| <= L` on every monomial.
pub fn gen_partially_random(cfg: &GenConfig) -> Result<MultiPoly> {
    cfg.check()?;
    let Some(l) = cfg.l else {
        return Err(Error::InfeasibleConstraint("the partially random generator needs an L bound".into()));
    };
    if l == 0 {
        return Err(Error::InfeasibleConstraint("L must be at least 1".into()));
    }
    let d = &cfg.degrees;
    if d.len() < 2 {
        return Err(Error::InfeasibleConstraint("the L bound needs at least two variables".into()));
    }
    if d[0].abs_diff(d[1]) > l {
        return Err(Error::InfeasibleConstraint(format!("maxima d_1 = {} and d_2 = {} cannot both be attained with L = {l}", d[0], d[1])));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let random = (0..cfg.terms).map(|_| constrained_row(&mut rng, d, l)).collect();
    let mut forced = Vec::with_capacity(d.len());
    for i in 0..d.len() {
        let mut e = constrained_row(&mut rng, d, l);
        match i {
            0 => {
                e[0] = d[0];
                e[1] = d[0].saturating_sub(l).min(d[1]);
            }
            1 => {
                e[1] = d[1];
                e[0] = d[1].saturating_sub(l).min(d[0]);
            }
            _ => e[i] = d[i],
        }
        forced.push(e);
    }
    assemble(cfg, &mut rng, random, forced)
}

/// Random sparse polynomial for property tests: a random degree box with
/// sides at most `max_deg`, up to `max_terms` monomials, nonzero result.
pub fn random_sparse(rng: &mut impl Rng, ring: RingSpec, nvars: usize, max_deg: u64, max_terms: usize) -> MultiPoly {
    let degrees: Vec<u64> = (0..nvars).map(|_| rng.gen_range(0..=max_deg)).collect();
    let count = rng.gen_range(1..=max_terms.max(1));
    let terms = (0..count).map(|_| {
        let c = match ring {
            RingSpec::Integers => {
                let v = rng.gen_range(1..=1000i64);
                BigInt::from(if rng.gen_bool(0.5) { -v } else { v })
            }
            RingSpec::PrimeField(q) => BigInt::from(rng.gen_range(1..q)),
        };
        (ExponentVector::new(uniform_row(rng, &degrees)), c)
    });
    let p = MultiPoly::from_terms(ring, nvars, terms).expect("rows have the right arity");
    if p.is_zero() {
        MultiPoly::one(ring, nvars)
    } else {
        p
    }
}

fn sks_degree(dh: &[u64]) -> BigUint {
    let base = BigUint::from(*dh.iter().max().unwrap()) + 1u32;
    BigUint::from(dh[dh.len() - 1]) * num_traits::pow(base, dh.len() - 1)
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Predicted `d^IKS / d^SKS` for product degrees `dh`:
/// `prod (d_i + 1) / (d_n D^(n-1))`. `None` if a degree is zero.
pub fn predict_ratio_iks(dh: &[u64]) -> Option<BigRational> {
    if dh.is_empty() || dh.contains(&0) {
        return None;
    }
    let num = dh.iter().fold(BigUint::one(), |acc, &d| acc * (d + 1));
    Some(ratio(num, sks_degree(dh)))
}

/// Predicted `d^HR / d^SKS` when round 2 of the hybrid reduction takes the
/// CRT branch: `(4L(d_2 + 2L + 2) + 1) prod_{i>=3} (d_i + 1) / (d_n D^(n-1))`.
pub fn predict_ratio_hybrid_crt(dh: &[u64], l: u64) -> Option<BigRational> {
    if dh.len() < 2 || dh.contains(&0) {
        return None;
    }
    let l = BigUint::from(l);
    let head: BigUint = BigUint::from(4u32) * &l * (BigUint::from(dh[1]) + 2u32 * &l + 2u32) + 1u32;
    let num = dh[2..].iter().fold(head, |acc, &d| acc * (d + 1));
    Some(ratio(num, sks_degree(dh)))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one trial, derived from the run seed and the trial coordinates.
pub fn trial_seed(seed: u64, tuple_index: u64, l: Option<u64>, trial: u64) -> u64 {
    [tuple_index, l.map_or(u64::MAX, |l| l), trial].into_iter().fold(splitmix64(seed), |acc, v| splitmix64(acc ^ v))
}

/// One trial of a ratio experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub degrees: Vec<u64>,
    pub l: Option<u64>,
    pub terms: usize,
    pub trial: usize,
    pub seed: u64,
    pub d_sks: BigUint,
    pub d_iks: BigUint,
    pub d_hr: BigUint,
    pub d_crt: BigUint,
    pub ratio_iks: f64,
    pub ratio_hr: f64,
    pub pred_iks: f64,
    pub pred_hr: f64,
    /// Rounds in which the hybrid reduction took the CRT branch.
    pub hr_crt_rounds: Vec<usize>,
}

impl TrialRecord {
    pub fn round2_crt(&self) -> bool {
        self.hr_crt_rounds.first() == Some(&2)
    }
}

/// Averages over the trials of one degree tuple (and one `L`, if any).
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub degrees: Vec<u64>,
    pub l: Option<u64>,
    pub terms: usize,
    pub trials: Vec<TrialRecord>,
    pub mean_ratio_iks: f64,
    pub mean_ratio_hr: f64,
    pub mean_pred_iks: f64,
    pub mean_pred_hr: f64,
    /// Round 2 took the CRT branch in every trial.
    pub crt_in_all_trials: bool,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn quotient(a: &BigUint, b: &BigUint) -> f64 {
    rational_to_f64(&ratio(a.clone(), b.clone()))
}

fn run_trial(cfg: &GenConfig, trial: usize) -> Result<TrialRecord> {
    let gen = |seed: u64| {
        let c = GenConfig { seed, ..cfg.clone() };
        if c.l.is_some() {
            gen_partially_random(&c)
        } else {
            gen_fully_random(&c)
        }
    };
    let f = gen(splitmix64(cfg.seed ^ 1))?;
    let g = gen(splitmix64(cfg.seed ^ 2))?;
    let d_sks = sks_reduce(&f, &g)?.d_hx();
    let d_iks = iks_reduce(&f, &g)?.d_hx();
    let hr = hybrid_reduce(&f, &g)?;
    let d_crt = crt_reduce(&f, &g, None)?.d_hx();
    let Plan::Hybrid(plan) = &hr.plan else { unreachable!() };
    let hr_crt_rounds = plan.crt_rounds();
    let dh: Vec<u64> = f.degrees()?.iter().zip(g.degrees()?).map(|(a, b)| a + b).collect();
    let pred_iks = predict_ratio_iks(&dh).map_or(f64::NAN, |r| rational_to_f64(&r));
    let pred_hr = match cfg.l {
        Some(l) if hr_crt_rounds.first() == Some(&2) => predict_ratio_hybrid_crt(&dh, l).map_or(f64::NAN, |r| rational_to_f64(&r)),
        _ => pred_iks,
    };
    let d_hr = hr.d_hx();
    Ok(TrialRecord {
        degrees: cfg.degrees.clone(),
        l: cfg.l,
        terms: cfg.terms,
        trial,
        seed: cfg.seed,
        ratio_iks: quotient(&d_iks, &d_sks),
        ratio_hr: quotient(&d_hr, &d_sks),
        d_sks,
        d_iks,
        d_hr,
        d_crt,
        pred_iks,
        pred_hr,
        hr_crt_rounds,
    })
}

fn run_report(
    degrees: &[u64],
    l: Option<u64>,
    terms: usize,
    trials: usize,
    seed: u64,
    tuple_index: u64,
    ring: RingSpec,
) -> Result<RatioReport> {
    if trials == 0 {
        return Err(Error::InfeasibleConstraint("at least one trial is required".into()));
    }
    let records = (0..trials)
        .into_par_iter()
        .map(|t| {
            let cfg = GenConfig { degrees: degrees.to_vec(), terms, l, seed: trial_seed(seed, tuple_index, l, t as u64), ring };
            run_trial(&cfg, t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioReport {
        degrees: degrees.to_vec(),
        l,
        terms,
        mean_ratio_iks: mean(records.iter().map(|r| r.ratio_iks)),
        mean_ratio_hr: mean(records.iter().map(|r| r.ratio_hr)),
        mean_pred_iks: mean(records.iter().map(|r| r.pred_iks)),
        mean_pred_hr: mean(records.iter().map(|r| r.pred_hr)),
        crt_in_all_trials: records.iter().all(TrialRecord::round2_crt),
        trials: records,
    })
}

/// Fully random regime: one report per degree tuple.
pub fn run_table3(tuples: &[Vec<u64>], terms: usize, trials: usize, seed: u64, ring: RingSpec) -> Result<Vec<RatioReport>> {
    tuples.iter().enumerate().map(|(i, t)| run_report(t, None, terms, trials, seed, i as u64, ring)).collect()
}

/// Partially random regime: one report per value of `L`.
pub fn run_fig1_sweep(tuple: &[u64], ls: &[u64], terms: usize, trials: usize, seed: u64, ring: RingSpec) -> Result<Vec<RatioReport>> {
    ls.iter().map(|&l| run_report(tuple, Some(l), terms, trials, seed, 0, ring)).collect()
}

/// One row per trial: `n, d1..dn, L, T, trial, seed, d_sks, d_iks, d_hr,
/// ratio_iks, ratio_hr, pred_iks, pred_hr`.
pub fn write_csv<W: Write>(reports: &[RatioReport], out: W) -> csv::Result<()> {
    let n = reports.iter().map(|r| r.degrees.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["n".to_string()];
    header.extend((1..=n).map(|i| format!("d{i}")));
    header.extend(["L", "T", "trial", "seed", "d_sks", "d_iks", "d_hr", "ratio_iks", "ratio_hr", "pred_iks", "pred_hr"].map(String::from));
    w.write_record(&header)?;
    for r in reports.iter().flat_map(|r| &r.trials) {
        let mut row = vec![r.degrees.len().to_string()];
        row.extend((0..n).map(|i| r.degrees.get(i).map_or_else(String::new, ToString::to_string)));
        row.push(r.l.map_or_else(String::new, |l| l.to_string()));
        row.push(r.terms.to_string());
        row.push(r.trial.to_string());
        row.push(r.seed.to_string());
        row.extend([&r.d_sks, &r.d_iks, &r.d_hr].map(ToString::to_string));
        row.extend([r.ratio_iks, r.ratio_hr, r.pred_iks, r.pred_hr].map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn big_json(v: &BigUint) -> Value {
    v.to_u64().map_or_else(|| Value::String(v.to_string()), Value::from)
}

/// JSON mirror of [`write_csv`]: per-report means and the trial rows, which
/// also carry `d_crt` and the hybrid CRT rounds.
pub fn to_json(reports: &[RatioReport]) -> Value {
    Value::Array(
        reports
            .iter()
            .map(|r| {
                let trials: Vec<Value> = r
                    .trials
                    .iter()
                    .map(|t| {
                        let mut row = json!({
                            "n": t.degrees.len(),
                            "L": t.l,
                            "T": t.terms,
                            "trial": t.trial,
                            "seed": t.seed,
                            "d_sks": big_json(&t.d_sks),
                            "d_iks": big_json(&t.d_iks),
                            "d_hr": big_json(&t.d_hr),
                            "d_crt": big_json(&t.d_crt),
                            "ratio_iks": t.ratio_iks,
                            "ratio_hr": t.ratio_hr,
                            "pred_iks": t.pred_iks,
                            "pred_hr": t.pred_hr,
                            "hr_crt_rounds": t.hr_crt_rounds,
                        });
                        for (i, d) in t.degrees.iter().enumerate() {
                            row[format!("d{}", i + 1)] = Value::from(*d);
                        }
                        row
                    })
                    .collect();
                json!({
                    "degrees": r.degrees,
                    "L": r.l,
                    "T": r.terms,
                    "mean_ratio_iks": r.mean_ratio_iks,
                    "mean_ratio_hr": r.mean_ratio_hr,
                    "mean_pred_iks": r.mean_pred_iks,
                    "mean_pred_hr": r.mean_pred_hr,
                    "crt_in_all_trials": r.crt_in_all_trials,
                    "trials": trials,
                })
            })
            .collect(),
    )
}
