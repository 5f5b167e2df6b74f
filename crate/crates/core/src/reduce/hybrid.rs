//! Hybrid reduction.
//!
//! Round `r = 2..n` merges `x_r` into `x_1`, either with a two-variable CRT
//! step (bases `p` and `p - 1`, offsets `m_f`, `m_g`) or with an iterative
//! Kronecker step, whichever has the smaller predicted product degree.
//!
//! CRT step, for a term `x_1^a x_r^b` of `f`: `x_1^((m_f + b - a) p + a)`,
//! and likewise for `g` with `m_g`. Since `a <= d_1 < p`, exponents of the
//! product read back as `a = K mod p`, `b = K div p - (m_f + m_g) + a`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{check_pair, rows_to_poly, small_rows_to_poly, small_terms, OpCounts, Plan, ReductionOutcome, Work};
use crate::error::{Error, Result};
use crate::poly::{MultiPoly, UniPoly};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HybridBranch {
    Crt { p: BigUint, m_f: BigInt, m_g: BigInt },
    Iks { d: BigUint },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridStep {
    /// Round `r`; the step merges `x_r` into `x_1`.
    pub round: usize,
    pub branch: HybridBranch,
}

impl HybridStep {
    /// Combined offset `m_f + m_g` of a CRT step (zero for IKS steps).
    pub fn total_offset(&self) -> BigInt {
        match &self.branch {
            HybridBranch::Crt { m_f, m_g, .. } => m_f + m_g,
            HybridBranch::Iks { .. } => BigInt::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridPlan {
    pub nvars: usize,
    pub steps: Vec<HybridStep>,
}

impl HybridPlan {
    /// Rounds that took the CRT branch.
    pub fn crt_rounds(&self) -> Vec<usize> {
        self.steps.iter().filter(|s| matches!(s.branch, HybridBranch::Crt { .. })).map(|s| s.round).collect()
    }

    pub fn all_iks(&self) -> bool {
        self.crt_rounds().is_empty()
    }

    /// Exponent of a product monomial, and whether it lies in the carry-free
    /// region. `None` if a CRT step would produce a negative exponent.
    pub(crate) fn product_image(&self, k: &[u64]) -> Option<(BigUint, bool)> {
        let mut acc = BigInt::from(k[0]);
        let mut carry_free = true;
        for step in &self.steps {
            let kr = BigInt::from(k[step.round - 1]);
            match &step.branch {
                HybridBranch::Crt { p, m_f, m_g } => {
                    let p = BigInt::from_biguint(Sign::Plus, p.clone());
                    let shift = m_f + m_g + kr - &acc;
                    if shift.is_negative() {
                        return None;
                    }
                    if acc >= p {
                        carry_free = false;
                    }
                    acc += shift * p;
                }
                HybridBranch::Iks { d } => {
                    let d = BigInt::from_biguint(Sign::Plus, d.clone());
                    if acc >= d {
                        carry_free = false;
                    }
                    acc += kr * d;
                }
            }
        }
        Some((acc.to_biguint().unwrap(), carry_free))
    }
}

/// Inputs to the branch decision of one hybrid round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrtEstimate {
    /// `(m_f + m_g + Max_f(i,j) + Max_g(i,j)) * p`, never negative.
    pub estimate: BigInt,
    pub p: BigUint,
    /// `Max_f(j,i)`.
    pub m_f: BigInt,
    /// `Max_g(j,i)`.
    pub m_g: BigInt,
}

fn big_signed(v: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, v.clone())
}

/// `(max (k_i - k_j), max (k_j - k_i))` over the rows.
fn max_diffs(w: &Work, i: usize, j: usize) -> (BigInt, BigInt) {
    let mut ij: Option<BigInt> = None;
    let mut ji: Option<BigInt> = None;
    for row in &w.rows {
        let diff = big_signed(&row[i]) - big_signed(&row[j]);
        if ij.as_ref().is_none_or(|m| diff > *m) {
            ij = Some(diff.clone());
        }
        let neg = -diff;
        if ji.as_ref().is_none_or(|m| neg > *m) {
            ji = Some(neg);
        }
    }
    (ij.unwrap(), ji.unwrap())
}

struct RoundEstimate {
    est: CrtEstimate,
    d_i: BigUint,
    d_j: BigUint,
}

fn estimate(f: &Work, g: &Work, i: usize, j: usize, ops: &mut OpCounts) -> RoundEstimate {
    let d_i = f.deg(i) + g.deg(i);
    let d_j = f.deg(j) + g.deg(j);
    let (m_f, rev_f) = max_diffs(f, i, j);
    let (m_g, rev_g) = max_diffs(g, i, j);
    ops.add += (f.len() + g.len()) as u64;
    let low: BigInt = big_signed(&d_i) + 1;
    let high: BigInt = big_signed(&d_j) + 2 + &m_f + &m_g;
    let p = low.max(high);
    let estimate = (&m_f + &m_g + rev_f + rev_g) * &p;
    ops.mul += 1;
    ops.add += 6;
    RoundEstimate { est: CrtEstimate { estimate, p: p.to_biguint().unwrap(), m_f, m_g }, d_i, d_j }
}

/// Branch-decision estimate for the variable pair `(x_i, x_j)` (1-based).
pub fn d_crt_estimate(f: &MultiPoly, g: &MultiPoly, i: usize, j: usize) -> Result<CrtEstimate> {
    check_pair(f, g)?;
    for v in [i, j] {
        if v == 0 || v > f.nvars() {
            return Err(Error::IndexOutOfRange { index: v, nvars: f.nvars() });
        }
    }
    if i == j {
        return Err(Error::InvalidSequence(format!("estimate needs two distinct variables, got x{i} twice")));
    }
    let (wf, wg) = (Work::from_poly(f), Work::from_poly(g));
    Ok(estimate(&wf, &wg, i - 1, j - 1, &mut OpCounts::default()).est)
}

fn crt_step(w: &mut Work, j: usize, p: &BigUint, m: &BigInt, ops: &mut OpCounts) {
    let p = big_signed(p);
    for row in &mut w.rows {
        let a = big_signed(&row[0]);
        let b = big_signed(&std::mem::take(&mut row[j]));
        let e = (m + b - &a) * &p + a;
        row[0] = e.to_biguint().expect("offset makes every CRT exponent non-negative");
    }
    ops.mul += w.len() as u64;
    ops.add += 3 * w.len() as u64;
}

fn iks_step(w: &mut Work, j: usize, d: &BigUint, ops: &mut OpCounts) {
    for row in &mut w.rows {
        let b = std::mem::take(&mut row[j]);
        if !b.is_zero() {
            row[0] += b * d;
        }
    }
    ops.mul += w.len() as u64;
    ops.add += w.len() as u64;
}

pub fn hybrid_reduce(f: &MultiPoly, g: &MultiPoly) -> Result<ReductionOutcome> {
    check_pair(f, g)?;
    let n = f.nvars();
    let mut wf = Work::from_poly(f);
    let mut wg = Work::from_poly(g);
    let mut ops = OpCounts::default();
    let mut steps = Vec::with_capacity(n.saturating_sub(1));
    for r in 2..=n {
        let j = r - 1;
        let RoundEstimate { est, d_i, d_j } = estimate(&wf, &wg, 0, j, &mut ops);
        ops.mul += 1;
        // ties go to the Kronecker branch
        let branch = if est.estimate < big_signed(&(&d_i * &d_j)) {
            crt_step(&mut wf, j, &est.p, &est.m_f, &mut ops);
            crt_step(&mut wg, j, &est.p, &est.m_g, &mut ops);
            HybridBranch::Crt { p: est.p, m_f: est.m_f, m_g: est.m_g }
        } else {
            let d = d_i + 1u32;
            iks_step(&mut wf, j, &d, &mut ops);
            iks_step(&mut wg, j, &d, &mut ops);
            HybridBranch::Iks { d }
        };
        steps.push(HybridStep { round: r, branch });
    }
    let plan = HybridPlan { nvars: n, steps };
    Ok(ReductionOutcome { f_x: wf.into_uni(0), g_x: wg.into_uni(0), plan: Plan::Hybrid(plan), ops })
}

/// Word-size `(base, total offset)` per step; the offset is `None` for IKS steps.
fn small_steps(plan: &HybridPlan) -> Option<Vec<(u64, Option<i128>)>> {
    plan.steps
        .iter()
        .map(|s| match &s.branch {
            HybridBranch::Iks { d } => Some((u64::try_from(d).ok()?, None)),
            HybridBranch::Crt { p, m_f, m_g } => {
                let off = i64::try_from(m_f + m_g).ok()?;
                Some((u64::try_from(p).ok()?, Some(off as i128)))
            }
        })
        .collect()
}

/// Undoes the hybrid steps last-to-first.
pub fn hybrid_inverse(h_x: &UniPoly, plan: &HybridPlan) -> Result<MultiPoly> {
    if let (Some(steps), Some(terms)) = (small_steps(plan), small_terms(h_x)) {
        let mut rows = Vec::with_capacity(terms.len());
        for (k, c) in terms {
            let mut row = vec![0u64; plan.nvars];
            let mut acc = k;
            for (step, (base, offset)) in plan.steps.iter().zip(&steps).rev() {
                let (q, r) = (acc / base, acc % base);
                row[step.round - 1] = match offset {
                    None => q,
                    Some(off) => {
                        let b = q as i128 - off + r as i128;
                        if b < 0 {
                            return Err(Error::NegativeExponent);
                        }
                        u64::try_from(b).map_err(|_| Error::ExponentOutOfRange)?
                    }
                };
                acc = r;
            }
            row[0] = acc;
            rows.push((row, c));
        }
        return small_rows_to_poly(h_x.ring(), plan.nvars, rows);
    }
    let mut rows = Vec::with_capacity(h_x.num_terms());
    for (k, c) in h_x.terms() {
        let mut row = vec![BigUint::zero(); plan.nvars];
        let mut acc = k.clone();
        for step in plan.steps.iter().rev() {
            match &step.branch {
                HybridBranch::Iks { d } => {
                    let (q, r) = acc.div_rem(d);
                    row[step.round - 1] = q;
                    acc = r;
                }
                HybridBranch::Crt { p, m_f, m_g } => {
                    let (q, a) = acc.div_rem(p);
                    let b = big_signed(&q) - m_f - m_g + big_signed(&a);
                    row[step.round - 1] = b.to_biguint().ok_or(Error::NegativeExponent)?;
                    acc = a;
                }
            }
        }
        row[0] = acc;
        rows.push((row, c.clone()));
    }
    rows_to_poly(h_x.ring(), plan.nvars, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, parse_unipoly};
    use crate::reduce::iks_reduce;
    use crate::ring::RingSpec;
    use crate::unimul::mul_sparse;

    const ZZ: RingSpec = RingSpec::Integers;

    fn ex1() -> (MultiPoly, MultiPoly) {
        (parse_poly("x1^7*x2^7*x3^7 + x1*x2^7*x3^17", 3, ZZ).unwrap(), parse_poly("x2^3*x3^34 + x1^8*x2^8*x3^8", 3, ZZ).unwrap())
    }

    #[test]
    fn example_estimate() {
        let (f, g) = ex1();
        let est = d_crt_estimate(&f, &g, 1, 2).unwrap();
        assert_eq!(est.m_f, BigInt::zero());
        assert_eq!(est.m_g, BigInt::zero());
        assert_eq!(est.p, BigUint::from(17u32));
        assert_eq!(est.estimate, BigInt::from(153));
        assert!(est.estimate < BigInt::from(15 * 15));
        assert_eq!(f.max_diff(1, 2).unwrap() + g.max_diff(1, 2).unwrap(), 9);
    }

    #[test]
    fn diagonal_terms_estimate_zero() {
        let f = parse_poly("x1^3*x2^3 + x1*x2 + 5", 2, ZZ).unwrap();
        let g = parse_poly("x1^4*x2^4 + x1^2*x2^2", 2, ZZ).unwrap();
        assert_eq!(d_crt_estimate(&f, &g, 1, 2).unwrap().estimate, BigInt::zero());
        let out = hybrid_reduce(&f, &g).unwrap();
        let Plan::Hybrid(plan) = &out.plan else { panic!() };
        assert_eq!(plan.crt_rounds(), vec![2]);
        // x_1 degree unchanged: every term maps to x^a
        assert_eq!(out.f_x.degree(), Some(&BigUint::from(3u32)));
        assert_eq!(out.g_x.degree(), Some(&BigUint::from(4u32)));
    }

    #[test]
    fn example_first_round_takes_crt() {
        let (f, g) = ex1();
        let f2 = parse_poly("x1^7*x2^7*x3^7 + x1*x2^7*x3^17", 3, ZZ).unwrap();
        let out = hybrid_reduce(&f, &g).unwrap();
        let Plan::Hybrid(plan) = &out.plan else { panic!() };
        assert_eq!(plan.steps[0].branch, HybridBranch::Crt { p: BigUint::from(17u32), m_f: BigInt::zero(), m_g: BigInt::zero() });
        // after round 2, f = x^7 x3^7 + x^103 x3^17 and g = x^51 x3^34 + x^8 x3^8
        let mut wf = Work::from_poly(&f2);
        let mut wg = Work::from_poly(&g);
        let mut ops = OpCounts::default();
        crt_step(&mut wf, 1, &BigUint::from(17u32), &BigInt::zero(), &mut ops);
        crt_step(&mut wg, 1, &BigUint::from(17u32), &BigInt::zero(), &mut ops);
        let mut rf: Vec<(u32, u32)> = wf.rows.iter().map(|r| (u32::try_from(&r[0]).unwrap(), u32::try_from(&r[2]).unwrap())).collect();
        let mut rg: Vec<(u32, u32)> = wg.rows.iter().map(|r| (u32::try_from(&r[0]).unwrap(), u32::try_from(&r[2]).unwrap())).collect();
        rf.sort();
        rg.sort();
        assert_eq!(rf, vec![(7, 7), (103, 17)]);
        assert_eq!(rg, vec![(8, 8), (51, 34)]);
        // round 3 falls back to the Kronecker branch with D = 155
        assert_eq!(plan.steps[1].branch, HybridBranch::Iks { d: BigUint::from(155u32) });
        assert_eq!(out.d_hx(), BigUint::from(8059u32));
    }

    #[test]
    fn example_round_trip() {
        let (f, g) = ex1();
        let out = hybrid_reduce(&f, &g).unwrap();
        let h = mul_sparse(&out.f_x, &out.g_x).unwrap();
        assert_eq!(out.plan.recover(&h).unwrap(), f.mul_direct(&g).unwrap());
    }

    #[test]
    fn crt_step_recovery_traces() {
        let plan = HybridPlan {
            nvars: 2,
            steps: vec![HybridStep {
                round: 2,
                branch: HybridBranch::Crt { p: BigUint::from(17u32), m_f: BigInt::zero(), m_g: BigInt::zero() },
            }],
        };
        let h = hybrid_inverse(&parse_unipoly("x^58 + x^15", ZZ).unwrap(), &plan).unwrap();
        assert_eq!(h, parse_poly("x1^7*x2^10 + x1^15*x2^15", 2, ZZ).unwrap());
    }

    #[test]
    fn negative_recovered_exponent_is_reported() {
        let plan = HybridPlan {
            nvars: 2,
            steps: vec![HybridStep {
                round: 2,
                branch: HybridBranch::Crt { p: BigUint::from(17u32), m_f: BigInt::from(3), m_g: BigInt::from(2) },
            }],
        };
        // K = 20: a = 3, b = 1 - 5 + 3 < 0
        assert_eq!(hybrid_inverse(&parse_unipoly("x^20", ZZ).unwrap(), &plan), Err(Error::NegativeExponent));
    }

    #[test]
    fn negative_offsets_still_round_trip() {
        // every term has k_2 > k_1, so Max_f(2,1) < 0
        let f = parse_poly("x1*x2^5 + x2^4", 2, ZZ).unwrap();
        let g = parse_poly("x1^2*x2^9 + x2^3", 2, ZZ).unwrap();
        let est = d_crt_estimate(&f, &g, 1, 2).unwrap();
        assert_eq!(est.m_f, BigInt::from(-4));
        assert_eq!(est.m_g, BigInt::from(-3));
        assert!(!est.estimate.is_negative());
        let out = hybrid_reduce(&f, &g).unwrap();
        let h = mul_sparse(&out.f_x, &out.g_x).unwrap();
        assert_eq!(out.plan.recover(&h).unwrap(), f.mul_direct(&g).unwrap());
    }

    #[test]
    fn dense_input_matches_iks() {
        let f = parse_poly("x1^3*x2^2*x3 + x1^3 + x2^2 + x3^4 + 1", 3, ZZ).unwrap();
        let g = parse_poly("x1^2 + x2^3 + x3 + x1*x2*x3", 3, ZZ).unwrap();
        let hr = hybrid_reduce(&f, &g).unwrap();
        let Plan::Hybrid(plan) = &hr.plan else { panic!() };
        assert!(plan.all_iks());
        let ik = iks_reduce(&f, &g).unwrap();
        assert_eq!((hr.f_x, hr.g_x), (ik.f_x, ik.g_x));
    }

    #[test]
    fn estimate_argument_errors() {
        let (f, g) = ex1();
        assert!(matches!(d_crt_estimate(&f, &g, 1, 1), Err(Error::InvalidSequence(_))));
        assert_eq!(d_crt_estimate(&f, &g, 1, 4), Err(Error::IndexOutOfRange { index: 4, nvars: 3 }));
        assert_eq!(d_crt_estimate(&f, &MultiPoly::zero(ZZ, 3), 1, 2), Err(Error::EmptyPolynomial));
    }
}
