//! Iterative Kronecker substitution.
//!
//! One variable is eliminated per round by substituting `x_i -> x_j^D`, where
//! `D` is one more than the current degree of `f*g` in `x_j`. The default
//! sequence sends every variable to `x_1` in order (`x_2 -> x_1`, ...,
//! `x_n -> x_1`); arbitrary sequences are supported so the straight-pattern
//! optimality of that choice can be checked by exhaustive search.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{
    check_pair, product_degrees, rows_to_poly, small_rows_to_poly, small_terms, DegreeBounds, OpCounts, Plan, ReductionOutcome, Work,
};
use crate::error::{Error, Result};
use crate::poly::{MultiPoly, UniPoly};

/// `x_from -> x_to` (1-based variable indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    pub from: usize,
    pub to: usize,
}

impl Substitution {
    pub fn new(from: usize, to: usize) -> Self {
        Substitution { from, to }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}->x{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceStep {
    pub sub: Substitution,
    pub exponent: BigUint,
}

/// Substitution steps recorded by [`apply_sequence`], in application order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequencePlan {
    pub nvars: usize,
    pub steps: Vec<SequenceStep>,
}

impl SequencePlan {
    /// The variable that survives all substitutions (1-based).
    pub fn target(&self) -> usize {
        self.steps.last().map_or(1, |s| s.sub.to)
    }

    fn forward(&self, k: &[u64]) -> (BigUint, bool) {
        let mut slots: Vec<BigUint> = k.iter().map(|&v| BigUint::from(v)).collect();
        let mut carry_free = true;
        for step in &self.steps {
            let (i, j) = (step.sub.from - 1, step.sub.to - 1);
            if slots[j] >= step.exponent {
                carry_free = false;
            }
            let moved = std::mem::take(&mut slots[i]);
            slots[j] += moved * &step.exponent;
        }
        (std::mem::take(&mut slots[self.target() - 1]), carry_free)
    }

    pub fn image(&self, k: &[u64]) -> BigUint {
        self.forward(k).0
    }

    pub fn admits(&self, k: &[u64]) -> bool {
        self.forward(k).1
    }
}

/// Exponents `D_1 = 1, D_2, ..., D_n` of the default straight sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IksPlan {
    pub exponents: Vec<BigUint>,
}

impl IksPlan {
    pub fn to_sequence(&self) -> SequencePlan {
        SequencePlan {
            nvars: self.exponents.len(),
            steps: self
                .exponents
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, d)| SequenceStep { sub: Substitution::new(i + 1, 1), exponent: d.clone() })
                .collect(),
        }
    }
}

pub(super) fn validate(nvars: usize, seq: &[Substitution]) -> Result<()> {
    if seq.len() + 1 != nvars {
        return Err(Error::InvalidSequence(format!("expected {} substitutions, got {}", nvars - 1, seq.len())));
    }
    let mut gone = vec![false; nvars];
    for (k, s) in seq.iter().enumerate() {
        for v in [s.from, s.to] {
            if v == 0 || v > nvars {
                return Err(Error::InvalidSequence(format!("step {}: variable x{v} does not exist", k + 1)));
            }
            if gone[v - 1] {
                return Err(Error::InvalidSequence(format!("step {}: x{v} was already eliminated", k + 1)));
            }
        }
        if s.from == s.to {
            return Err(Error::InvalidSequence(format!("step {}: x{} substituted into itself", k + 1, s.from)));
        }
        gone[s.from - 1] = true;
    }
    Ok(())
}

fn run_sequence(f: &mut Work, g: &mut Work, seq: &[Substitution], ops: &mut OpCounts) -> Vec<SequenceStep> {
    let mut steps = Vec::with_capacity(seq.len());
    for s in seq {
        let (i, j) = (s.from - 1, s.to - 1);
        let d = f.deg(j) + g.deg(j) + 1u32;
        for w in [&mut *f, &mut *g] {
            for row in &mut w.rows {
                let moved = std::mem::take(&mut row[i]);
                if !moved.is_zero() {
                    row[j] += moved * &d;
                }
            }
            ops.mul += w.len() as u64;
            ops.add += w.len() as u64;
        }
        steps.push(SequenceStep { sub: *s, exponent: d });
    }
    steps
}

/// Applies an arbitrary substitution sequence. Each step's exponent is
/// `deg_{x_to} f + deg_{x_to} g + 1` on the current polynomials.
pub fn apply_sequence(f: &MultiPoly, g: &MultiPoly, seq: &[Substitution]) -> Result<ReductionOutcome> {
    check_pair(f, g)?;
    validate(f.nvars(), seq)?;
    let mut wf = Work::from_poly(f);
    let mut wg = Work::from_poly(g);
    let mut ops = OpCounts::default();
    let steps = run_sequence(&mut wf, &mut wg, seq, &mut ops);
    let plan = SequencePlan { nvars: f.nvars(), steps };
    let t = plan.target() - 1;
    Ok(ReductionOutcome { f_x: wf.into_uni(t), g_x: wg.into_uni(t), plan: Plan::Sequence(plan), ops })
}

/// The default straight sequence `x_2 -> x_1, ..., x_n -> x_1`.
pub fn iks_reduce(f: &MultiPoly, g: &MultiPoly) -> Result<ReductionOutcome> {
    let seq: Vec<_> = (2..=f.nvars()).map(|i| Substitution::new(i, 1)).collect();
    let out = apply_sequence(f, g, &seq)?;
    let Plan::Sequence(sp) = out.plan else { unreachable!() };
    let exponents = std::iter::once(BigUint::one()).chain(sp.steps.into_iter().map(|s| s.exponent)).collect();
    Ok(ReductionOutcome { plan: Plan::Iks(IksPlan { exponents }), ..out })
}

/// Undoes the substitutions last-to-first: `x_to^K -> x_to^(K mod D) x_from^(K div D)`.
pub fn sequence_inverse(h_x: &UniPoly, plan: &SequencePlan) -> Result<MultiPoly> {
    let t = plan.target() - 1;
    let small: Option<Vec<u64>> = plan.steps.iter().map(|s| u64::try_from(&s.exponent).ok()).collect();
    if let (Some(ds), Some(terms)) = (small, small_terms(h_x)) {
        let rows = terms
            .into_iter()
            .map(|(k, c)| {
                let mut row = vec![0u64; plan.nvars];
                row[t] = k;
                for (step, d) in plan.steps.iter().zip(&ds).rev() {
                    let v = row[step.sub.to - 1];
                    row[step.sub.to - 1] = v % d;
                    row[step.sub.from - 1] = v / d;
                }
                (row, c)
            })
            .collect();
        return small_rows_to_poly(h_x.ring(), plan.nvars, rows);
    }
    let rows = h_x
        .terms()
        .map(|(k, c)| {
            let mut row = vec![BigUint::zero(); plan.nvars];
            row[t] = k.clone();
            for step in plan.steps.iter().rev() {
                let (q, r) = row[step.sub.to - 1].div_rem(&step.exponent);
                row[step.sub.to - 1] = r;
                row[step.sub.from - 1] = q;
            }
            (row, c.clone())
        })
        .collect();
    rows_to_poly(h_x.ring(), plan.nvars, rows)
}

pub fn iks_inverse(h_x: &UniPoly, plan: &IksPlan) -> Result<MultiPoly> {
    sequence_inverse(h_x, &plan.to_sequence())
}

/// `prod d_{h_{x_i}} <= deg < prod (d_{h_{x_i}} + 1)`.
pub fn iks_bounds(f: &MultiPoly, g: &MultiPoly) -> Result<DegreeBounds> {
    check_pair(f, g)?;
    let d = product_degrees(f, g)?;
    let lower = d.iter().fold(BigUint::one(), |acc, x| acc * x);
    let upper = d.iter().fold(BigUint::one(), |acc, x| acc * (x + 1u32));
    Ok(DegreeBounds { lower, upper, upper_inclusive: false })
}

/// A sequence is straight-pattern when every step targets the same variable.
pub fn is_straight(seq: &[Substitution]) -> bool {
    seq.windows(2).all(|w| w[0].to == w[1].to)
}

/// Every valid substitution sequence on `n` variables, `n!(n-1)!` of them,
/// in lexicographic order.
pub fn all_sequences(n: usize) -> Vec<Vec<Substitution>> {
    fn rec(alive: &mut Vec<usize>, prefix: &mut Vec<Substitution>, out: &mut Vec<Vec<Substitution>>) {
        if alive.len() <= 1 {
            out.push(prefix.clone());
            return;
        }
        for a in 0..alive.len() {
            for b in 0..alive.len() {
                if a == b {
                    continue;
                }
                let (i, j) = (alive[a], alive[b]);
                prefix.push(Substitution::new(i, j));
                alive.remove(a);
                rec(alive, prefix, out);
                alive.insert(a, i);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut (1..=n).collect(), &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalSequence {
    /// Lexicographically least minimizing sequence.
    pub sequence: Vec<Substitution>,
    pub d_hx: BigUint,
    /// Lexicographically least straight-pattern minimizer, if any.
    pub straight_minimizer: Option<Vec<Substitution>>,
    pub evaluated: usize,
}

/// Exhaustive search over all substitution sequences for the smallest
/// `deg f_x + deg g_x`.
pub fn find_optimal_sequence(f: &MultiPoly, g: &MultiPoly, max_n: usize) -> Result<OptimalSequence> {
    check_pair(f, g)?;
    let n = f.nvars();
    if n > max_n {
        return Err(Error::TooManyVariables { nvars: n, max: max_n });
    }
    let wf = Work::from_poly(f);
    let wg = Work::from_poly(g);
    let seqs = all_sequences(n);
    let degrees: Vec<BigUint> = seqs
        .par_iter()
        .map(|seq| {
            let (mut a, mut b) = (wf.clone(), wg.clone());
            let steps = run_sequence(&mut a, &mut b, seq, &mut OpCounts::default());
            let t = steps.last().map_or(0, |s| s.sub.to - 1);
            a.deg(t) + b.deg(t)
        })
        .collect();
    let best = degrees.iter().min().unwrap().clone();
    let argmin = degrees.iter().position(|d| *d == best).unwrap();
    let straight_minimizer = seqs.iter().zip(&degrees).find(|(s, d)| **d == best && is_straight(s)).map(|(s, _)| s.clone());
    Ok(OptimalSequence { sequence: seqs[argmin].clone(), d_hx: best, straight_minimizer, evaluated: seqs.len() })
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

    fn ex1_product() -> MultiPoly {
        parse_poly("x1^7*x2^10*x3^41 + x1^15*x2^15*x3^15 + x1*x2^10*x3^51 + x1^9*x2^15*x3^25", 3, ZZ).unwrap()
    }

    #[test]
    fn example_exponents_and_images() {
        let (f, g) = ex1();
        let out = iks_reduce(&f, &g).unwrap();
        let Plan::Iks(plan) = &out.plan else { panic!() };
        let want: Vec<BigUint> = [1u32, 16, 256].map(BigUint::from).to_vec();
        assert_eq!(plan.exponents, want);
        assert_eq!(out.f_x, parse_unipoly("x^1911 + x^4465", ZZ).unwrap());
        assert_eq!(out.g_x, parse_unipoly("x^8752 + x^2184", ZZ).unwrap());
        assert_eq!(out.d_hx(), BigUint::from(13217u32));
    }

    #[test]
    fn example_recovery() {
        let plan = IksPlan { exponents: [1u32, 16, 256].map(BigUint::from).to_vec() };
        let h = parse_unipoly("x^10663 + x^4095 + x^13217 + x^6649", ZZ).unwrap();
        assert_eq!(iks_inverse(&h, &plan).unwrap(), ex1_product());
        // first undone step alone: x^13217 -> x^161 * x3^51
        let (q, r) = BigUint::from(13217u32).div_rem(&BigUint::from(256u32));
        assert_eq!((q, r), (BigUint::from(51u32), BigUint::from(161u32)));
        assert_eq!(iks_inverse(&parse_unipoly("1", ZZ).unwrap(), &plan).unwrap(), MultiPoly::one(ZZ, 3));
    }

    #[test]
    fn single_variable_is_untouched() {
        let f = parse_poly("x1^3 + 2", 1, ZZ).unwrap();
        let out = iks_reduce(&f, &f).unwrap();
        let Plan::Iks(plan) = &out.plan else { panic!() };
        assert_eq!(plan.exponents, vec![BigUint::one()]);
        assert_eq!(out.f_x, parse_unipoly("x^3 + 2", ZZ).unwrap());
    }

    #[test]
    fn straight_sequence_matches_iks() {
        let (f, g) = ex1();
        let seq = [Substitution::new(2, 1), Substitution::new(3, 1)];
        let a = apply_sequence(&f, &g, &seq).unwrap();
        let b = iks_reduce(&f, &g).unwrap();
        assert_eq!((a.f_x, a.g_x), (b.f_x, b.g_x));
    }

    #[test]
    fn sequence_validation() {
        let (f, g) = ex1();
        let bad = |s: &[Substitution]| matches!(apply_sequence(&f, &g, s), Err(Error::InvalidSequence(_)));
        assert!(bad(&[Substitution::new(2, 1)]));
        assert!(bad(&[Substitution::new(2, 1), Substitution::new(2, 3)]));
        assert!(bad(&[Substitution::new(2, 1), Substitution::new(3, 2)]));
        assert!(bad(&[Substitution::new(2, 2), Substitution::new(3, 1)]));
        assert!(bad(&[Substitution::new(4, 1), Substitution::new(3, 1)]));
    }

    #[test]
    fn sequence_count() {
        assert_eq!(all_sequences(1).len(), 1);
        assert_eq!(all_sequences(2).len(), 2);
        assert_eq!(all_sequences(3).len(), 12);
        assert_eq!(all_sequences(4).len(), 144);
        let s3 = all_sequences(3);
        assert!(s3.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn intermediate_sequences_round_trip_and_are_no_better() {
        let (f, g) = ex1();
        let h = f.mul_direct(&g).unwrap();
        let best = find_optimal_sequence(&f, &g, 4).unwrap();
        for seq in all_sequences(3) {
            let out = apply_sequence(&f, &g, &seq).unwrap();
            assert!(out.d_hx() >= best.d_hx);
            let hx = crate::unimul::mul_sparse(&out.f_x, &out.g_x).unwrap();
            assert_eq!(out.plan.recover(&hx).unwrap(), h, "{seq:?}");
        }
        let inter = [Substitution::new(1, 2), Substitution::new(2, 3)];
        assert!(apply_sequence(&f, &g, &inter).unwrap().d_hx() >= best.d_hx);
        assert!(best.straight_minimizer.is_some());
        assert_eq!(best.evaluated, 12);
    }

    #[test]
    fn search_limits() {
        let f = parse_poly("x1*x2*x3*x4*x5", 5, ZZ).unwrap();
        assert_eq!(find_optimal_sequence(&f, &f, 4), Err(Error::TooManyVariables { nvars: 5, max: 4 }));
        let f = parse_poly("x1*x2 + x2^3", 2, ZZ).unwrap();
        let best = find_optimal_sequence(&f, &f, 4).unwrap();
        assert_eq!(best.evaluated, 2);
    }

    #[test]
    fn map_is_not_injective_on_the_degree_box() {
        // (5,5,0) and (4,0,1) both land on 35, yet the product itself recovers
        let f = parse_poly("x1^5 + x2^5 + x3", 3, ZZ).unwrap();
        let g = MultiPoly::one(ZZ, 3);
        let out = iks_reduce(&f, &g).unwrap();
        let Plan::Iks(plan) = &out.plan else { panic!() };
        assert_eq!(plan.exponents, [1u32, 6, 31].map(BigUint::from).to_vec());
        assert_eq!(out.plan.product_image(&[5, 5, 0]), Some(BigUint::from(35u32)));
        assert_eq!(out.plan.product_image(&[4, 0, 1]), Some(BigUint::from(35u32)));
        assert!(out.plan.admits(&[4, 0, 1]) != out.plan.admits(&[5, 5, 0]));
        let hx = crate::unimul::mul_sparse(&out.f_x, &out.g_x).unwrap();
        assert_eq!(out.plan.recover(&hx).unwrap(), f);
    }

    #[test]
    fn bounds_of_example() {
        let (f, g) = ex1();
        let b = iks_bounds(&f, &g).unwrap();
        assert_eq!(b.lower, BigUint::from(11475u32));
        assert_eq!(b.upper, BigUint::from(13312u32));
        assert!(b.contains(&BigUint::from(13217u32)));
        let x = parse_poly("x1^2", 1, ZZ).unwrap();
        let b = iks_bounds(&x, &x).unwrap();
        assert_eq!((b.lower, b.upper), (BigUint::from(4u32), BigUint::from(5u32)));
    }
}
