//! One-line text records for reduction plans.
//!
//! Fields are space separated `key=value` pairs in a fixed order: `method`,
//! `n`, then the method's parameters. Integer lists are comma separated
//! decimals.
//!
//! ```text
//! method=sks n=3 base=52
//! method=iks n=3 exponents=1,16,256
//! method=seq n=3 steps=2>1:16,3>1:256
//! method=crt n=3 bases=17,31,52 modulus=27404 cofactors=1612,884,527 inverses=11,2,15
//! method=hybrid n=3 steps=2:crt:17:0:0,3:iks:155
//! ```

use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::crt::CrtPlan;
use super::hybrid::{HybridBranch, HybridPlan, HybridStep};
use super::iks::{validate, IksPlan, SequencePlan, SequenceStep, Substitution};
use super::sks::SksPlan;
use super::Plan;
use crate::error::{Error, Result};

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

pub(super) fn to_record(plan: &Plan) -> String {
    let head = format!("method={} n={}", plan.method_name(), plan.nvars());
    let body = match plan {
        Plan::Sks(p) => format!("base={}", p.base),
        Plan::Iks(p) => format!("exponents={}", join(&p.exponents)),
        Plan::Sequence(p) => {
            let steps: Vec<String> = p.steps.iter().map(|s| format!("{}>{}:{}", s.sub.from, s.sub.to, s.exponent)).collect();
            format!("steps={}", steps.join(","))
        }
        Plan::Crt(p) => {
            format!("bases={} modulus={} cofactors={} inverses={}", join(&p.bases), p.modulus, join(&p.cofactors), join(&p.inverses))
        }
        Plan::Hybrid(p) => {
            let steps: Vec<String> = p
                .steps
                .iter()
                .map(|s| match &s.branch {
                    HybridBranch::Crt { p, m_f, m_g } => format!("{}:crt:{p}:{m_f}:{m_g}", s.round),
                    HybridBranch::Iks { d } => format!("{}:iks:{d}", s.round),
                })
                .collect();
            format!("steps={}", steps.join(","))
        }
    };
    format!("{head} {body}")
}

fn bad(msg: impl Into<String>) -> Error {
    Error::PlanFormat(msg.into())
}

fn num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| bad(format!("{what}: `{s}` is not an integer")))
}

fn list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| num(t, what)).collect()
}

fn positive(v: &BigUint, what: &str) -> Result<()> {
    if v.is_zero() {
        return Err(bad(format!("{what} must be positive")));
    }
    Ok(())
}

struct Fields<'a> {
    pairs: Vec<(&'a str, &'a str)>,
    pos: usize,
}

impl<'a> Fields<'a> {
    fn new(text: &'a str) -> Result<Self> {
        let pairs = text
            .split_whitespace()
            .map(|tok| tok.split_once('=').ok_or_else(|| bad(format!("`{tok}` is not a key=value pair"))))
            .collect::<Result<_>>()?;
        Ok(Fields { pairs, pos: 0 })
    }

    fn take(&mut self, key: &str) -> Result<&'a str> {
        match self.pairs.get(self.pos) {
            Some((k, v)) if *k == key => {
                self.pos += 1;
                Ok(v)
            }
            Some((k, _)) => Err(bad(format!("expected `{key}`, found `{k}`"))),
            None => Err(bad(format!("missing `{key}`"))),
        }
    }

    fn finish(&self) -> Result<()> {
        match self.pairs.get(self.pos) {
            Some((k, _)) => Err(bad(format!("unexpected field `{k}`"))),
            None => Ok(()),
        }
    }
}

pub(super) fn from_record(text: &str) -> Result<Plan> {
    let mut fields = Fields::new(text)?;
    let method = fields.take("method")?;
    let n: usize = num(fields.take("n")?, "n")?;
    if n == 0 {
        return Err(bad("n must be positive"));
    }
    let plan = match method {
        "sks" => {
            let base: BigUint = num(fields.take("base")?, "base")?;
            positive(&base, "base")?;
            Plan::Sks(SksPlan { base, nvars: n })
        }
        "iks" => {
            let exponents: Vec<BigUint> = list(fields.take("exponents")?, "exponents")?;
            if exponents.len() != n {
                return Err(bad(format!("expected {n} exponents, got {}", exponents.len())));
            }
            if !exponents[0].is_one() {
                return Err(bad("the first exponent must be 1"));
            }
            for d in &exponents {
                positive(d, "exponent")?;
            }
            Plan::Iks(IksPlan { exponents })
        }
        "seq" => {
            let raw = fields.take("steps")?;
            let mut steps = Vec::new();
            for item in raw.split(',').filter(|s| !s.is_empty()) {
                let (sub, d) = item.split_once(':').ok_or_else(|| bad(format!("step `{item}` lacks an exponent")))?;
                let (from, to) = sub.split_once('>').ok_or_else(|| bad(format!("step `{item}` is not from>to")))?;
                let exponent: BigUint = num(d, "exponent")?;
                positive(&exponent, "exponent")?;
                steps.push(SequenceStep { sub: Substitution::new(num(from, "from")?, num(to, "to")?), exponent });
            }
            let subs: Vec<Substitution> = steps.iter().map(|s| s.sub).collect();
            validate(n, &subs).map_err(|e| bad(e.to_string()))?;
            Plan::Sequence(SequencePlan { nvars: n, steps })
        }
        "crt" => {
            let bases: Vec<BigUint> = list(fields.take("bases")?, "bases")?;
            let modulus: BigUint = num(fields.take("modulus")?, "modulus")?;
            let cofactors: Vec<BigUint> = list(fields.take("cofactors")?, "cofactors")?;
            let inverses: Vec<BigUint> = list(fields.take("inverses")?, "inverses")?;
            if bases.len() != n {
                return Err(bad(format!("expected {n} bases, got {}", bases.len())));
            }
            let plan = CrtPlan::new(bases).map_err(|e| bad(e.to_string()))?;
            if plan.modulus != modulus || plan.cofactors != cofactors || plan.inverses != inverses {
                return Err(bad("modulus, cofactors or inverses disagree with the bases"));
            }
            Plan::Crt(plan)
        }
        "hybrid" => {
            let raw = fields.take("steps")?;
            let mut steps = Vec::new();
            for item in raw.split(',').filter(|s| !s.is_empty()) {
                let parts: Vec<&str> = item.split(':').collect();
                let round: usize = num(parts[0], "round")?;
                let branch = match parts[1..] {
                    ["crt", p, m_f, m_g] => {
                        let p: BigUint = num(p, "p")?;
                        positive(&p, "p")?;
                        HybridBranch::Crt { p, m_f: num::<BigInt>(m_f, "m_f")?, m_g: num::<BigInt>(m_g, "m_g")? }
                    }
                    ["iks", d] => {
                        let d: BigUint = num(d, "D")?;
                        positive(&d, "D")?;
                        HybridBranch::Iks { d }
                    }
                    _ => return Err(bad(format!("step `{item}` is neither crt nor iks"))),
                };
                steps.push(HybridStep { round, branch });
            }
            if steps.len() + 1 != n || steps.iter().enumerate().any(|(i, s)| s.round != i + 2) {
                return Err(bad(format!("hybrid steps must cover rounds 2..={n} in order")));
            }
            Plan::Hybrid(HybridPlan { nvars: n, steps })
        }
        other => return Err(bad(format!("unknown method `{other}`"))),
    };
    fields.finish()?;
    Ok(plan)
}
