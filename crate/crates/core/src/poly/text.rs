//! Text format for polynomials.
//!
//! ```text
//! poly   := ws term (ws ('+'|'-') ws term)* ws | '0'
//! term   := coeff ('*' factor)* | factor ('*' factor)*
//! factor := 'x' INDEX ('^' EXP)?
//! coeff  := INTEGER (optional leading '-')
//! ```
//!
//! Univariate polynomials use the bare variable `x` with no index. Canonical
//! output orders terms by descending exponent, writes `*` explicitly, and
//! omits `^1` and unit coefficients.

use std::fmt::{self, Write};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::{ExponentVector, MultiPoly, UniPoly};
use crate::ring::RingSpec;

#[derive(Clone, Copy)]
enum Vars {
    Indexed(usize),
    Bare,
}

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor { src: text.as_bytes(), pos: 0 }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { offset: self.pos, message: message.into() })
    }

    fn digits(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }
}

/// One parsed term: coefficient and exponents (one slot per variable; a
/// single unbounded slot in the univariate case).
struct RawTerm {
    coeff: BigInt,
    exps: Vec<BigUint>,
}

fn parse_terms(text: &str, vars: Vars) -> Result<Vec<RawTerm>> {
    let slots = match vars {
        Vars::Indexed(n) => n,
        Vars::Bare => 1,
    };
    let mut cur = Cursor::new(text);
    let mut out = Vec::new();
    cur.skip_ws();
    if cur.peek().is_none() {
        return cur.err("empty input");
    }
    let mut sign_negative = false;
    if cur.eat(b'-') {
        sign_negative = true;
        cur.skip_ws();
    } else if cur.eat(b'+') {
        cur.skip_ws();
    }
    loop {
        let mut term = parse_term(&mut cur, vars, slots)?;
        if sign_negative {
            term.coeff = -term.coeff;
        }
        out.push(term);
        cur.skip_ws();
        match cur.peek() {
            None => break,
            Some(b'+') => sign_negative = false,
            Some(b'-') => sign_negative = true,
            Some(_) => return cur.err("expected '+' or '-'"),
        }
        cur.pos += 1;
        cur.skip_ws();
    }
    Ok(out)
}

fn parse_term(cur: &mut Cursor<'_>, vars: Vars, slots: usize) -> Result<RawTerm> {
    let mut term = RawTerm { coeff: BigInt::one(), exps: vec![BigUint::zero(); slots] };
    let mut need_factor = true;
    let neg = matches!(cur.peek(), Some(b'-')) && matches!(cur.src.get(cur.pos + 1), Some(b) if b.is_ascii_digit());
    if neg || matches!(cur.peek(), Some(b) if b.is_ascii_digit()) {
        if neg {
            cur.pos += 1;
        }
        let digits = cur.digits().unwrap();
        let c: BigInt = digits.parse().unwrap();
        term.coeff = if neg { -c } else { c };
        need_factor = false;
    }
    loop {
        if need_factor {
            parse_factor(cur, vars, &mut term.exps)?;
        }
        cur.skip_ws();
        if cur.peek() == Some(b'*') {
            cur.pos += 1;
            cur.skip_ws();
            need_factor = true;
        } else {
            return Ok(term);
        }
    }
}

fn parse_factor(cur: &mut Cursor<'_>, vars: Vars, exps: &mut [BigUint]) -> Result<()> {
    let start = cur.pos;
    if !cur.eat(b'x') {
        return cur.err("expected a coefficient or variable");
    }
    let slot = match vars {
        Vars::Bare => {
            if matches!(cur.peek(), Some(b) if b.is_ascii_alphanumeric()) {
                let name_end = cur.src[cur.pos..].iter().position(|b| !b.is_ascii_alphanumeric()).map_or(cur.src.len(), |p| cur.pos + p);
                let name = String::from_utf8_lossy(&cur.src[start..name_end]).into_owned();
                return Err(Error::UnknownVariable { name, offset: start });
            }
            0
        }
        Vars::Indexed(n) => {
            let Some(idx) = cur.digits() else {
                return Err(Error::UnknownVariable { name: "x".into(), offset: start });
            };
            match idx.parse::<usize>() {
                Ok(i) if (1..=n).contains(&i) => i - 1,
                _ => return Err(Error::UnknownVariable { name: format!("x{idx}"), offset: start }),
            }
        }
    };
    cur.skip_ws();
    let e = if cur.eat(b'^') {
        cur.skip_ws();
        match cur.digits() {
            Some(d) => d.parse::<BigUint>().unwrap(),
            None => return cur.err("expected exponent after '^'"),
        }
    } else {
        BigUint::one()
    };
    exps[slot] += e;
    Ok(())
}

/// Parses a polynomial in `x1..x{nvars}` over `ring`. Exponents must fit a
/// machine word.
pub fn parse_poly(text: &str, nvars: usize, ring: RingSpec) -> Result<MultiPoly> {
    if nvars == 0 {
        return Err(Error::IndexOutOfRange { index: 0, nvars });
    }
    let raw = parse_terms(text, Vars::Indexed(nvars))?;
    let mut terms = Vec::with_capacity(raw.len());
    for t in raw {
        let exps = t.exps.iter().map(|e| u64::try_from(e).map_err(|_| Error::ExponentOverflow)).collect::<Result<Vec<u64>>>()?;
        terms.push((ExponentVector::new(exps), t.coeff));
    }
    MultiPoly::from_terms(ring, nvars, terms)
}

/// Parses a univariate polynomial in `x` with unbounded exponents.
pub fn parse_unipoly(text: &str, ring: RingSpec) -> Result<UniPoly> {
    let raw = parse_terms(text, Vars::Bare)?;
    Ok(UniPoly::from_terms(ring, raw.into_iter().map(|mut t| (t.exps.pop().unwrap(), t.coeff))))
}

fn write_terms<'a, I>(out: &mut String, terms: I) -> fmt::Result
where
    I: Iterator<Item = (String, &'a BigInt)>,
{
    let mut first = true;
    for (mono, c) in terms {
        let neg = c.is_negative();
        let abs = c.abs();
        if first {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        first = false;
        match (mono.is_empty(), abs.is_one()) {
            (true, _) => write!(out, "{abs}")?,
            (false, true) => out.push_str(&mono),
            (false, false) => write!(out, "{abs}*{mono}")?,
        }
    }
    if first {
        out.push('0');
    }
    Ok(())
}

fn multi_monomial(e: &ExponentVector) -> String {
    let mut s = String::new();
    for (i, &k) in e.as_slice().iter().enumerate() {
        if k == 0 {
            continue;
        }
        if !s.is_empty() {
            s.push('*');
        }
        let _ = write!(s, "x{}", i + 1);
        if k != 1 {
            let _ = write!(s, "^{k}");
        }
    }
    s
}

fn uni_monomial(e: &BigUint) -> String {
    if e.is_zero() {
        String::new()
    } else if e.is_one() {
        "x".to_string()
    } else {
        format!("x^{e}")
    }
}

/// Canonical text of a multivariate polynomial.
pub fn format_poly(p: &MultiPoly) -> String {
    let mut s = String::new();
    write_terms(&mut s, p.canonical_terms().map(|(e, c)| (multi_monomial(e), c))).unwrap();
    s
}

/// Canonical text of a univariate polynomial.
pub fn format_unipoly(p: &UniPoly) -> String {
    let mut s = String::new();
    write_terms(&mut s, p.terms().rev().map(|(e, c)| (uni_monomial(e), c))).unwrap();
    s
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_poly(self))
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_unipoly(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZZ: RingSpec = RingSpec::Integers;

    #[test]
    fn parses_example_polynomial() {
        let f = parse_poly("x1^7*x2^7*x3^7 + x1*x2^7*x3^17", 3, ZZ).unwrap();
        assert_eq!(f.num_terms(), 2);
        assert_eq!(f.coeff(&[7, 7, 7]), BigInt::one());
        assert_eq!(f.coeff(&[1, 7, 17]), BigInt::one());
        assert_eq!(format_poly(&f), "x1^7*x2^7*x3^7 + x1*x2^7*x3^17");
    }

    #[test]
    fn zero_and_merging() {
        assert!(parse_poly("0", 2, ZZ).unwrap().is_zero());
        assert_eq!(format_poly(&parse_poly("0", 2, ZZ).unwrap()), "0");
        let p = parse_poly("2*x1 - x1", 1, ZZ).unwrap();
        assert_eq!(p, parse_poly("x1", 1, ZZ).unwrap());
        assert_eq!(parse_poly("x1*x1", 1, ZZ).unwrap(), parse_poly("x1^2", 1, ZZ).unwrap());
    }

    #[test]
    fn whitespace_and_signs() {
        let p = parse_poly("  -3 * x1 ^ 2 +x2-  x1 + -4 ", 2, ZZ).unwrap();
        assert_eq!(format_poly(&p), "-3*x1^2 - x1 + x2 - 4");
        assert_eq!(parse_poly(&format_poly(&p), 2, ZZ).unwrap(), p);
    }

    #[test]
    fn field_coefficients_reduce() {
        let p = parse_poly("-1*x1 + 9", 1, RingSpec::PrimeField(7)).unwrap();
        assert_eq!(format_poly(&p), "6*x1 + 2");
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert_eq!(parse_poly("x1 + + x2", 2, ZZ), Err(Error::Syntax { offset: 5, message: "expected a coefficient or variable".into() }));
        assert!(matches!(parse_poly("x1 x2", 2, ZZ), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse_poly("x1^", 2, ZZ), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse_poly("", 2, ZZ), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse_poly("3*", 2, ZZ), Err(Error::Syntax { offset: 2, .. })));
    }

    #[test]
    fn unknown_variables_and_overflow() {
        assert_eq!(parse_poly("x3", 2, ZZ), Err(Error::UnknownVariable { name: "x3".into(), offset: 0 }));
        assert_eq!(parse_poly("1 + x0", 2, ZZ), Err(Error::UnknownVariable { name: "x0".into(), offset: 4 }));
        assert_eq!(parse_poly("x1^18446744073709551616", 1, ZZ), Err(Error::ExponentOverflow));
        assert!(parse_poly("x1^18446744073709551615", 1, ZZ).is_ok());
    }

    #[test]
    fn univariate_round_trip() {
        let p = parse_unipoly("x^1911 + x^4465", ZZ).unwrap();
        assert_eq!(format_unipoly(&p), "x^4465 + x^1911");
        let big = parse_unipoly("x^123456789012345678901234567890 - 2*x + 7", ZZ).unwrap();
        assert_eq!(parse_unipoly(&format_unipoly(&big), ZZ).unwrap(), big);
        assert!(matches!(parse_unipoly("x1", ZZ), Err(Error::UnknownVariable { .. })));
    }
}
