//! Brute-force structure counts on explicit label sets.
//!
//! Every count here comes from walking actual structures (subsets, set
//! partitions, permutations, label pairs) and never from a generating
//! series, so the two can certify each other.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{gs, EGFSeries};
use crate::species::SpeciesPoly;

/// Largest label set the enumerator accepts.
pub const ENUMERATION_LIMIT: usize = 9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConcreteExpr {
    One,
    X,
    /// All sets.
    E,
    /// Sets of exactly `k` elements.
    Ek(usize),
    /// Cyclic orders on exactly `k` elements.
    Ck(usize),
    /// All cyclic orders.
    Cycles,
    L,
    Graphs,
    Sum(Box<ConcreteExpr>, Box<ConcreteExpr>),
    Product(Box<ConcreteExpr>, Box<ConcreteExpr>),
    Derivative(Box<ConcreteExpr>),
    /// Partitional composition `F∘G`.
    Compose(Box<ConcreteExpr>, Box<ConcreteExpr>),
}

impl ConcreteExpr {
    pub fn sum(a: ConcreteExpr, b: ConcreteExpr) -> Self {
        ConcreteExpr::Sum(Box::new(a), Box::new(b))
    }

    pub fn product(a: ConcreteExpr, b: ConcreteExpr) -> Self {
        ConcreteExpr::Product(Box::new(a), Box::new(b))
    }

    pub fn derivative(a: ConcreteExpr) -> Self {
        ConcreteExpr::Derivative(Box::new(a))
    }

    pub fn compose(outer: ConcreteExpr, inner: ConcreteExpr) -> Self {
        ConcreteExpr::Compose(Box::new(outer), Box::new(inner))
    }

    /// `X^k` as an iterated product; `X^0 = 1`.
    pub fn x_pow(k: usize) -> Self {
        (1..k).fold(if k == 0 { ConcreteExpr::One } else { ConcreteExpr::X }, |acc, _| {
            ConcreteExpr::product(acc, ConcreteExpr::X)
        })
    }

    fn derivative_depth(&self) -> usize {
        match self {
            ConcreteExpr::Sum(a, b) | ConcreteExpr::Product(a, b) | ConcreteExpr::Compose(a, b) => {
                a.derivative_depth().max(b.derivative_depth())
            }
            ConcreteExpr::Derivative(a) => 1 + a.derivative_depth(),
            _ => 0,
        }
    }

    /// Parses `1`, `X`, `E`, `E<k>`, `C<k>`, `C`/`Cyc`, `L`, `G`/`Graphs`,
    /// with `+`, `*`, `^k`, `D(F)`, `comp(F,G)` and parentheses.
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = ExprParser { src, pos: 0 };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos < src.len() {
            return Err(p.error("unexpected input"));
        }
        Ok(e)
    }
}

impl fmt::Display for ConcreteExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConcreteExpr::One => write!(f, "1"),
            ConcreteExpr::X => write!(f, "X"),
            ConcreteExpr::E => write!(f, "E"),
            ConcreteExpr::Ek(k) => write!(f, "E{k}"),
            ConcreteExpr::Ck(k) => write!(f, "C{k}"),
            ConcreteExpr::Cycles => write!(f, "C"),
            ConcreteExpr::L => write!(f, "L"),
            ConcreteExpr::Graphs => write!(f, "Graphs"),
            ConcreteExpr::Sum(a, b) => match **b {
                ConcreteExpr::Sum(..) => write!(f, "{a} + ({b})"),
                _ => write!(f, "{a} + {b}"),
            },
            ConcreteExpr::Product(a, b) => {
                let left = match **a {
                    ConcreteExpr::Sum(..) => format!("({a})"),
                    _ => a.to_string(),
                };
                match **b {
                    ConcreteExpr::Sum(..) | ConcreteExpr::Product(..) => write!(f, "{left}*({b})"),
                    _ => write!(f, "{left}*{b}"),
                }
            }
            ConcreteExpr::Derivative(a) => write!(f, "D({a})"),
            ConcreteExpr::Compose(a, b) => write!(f, "comp({a}, {b})"),
        }
    }
}

struct ExprParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> ExprParser<'a> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax { position: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws();
        let len = self.rest().find(|c: char| !c.is_ascii_digit()).unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.error("expected a number"));
        }
        let n = self.rest()[..len].parse().map_err(|_| self.error("number too large"))?;
        self.pos += len;
        Ok(n)
    }

    fn sum(&mut self) -> Result<ConcreteExpr> {
        let mut e = self.product()?;
        while self.eat('+') {
            e = ConcreteExpr::sum(e, self.product()?);
        }
        Ok(e)
    }

    fn product(&mut self) -> Result<ConcreteExpr> {
        let mut e = self.power()?;
        while self.eat('*') {
            e = ConcreteExpr::product(e, self.power()?);
        }
        Ok(e)
    }

    fn power(&mut self) -> Result<ConcreteExpr> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let k = self.number()?;
        if k == 0 {
            return Ok(ConcreteExpr::One);
        }
        Ok((1..k).fold(base.clone(), |acc, _| ConcreteExpr::product(acc, base.clone())))
    }

    fn atom(&mut self) -> Result<ConcreteExpr> {
        self.skip_ws();
        if self.eat('(') {
            let e = self.sum()?;
            self.expect(')')?;
            return Ok(e);
        }
        if self.rest().starts_with(|c: char| c.is_ascii_digit()) {
            let start = self.pos;
            return match self.number()? {
                1 => Ok(ConcreteExpr::One),
                _ => Err(Error::Syntax { position: start, message: "only the constant 1 is a species here".into() }),
            };
        }
        let start = self.pos;
        let len = self.rest().find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(self.rest().len());
        let word = &self.rest()[..len];
        self.pos += len;
        let indexed = |p: &mut Self| -> Result<Option<usize>> {
            if p.rest().starts_with(|c: char| c.is_ascii_digit()) {
                let k = p.number()?;
                if k == 0 {
                    return Err(Error::Syntax { position: start, message: "index must be positive".into() });
                }
                Ok(Some(k))
            } else {
                Ok(None)
            }
        };
        match word {
            "X" => Ok(ConcreteExpr::X),
            "L" => Ok(ConcreteExpr::L),
            "G" | "Graphs" => Ok(ConcreteExpr::Graphs),
            "Cyc" => Ok(ConcreteExpr::Cycles),
            "E" => Ok(indexed(self)?.map_or(ConcreteExpr::E, ConcreteExpr::Ek)),
            "C" => Ok(indexed(self)?.map_or(ConcreteExpr::Cycles, ConcreteExpr::Ck)),
            "D" => {
                self.expect('(')?;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(ConcreteExpr::derivative(e))
            }
            "comp" => {
                self.expect('(')?;
                let a = self.sum()?;
                self.expect(',')?;
                let b = self.sum()?;
                self.expect(')')?;
                Ok(ConcreteExpr::compose(a, b))
            }
            "" => Err(self.error("expected a species")),
            other => Err(Error::UnknownIdentifier(other.to_string())),
        }
    }
}

fn guard(n: usize) -> Result<()> {
    if n > ENUMERATION_LIMIT {
        Err(Error::ResourceLimit(format!(
            "enumeration on {n} labels exceeds the limit of {ENUMERATION_LIMIT}"
        )))
    } else {
        Ok(())
    }
}

/// Visits every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            visit(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn is_single_cycle(perm: &[usize]) -> bool {
    if perm.is_empty() {
        return false;
    }
    let (mut j, mut len) = (perm[0], 1);
    while j != 0 {
        j = perm[j];
        len += 1;
    }
    len == perm.len()
}

/// Visits every set partition of `0..n` as a restricted growth string.
fn for_each_partition(n: usize, mut visit: impl FnMut(&[usize], usize)) {
    if n == 0 {
        visit(&[], 0);
        return;
    }
    let mut rgs = vec![0usize; n];
    // max[i] = largest block index among rgs[..i]
    let mut max = vec![0usize; n];
    loop {
        visit(&rgs, max[n - 1].max(rgs[n - 1]) + 1);
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            if rgs[i] <= max[i] {
                rgs[i] += 1;
                break;
            }
            rgs[i] = 0;
            i -= 1;
        }
        for j in i + 1..n {
            rgs[j] = 0;
            max[j] = max[j - 1].max(rgs[j - 1]);
        }
    }
}

/// `|F[m]|` for every `m ≤ n`.
fn enumerate_all(expr: &ConcreteExpr, n: usize) -> Result<Vec<BigInt>> {
    let upto = 0..=n;
    Ok(match expr {
        ConcreteExpr::One => upto.map(|m| BigInt::from((m == 0) as u8)).collect(),
        ConcreteExpr::X => upto.map(|m| BigInt::from((m == 1) as u8)).collect(),
        // One set structure: the label set itself.
        ConcreteExpr::E => upto.map(|_| BigInt::one()).collect(),
        ConcreteExpr::Ek(k) => upto.map(|m| BigInt::from((m == *k) as u8)).collect(),
        ConcreteExpr::L => upto
            .map(|m| {
                let mut count = 0u64;
                for_each_permutation(m, |_| count += 1);
                BigInt::from(count)
            })
            .collect(),
        ConcreteExpr::Ck(_) | ConcreteExpr::Cycles => upto
            .map(|m| {
                if let ConcreteExpr::Ck(k) = expr {
                    if m != *k {
                        return BigInt::zero();
                    }
                }
                let mut count = 0u64;
                for_each_permutation(m, |p| count += is_single_cycle(p) as u64);
                BigInt::from(count)
            })
            .collect(),
        ConcreteExpr::Graphs => upto
            .map(|m| {
                let mut pairs = 0u32;
                for i in 0..m {
                    for _ in i + 1..m {
                        pairs += 1;
                    }
                }
                // every subset of the possible edges is a graph
                BigInt::one() << pairs
            })
            .collect(),
        ConcreteExpr::Sum(a, b) => {
            let (fa, fb) = (enumerate_all(a, n)?, enumerate_all(b, n)?);
            fa.into_iter().zip(fb).map(|(x, y)| x + y).collect()
        }
        ConcreteExpr::Product(a, b) => {
            let (fa, fb) = (enumerate_all(a, n)?, enumerate_all(b, n)?);
            upto.map(|m| {
                (0u32..1 << m)
                    .map(|subset| {
                        let k = subset.count_ones() as usize;
                        &fa[k] * &fb[m - k]
                    })
                    .sum()
            })
            .collect()
        }
        ConcreteExpr::Derivative(a) => enumerate_all(a, n + 1)?.into_iter().skip(1).collect(),
        ConcreteExpr::Compose(a, b) => {
            let (fa, fb) = (enumerate_all(a, n)?, enumerate_all(b, n)?);
            if !fb[0].is_zero() {
                return Err(Error::Domain(format!("inner species {b} has structures on the empty set")));
            }
            upto.map(|m| {
                let mut total = BigInt::zero();
                for_each_partition(m, |rgs, blocks| {
                    let mut sizes = vec![0usize; blocks];
                    for &b in rgs {
                        sizes[b] += 1;
                    }
                    let inner: BigInt = sizes.iter().map(|&s| &fb[s]).product();
                    total += &fa[blocks] * inner;
                });
                total
            })
            .collect()
        }
    })
}

/// `|F[n]|` by explicit enumeration.
pub fn enumerate_count(expr: &ConcreteExpr, n: usize) -> Result<BigInt> {
    guard(n)?;
    Ok(enumerate_all(expr, n)?.swap_remove(n))
}

fn species_of(expr: &ConcreteExpr, trunc: usize) -> Option<SpeciesPoly> {
    Some(match expr {
        ConcreteExpr::One => SpeciesPoly::one(trunc),
        ConcreteExpr::X => SpeciesPoly::x(trunc),
        ConcreteExpr::E => SpeciesPoly::combinatorial_exp(trunc),
        ConcreteExpr::Ek(k) => SpeciesPoly::set_species(trunc, *k),
        ConcreteExpr::Ck(k) => SpeciesPoly::cycle_species(trunc, *k),
        ConcreteExpr::Cycles => SpeciesPoly::cycles(trunc),
        ConcreteExpr::L => SpeciesPoly::linear_orders(trunc),
        ConcreteExpr::Sum(a, b) => species_of(a, trunc)? + species_of(b, trunc)?,
        ConcreteExpr::Product(a, b) => species_of(a, trunc)? * species_of(b, trunc)?,
        ConcreteExpr::Derivative(a) => species_of(a, trunc)?.derive(),
        ConcreteExpr::Graphs | ConcreteExpr::Compose(..) => return None,
    })
}

fn series_of(expr: &ConcreteExpr, trunc: usize) -> Result<EGFSeries> {
    if let Some(p) = species_of(expr, trunc) {
        return Ok(gs(&p));
    }
    match expr {
        ConcreteExpr::Graphs => {
            let counts: Vec<BigInt> = (0..=trunc).map(|n| BigInt::one() << (n * n.saturating_sub(1) / 2)).collect();
            Ok(EGFSeries::from_counts(trunc, trunc + 1, &counts))
        }
        ConcreteExpr::Sum(a, b) => series_of(a, trunc)?.add(&series_of(b, trunc)?),
        ConcreteExpr::Product(a, b) => series_of(a, trunc)?.mul(&series_of(b, trunc)?),
        ConcreteExpr::Derivative(a) => Ok(series_of(a, trunc)?.derive()),
        ConcreteExpr::Compose(a, b) => series_of(a, trunc)?.compose(&series_of(b, trunc)?),
        _ => unreachable!("species_of covers the remaining primitives"),
    }
}

/// `n!·[x^n]` of the generating series built through the algebraic pipeline.
pub fn series_count(expr: &ConcreteExpr, n: usize) -> Result<BigInt> {
    let s = series_of(expr, n + expr.derivative_depth())?;
    if n >= s.precision() {
        return Err(Error::WindowExceeded { degree: n, precision: s.precision() });
    }
    s.count(n).ok_or_else(|| Error::Invariant(format!("non-integral count for {expr} at {n}")))
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub expr: String,
    pub n: usize,
    #[serde(serialize_with = "as_decimal")]
    pub enumerated: BigInt,
    #[serde(serialize_with = "as_decimal")]
    pub series_count: BigInt,
    #[serde(rename = "match")]
    pub matches: bool,
}

fn as_decimal<S: serde::Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub expr: String,
    pub upto: usize,
    pub pass: bool,
    pub first_mismatch: Option<usize>,
    pub rows: Vec<OracleRow>,
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            let mark = if r.matches { "ok" } else { "MISMATCH" };
            writeln!(f, "n={} enumerated={} series={} {mark}", r.n, r.enumerated, r.series_count)?;
        }
        match self.first_mismatch {
            None => write!(f, "{}: pass through n = {}", self.expr, self.upto),
            Some(n) => write!(f, "{}: fail, first mismatch at n = {n}", self.expr),
        }
    }
}

/// Compares enumeration with the series pipeline for every `n ≤ upto`.
pub fn verify_counts(expr: &ConcreteExpr, upto: usize) -> Result<OracleReport> {
    guard(upto)?;
    let enumerated = enumerate_all(expr, upto)?;
    let series = series_of(expr, upto + expr.derivative_depth())?;
    let name = expr.to_string();
    let rows: Vec<OracleRow> = enumerated
        .into_iter()
        .enumerate()
        .map(|(n, e)| {
            let s = if n < series.precision() { series.count(n) } else { None };
            OracleRow {
                expr: name.clone(),
                n,
                matches: s.as_ref() == Some(&e),
                series_count: s.unwrap_or_else(|| BigInt::from(-1)),
                enumerated: e,
            }
        })
        .collect();
    let first_mismatch = rows.iter().find(|r| !r.matches).map(|r| r.n);
    Ok(OracleReport { expr: name, upto, pass: first_mismatch.is_none(), first_mismatch, rows })
}

/// `|F[p+q]| = |F[p]|·|F[q]|`, the count shadow of `F[U+V] ≅ F[U]×F[V]`.
pub fn check_product_split(expr: &ConcreteExpr, p: usize, q: usize) -> Result<bool> {
    guard(p + q)?;
    let counts = enumerate_all(expr, p + q)?;
    Ok(counts[p + q] == &counts[p] * &counts[q])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> ConcreteExpr {
        ConcreteExpr::parse(s).unwrap()
    }

    #[test]
    fn primitive_counts() {
        assert_eq!(enumerate_count(&ConcreteExpr::Cycles, 4).unwrap(), BigInt::from(6));
        assert_eq!(enumerate_count(&ConcreteExpr::Ck(4), 4).unwrap(), BigInt::from(6));
        assert_eq!(enumerate_count(&ConcreteExpr::Ck(3), 4).unwrap(), BigInt::zero());
        assert_eq!(enumerate_count(&ConcreteExpr::E, 7).unwrap(), BigInt::one());
        assert_eq!(enumerate_count(&ConcreteExpr::Graphs, 3).unwrap(), BigInt::from(8));
        assert_eq!(enumerate_count(&ConcreteExpr::L, 5).unwrap(), BigInt::from(120));
        assert!(matches!(enumerate_count(&ConcreteExpr::E, 10), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn partitions_are_bell_numbers() {
        let bell = [1u64, 1, 2, 5, 15, 52, 203, 877];
        for (n, &b) in bell.iter().enumerate() {
            let mut count = 0u64;
            for_each_partition(n, |_, _| count += 1);
            assert_eq!(count, b, "n = {n}");
        }
        let mut blocks = Vec::new();
        for_each_partition(3, |_, k| blocks.push(k));
        blocks.sort();
        assert_eq!(blocks, [1, 2, 2, 2, 3]);
    }

    #[test]
    fn composites() {
        let matchings = ConcreteExpr::compose(ConcreteExpr::E, ConcreteExpr::Ek(2));
        let counts: Vec<_> = (0..=6).map(|n| enumerate_count(&matchings, n).unwrap()).collect();
        let expected: Vec<BigInt> = [1, 0, 1, 0, 3, 0, 15].iter().map(|&c| BigInt::from(c)).collect();
        assert_eq!(counts, expected);
        assert!(verify_counts(&matchings, 6).unwrap().pass);
        assert!(verify_counts(&parse("E*E"), 6).unwrap().pass);
        assert!(verify_counts(&parse("D(C)"), 6).unwrap().pass);
        assert!(verify_counts(&parse("D(C) + L"), 6).unwrap().pass);
        assert!(verify_counts(&parse("comp(E, Graphs*X)"), 5).unwrap().pass);
        assert!(verify_counts(&parse("D(D(Graphs))*E3"), 5).unwrap().pass);
        assert!(matches!(verify_counts(&parse("comp(E, E)"), 3), Err(Error::Domain(_))));
    }

    #[test]
    fn product_split() {
        assert!(check_product_split(&ConcreteExpr::E, 3, 4).unwrap());
        assert!(check_product_split(&parse("E*E"), 2, 3).unwrap());
        assert!(!check_product_split(&ConcreteExpr::L, 1, 1).unwrap());
    }

    #[test]
    fn parsing() {
        assert_eq!(parse("X^3"), ConcreteExpr::x_pow(3));
        assert_eq!(parse("E2"), ConcreteExpr::Ek(2));
        assert_eq!(parse("C"), ConcreteExpr::Cycles);
        let e = parse("comp(E, E2) + D(C3)*L");
        assert_eq!(parse(&e.to_string()), e);
        assert!(matches!(ConcreteExpr::parse("E +"), Err(Error::Syntax { .. })));
        assert!(matches!(ConcreteExpr::parse("Q"), Err(Error::UnknownIdentifier(_))));
    }
}
