//! The graded, truncated ring of rational virtual species.
//!
//! Elements are polynomials in the molecular generators `X`, `E_n` (n ≥ 2)
//! and `C_n` (n ≥ 3), graded by cardinality. Every polynomial carries a
//! truncation bound `N` (terms of degree > N are discarded) and a precision
//! `p ≤ N + 1`: coefficients of degree `< p` are exact, everything above is
//! unknown and is not stored. Infinite species such as `E` or `e^X` are
//! therefore represented by their degree-`N` jets.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rational::{format_rational, int, inverse_factorial, is_integer, rational_pow, Rational};

/// A molecular generator of the polynomial ring.
///
/// `E(1)` and `C(1)` never occur: both are `X`. `C(2)` is `E(2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    X,
    E(u16),
    C(u16),
}

impl Generator {
    /// `E_n` for `n ≥ 1`; `None` for `n = 0` (the unit, not a generator).
    pub fn set(n: usize) -> Option<Generator> {
        match n {
            0 => None,
            1 => Some(Generator::X),
            n => Some(Generator::E(n as u16)),
        }
    }

    /// `C_n` for `n ≥ 1`, normalizing `C_1 = X` and `C_2 = E_2`.
    pub fn cycle(n: usize) -> Option<Generator> {
        match n {
            0 => None,
            1 => Some(Generator::X),
            2 => Some(Generator::E(2)),
            n => Some(Generator::C(n as u16)),
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Generator::X => 1,
            Generator::E(n) | Generator::C(n) => n as usize,
        }
    }

    fn key(self) -> (u16, u8) {
        match self {
            Generator::X => (1, 0),
            Generator::E(n) => (n, 0),
            Generator::C(n) => (n, 1),
        }
    }

    /// The derivative of a generator is always a single monomial with
    /// coefficient one: `∂X = 1`, `∂E_n = E_{n-1}`, `∂C_n = X^{n-1}`.
    pub fn derivative(self) -> Monomial {
        match self {
            Generator::X => Monomial::one(),
            Generator::E(n) => Monomial::from_generator(Generator::set(n as usize - 1).unwrap()),
            Generator::C(n) => Monomial::from_generator(Generator::X).pow(n as usize - 1),
        }
    }
}

impl PartialOrd for Generator {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Generator {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::X => write!(f, "X"),
            Generator::E(n) => write!(f, "E{n}"),
            Generator::C(n) => write!(f, "C{n}"),
        }
    }
}

/// A product of generators, kept as a sorted multiset.
///
/// The derived order is the canonical printing order: by degree first,
/// then lexicographically on the sorted generator sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    degree: usize,
    factors: SmallVec<[Generator; 6]>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { degree: 0, factors: SmallVec::new() }
    }

    pub fn from_generator(g: Generator) -> Self {
        let mut factors = SmallVec::new();
        factors.push(g);
        Monomial { degree: g.degree(), factors }
    }

    pub fn from_factors(gens: impl IntoIterator<Item = Generator>) -> Self {
        let mut factors: SmallVec<[Generator; 6]> = gens.into_iter().collect();
        factors.sort();
        let degree = factors.iter().map(|g| g.degree()).sum();
        Monomial { degree, factors }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// `(generator, exponent)` pairs in canonical order.
    pub fn factors(&self) -> Vec<(Generator, u32)> {
        let mut out: Vec<(Generator, u32)> = Vec::new();
        for &g in &self.factors {
            match out.last_mut() {
                Some((h, e)) if *h == g => *e += 1,
                _ => out.push((g, 1)),
            }
        }
        out
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.factors, &other.factors);
        let mut factors = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                factors.push(a[i]);
                i += 1;
            } else {
                factors.push(b[j]);
                j += 1;
            }
        }
        factors.extend_from_slice(&a[i..]);
        factors.extend_from_slice(&b[j..]);
        Monomial { degree: self.degree + other.degree, factors }
    }

    pub fn pow(&self, k: usize) -> Monomial {
        let mut factors = SmallVec::with_capacity(self.factors.len() * k);
        for &g in &self.factors {
            for _ in 0..k {
                factors.push(g);
            }
        }
        Monomial { degree: self.degree * k, factors }
    }

    /// Leibniz rule on a single monomial.
    pub fn derivative(&self) -> Vec<(Monomial, u32)> {
        let grouped = self.factors();
        let mut out = Vec::with_capacity(grouped.len());
        for (idx, &(g, e)) in grouped.iter().enumerate() {
            let rest = grouped.iter().enumerate().flat_map(|(j, &(h, f))| {
                let keep = if j == idx { f - 1 } else { f };
                std::iter::repeat_n(h, keep as usize)
            });
            let m = Monomial::from_factors(rest).mul(&g.derivative());
            out.push((m, e));
        }
        out
    }

    /// Every monomial of exactly the given degree, in canonical order.
    pub fn all_of_degree(degree: usize) -> Vec<Monomial> {
        let gens: Vec<Generator> = (1..=degree)
            .flat_map(|n| {
                let mut v = vec![Generator::set(n).unwrap()];
                if n >= 3 {
                    v.push(Generator::C(n as u16));
                }
                v
            })
            .collect();
        let mut out = Vec::new();
        let mut stack = Vec::new();
        fill_monomials(&gens, 0, degree, &mut stack, &mut out);
        out.sort();
        out
    }
}

fn fill_monomials(
    gens: &[Generator],
    start: usize,
    remaining: usize,
    stack: &mut Vec<Generator>,
    out: &mut Vec<Monomial>,
) {
    if remaining == 0 {
        out.push(Monomial::from_factors(stack.iter().copied()));
        return;
    }
    for i in start..gens.len() {
        let d = gens[i].degree();
        if d > remaining {
            break;
        }
        stack.push(gens[i]);
        fill_monomials(gens, i, remaining - d, stack, out);
        stack.pop();
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors()
            .into_iter()
            .map(|(g, e)| if e == 1 { g.to_string() } else { format!("{g}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Smallest coefficient set containing every coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CoefficientDomain {
    Nat,
    Int,
    Rat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub domain: CoefficientDomain,
    pub is_diff_constant: bool,
    pub is_initialized: bool,
}

/// Element of the truncated ring of rational virtual species.
///
/// `PartialEq` is structural (same terms, bound and precision). Use
/// [`SpeciesPoly::eq_within`] for equality up to the common window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpeciesPoly {
    terms: BTreeMap<Monomial, Rational>,
    trunc: usize,
    prec: usize,
}

impl SpeciesPoly {
    /// Builds a polynomial, dropping zero coefficients and anything of degree
    /// at or above `prec`. `prec` is clamped to `trunc + 1`.
    pub fn from_terms(
        trunc: usize,
        prec: usize,
        terms: impl IntoIterator<Item = (Monomial, Rational)>,
    ) -> Self {
        let prec = prec.min(trunc + 1);
        let mut map: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (m, c) in terms {
            if m.degree() < prec {
                *map.entry(m).or_insert_with(Rational::zero) += c;
            }
        }
        map.retain(|_, c| !c.is_zero());
        SpeciesPoly { terms: map, trunc, prec }
    }

    /// An exact polynomial (full precision).
    pub fn exact(trunc: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        Self::from_terms(trunc, trunc + 1, terms)
    }

    pub fn zero(trunc: usize) -> Self {
        Self::exact(trunc, [])
    }

    pub fn one(trunc: usize) -> Self {
        Self::constant(trunc, Rational::one())
    }

    pub fn constant(trunc: usize, c: Rational) -> Self {
        Self::exact(trunc, [(Monomial::one(), c)])
    }

    pub fn generator(trunc: usize, g: Generator) -> Self {
        Self::exact(trunc, [(Monomial::from_generator(g), Rational::one())])
    }

    pub fn monomial(trunc: usize, m: Monomial, c: Rational) -> Self {
        Self::exact(trunc, [(m, c)])
    }

    pub fn x(trunc: usize) -> Self {
        Self::generator(trunc, Generator::X)
    }

    /// `E_n`, with `E_0 = 1` and `E_1 = X`.
    pub fn set_species(trunc: usize, n: usize) -> Self {
        match Generator::set(n) {
            Some(g) => Self::generator(trunc, g),
            None => Self::one(trunc),
        }
    }

    /// `C_n`, with `C_1 = X` and `C_2 = E_2`. `C_0` is zero.
    pub fn cycle_species(trunc: usize, n: usize) -> Self {
        match Generator::cycle(n) {
            Some(g) => Self::generator(trunc, g),
            None => Self::zero(trunc),
        }
    }

    /// The combinatorial exponential `E = Σ E_n`.
    pub fn combinatorial_exp(trunc: usize) -> Self {
        Self::exact(
            trunc,
            (0..=trunc).map(|n| (set_monomial(n), Rational::one())),
        )
    }

    /// The analytic exponential `e^{λX} = Σ λ^n X^n / n!`.
    pub fn analytic_exp(trunc: usize, lambda: &Rational) -> Self {
        Self::exact(
            trunc,
            (0..=trunc).map(|n| {
                (
                    Monomial::from_generator(Generator::X).pow(n),
                    rational_pow(lambda, n) * inverse_factorial(n),
                )
            }),
        )
    }

    /// Linear orders `L = Σ X^n`.
    pub fn linear_orders(trunc: usize) -> Self {
        Self::exact(
            trunc,
            (0..=trunc).map(|n| (Monomial::from_generator(Generator::X).pow(n), Rational::one())),
        )
    }

    /// Cyclic permutations `𝒞 = X + E_2 + C_3 + C_4 + …`.
    pub fn cycles(trunc: usize) -> Self {
        Self::exact(
            trunc,
            (1..=trunc).map(|n| {
                (Monomial::from_generator(Generator::cycle(n).unwrap()), Rational::one())
            }),
        )
    }

    /// `E_alt = E_1 - E_2 + E_3 - …`.
    pub fn alternating_sets(trunc: usize) -> Self {
        Self::exact(
            trunc,
            (1..=trunc).map(|n| {
                let sign = if n % 2 == 1 { 1 } else { -1 };
                (set_monomial(n), int(sign))
            }),
        )
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    /// Coefficients of degree below this bound are exact.
    pub fn precision(&self) -> usize {
        self.prec
    }

    /// Largest exact degree, or `None` if nothing is known.
    pub fn window(&self) -> Option<usize> {
        self.prec.checked_sub(1)
    }

    pub fn is_exact(&self) -> bool {
        self.prec == self.trunc + 1
    }

    /// Restricts to degrees below `prec` (never raises precision).
    pub fn with_precision(&self, prec: usize) -> Self {
        Self::from_terms(self.trunc, prec.min(self.prec), self.terms.clone())
    }

    /// Re-embeds at a different truncation bound. Raising the bound keeps the
    /// old precision, so nothing is claimed about the new degrees unless the
    /// caller knows the polynomial is finite (see [`SpeciesPoly::retruncate_exact`]).
    pub fn retruncate(&self, trunc: usize) -> Self {
        Self::from_terms(trunc, self.prec, self.terms.clone())
    }

    /// Re-embeds a finite polynomial, treating all absent terms as zero.
    pub fn retruncate_exact(&self, trunc: usize) -> Self {
        Self::exact(trunc, self.terms.clone())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one())
    }

    /// True when every known coefficient is zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn top_degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    /// Lowest degree that can be nonzero: the lowest stored degree, or the
    /// precision when every known coefficient vanishes.
    pub fn valuation(&self) -> usize {
        self.terms.keys().next().map(Monomial::degree).unwrap_or(self.prec)
    }

    fn check_trunc(&self, other: &Self) -> Result<()> {
        if self.trunc != other.trunc {
            Err(Error::TruncationMismatch { left: self.trunc, right: other.trunc })
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_trunc(other)?;
        Ok(self.add_unchecked(other, false))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_trunc(other)?;
        Ok(self.add_unchecked(other, true))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_trunc(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn add_unchecked(&self, other: &Self, negate: bool) -> Self {
        let prec = self.prec.min(other.prec);
        let mut terms: BTreeMap<Monomial, Rational> = self
            .terms
            .range(..)
            .take_while(|(m, _)| m.degree() < prec)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        for (m, c) in other.terms.iter().take_while(|(m, _)| m.degree() < prec) {
            let slot = terms.entry(m.clone()).or_insert_with(Rational::zero);
            if negate {
                *slot -= c;
            } else {
                *slot += c;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        SpeciesPoly { terms, trunc: self.trunc, prec }
    }

    /// Precision of a product: an unknown tail of `a` starting at degree
    /// `prec(a)` is multiplied by something of valuation at least `val(b)`.
    fn product_precision(&self, other: &Self) -> usize {
        (self.trunc + 1)
            .min(self.prec + other.valuation())
            .min(other.prec + self.valuation())
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let prec = self.product_precision(other);
        let mut terms: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            if ma.degree() >= prec {
                break;
            }
            for (mb, cb) in &other.terms {
                if ma.degree() + mb.degree() >= prec {
                    break;
                }
                let c = ca * cb;
                match terms.entry(ma.mul(mb)) {
                    std::collections::btree_map::Entry::Occupied(mut e) => *e.get_mut() += c,
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                }
            }
        }
        terms.retain(|_, c| !c.is_zero());
        SpeciesPoly { terms, trunc: self.trunc, prec }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::from_terms(self.trunc, self.prec, []);
        }
        SpeciesPoly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
            trunc: self.trunc,
            prec: self.prec,
        }
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut result = Self::one(self.trunc);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// The combinatorial derivation `∂`.
    pub fn derive(&self) -> Self {
        let prec = self.prec.saturating_sub(1);
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            for (dm, k) in m.derivative() {
                terms.push((dm, c * int(k as i64)));
            }
        }
        Self::from_terms(self.trunc, prec, terms)
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |acc, _| acc.derive())
    }

    /// Homogeneous component `Φ_n` of the canonical decomposition.
    pub fn graded_component(&self, n: usize) -> Result<Self> {
        if n >= self.prec {
            return Err(Error::WindowExceeded { degree: n, precision: self.prec });
        }
        Ok(self.component_unchecked(n))
    }

    pub(crate) fn component_unchecked(&self, n: usize) -> Self {
        Self::exact(
            self.trunc,
            self.terms
                .iter()
                .filter(|(m, _)| m.degree() == n)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Homogeneous components `Φ_0 … Φ_{prec-1}`.
    pub fn components(&self) -> Vec<SpeciesPoly> {
        (0..self.prec).map(|n| self.component_unchecked(n)).collect()
    }

    pub fn is_homogeneous_of_degree(&self, n: usize) -> bool {
        self.terms.keys().all(|m| m.degree() == n)
    }

    /// Equality of every coefficient below the common precision.
    pub fn eq_within(&self, other: &Self) -> bool {
        self.trunc == other.trunc && self.add_unchecked(other, true).is_zero()
    }

    /// Common precision of two polynomials.
    pub fn common_precision(&self, other: &Self) -> usize {
        self.prec.min(other.prec)
    }

    pub fn coefficient_domain(&self) -> CoefficientDomain {
        let mut domain = CoefficientDomain::Nat;
        for c in self.terms.values() {
            if !is_integer(c) {
                return CoefficientDomain::Rat;
            }
            if c.is_negative() {
                domain = CoefficientDomain::Int;
            }
        }
        domain
    }

    pub fn is_diff_constant(&self) -> bool {
        self.derive().is_zero()
    }

    pub fn is_initialized(&self) -> bool {
        self.prec >= 1 && self.constant_term().is_zero()
    }

    pub fn classify(&self) -> Classification {
        Classification {
            domain: self.coefficient_domain(),
            is_diff_constant: self.is_diff_constant(),
            is_initialized: self.is_initialized(),
        }
    }

    /// Multiplicative inverse of a unit by the graded recursion
    /// `ψ_n = -(1/φ_0) Σ_{k=1..n} φ_k ψ_{n-k}`.
    pub fn mult_inverse(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if self.prec == 0 || c0.is_zero() {
            return Err(Error::NotAUnit(self.to_string()));
        }
        let inv0 = c0.recip();
        let phi = self.components();
        let mut psi: Vec<SpeciesPoly> = vec![Self::constant(self.trunc, inv0.clone())];
        for n in 1..self.prec {
            let mut acc = Self::zero(self.trunc);
            for k in 1..=n {
                if !phi[k].is_zero() && !psi[n - k].is_zero() {
                    acc = &acc + &(&phi[k] * &psi[n - k]);
                }
            }
            psi.push(acc.scale(&-inv0.clone()));
        }
        let terms = psi.into_iter().flat_map(|p| p.terms.into_iter());
        Ok(Self::from_terms(self.trunc, self.prec, terms))
    }

    /// Random exact polynomial: 1 to 6 terms, each a monomial drawn by picking
    /// a degree uniformly in `0..=N` and then a monomial of that degree
    /// uniformly, with a nonzero coefficient in `-9..=9`.
    pub fn random<R: Rng + ?Sized>(trunc: usize, rng: &mut R) -> Self {
        let count = rng.gen_range(1..=6);
        let terms: Vec<(Monomial, Rational)> = (0..count)
            .map(|_| (random_monomial(trunc, rng), random_coefficient(rng)))
            .collect();
        Self::exact(trunc, terms)
    }
}

fn set_monomial(n: usize) -> Monomial {
    match Generator::set(n) {
        Some(g) => Monomial::from_generator(g),
        None => Monomial::one(),
    }
}

pub(crate) fn random_monomial<R: Rng + ?Sized>(trunc: usize, rng: &mut R) -> Monomial {
    let degree = rng.gen_range(0..=trunc);
    let all = Monomial::all_of_degree(degree);
    all[rng.gen_range(0..all.len())].clone()
}

pub(crate) fn random_coefficient<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    let mut c = 0i64;
    while c == 0 {
        c = rng.gen_range(-9..=9);
    }
    int(c)
}

impl fmt::Display for SpeciesPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            }
            if m.is_one() {
                write!(f, "{}", format_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", format_rational(&abs))?;
            }
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl std::ops::$trait<&SpeciesPoly> for &SpeciesPoly {
            type Output = SpeciesPoly;
            /// Panics on mismatched truncation bounds; use the `checked_*`
            /// methods when the bounds are not known to agree.
            fn $method(self, rhs: &SpeciesPoly) -> SpeciesPoly {
                assert_eq!(self.trunc, rhs.trunc, "truncation mismatch");
                $body(self, rhs)
            }
        }
        impl std::ops::$trait<SpeciesPoly> for SpeciesPoly {
            type Output = SpeciesPoly;
            fn $method(self, rhs: SpeciesPoly) -> SpeciesPoly {
                std::ops::$trait::$method(&self, &rhs)
            }
        }
        impl std::ops::$trait<&SpeciesPoly> for SpeciesPoly {
            type Output = SpeciesPoly;
            fn $method(self, rhs: &SpeciesPoly) -> SpeciesPoly {
                std::ops::$trait::$method(&self, rhs)
            }
        }
        impl std::ops::$trait<SpeciesPoly> for &SpeciesPoly {
            type Output = SpeciesPoly;
            fn $method(self, rhs: SpeciesPoly) -> SpeciesPoly {
                std::ops::$trait::$method(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &SpeciesPoly, b: &SpeciesPoly| a.add_unchecked(b, false));
forward_binop!(Sub, sub, |a: &SpeciesPoly, b: &SpeciesPoly| a.add_unchecked(b, true));
forward_binop!(Mul, mul, |a: &SpeciesPoly, b: &SpeciesPoly| a.mul_unchecked(b));

impl std::ops::Neg for &SpeciesPoly {
    type Output = SpeciesPoly;
    fn neg(self) -> SpeciesPoly {
        self.scale(&-Rational::one())
    }
}

impl std::ops::Neg for SpeciesPoly {
    type Output = SpeciesPoly;
    fn neg(self) -> SpeciesPoly {
        -&self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RingOp {
    Add,
    Sub,
    Mul,
    ScalarMul,
}

#[derive(Clone, Debug)]
pub enum Operand<'a> {
    Poly(&'a SpeciesPoly),
    Scalar(&'a Rational),
}

/// Exact ring arithmetic with the truncation check surfaced as an error.
pub fn ring_arith(op: RingOp, a: &SpeciesPoly, b: Operand<'_>) -> Result<SpeciesPoly> {
    match (op, b) {
        (RingOp::Add, Operand::Poly(b)) => a.checked_add(b),
        (RingOp::Sub, Operand::Poly(b)) => a.checked_sub(b),
        (RingOp::Mul, Operand::Poly(b)) => a.checked_mul(b),
        (RingOp::ScalarMul, Operand::Scalar(c)) | (RingOp::Mul, Operand::Scalar(c)) => {
            Ok(a.scale(c))
        }
        (op, _) => Err(Error::Domain(format!("{op:?} needs a polynomial operand"))),
    }
}

/// `n!` as a rational, handy for the jets above.
pub fn factorial_rational(n: usize) -> Rational {
    Rational::from_integer(crate::rational::factorial(n))
}

pub fn integer_coefficients(p: &SpeciesPoly) -> Option<Vec<(Monomial, BigInt)>> {
    p.terms()
        .map(|(m, c)| is_integer(c).then(|| (m.clone(), c.numer().clone())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x(n: usize) -> SpeciesPoly {
        SpeciesPoly::x(n)
    }

    fn e(n: usize, k: usize) -> SpeciesPoly {
        SpeciesPoly::set_species(n, k)
    }

    fn c(n: usize, k: usize) -> SpeciesPoly {
        SpeciesPoly::cycle_species(n, k)
    }

    #[test]
    fn x_times_x() {
        let sq = &x(8) * &x(8);
        assert_eq!(sq.to_string(), "X^2");
        assert_eq!(sq.window(), Some(8));
    }

    #[test]
    fn square_of_set_species_at_two() {
        let big_e = SpeciesPoly::combinatorial_exp(2);
        let sq = &big_e * &big_e;
        // (1 + X + E2)^2 truncated: 1 + 2X + X^2 + 2E2
        let expected = SpeciesPoly::one(2)
            + x(2).scale(&int(2))
            + &x(2) * &x(2)
            + e(2, 2).scale(&int(2));
        assert!(sq.eq_within(&expected));
        assert_eq!(sq.window(), Some(2));
    }

    #[test]
    fn additive_identity() {
        let f = SpeciesPoly::cycles(6);
        assert_eq!(&f + &SpeciesPoly::zero(6), f);
    }

    #[test]
    fn derivative_rules() {
        assert!(c(8, 3).derive().eq_within(&(&x(8) * &x(8))));
        assert!(e(8, 2).derive().eq_within(&x(8)));
        assert!(e(8, 5).derive().eq_within(&e(8, 4)));
        assert!(x(8).derive().eq_within(&SpeciesPoly::one(8)));
        assert_eq!(c(8, 3).derive().window(), Some(7));
        let xe2 = &x(8) * &e(8, 2);
        let expected = &e(8, 2) + &(&x(8) * &x(8));
        assert!(xe2.derive().eq_within(&expected));
        assert_eq!(xe2.derive().window(), Some(7));
    }

    #[test]
    fn graded_components() {
        let big_e = SpeciesPoly::combinatorial_exp(8);
        assert_eq!(big_e.graded_component(2).unwrap(), e(8, 2));
        let x2 = &x(8) * &x(8);
        assert!(x2.graded_component(1).unwrap().is_zero());
        let k = SpeciesPoly::one(8) + x(8).pow(3) - c(8, 3).scale(&int(3));
        let k3 = k.graded_component(3).unwrap();
        assert_eq!(k3.to_string(), "X^3 - 3*C3");
        let short = big_e.derive().derive();
        assert!(matches!(short.graded_component(7), Err(Error::WindowExceeded { .. })));
    }

    #[test]
    fn classification() {
        let k = SpeciesPoly::one(8) + x(8).pow(3) - c(8, 3).scale(&int(3));
        assert_eq!(
            k.classify(),
            Classification {
                domain: CoefficientDomain::Int,
                is_diff_constant: true,
                is_initialized: false
            }
        );
        let half_sq = x(8).pow(2).scale(&ratio(1, 2));
        assert_eq!(
            half_sq.classify(),
            Classification {
                domain: CoefficientDomain::Rat,
                is_diff_constant: false,
                is_initialized: true
            }
        );
        assert_eq!(
            SpeciesPoly::zero(8).classify(),
            Classification {
                domain: CoefficientDomain::Nat,
                is_diff_constant: true,
                is_initialized: true
            }
        );
    }

    #[test]
    fn inverses() {
        assert_eq!(SpeciesPoly::one(8).mult_inverse().unwrap(), SpeciesPoly::one(8));
        let ex = SpeciesPoly::analytic_exp(8, &int(1));
        let inv = ex.mult_inverse().unwrap();
        assert!(inv.eq_within(&SpeciesPoly::analytic_exp(8, &int(-1))));
        assert!((&inv * &ex).eq_within(&SpeciesPoly::one(8)));
        assert!(matches!(x(8).mult_inverse(), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn canonical_text() {
        let p = SpeciesPoly::one(8) - x(8).pow(3).scale(&ratio(1, 3)) + c(8, 3);
        assert_eq!(p.to_string(), "1 - 1/3*X^3 + C3");
        let q = &(&x(8) * &e(8, 2)) * &c(8, 3);
        assert_eq!(q.to_string(), "X*E2*C3");
        assert_eq!((-&x(8)).to_string(), "-X");
    }

    #[test]
    fn truncation_mismatch_is_an_error() {
        let err = ring_arith(RingOp::Add, &x(3), Operand::Poly(&x(4))).unwrap_err();
        assert_eq!(err, Error::TruncationMismatch { left: 3, right: 4 });
    }

    #[test]
    fn monomial_enumeration_counts() {
        // 1, X, {X^2, E2}, {X^3, X E2, E3, C3}
        let counts: Vec<usize> = (0..4).map(|d| Monomial::all_of_degree(d).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4]);
        assert_eq!(Monomial::all_of_degree(3)[0].to_string(), "X^3");
    }

    #[test]
    fn product_precision_uses_valuation() {
        // a jet known below degree 4 times X^3 is known below degree 7
        let jet = SpeciesPoly::combinatorial_exp(8).with_precision(4);
        let prod = &jet * &x(8).pow(3);
        assert_eq!(prod.precision(), 7);
        let plain = &jet * &SpeciesPoly::combinatorial_exp(8);
        assert_eq!(plain.precision(), 4);
    }

    #[test]
    fn random_polys_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = SpeciesPoly::random(8, &mut rng);
            assert!(p.is_exact());
            assert!(p.num_terms() <= 6);
            assert!(p.top_degree().unwrap_or(0) <= 8);
        }
    }
}
