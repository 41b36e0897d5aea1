//! Virtual linear species as sequences of structure counts.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::calculus::{Distance, Order};
use crate::error::{Error, Result};
use crate::rational::{binomial, factorial, Rational};
use crate::ring::IdRing;
use crate::series::{gs, EGFSeries};
use crate::species::SpeciesPoly;

/// Counts `f_0 … f_N`; `f_n` is exact for `n < prec` and zero-filled above.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinSpecies {
    counts: Vec<BigInt>,
    prec: usize,
}

impl LinSpecies {
    pub fn new(trunc: usize, prec: usize, counts: impl IntoIterator<Item = BigInt>) -> Self {
        let prec = prec.min(trunc + 1);
        let mut v: Vec<BigInt> = counts.into_iter().take(prec).collect();
        v.resize(trunc + 1, BigInt::zero());
        LinSpecies { counts: v, prec }
    }

    pub fn exact(trunc: usize, counts: impl IntoIterator<Item = BigInt>) -> Self {
        Self::new(trunc, trunc + 1, counts)
    }

    pub fn from_i64(trunc: usize, counts: &[i64]) -> Self {
        Self::exact(trunc, counts.iter().map(|&c| BigInt::from(c)))
    }

    pub fn zero(trunc: usize) -> Self {
        Self::exact(trunc, [])
    }

    pub fn one(trunc: usize) -> Self {
        Self::exact(trunc, [BigInt::one()])
    }

    /// The singleton species, counts `(0, 1, 0, …)`.
    pub fn x(trunc: usize) -> Self {
        Self::exact(trunc, [BigInt::zero(), BigInt::one()])
    }

    /// Linear orders, `f_n = n!`.
    pub fn linear_orders(trunc: usize) -> Self {
        Self::exact(trunc, (0..=trunc).map(factorial))
    }

    /// Sets, `f_n = 1`.
    pub fn sets(trunc: usize) -> Self {
        Self::exact(trunc, (0..=trunc).map(|_| BigInt::one()))
    }

    pub fn trunc(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn window(&self) -> Option<usize> {
        self.prec.checked_sub(1)
    }

    pub fn is_exact(&self) -> bool {
        self.prec == self.counts.len()
    }

    pub fn counts(&self) -> &[BigInt] {
        &self.counts[..self.prec]
    }

    pub fn count(&self, n: usize) -> &BigInt {
        &self.counts[n]
    }

    pub fn valuation(&self) -> usize {
        self.counts().iter().position(|c| !c.is_zero()).unwrap_or(self.prec)
    }

    pub fn is_zero(&self) -> bool {
        self.valuation() == self.prec
    }

    pub fn eq_within(&self, other: &Self) -> bool {
        let p = self.prec.min(other.prec);
        self.trunc() == other.trunc() && self.counts[..p] == other.counts[..p]
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.trunc() == other.trunc() {
            Ok(())
        } else {
            Err(Error::TruncationMismatch { left: self.trunc(), right: other.trunc() })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let prec = self.prec.min(other.prec);
        Ok(Self::new(self.trunc(), prec, self.counts.iter().zip(&other.counts).map(|(a, b)| a + b)))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.trunc(), self.prec, self.counts.iter().map(|a| -a))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.trunc(), self.prec, self.counts.iter().map(|a| a * c))
    }

    /// Ordered splits: `(FG)_n = Σ_k C(n,k) f_k g_{n-k}`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let trunc = self.trunc();
        let prec = (trunc + 1)
            .min(self.prec + other.valuation())
            .min(other.prec + self.valuation());
        let c = (0..prec).map(|n| {
            (0..=n)
                .filter(|&k| !self.counts[k].is_zero() && !other.counts[n - k].is_zero())
                .map(|k| binomial(n, k) * &self.counts[k] * &other.counts[n - k])
                .sum::<BigInt>()
        });
        Ok(Self::new(trunc, prec, c))
    }

    /// `F'[ℓ] = F[1 ⊕ ℓ]`: shift left.
    pub fn derive(&self) -> Self {
        Self::new(self.trunc(), self.prec.saturating_sub(1), self.counts.iter().skip(1).cloned())
    }

    /// The canonical integral: shift right, nothing on the empty order.
    pub fn integrate(&self) -> Self {
        let c = std::iter::once(BigInt::zero()).chain(self.counts.iter().take(self.trunc()).cloned());
        Self::new(self.trunc(), self.prec + 1, c)
    }

    /// `E(F) = F(0)`.
    pub fn evaluate(&self) -> Self {
        let c0 = if self.prec > 0 { self.counts[0].clone() } else { BigInt::zero() };
        Self::new(self.trunc(), self.prec, [c0])
    }

    /// Inverse for `f_0 = ±1`; other constant terms leave the integers.
    pub fn inverse(&self) -> Result<Self> {
        if self.prec == 0 || self.counts[0].abs() != BigInt::one() {
            return Err(Error::NotAUnit(self.to_string()));
        }
        let s = self.series().inverse()?;
        from_series(&s)
    }

    pub fn series(&self) -> EGFSeries {
        EGFSeries::from_counts(self.trunc(), self.prec, &self.counts)
    }

    /// Least `n` with `f_n ≠ 0`.
    pub fn order(&self) -> Order {
        match self.counts().iter().position(|c| !c.is_zero()) {
            Some(n) => Order::Finite(n),
            None if self.is_exact() => Order::Infinite,
            None => Order::AtLeast(self.prec),
        }
    }
}

fn from_series(s: &EGFSeries) -> Result<LinSpecies> {
    let counts = (0..s.precision())
        .map(|n| s.count(n).ok_or_else(|| Error::Invariant(format!("non-integral count at {n}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(LinSpecies::new(s.trunc(), s.precision(), counts))
}

impl fmt::Display for LinSpecies {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts().iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))?;
        if !self.is_exact() {
            write!(f, " + O({})", self.prec)?;
        }
        Ok(())
    }
}

impl Serialize for LinSpecies {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.counts().iter().map(|c| c.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinOp {
    Add,
    Mul,
}

pub fn lin_arith(op: LinOp, a: &LinSpecies, b: &LinSpecies) -> Result<LinSpecies> {
    match op {
        LinOp::Add => a.add(b),
        LinOp::Mul => a.mul(b),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinCalculusOp {
    Der,
    Int,
    Eval,
}

pub fn lin_calculus(op: LinCalculusOp, f: &LinSpecies) -> LinSpecies {
    match op {
        LinCalculusOp::Der => f.derive(),
        LinCalculusOp::Int => f.integrate(),
        LinCalculusOp::Eval => f.evaluate(),
    }
}

/// Partitional composition `F∘G` through `F(G(x))`; needs `g_0 = 0`.
pub fn lin_compose(f: &LinSpecies, g: &LinSpecies) -> Result<LinSpecies> {
    if g.prec == 0 || !g.counts[0].is_zero() {
        return Err(Error::NotInitialized(g.to_string()));
    }
    let s = f.series().compose(&g.series())?;
    from_series(&s)
}

pub fn lin_order(a: &LinSpecies) -> Order {
    a.order()
}

pub fn lin_distance(a: &LinSpecies, b: &LinSpecies) -> Result<Distance> {
    Ok(Distance::from_order(a.sub(b)?.order()))
}

/// The limit of a finite run of iterates, as far as it has settled.
///
/// Coordinates are taken from the last iterate. The result is exact below
/// `k + 1`, where `k` is the last index on which the last two iterates
/// agree, so that `d(limit, last) ≤ 2^{-(k+1)}`.
pub fn lin_limit(iterates: &[LinSpecies]) -> Result<LinSpecies> {
    let last = iterates
        .last()
        .ok_or_else(|| Error::NotCauchy { horizon: 0, reason: "no iterates".into() })?;
    if iterates.len() == 1 {
        return Ok(last.clone());
    }
    let agreement = |a: &LinSpecies, b: &LinSpecies| -> Result<usize> {
        a.check(b)?;
        let p = a.prec.min(b.prec);
        Ok((0..p).find(|&i| a.counts[i] != b.counts[i]).unwrap_or(p))
    };
    let prefixes = iterates
        .windows(2)
        .map(|w| agreement(&w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    let settled = *prefixes.last().unwrap();
    if settled == 0 {
        return Err(Error::NotCauchy {
            horizon: last.trunc(),
            reason: "the last two iterates already differ at 0".into(),
        });
    }
    if prefixes.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::NotCauchy {
            horizon: last.trunc(),
            reason: "agreement between consecutive iterates shrinks".into(),
        });
    }
    let prec = if settled >= last.prec { last.prec } else { settled };
    Ok(LinSpecies::new(last.trunc(), prec, last.counts.iter().cloned()))
}

/// `f_n = n!·[x^n] gs(Φ)`.
pub fn lin_from_set_species(phi: &SpeciesPoly) -> Result<LinSpecies> {
    let s = gs(phi);
    let counts = (0..s.precision())
        .map(|n| {
            s.count(n).ok_or_else(|| {
                Error::NotASpecies(format!(
                    "{phi} has {} structures on {n} labels",
                    s.coeff(n) * Rational::from_integer(factorial(n))
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LinSpecies::new(phi.trunc(), s.precision(), counts))
}

#[derive(Clone, Copy, Debug)]
pub struct LinearSpeciesRing {
    trunc: usize,
}

impl LinearSpeciesRing {
    pub fn new(trunc: usize) -> Self {
        LinearSpeciesRing { trunc }
    }
}

fn random_count(rng: &mut ChaCha8Rng) -> BigInt {
    let mut c = 0i64;
    while c == 0 {
        c = rng.gen_range(-9..=9);
    }
    BigInt::from(c)
}

impl IdRing for LinearSpeciesRing {
    type Elem = LinSpecies;

    fn name(&self) -> String {
        "linear".into()
    }

    fn trunc(&self) -> usize {
        self.trunc
    }

    fn zero(&self) -> LinSpecies {
        LinSpecies::zero(self.trunc)
    }

    fn one(&self) -> LinSpecies {
        LinSpecies::one(self.trunc)
    }

    fn from_int(&self, n: &BigInt) -> LinSpecies {
        LinSpecies::exact(self.trunc, [n.clone()])
    }

    fn add(&self, a: &LinSpecies, b: &LinSpecies) -> LinSpecies {
        a.add(b).expect("same truncation")
    }

    fn sub(&self, a: &LinSpecies, b: &LinSpecies) -> LinSpecies {
        a.sub(b).expect("same truncation")
    }

    fn mul(&self, a: &LinSpecies, b: &LinSpecies) -> LinSpecies {
        a.mul(b).expect("same truncation")
    }

    fn neg(&self, a: &LinSpecies) -> LinSpecies {
        a.neg()
    }

    fn scale(&self, a: &LinSpecies, c: &Rational) -> Result<LinSpecies> {
        if c.is_integer() {
            return Ok(a.scale(c.numer()));
        }
        let scaled = a.counts().iter().map(|v| Rational::from_integer(v.clone()) * c);
        let counts = scaled
            .enumerate()
            .map(|(n, q)| {
                if q.is_integer() {
                    Ok(q.to_integer())
                } else {
                    Err(Error::NotASpecies(format!("count {q} at {n} is not an integer")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LinSpecies::new(self.trunc, a.prec, counts))
    }

    fn scale_int(&self, a: &LinSpecies, n: &BigInt) -> LinSpecies {
        a.scale(n)
    }

    fn derive(&self, a: &LinSpecies) -> LinSpecies {
        a.derive()
    }

    fn integrate(&self, a: &LinSpecies) -> LinSpecies {
        a.integrate()
    }

    fn evaluate(&self, a: &LinSpecies) -> LinSpecies {
        a.evaluate()
    }

    fn is_unit(&self, a: &LinSpecies) -> bool {
        a.prec > 0 && a.counts[0].abs().is_one()
    }

    fn inverse(&self, a: &LinSpecies) -> Result<LinSpecies> {
        a.inverse()
    }

    fn precision(&self, a: &LinSpecies) -> usize {
        a.prec
    }

    fn is_zero(&self, a: &LinSpecies) -> bool {
        a.is_zero()
    }

    fn eq_within(&self, a: &LinSpecies, b: &LinSpecies) -> bool {
        a.eq_within(b)
    }

    /// One to six nonzero counts in `-9..=9` at uniformly chosen positions.
    fn sample(&self, rng: &mut ChaCha8Rng) -> LinSpecies {
        let mut counts = vec![BigInt::zero(); self.trunc + 1];
        for _ in 0..rng.gen_range(1..=6) {
            let n = rng.gen_range(0..=self.trunc);
            counts[n] = random_count(rng);
        }
        LinSpecies::exact(self.trunc, counts)
    }

    fn sample_unit(&self, rng: &mut ChaCha8Rng) -> LinSpecies {
        let mut a = self.sample(rng);
        a.counts[0] = if rng.gen_bool(0.5) { BigInt::one() } else { -BigInt::one() };
        a
    }

    fn format(&self, a: &LinSpecies) -> String {
        a.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    const N: usize = 8;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn products() {
        let l = LinSpecies::linear_orders(N);
        let sq = lin_arith(LinOp::Mul, &l, &l).unwrap();
        let expected: Vec<BigInt> = (0..=N).map(|n| factorial(n + 1)).collect();
        assert_eq!(sq.counts(), &expected[..]);
        let f = LinearSpeciesRing::new(N).sample(&mut crate::ring::sample_rng(1, 0));
        assert_eq!(f.mul(&LinSpecies::one(N)).unwrap(), f);
        assert!(l.add(&l.neg()).unwrap().is_zero());
    }

    #[test]
    fn calculus() {
        let l = LinSpecies::linear_orders(N);
        let d = lin_calculus(LinCalculusOp::Der, &l);
        assert!(d.eq_within(&l.mul(&l).unwrap()));
        assert_eq!(d.window(), Some(N - 1));
        let f = LinSpecies::from_i64(N, &[3, -1, 4, 1, -5]);
        assert!(f.integrate().derive().eq_within(&f));
        assert_eq!(lin_calculus(LinCalculusOp::Eval, &l), LinSpecies::one(N));
    }

    #[test]
    fn composition() {
        let sets = LinSpecies::sets(N);
        assert_eq!(lin_compose(&sets, &LinSpecies::x(N)).unwrap(), sets);
        let l = LinSpecies::linear_orders(N);
        let g = LinSpecies::from_i64(N, &[0, 1, 2]);
        let c = lin_compose(&l, &g).unwrap();
        let fib = [1i64, 1, 2, 3, 5, 8, 13, 21, 34];
        let expected: Vec<BigInt> = fib.iter().enumerate().map(|(n, &v)| factorial(n) * v).collect();
        assert_eq!(c.counts(), &expected[..]);
        let f = LinSpecies::from_i64(N, &[7, 2, 3]);
        assert_eq!(lin_compose(&f, &LinSpecies::zero(N)).unwrap(), LinSpecies::from_i64(N, &[7]));
        assert!(matches!(lin_compose(&f, &f), Err(Error::NotInitialized(_))));
    }

    #[test]
    fn metric() {
        let f = LinSpecies::from_i64(N, &[1, 1, 2]);
        let g = LinSpecies::from_i64(N, &[1, 1, 3]);
        assert_eq!(lin_order(&f.sub(&g).unwrap()), Order::Finite(2));
        assert_eq!(lin_distance(&f, &f).unwrap(), Distance::Zero);
        assert_eq!(lin_distance(&f, &g).unwrap(), Distance::Exact(ratio(1, 4)));
        let partial = f.derive();
        assert_eq!(lin_distance(&partial, &partial).unwrap(), Distance::AtMost(ratio(1, 1 << N)));
    }

    #[test]
    fn limits() {
        let its = [
            LinSpecies::from_i64(2, &[1, 0, 0]),
            LinSpecies::from_i64(2, &[1, 1, 0]),
            LinSpecies::from_i64(2, &[1, 1, 1]),
        ];
        let lim = lin_limit(&its).unwrap();
        assert_eq!(lim.counts(), &big(&[1, 1])[..]);
        assert_eq!(lim.window(), Some(1));
        let phi = LinSpecies::from_i64(N, &[2, 0, 5]);
        assert_eq!(lin_limit(&[phi.clone(), phi.clone(), phi.clone()]).unwrap(), phi);
        let bad = [LinSpecies::from_i64(2, &[1]), LinSpecies::from_i64(2, &[2])];
        assert!(matches!(lin_limit(&bad), Err(Error::NotCauchy { .. })));
        assert!(lin_limit(&[]).is_err());
    }

    #[test]
    fn from_set_species() {
        let e = lin_from_set_species(&SpeciesPoly::combinatorial_exp(N)).unwrap();
        assert_eq!(e, LinSpecies::sets(N));
        let c3 = lin_from_set_species(&SpeciesPoly::cycle_species(N, 3)).unwrap();
        assert_eq!(c3, LinSpecies::from_i64(N, &[0, 0, 0, 2]));
        let half = SpeciesPoly::x(N).scale(&ratio(1, 2));
        assert!(matches!(lin_from_set_species(&half), Err(Error::NotASpecies(_))));
        let half_sq = SpeciesPoly::x(N).pow(2).scale(&ratio(1, 2));
        assert_eq!(lin_from_set_species(&half_sq).unwrap(), LinSpecies::from_i64(N, &[0, 0, 1]));
    }

    #[test]
    fn scaling_rejects_fractions() {
        let ring = LinearSpeciesRing::new(N);
        let f = LinSpecies::from_i64(N, &[2, 4]);
        assert_eq!(ring.scale(&f, &ratio(1, 2)).unwrap(), LinSpecies::from_i64(N, &[1, 2]));
        assert!(ring.scale(&LinSpecies::one(N), &ratio(1, 2)).is_err());
        assert_eq!(ring.scale(&f, &int(3)).unwrap(), LinSpecies::from_i64(N, &[6, 12]));
    }
}
