//! Truncated exponential generating series and the map `Φ ↦ Φ(x)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::axioms::{AxiomReport, Tally, Witness};
use crate::error::{Error, Result};
use crate::rational::{factorial, format_rational, int, inverse_factorial, Rational};
use crate::ring::sample_rng;
use crate::species::{Generator, Monomial, SpeciesPoly};
use crate::towers::DifferentialTower;

/// `Σ a_n x^n` with `a_n` exact below `prec` and `n ≤ N`.
///
/// Coefficients are ordinary series coefficients; the count of structures
/// on `n` labels is `n!·a_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EGFSeries {
    coeffs: Vec<Rational>,
    prec: usize,
}

impl EGFSeries {
    pub fn new(trunc: usize, prec: usize, coeffs: impl IntoIterator<Item = Rational>) -> Self {
        let prec = prec.min(trunc + 1);
        let mut v: Vec<Rational> = coeffs.into_iter().take(prec).collect();
        v.resize(trunc + 1, Rational::zero());
        EGFSeries { coeffs: v, prec }
    }

    pub fn exact(trunc: usize, coeffs: impl IntoIterator<Item = Rational>) -> Self {
        Self::new(trunc, trunc + 1, coeffs)
    }

    pub fn zero(trunc: usize) -> Self {
        Self::exact(trunc, [])
    }

    pub fn one(trunc: usize) -> Self {
        Self::exact(trunc, [Rational::one()])
    }

    pub fn x(trunc: usize) -> Self {
        Self::exact(trunc, [Rational::zero(), Rational::one()])
    }

    /// `e^{λx}`.
    pub fn exp(trunc: usize, lambda: &Rational) -> Self {
        let mut c = Vec::with_capacity(trunc + 1);
        let mut power = Rational::one();
        for n in 0..=trunc {
            c.push(&power * inverse_factorial(n));
            power *= lambda;
        }
        Self::exact(trunc, c)
    }

    /// Series whose `n!·a_n` are the given counts.
    pub fn from_counts(trunc: usize, prec: usize, counts: &[BigInt]) -> Self {
        Self::new(
            trunc,
            prec,
            counts
                .iter()
                .enumerate()
                .map(|(n, c)| Rational::from_integer(c.clone()) * inverse_factorial(n)),
        )
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn window(&self) -> Option<usize> {
        self.prec.checked_sub(1)
    }

    pub fn coeff(&self, n: usize) -> &Rational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs[..self.prec]
    }

    /// `n!·a_n`, if integral.
    pub fn count(&self, n: usize) -> Option<BigInt> {
        let c = &self.coeffs[n] * Rational::from_integer(factorial(n));
        c.is_integer().then(|| c.to_integer())
    }

    pub fn valuation(&self) -> usize {
        self.coeffs[..self.prec].iter().position(|c| !c.is_zero()).unwrap_or(self.prec)
    }

    pub fn is_zero(&self) -> bool {
        self.valuation() == self.prec
    }

    pub fn eq_within(&self, other: &Self) -> bool {
        let p = self.prec.min(other.prec);
        self.trunc() == other.trunc() && self.coeffs[..p] == other.coeffs[..p]
    }

    /// First index below the common precision where the two differ.
    pub fn first_mismatch(&self, other: &Self) -> Option<usize> {
        let p = self.prec.min(other.prec).min(self.coeffs.len()).min(other.coeffs.len());
        (0..p).find(|&n| self.coeffs[n] != other.coeffs[n])
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
        Ok(Self::new(self.trunc(), prec, self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.trunc(), self.prec, self.coeffs.iter().map(|a| -a))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.trunc(), self.prec, self.coeffs.iter().map(|a| a * c))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let trunc = self.trunc();
        let prec = (trunc + 1)
            .min(self.prec + other.valuation())
            .min(other.prec + self.valuation());
        let mut c = vec![Rational::zero(); prec];
        for (i, a) in self.coeffs.iter().enumerate().take(prec) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(prec - i) {
                if !b.is_zero() {
                    c[i + j] += a * b;
                }
            }
        }
        Ok(Self::new(trunc, prec, c))
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(self.trunc()), |acc, _| acc.mul(self).expect("same truncation"))
    }

    /// `d/dx`.
    pub fn derive(&self) -> Self {
        let c = (1..=self.trunc()).map(|n| &self.coeffs[n] * int(n as i64));
        Self::new(self.trunc(), self.prec.saturating_sub(1), c)
    }

    /// `∫_0^x`.
    pub fn integrate(&self) -> Self {
        let c = std::iter::once(Rational::zero())
            .chain((0..self.trunc()).map(|n| &self.coeffs[n] / int(n as i64 + 1)));
        Self::new(self.trunc(), self.prec + 1, c)
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.prec == 0 || self.coeffs[0].is_zero() {
            return Err(Error::NotAUnit(self.to_string()));
        }
        let inv0 = self.coeffs[0].recip();
        let mut b: Vec<Rational> = vec![inv0.clone()];
        for n in 1..self.prec {
            let s: Rational = (1..=n).map(|k| &self.coeffs[k] * &b[n - k]).sum();
            b.push(-s * &inv0);
        }
        Ok(Self::new(self.trunc(), self.prec, b))
    }

    /// `F(G(x))`, requiring `G(0) = 0`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.check(inner)?;
        if inner.prec == 0 || !inner.coeffs[0].is_zero() {
            return Err(Error::NotInitialized(inner.to_string()));
        }
        let trunc = self.trunc();
        // G has valuation ≥ 1, so G^k only matters for k ≤ N.
        let mut acc = Self::zero(trunc);
        let mut power = Self::one(trunc);
        for k in 0..=trunc {
            if k >= self.prec {
                // unknown coefficients of F contribute from degree k on
                acc = acc.restrict(k * inner.valuation().max(1));
                break;
            }
            if !self.coeffs[k].is_zero() {
                acc = acc.add(&power.scale(&self.coeffs[k]))?;
            }
            power = power.mul(inner)?;
        }
        Ok(acc)
    }

    /// Lowers the precision to at most `prec`.
    pub fn restrict(&self, prec: usize) -> Self {
        Self::new(self.trunc(), self.prec.min(prec), self.coeffs.clone())
    }

    /// `d/dx (K(x)^{-1} s)`.
    pub fn k_derive(&self, k: &Self) -> Result<Self> {
        let kinv = k.inverse().map_err(|_| Error::NotAUnit(format!("K(x) = {k}")))?;
        Ok(kinv.mul(self)?.derive())
    }

    /// `K(x) ∫_0^x s`.
    pub fn k_integrate(&self, k: &Self) -> Result<Self> {
        if k.prec == 0 || k.coeffs[0].is_zero() {
            return Err(Error::NotAUnit(format!("K(x) = {k}")));
        }
        k.mul(&self.integrate())
    }
}

impl fmt::Display for EGFSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate().take(self.prec) {
            if c.is_zero() {
                continue;
            }
            let abs = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            let var = match n {
                0 => String::new(),
                1 => "x".to_string(),
                n => format!("x^{n}"),
            };
            if n == 0 {
                write!(f, "{}", format_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{var}")?;
            } else {
                write!(f, "{}*{var}", format_rational(&abs))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        if self.prec <= self.trunc() + 1 {
            write!(f, " + O(x^{})", self.prec)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOp {
    Der,
    Int,
    KDer,
    KInt,
}

pub fn series_calculus(op: SeriesOp, s: &EGFSeries, k: Option<&EGFSeries>) -> Result<EGFSeries> {
    let need_k = || k.ok_or_else(|| Error::Domain("operation needs K(x)".into()));
    match op {
        SeriesOp::Der => Ok(s.derive()),
        SeriesOp::Int => Ok(s.integrate()),
        SeriesOp::KDer => s.k_derive(need_k()?),
        SeriesOp::KInt => s.k_integrate(need_k()?),
    }
}

/// Image of a monomial: `X ↦ x`, `E_n ↦ x^n/n!`, `C_n ↦ x^n/n`.
fn monomial_weight(m: &Monomial) -> Rational {
    m.factors().into_iter().fold(Rational::one(), |acc, (g, e)| {
        let w = match g {
            Generator::X => Rational::one(),
            Generator::E(n) => inverse_factorial(n as usize),
            Generator::C(n) => Rational::new(BigInt::one(), BigInt::from(n)),
        };
        (0..e).fold(acc, |a, _| a * &w)
    })
}

/// The generating series `Φ(x) = Σ |Φ[n]| x^n/n!`.
pub fn gs(phi: &SpeciesPoly) -> EGFSeries {
    let mut c = vec![Rational::zero(); phi.trunc() + 1];
    for (m, v) in phi.terms() {
        c[m.degree()] += v * monomial_weight(m);
    }
    EGFSeries::new(phi.trunc(), phi.precision(), c)
}

/// Number of structures on `m` labels, from a builder that materializes the
/// species at a requested truncation bound. The builder is called at bound
/// `max(m, trunc)` so counts beyond `trunc` are available.
pub fn counts_at<F>(build: F, trunc: usize, m: usize) -> Result<BigInt>
where
    F: Fn(usize) -> Result<SpeciesPoly>,
{
    let bound = m.max(trunc);
    let phi = build(bound)?;
    let s = gs(&phi);
    if m >= s.precision() {
        return Err(Error::WindowExceeded { degree: m, precision: s.precision() });
    }
    s.count(m)
        .ok_or_else(|| Error::NotASpecies(format!("{m}!·[x^{m}] = {} is not an integer", s.coeff(m) * Rational::from_integer(factorial(m)))))
}

/// Largest inner count the functorial composition will materialize.
pub const FUNCTORIAL_COUNT_LIMIT: usize = 64;

/// `Σ |F[G[n]]| x^n/n!` with `|F[G[n]]| = f_{g_n}`.
pub fn functorial_compose_series<F, G>(outer: F, inner: G, trunc: usize) -> Result<EGFSeries>
where
    F: Fn(usize) -> Result<SpeciesPoly>,
    G: Fn(usize) -> Result<SpeciesPoly>,
{
    let g = gs(&inner(trunc)?);
    if g.precision() <= trunc {
        return Err(Error::WindowExceeded { degree: trunc, precision: g.precision() });
    }
    let mut counts = Vec::with_capacity(trunc + 1);
    let mut outer_cache: Option<(usize, EGFSeries)> = None;
    for n in 0..=trunc {
        let gn = g
            .count(n)
            .ok_or_else(|| Error::NotASpecies(format!("inner count at {n} is not an integer")))?;
        if gn.is_negative() {
            return Err(Error::NotASpecies(format!("inner count at {n} is negative")));
        }
        let m: usize = gn
            .try_into()
            .ok()
            .filter(|&m| m <= FUNCTORIAL_COUNT_LIMIT)
            .ok_or_else(|| Error::ResourceLimit(format!("inner count at {n} exceeds {FUNCTORIAL_COUNT_LIMIT}")))?;
        let bound = m.max(trunc);
        let f = match &outer_cache {
            Some((b, s)) if *b >= bound => s.clone(),
            _ => {
                let s = gs(&outer(bound)?);
                outer_cache = Some((bound, s.clone()));
                s
            }
        };
        if m >= f.precision() {
            return Err(Error::WindowExceeded { degree: m, precision: f.precision() });
        }
        let fm = f
            .count(m)
            .ok_or_else(|| Error::NotASpecies(format!("outer count at {m} is not an integer")))?;
        if fm.is_negative() {
            return Err(Error::NotASpecies(format!("outer count at {m} is negative")));
        }
        counts.push(fm);
    }
    Ok(EGFSeries::from_counts(trunc, trunc + 1, &counts))
}

/// Side-by-side coefficients of two compositions and where they part.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct CompositionComparison {
    pub functorial: Vec<String>,
    pub integro_differential: Vec<String>,
    pub first_mismatch: Option<usize>,
}

pub fn compare_series(functorial: &EGFSeries, other: &EGFSeries) -> CompositionComparison {
    CompositionComparison {
        functorial: functorial.coeffs().iter().map(format_rational).collect(),
        integro_differential: other.coeffs().iter().map(format_rational).collect(),
        first_mismatch: functorial.first_mismatch(other),
    }
}

/// How `gs` is checked: against `d/dx, ∫_0^x` or against the
/// `K`-modified pair.
#[derive(Clone, Debug)]
pub enum GsMode {
    Plain,
    Modified(SpeciesPoly),
}

fn series_witness(inputs: Vec<String>, lhs: &EGFSeries, rhs: &EGFSeries) -> Witness {
    Witness { inputs, lhs: lhs.to_string(), rhs: rhs.to_string(), window: 0 }
}

fn observe(tally: &mut Tally, input: &[&SpeciesPoly], lhs: &EGFSeries, rhs: &EGFSeries) {
    let precision = lhs.precision().min(rhs.precision());
    tally.observe(lhs.eq_within(rhs), precision, || {
        series_witness(input.iter().map(|p| p.to_string()).collect(), lhs, rhs)
    });
}

/// `gs(ΦΨ) = gs(Φ)gs(Ψ)`, `gs(Φ+Ψ) = gs(Φ)+gs(Ψ)`, `gs(∂Φ) = gs(Φ)'`,
/// `gs(∫Φ) = ∫_0^x gs(Φ)` on seeded samples. In modified mode the last two
/// are replaced by the `K`-modified operators on both sides.
pub fn check_gs_homomorphism(
    trunc: usize,
    samples: usize,
    seed: u64,
    mode: &GsMode,
) -> Result<AxiomReport> {
    let name = match mode {
        GsMode::Plain => "gs-homomorphism",
        GsMode::Modified(_) => "gs-modified-homomorphism",
    };
    let mut tally = Tally::new(name, None, trunc);
    let tower = DifferentialTower::analytic(trunc);
    let k_series = match mode {
        GsMode::Plain => None,
        GsMode::Modified(k) => {
            if k.constant_term().is_zero() {
                return Err(Error::NotAUnit(format!("K = {k}")));
            }
            Some(gs(k))
        }
    };
    for i in 0..samples as u64 {
        let mut rng = sample_rng(seed, i);
        let a = SpeciesPoly::random(trunc, &mut rng);
        let b = SpeciesPoly::random(trunc, &mut rng);
        tally.next_sample();
        let (ga, gb) = (gs(&a), gs(&b));
        observe(&mut tally, &[&a, &b], &gs(&(&a + &b)), &ga.add(&gb)?);
        observe(&mut tally, &[&a, &b], &gs(&(&a * &b)), &ga.mul(&gb)?);
        match (mode, &k_series) {
            (GsMode::Modified(k), Some(ks)) => {
                let ctx = crate::localization::LocContext::new(k.clone())?;
                let fa = ctx.fraction(a.clone(), 0);
                observe(&mut tally, &[&a], &ctx.gs(&ctx.d_mod(&fa))?, &ga.k_derive(ks)?);
                observe(&mut tally, &[&a], &ctx.gs(&ctx.p_mod(&fa))?, &ga.k_integrate(ks)?);
            }
            _ => {
                observe(&mut tally, &[&a], &gs(&a.derive()), &ga.derive());
                observe(&mut tally, &[&a], &gs(&tower.integrate(&a)), &ga.integrate());
            }
        }
        if tally.failed() {
            break;
        }
    }
    Ok(tally.finish())
}

/// `gs(∫_T Φ) = Σ (-1)^{i-1} T_i(x) Φ(x)^{(i-1)}` on seeded samples.
pub fn check_joyal_series(tower: &DifferentialTower, samples: usize, seed: u64) -> Result<AxiomReport> {
    let trunc = tower.trunc();
    let mut tally = Tally::new("joyal-series", None, trunc);
    for i in 0..samples as u64 {
        let mut rng = sample_rng(seed, i);
        let a = SpeciesPoly::random(trunc, &mut rng);
        tally.next_sample();
        let lhs = gs(&tower.integrate(&a));
        let mut rhs = EGFSeries::zero(trunc);
        let mut d = gs(&a);
        for i in 1..=trunc {
            let term = gs(tower.piece(i)).mul(&d)?;
            rhs = if i % 2 == 1 { rhs.add(&term)? } else { rhs.sub(&term)? };
            d = d.derive();
        }
        let rhs = rhs.restrict(a.precision() + 1);
        observe(&mut tally, &[&a], &lhs, &rhs);
        if tally.failed() {
            break;
        }
    }
    Ok(tally.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    const N: usize = 8;

    #[test]
    fn generator_images() {
        assert!(gs(&SpeciesPoly::combinatorial_exp(N)).eq_within(&EGFSeries::exp(N, &int(1))));
        let c3 = gs(&SpeciesPoly::cycle_species(N, 3));
        assert_eq!(c3.coeff(3), &ratio(1, 3));
        assert_eq!(c3.count(3), Some(BigInt::from(2)));
        let diff = SpeciesPoly::x(N).pow(3) - SpeciesPoly::cycle_species(N, 3).scale(&int(3));
        assert!(!diff.is_zero());
        assert!(gs(&diff).is_zero());
    }

    #[test]
    fn series_calculus_examples() {
        let one = EGFSeries::one(N);
        assert_eq!(series_calculus(SeriesOp::Int, &one, None).unwrap().coeffs()[..2], [int(0), int(1)]);
        let s = gs(&SpeciesPoly::cycles(N));
        assert!(s.integrate().derive().eq_within(&s));
        let k = EGFSeries::exp(N, &int(1));
        let x = EGFSeries::x(N);
        let round = x.k_integrate(&k).unwrap().k_derive(&k).unwrap();
        assert!(round.eq_within(&x));
        assert!(x.k_derive(&EGFSeries::x(N)).is_err());
    }

    #[test]
    fn composition_of_series() {
        // 1/(1 - x - x^2) has Fibonacci coefficients
        let l = EGFSeries::exact(N, (0..=N).map(|_| Rational::one()));
        let g = EGFSeries::exact(N, [int(0), int(1), int(1)]);
        let c = l.compose(&g).unwrap();
        let fib: Vec<i64> = vec![1, 1, 2, 3, 5, 8, 13, 21, 34];
        assert_eq!(c.coeffs(), &fib.iter().map(|&v| int(v)).collect::<Vec<_>>()[..]);
        assert!(l.compose(&EGFSeries::one(N)).is_err());
    }

    #[test]
    fn counts() {
        let e = |n: usize| Ok(SpeciesPoly::combinatorial_exp(n));
        assert_eq!(counts_at(e, N, 10).unwrap(), BigInt::from(1));
        let l = |n: usize| Ok(SpeciesPoly::linear_orders(n));
        assert_eq!(counts_at(l, N, 4).unwrap(), BigInt::from(24));
        let x2 = |n: usize| Ok(SpeciesPoly::x(n).pow(2));
        assert_eq!(counts_at(x2, N, 2).unwrap(), BigInt::from(2));
        let half = |n: usize| Ok(SpeciesPoly::x(n).scale(&ratio(1, 2)));
        assert!(matches!(counts_at(half, N, 1), Err(Error::NotASpecies(_))));
    }

    #[test]
    fn functorial_composition() {
        let e = |n: usize| Ok(SpeciesPoly::combinatorial_exp(n));
        let x2 = |n: usize| Ok(SpeciesPoly::x(n).pow(2));
        let s = functorial_compose_series(e, x2, 5).unwrap();
        assert!(s.eq_within(&EGFSeries::exp(5, &int(1))));
        // |X[n]| is 1 at n = 1 and 0 otherwise, so F□X picks f_0 and f_1
        let l = |n: usize| Ok(SpeciesPoly::linear_orders(n));
        let x = |n: usize| Ok(SpeciesPoly::x(n));
        let s = functorial_compose_series(l, x, 4).unwrap();
        let counts: Vec<BigInt> = (0..=4).map(|n| s.count(n).unwrap()).collect();
        assert_eq!(counts, vec![1, 1, 1, 1, 1].into_iter().map(BigInt::from).collect::<Vec<_>>());
    }

    #[test]
    fn integral_of_three_cycle() {
        let t = DifferentialTower::analytic(N);
        let lhs = gs(&t.integrate(&SpeciesPoly::cycle_species(N, 3)));
        let rhs = gs(&SpeciesPoly::cycle_species(N, 3)).integrate();
        assert_eq!(lhs.coeff(4), &ratio(1, 12));
        assert!(lhs.eq_within(&rhs));
    }

    #[test]
    fn text_form() {
        let s = EGFSeries::exp(3, &int(-1));
        assert_eq!(s.to_string(), "1 - x + 1/2*x^2 - 1/6*x^3 + O(x^4)");
    }
}
