//! Formal fractions `Φ/K^a` and the `K`-modified operators.
//!
//! Fractions are never reduced. Equality is by cross-multiplication:
//! `Φ/K^a = Ψ/K^b` iff `Φ K^b = Ψ K^a` below the common precision.

use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::axioms::{compare, AxiomReport, Tally};
use crate::error::{Error, Result};
use crate::rational::{int, Rational};
use crate::ring::{sample_rng, IdRing};
use crate::series::{gs, EGFSeries};
use crate::species::{random_coefficient, SpeciesPoly};
use crate::towers::DifferentialTower;

/// The multiplicative set generated by one species `K` with `K_0 ≠ 0`.
#[derive(Debug)]
pub struct LocContext {
    k: SpeciesPoly,
    k_prime: SpeciesPoly,
    constant: bool,
    tower: DifferentialTower,
    powers: Mutex<Vec<SpeciesPoly>>,
}

impl LocContext {
    pub fn new(k: SpeciesPoly) -> Result<Arc<Self>> {
        if k.is_zero() || k.precision() == 0 || k.constant_term().is_zero() {
            return Err(Error::InvalidConstant(format!("K = {k} needs a nonzero constant term")));
        }
        if !k.is_exact() {
            return Err(Error::InvalidConstant(format!("K = {k} must be known through degree {}", k.trunc())));
        }
        let k_prime = k.derive();
        let constant = k_prime.is_zero();
        let trunc = k.trunc();
        Ok(Arc::new(LocContext {
            powers: Mutex::new(vec![SpeciesPoly::one(trunc), k.clone()]),
            tower: DifferentialTower::analytic(trunc),
            k,
            k_prime,
            constant,
        }))
    }

    pub fn k(&self) -> &SpeciesPoly {
        &self.k
    }

    pub fn trunc(&self) -> usize {
        self.k.trunc()
    }

    /// True when `K' = 0`.
    pub fn is_constant(&self) -> bool {
        self.constant
    }

    /// `K^a`, memoized.
    pub fn power(&self, a: usize) -> SpeciesPoly {
        let mut powers = self.powers.lock().unwrap_or_else(|e| e.into_inner());
        while powers.len() <= a {
            let next = powers.last().unwrap() * &self.k;
            powers.push(next);
        }
        powers[a].clone()
    }

    pub fn fraction(self: &Arc<Self>, num: SpeciesPoly, denom_exp: usize) -> LocFraction {
        assert_eq!(num.trunc(), self.trunc(), "truncation mismatch");
        LocFraction { num, denom_exp, ctx: Arc::clone(self) }
    }

    pub fn from_poly(self: &Arc<Self>, num: SpeciesPoly) -> LocFraction {
        self.fraction(num, 0)
    }

    fn same(&self, other: &LocContext) -> bool {
        std::ptr::eq(self, other) || self.k == other.k
    }

    /// `(Φ/K^a)' = (KΦ' - aK'Φ)/K^{a+1}`, the quotient rule with `s = K^a`.
    pub fn quotient_derivative(&self, num: &SpeciesPoly, a: usize) -> (SpeciesPoly, usize) {
        let d = num.derive();
        if a == 0 {
            return (d, 0);
        }
        if self.constant {
            return (d, a);
        }
        let lead = &self.k * &d;
        let tail = (&self.k_prime * num).scale(&int(a as i64));
        (lead - tail, a + 1)
    }

    /// Brings fractions to the largest of their exponents and adds them.
    fn sum(self: &Arc<Self>, parts: &[(SpeciesPoly, usize)]) -> LocFraction {
        let top = parts.iter().map(|p| p.1).max().unwrap_or(0);
        let num = parts.iter().fold(SpeciesPoly::zero(self.trunc()), |acc, (n, a)| {
            acc + &self.power(top - a) * n
        });
        self.fraction(num, top)
    }

    /// `D_K(f) = (f/K)'`.
    pub fn d_mod(self: &Arc<Self>, f: &LocFraction) -> LocFraction {
        let (num, a) = self.quotient_derivative(&f.num, f.denom_exp + 1);
        self.fraction(num, a)
    }

    /// `∫_{e^X}(Φ/K^a) = Σ_{i≥1} (-1)^{i-1} X^i/i! (Φ/K^a)^{(i-1)}` with
    /// quotient-rule derivatives.
    pub fn joyal(self: &Arc<Self>, f: &LocFraction) -> LocFraction {
        let trunc = self.trunc();
        let mut parts = Vec::with_capacity(trunc);
        let (mut num, mut a) = (f.num.clone(), f.denom_exp);
        for i in 1..=trunc {
            if num.is_zero() {
                break;
            }
            let term = self.tower.piece(i) * &num;
            parts.push((if i % 2 == 1 { term } else { -term }, a));
            let (n, e) = self.quotient_derivative(&num, a);
            num = n;
            a = e;
        }
        if parts.is_empty() {
            parts.push((SpeciesPoly::zero(trunc), f.denom_exp));
        }
        let mut s = self.sum(&parts);
        s.num = s.num.with_precision(f.num.precision() + 1);
        s
    }

    /// `P_K(f) = K ∫_{e^X} f`.
    pub fn p_mod(self: &Arc<Self>, f: &LocFraction) -> LocFraction {
        let j = self.joyal(f);
        self.fraction(&self.k * &j.num, j.denom_exp)
    }

    /// `E(f) = Σ_n (-X)^n/n! f^{(n)}`, for constant `K` only.
    pub fn eval_loc(self: &Arc<Self>, f: &LocFraction) -> Result<LocFraction> {
        if !self.constant {
            return Err(Error::UnsupportedContext(format!(
                "evaluation needs a differential constant, K = {}",
                self.k
            )));
        }
        Ok(self.taylor_eval(f))
    }

    fn taylor_eval(self: &Arc<Self>, f: &LocFraction) -> LocFraction {
        let trunc = self.trunc();
        let mut parts = vec![(f.num.clone(), f.denom_exp)];
        let (mut num, mut a) = self.quotient_derivative(&f.num, f.denom_exp);
        for n in 1..=trunc {
            if num.is_zero() {
                break;
            }
            let term = self.tower.piece(n) * &num;
            parts.push((if n % 2 == 0 { term } else { -term }, a));
            let (d, e) = self.quotient_derivative(&num, a);
            num = d;
            a = e;
        }
        let mut s = self.sum(&parts);
        s.num = s.num.with_precision(f.num.precision());
        s
    }

    /// Generating series `Φ(x)/K(x)^a`.
    pub fn gs(&self, f: &LocFraction) -> Result<EGFSeries> {
        let kinv = gs(&self.k).inverse()?;
        gs(&f.num).mul(&kinv.pow(f.denom_exp))
    }

    pub fn check_modified_axioms(self: &Arc<Self>, samples: usize, seed: u64) -> Vec<AxiomReport> {
        let ring = LocalizedRing::new(Arc::clone(self));
        let pairs: Vec<(LocFraction, LocFraction)> = (0..samples as u64)
            .map(|i| {
                let mut rng = sample_rng(seed, i);
                (ring.sample(&mut rng), ring.sample(&mut rng))
            })
            .collect();
        check_modified_on(&ring, &pairs)
    }
}

/// Checks the unit-modified Leibniz rule, `D∘P = id`, the Reynolds identity
/// and the modified integro-differential identity on the given pairs.
pub fn check_modified_on(ring: &LocalizedRing, pairs: &[(LocFraction, LocFraction)]) -> Vec<AxiomReport> {
    let trunc = ring.trunc();
    let names = ["unit-modified-leibniz", "section", "reynolds", "modified-integro-differential"];
    let mut tallies: Vec<Tally> = names.iter().map(|n| Tally::new(*n, None, trunc)).collect();
    let one = ring.one();
    let d1 = ring.derive(&one);
    let j = |x: &LocFraction| ring.integrate(&ring.derive(x));
    let j1 = j(&one);
    for (x, y) in pairs {
        let (m, add, sub) = (
            |a: &LocFraction, b: &LocFraction| ring.mul(a, b),
            |a: &LocFraction, b: &LocFraction| ring.add(a, b),
            |a: &LocFraction, b: &LocFraction| ring.sub(a, b),
        );
        let (dx, dy) = (ring.derive(x), ring.derive(y));
        let xy = m(x, y);

        tallies[0].next_sample();
        if !tallies[0].failed() {
            let lhs = ring.derive(&xy);
            let rhs = sub(&add(&m(&dx, y), &m(x, &dy)), &m(&m(x, &d1), y));
            compare(ring, &mut tallies[0], &[x, y], &lhs, &rhs);
        }

        let (px, py) = (ring.integrate(x), ring.integrate(y));
        tallies[1].next_sample();
        if !tallies[1].failed() {
            compare(ring, &mut tallies[1], &[x], &ring.derive(&px), x);
        }

        tallies[2].next_sample();
        if !tallies[2].failed() {
            let lhs = m(&px, &py);
            let rhs = sub(
                &add(&ring.integrate(&m(&px, y)), &ring.integrate(&m(x, &py))),
                &ring.integrate(&m(&m(&px, &d1), &py)),
            );
            compare(ring, &mut tallies[2], &[x, y], &lhs, &rhs);
        }

        tallies[3].next_sample();
        if !tallies[3].failed() {
            let (jx, jy, jxy) = (j(x), j(y), j(&xy));
            let lhs = m(&jx, &jy);
            let rhs = sub(
                &sub(&add(&m(&jx, y), &m(x, &jy)), &jxy),
                &m(&j1, &sub(&xy, &jxy)),
            );
            compare(ring, &mut tallies[3], &[x, y], &lhs, &rhs);
        }
    }
    tallies.into_iter().map(Tally::finish).collect()
}

/// `Φ/K^a`.
#[derive(Clone, Debug)]
pub struct LocFraction {
    num: SpeciesPoly,
    denom_exp: usize,
    ctx: Arc<LocContext>,
}

impl LocFraction {
    pub fn num(&self) -> &SpeciesPoly {
        &self.num
    }

    pub fn denom_exp(&self) -> usize {
        self.denom_exp
    }

    pub fn context(&self) -> &Arc<LocContext> {
        &self.ctx
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ctx.same(&other.ctx) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    /// `Φ/K^a + Ψ/K^b = (ΦK^b + ΨK^a)/K^{a+b}`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let num = &self.num * &self.ctx.power(other.denom_exp)
            + &other.num * &self.ctx.power(self.denom_exp);
        Ok(self.ctx.fraction(num, self.denom_exp + other.denom_exp))
    }

    pub fn neg(&self) -> Self {
        self.ctx.fraction(-&self.num, self.denom_exp)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.ctx.fraction(&self.num * &other.num, self.denom_exp + other.denom_exp))
    }

    /// `ΦK^b = ΨK^a` below the common precision.
    pub fn equals(&self, other: &Self) -> Result<bool> {
        self.check(other)?;
        let (l, r) = self.cross(other);
        Ok(l.eq_within(&r))
    }

    fn cross(&self, other: &Self) -> (SpeciesPoly, SpeciesPoly) {
        (
            &self.num * &self.ctx.power(other.denom_exp),
            &other.num * &self.ctx.power(self.denom_exp),
        )
    }

    pub fn precision(&self) -> usize {
        self.num.precision()
    }
}

impl fmt::Display for LocFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/K^{}", self.num, self.denom_exp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FracOp {
    Add,
    Mul,
}

pub fn frac_arith(op: FracOp, a: &LocFraction, b: &LocFraction) -> Result<LocFraction> {
    match op {
        FracOp::Add => a.add(b),
        FracOp::Mul => a.mul(b),
    }
}

/// Fractions with `D_K` and `P_K`. The evaluation is the Taylor series for
/// constant `K` and the projection `id - P_K D_K` otherwise.
#[derive(Clone, Debug)]
pub struct LocalizedRing {
    ctx: Arc<LocContext>,
}

impl LocalizedRing {
    pub fn new(ctx: Arc<LocContext>) -> Self {
        LocalizedRing { ctx }
    }

    pub fn context(&self) -> &Arc<LocContext> {
        &self.ctx
    }
}

impl IdRing for LocalizedRing {
    type Elem = LocFraction;

    fn name(&self) -> String {
        format!("loc:{}", self.ctx.k)
    }

    fn trunc(&self) -> usize {
        self.ctx.trunc()
    }

    fn zero(&self) -> LocFraction {
        self.ctx.from_poly(SpeciesPoly::zero(self.trunc()))
    }

    fn one(&self) -> LocFraction {
        self.ctx.from_poly(SpeciesPoly::one(self.trunc()))
    }

    fn from_int(&self, n: &BigInt) -> LocFraction {
        self.ctx.from_poly(SpeciesPoly::constant(self.trunc(), Rational::from_integer(n.clone())))
    }

    fn add(&self, a: &LocFraction, b: &LocFraction) -> LocFraction {
        a.add(b).expect("fractions share the ring's context")
    }

    fn sub(&self, a: &LocFraction, b: &LocFraction) -> LocFraction {
        a.sub(b).expect("fractions share the ring's context")
    }

    fn mul(&self, a: &LocFraction, b: &LocFraction) -> LocFraction {
        a.mul(b).expect("fractions share the ring's context")
    }

    fn neg(&self, a: &LocFraction) -> LocFraction {
        a.neg()
    }

    fn scale(&self, a: &LocFraction, c: &Rational) -> Result<LocFraction> {
        Ok(self.ctx.fraction(a.num.scale(c), a.denom_exp))
    }

    fn scale_int(&self, a: &LocFraction, n: &BigInt) -> LocFraction {
        self.ctx.fraction(a.num.scale(&Rational::from_integer(n.clone())), a.denom_exp)
    }

    fn derive(&self, a: &LocFraction) -> LocFraction {
        self.ctx.d_mod(a)
    }

    fn integrate(&self, a: &LocFraction) -> LocFraction {
        self.ctx.p_mod(a)
    }

    fn evaluate(&self, a: &LocFraction) -> LocFraction {
        if self.ctx.constant {
            self.ctx.taylor_eval(a)
        } else {
            self.sub(a, &self.integrate(&self.derive(a)))
        }
    }

    fn has_evaluation(&self) -> bool {
        self.ctx.constant
    }

    fn is_unit(&self, a: &LocFraction) -> bool {
        a.num.precision() > 0 && !a.num.constant_term().is_zero()
    }

    fn inverse(&self, a: &LocFraction) -> Result<LocFraction> {
        let inv = a.num.mult_inverse()?;
        Ok(self.ctx.fraction(&inv * &self.ctx.power(a.denom_exp), 0))
    }

    fn precision(&self, a: &LocFraction) -> usize {
        a.precision()
    }

    fn is_zero(&self, a: &LocFraction) -> bool {
        a.num.is_zero()
    }

    fn eq_within(&self, a: &LocFraction, b: &LocFraction) -> bool {
        a.equals(b).unwrap_or(false)
    }

    fn common_precision(&self, a: &LocFraction, b: &LocFraction) -> usize {
        let (l, r) = a.cross(b);
        l.precision().min(r.precision())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> LocFraction {
        let num = SpeciesPoly::random(self.trunc(), rng);
        let a = rng.gen_range(0..=2);
        self.ctx.fraction(num, a)
    }

    fn sample_unit(&self, rng: &mut ChaCha8Rng) -> LocFraction {
        let num = SpeciesPoly::random(self.trunc(), rng);
        let shift = random_coefficient(rng) - num.constant_term();
        let num = num + SpeciesPoly::constant(self.trunc(), shift);
        let a = rng.gen_range(0..=2);
        self.ctx.fraction(num, a)
    }

    fn format(&self, a: &LocFraction) -> String {
        a.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::all_hold;

    const N: usize = 8;

    fn x() -> SpeciesPoly {
        SpeciesPoly::x(N)
    }

    #[test]
    fn cross_multiplication() {
        let ctx = LocContext::new(SpeciesPoly::combinatorial_exp(N)).unwrap();
        let phi = SpeciesPoly::cycles(N);
        let a = ctx.fraction(phi.clone(), 0);
        let b = ctx.fraction(&phi * ctx.k(), 1);
        assert!(a.equals(&b).unwrap());
        let xk = ctx.fraction(x(), 1);
        let sq = xk.mul(&xk).unwrap();
        assert_eq!(sq.denom_exp(), 2);
        assert_eq!(sq.num(), &x().pow(2));
        let one_k = ctx.fraction(SpeciesPoly::one(N), 1);
        let two = one_k.add(&one_k).unwrap();
        assert_eq!(two.denom_exp(), 2);
        assert!(two.equals(&ctx.fraction(SpeciesPoly::constant(N, int(2)), 1)).unwrap());
    }

    #[test]
    fn modified_derivation() {
        let one = LocContext::new(SpeciesPoly::one(N)).unwrap();
        let c = SpeciesPoly::cycles(N);
        let d = one.d_mod(&one.from_poly(c.clone()));
        assert!(d.equals(&one.fraction(c.derive(), 0)).unwrap());

        let ctx = LocContext::new(SpeciesPoly::combinatorial_exp(N)).unwrap();
        let d = ctx.d_mod(&ctx.from_poly(x()));
        let expected = ctx.fraction(SpeciesPoly::one(N) - x(), 1);
        assert!(d.equals(&expected).unwrap());
        let k = ctx.k().clone();
        let d1 = ctx.d_mod(&ctx.from_poly(SpeciesPoly::one(N)));
        assert!(d1.equals(&ctx.fraction(-k.derive(), 2)).unwrap());
    }

    #[test]
    fn modified_integral() {
        let one = LocContext::new(SpeciesPoly::one(N)).unwrap();
        let c = SpeciesPoly::cycles(N);
        let p = one.p_mod(&one.from_poly(c.clone()));
        let expected = DifferentialTower::analytic(N).integrate(&c);
        assert!(p.equals(&one.from_poly(expected)).unwrap());

        let ctx = LocContext::new(SpeciesPoly::combinatorial_exp(N)).unwrap();
        assert!(ctx.p_mod(&ctx.from_poly(SpeciesPoly::zero(N))).num().is_zero());
        let f = ctx.fraction(x(), 1);
        assert!(ctx.d_mod(&ctx.p_mod(&f)).equals(&f).unwrap());
    }

    #[test]
    fn evaluation_needs_constant() {
        let e = LocContext::new(SpeciesPoly::combinatorial_exp(N)).unwrap();
        assert!(matches!(e.eval_loc(&e.from_poly(x())), Err(Error::UnsupportedContext(_))));
        let k = SpeciesPoly::one(N) + x().pow(2) - SpeciesPoly::set_species(N, 2).scale(&int(2));
        let ctx = LocContext::new(k).unwrap();
        let inv_k = ctx.fraction(SpeciesPoly::one(N), 1);
        assert!(ctx.eval_loc(&inv_k).unwrap().equals(&inv_k).unwrap());
        let c3 = ctx.from_poly(SpeciesPoly::cycle_species(N, 3));
        let expected = DifferentialTower::analytic(N).evaluate(&SpeciesPoly::cycle_species(N, 3));
        assert!(ctx.eval_loc(&c3).unwrap().equals(&ctx.from_poly(expected)).unwrap());
        assert!(ctx.eval_loc(&ctx.fraction(x(), 1)).unwrap().num().is_zero());
    }

    #[test]
    fn trivial_context_axioms() {
        let ctx = LocContext::new(SpeciesPoly::one(6)).unwrap();
        let reports = ctx.check_modified_axioms(10, 3);
        assert!(all_hold(&reports), "{reports:?}");
    }

    #[test]
    fn context_mismatch() {
        let a = LocContext::new(SpeciesPoly::one(N)).unwrap();
        let b = LocContext::new(SpeciesPoly::combinatorial_exp(N)).unwrap();
        let err = a.from_poly(x()).add(&b.from_poly(x())).unwrap_err();
        assert_eq!(err, Error::ContextMismatch);
    }
}
