//! Order, divided powers, exponentials and composition, written once for
//! every [`IdRing`].

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::axioms::{check_axiom, compare, AxiomReport, Axiom, Tally, Witness};
use crate::error::{Error, Result};
use crate::rational::{binomial, factorial, Rational};
use crate::ring::{sample_rng, IdRing};
use crate::series::{compare_series, functorial_compose_series, gs, CompositionComparison};
use crate::species::SpeciesPoly;
use crate::towers::SetSpeciesRing;

/// `ord(Φ) = min{n : E(∂^n Φ) ≠ 0}`, as far as the horizon allows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Order {
    Finite(usize),
    /// Nothing nonzero below this; the rest is past the horizon.
    AtLeast(usize),
    /// The element vanishes through the truncation bound at full precision.
    Infinite,
}

impl Order {
    /// `Some(ord ≥ k)` when decidable.
    pub fn at_least(&self, k: usize) -> Option<bool> {
        match *self {
            Order::Finite(m) => Some(m >= k),
            Order::Infinite => Some(true),
            Order::AtLeast(p) if p >= k => Some(true),
            Order::AtLeast(_) => None,
        }
    }

    /// A lower bound that is certainly valid.
    pub fn lower_bound(&self) -> Option<usize> {
        match *self {
            Order::Finite(m) | Order::AtLeast(m) => Some(m),
            Order::Infinite => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::AtLeast(n) => write!(f, ">= {n}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

/// `d = 2^{-ord}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Distance {
    Exact(Rational),
    AtMost(Rational),
    Zero,
}

fn dyadic(n: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << n)
}

impl Distance {
    pub fn from_order(o: Order) -> Self {
        match o {
            Order::Finite(n) => Distance::Exact(dyadic(n)),
            Order::AtLeast(n) => Distance::AtMost(dyadic(n)),
            Order::Infinite => Distance::Zero,
        }
    }

    /// `Some(d ≤ 2^{-k})` when decidable.
    pub fn at_most_dyadic(&self, k: usize) -> Option<bool> {
        let bound = dyadic(k);
        match self {
            Distance::Exact(d) => Some(*d <= bound),
            Distance::Zero => Some(true),
            Distance::AtMost(d) if *d <= bound => Some(true),
            Distance::AtMost(_) => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Exact(d) => write!(f, "{d}"),
            Distance::AtMost(d) => write!(f, "<= {d}"),
            Distance::Zero => write!(f, "0"),
        }
    }
}

impl Serialize for Distance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The derived operations over one ring instance.
#[derive(Debug)]
pub struct Calculus<'a, R: IdRing> {
    ring: &'a R,
}

impl<'a, R: IdRing> Clone for Calculus<'a, R> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<'a, R: IdRing> Copy for Calculus<'a, R> {}

impl<'a, R: IdRing> Calculus<'a, R> {
    /// Uses the ring without checking its axioms.
    pub fn new(ring: &'a R) -> Self {
        Calculus { ring }
    }

    /// Checks the section axiom and the hybrid Rota-Baxter axiom on seeded
    /// samples before handing out the instance.
    pub fn certify(ring: &'a R, samples: usize, seed: u64) -> Result<Self> {
        for axiom in [Axiom::Section, Axiom::HybridRb(Rational::zero())] {
            let report = check_axiom(ring, &axiom, samples, seed)?;
            if !report.holds {
                return Err(Error::Certification(format!("{} on {}: {report}", axiom.name(), ring.name())));
            }
        }
        Ok(Calculus { ring })
    }

    pub fn ring(&self) -> &'a R {
        self.ring
    }

    pub fn ord(&self, a: &R::Elem) -> Order {
        let r = self.ring;
        let full = r.trunc() + 1;
        let mut d = a.clone();
        for n in 0..full {
            if r.precision(&d) == 0 {
                return Order::AtLeast(n);
            }
            if !r.is_zero(&r.evaluate(&d)) {
                return Order::Finite(n);
            }
            d = r.derive(&d);
        }
        if r.precision(a) >= full {
            Order::Infinite
        } else {
            Order::AtLeast(r.precision(a))
        }
    }

    pub fn dist(&self, a: &R::Elem, b: &R::Elem) -> Distance {
        Distance::from_order(self.ord(&self.ring.sub(a, b)))
    }

    /// `Φ^[0] = 1`, `Φ^[n] = ∫(Φ^[n-1] Φ')`.
    pub fn divided_powers(&self, phi: &R::Elem, upto: usize) -> Vec<R::Elem> {
        let r = self.ring;
        let d = r.derive(phi);
        let mut out = vec![r.one()];
        for n in 1..=upto {
            let next = r.integrate(&r.mul(&out[n - 1], &d));
            out.push(next);
        }
        out
    }

    pub fn divided_power(&self, phi: &R::Elem, n: usize) -> R::Elem {
        self.divided_powers(phi, n).pop().expect("at least Φ^[0]")
    }

    fn require_kernel(&self, phi: &R::Elem, what: &str) -> Result<()> {
        let e = self.ring.evaluate(phi);
        if self.ring.is_zero(&e) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{what} needs E(Φ) = 0, got E({}) = {}",
                self.ring.format(phi),
                self.ring.format(&e)
            )))
        }
    }

    /// Sums `terms[n]` for `n ≤ N` and checks that term `N+1` vanishes.
    fn terminating_sum(&self, terms: &[R::Elem]) -> Result<R::Elem> {
        let r = self.ring;
        let n = r.trunc();
        if let Some(tail) = terms.get(n + 1) {
            if !r.is_zero(tail) {
                return Err(Error::Invariant(format!("series term {} is {}", n + 1, r.format(tail))));
            }
        }
        Ok(terms.iter().take(n + 1).fold(r.zero(), |acc, t| r.add(&acc, t)))
    }

    /// `exp(Φ) = Σ Φ^[n]` on `ker E`.
    pub fn exp(&self, phi: &R::Elem) -> Result<R::Elem> {
        self.require_kernel(phi, "exp")?;
        let powers = self.divided_powers(phi, self.ring.trunc() + 1);
        self.terminating_sum(&powers)
    }

    /// `log(Φ) = ∫ Φ^{-1} Φ'` on units.
    pub fn log(&self, phi: &R::Elem) -> Result<R::Elem> {
        let r = self.ring;
        if !r.is_unit(phi) {
            return Err(Error::Domain(format!("log needs a unit, got {}", r.format(phi))));
        }
        let inv = r.inverse(phi)?;
        Ok(r.integrate(&r.mul(&inv, &r.derive(phi))))
    }

    /// `Φ^Ψ = exp(Ψ log Φ)`.
    pub fn pow(&self, base: &R::Elem, exponent: &R::Elem) -> Result<R::Elem> {
        let l = self.log(base)?;
        self.exp(&self.ring.mul(exponent, &l))
    }

    /// `Φ∘Ψ = Σ E(Φ^{(n)}) Ψ^[n]` for `Ψ ∈ ker E`.
    pub fn id_compose(&self, phi: &R::Elem, psi: &R::Elem) -> Result<R::Elem> {
        self.require_kernel(psi, "composition")?;
        let r = self.ring;
        let n = r.trunc();
        let powers = self.divided_powers(psi, n + 1);
        let mut d = phi.clone();
        let mut terms = Vec::with_capacity(n + 2);
        for p in powers.iter() {
            terms.push(r.mul(&r.evaluate(&d), p));
            d = r.derive(&d);
        }
        self.terminating_sum(&terms)
    }

    /// `J = ∫∂`.
    pub fn initialize(&self, a: &R::Elem) -> R::Elem {
        self.ring.initialize(a)
    }
}

/// A named list of identities checked on one ring.
#[derive(Clone, Debug, Serialize)]
pub struct LawSuite {
    pub ring: String,
    pub reports: Vec<AxiomReport>,
}

impl LawSuite {
    pub fn holds(&self) -> bool {
        self.reports.iter().all(|r| r.holds)
    }
}

impl fmt::Display for LawSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.reports {
            writeln!(f, "[{}] {r}", self.ring)?;
        }
        Ok(())
    }
}

/// Collects one tally per law while walking the samples.
struct Laws<'a, R: IdRing> {
    calc: Calculus<'a, R>,
    names: Vec<&'static str>,
    tallies: Vec<Tally>,
}

impl<'a, R: IdRing> Laws<'a, R> {
    fn new(calc: Calculus<'a, R>, names: &[&'static str]) -> Self {
        let trunc = calc.ring.trunc();
        Laws {
            calc,
            names: names.to_vec(),
            tallies: names.iter().map(|n| Tally::new(*n, None, trunc)).collect(),
        }
    }

    fn index(&self, name: &str) -> usize {
        self.names.iter().position(|n| *n == name).expect("law registered")
    }

    fn active(&self, name: &str) -> bool {
        !self.tallies[self.index(name)].failed()
    }

    fn eq(&mut self, name: &str, inputs: &[&R::Elem], lhs: &R::Elem, rhs: &R::Elem) {
        let i = self.index(name);
        compare(self.calc.ring, &mut self.tallies[i], inputs, lhs, rhs);
    }

    fn eq_result(&mut self, name: &str, inputs: &[&R::Elem], lhs: Result<R::Elem>, rhs: Result<R::Elem>) {
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => self.eq(name, inputs, &l, &r),
            (l, r) => {
                let i = self.index(name);
                let ring = self.calc.ring;
                let show = |x: &Result<R::Elem>| match x {
                    Ok(v) => ring.format(v),
                    Err(e) => format!("error: {e}"),
                };
                let (ls, rs) = (show(&l), show(&r));
                self.tallies[i].observe(false, ring.trunc() + 1, || Witness {
                    inputs: inputs.iter().map(|e| ring.format(e)).collect(),
                    lhs: ls,
                    rhs: rs,
                    window: 0,
                });
            }
        }
    }

    /// Records `ord ≥ k`, inconclusive if undecidable.
    fn order_at_least(&mut self, name: &str, inputs: &[&R::Elem], order: Order, k: usize) {
        let i = self.index(name);
        let ring = self.calc.ring;
        let (ok, precision) = match order.at_least(k) {
            Some(ok) => (ok, ring.trunc() + 1),
            None => (true, 0),
        };
        self.tallies[i].observe(ok, precision, || Witness {
            inputs: inputs.iter().map(|e| ring.format(e)).collect(),
            lhs: format!("ord = {order}"),
            rhs: format!(">= {k}"),
            window: 0,
        });
    }

    fn next_sample(&mut self) {
        for t in &mut self.tallies {
            t.next_sample();
        }
    }

    fn finish(self) -> LawSuite {
        LawSuite {
            ring: self.calc.ring.name(),
            reports: self.tallies.into_iter().map(Tally::finish).collect(),
        }
    }
}

fn small_index(rng: &mut ChaCha8Rng) -> usize {
    rng.gen_range(1..=3)
}

/// Divided-power laws: prefix continuity, `(Φ^[n])' = Φ^[n-1]Φ'`,
/// `E(Φ^[n]) = 0`, `n!Ω^[n] = Ω^n` on `ker E`,
/// `Φ^[n]Φ^[m] = C(n+m,n)Φ^[n+m]` and `n!Φ^[n] = J(Φ)^n`.
pub fn divided_power_laws<R: IdRing>(ring: &R, samples: usize, seed: u64) -> LawSuite {
    let calc = Calculus::new(ring);
    let names = [
        "divpow-continuity",
        "divpow-derivative",
        "divpow-evaluation",
        "divpow-kernel-power",
        "divpow-product",
        "divpow-initialization-power",
    ];
    let mut laws = Laws::new(calc, &names);
    for i in 0..samples as u64 {
        let mut rng = sample_rng(seed, i);
        let phi = ring.sample(&mut rng);
        let omega = ring.sample_kernel(&mut rng);
        let (n, m) = (small_index(&mut rng), small_index(&mut rng));
        let k = rng.gen_range(1..=ring.trunc().saturating_sub(3).max(1));
        let y = ring.sample(&mut rng);
        laws.next_sample();

        let pows = calc.divided_powers(&phi, n + m);
        let big_n = factorial(n);

        if laws.active("divpow-continuity") {
            let tilde = ring.add(&phi, &(0..k).fold(y.clone(), |acc, _| ring.integrate(&acc)));
            let diff = ring.sub(&pows[n], &calc.divided_power(&tilde, n));
            laws.order_at_least("divpow-continuity", &[&phi, &tilde], calc.ord(&diff), k);
        }
        if laws.active("divpow-derivative") {
            let lhs = ring.derive(&pows[n]);
            let rhs = ring.mul(&pows[n - 1], &ring.derive(&phi));
            laws.eq("divpow-derivative", &[&phi], &lhs, &rhs);
        }
        if laws.active("divpow-evaluation") {
            laws.eq("divpow-evaluation", &[&phi], &ring.evaluate(&pows[n]), &ring.zero());
        }
        if laws.active("divpow-kernel-power") {
            let lhs = ring.scale_int(&calc.divided_power(&omega, n), &big_n);
            laws.eq("divpow-kernel-power", &[&omega], &lhs, &ring.pow(&omega, n));
        }
        if laws.active("divpow-product") {
            let lhs = ring.mul(&pows[n], &pows[m]);
            let rhs = ring.scale_int(&pows[n + m], &binomial(n + m, n));
            laws.eq("divpow-product", &[&phi], &lhs, &rhs);
        }
        if laws.active("divpow-initialization-power") {
            let lhs = ring.scale_int(&pows[n], &big_n);
            let rhs = ring.pow(&calc.initialize(&phi), n);
            laws.eq("divpow-initialization-power", &[&phi], &lhs, &rhs);
        }
    }
    laws.finish()
}

/// `exp`/`log` laws: derivatives, group homomorphisms and mutual inverses
/// on `ker E` and `1 + ker E`.
pub fn exp_log_laws<R: IdRing>(ring: &R, samples: usize, seed: u64) -> LawSuite {
    let calc = Calculus::new(ring);
    let names = [
        "exp-zero",
        "exp-derivative",
        "log-derivative",
        "exp-additive",
        "exp-negation",
        "log-one",
        "log-multiplicative",
        "log-inverse",
        "exp-log",
        "log-exp",
    ];
    let mut laws = Laws::new(calc, &names);
    let (zero, one) = (ring.zero(), ring.one());
    laws.eq_result("exp-zero", &[&zero], calc.exp(&zero), Ok(one.clone()));
    laws.eq_result("log-one", &[&one], calc.log(&one), Ok(zero.clone()));
    for i in 0..samples as u64 {
        let mut rng = sample_rng(seed, i);
        let phi = ring.sample_kernel(&mut rng);
        let psi = ring.sample_kernel(&mut rng);
        let u = ring.sample_unit(&mut rng);
        let v = ring.sample_unit(&mut rng);
        laws.next_sample();

        let exp_phi = calc.exp(&phi);
        let exp_psi = calc.exp(&psi);
        if laws.active("exp-derivative") {
            let lhs = exp_phi.as_ref().map(|e| ring.derive(e)).map_err(Clone::clone);
            let rhs = exp_phi.as_ref().map(|e| ring.mul(e, &ring.derive(&phi))).map_err(Clone::clone);
            laws.eq_result("exp-derivative", &[&phi], lhs, rhs);
        }
        let log_u = calc.log(&u);
        if laws.active("log-derivative") {
            let lhs = log_u.as_ref().map(|l| ring.derive(l)).map_err(Clone::clone);
            let rhs = ring.inverse(&u).map(|inv| ring.mul(&inv, &ring.derive(&u)));
            laws.eq_result("log-derivative", &[&u], lhs, rhs);
        }
        if laws.active("exp-additive") {
            let lhs = calc.exp(&ring.add(&phi, &psi));
            let rhs = match (&exp_phi, &exp_psi) {
                (Ok(a), Ok(b)) => Ok(ring.mul(a, b)),
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            };
            laws.eq_result("exp-additive", &[&phi, &psi], lhs, rhs);
        }
        if laws.active("exp-negation") {
            let lhs = calc.exp(&ring.neg(&psi));
            let rhs = exp_psi.as_ref().map_err(Clone::clone).and_then(|e| ring.inverse(e));
            laws.eq_result("exp-negation", &[&psi], lhs, rhs);
        }
        if laws.active("log-multiplicative") {
            let lhs = calc.log(&ring.mul(&u, &v));
            let rhs = match (&log_u, &calc.log(&v)) {
                (Ok(a), Ok(b)) => Ok(ring.add(a, b)),
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            };
            laws.eq_result("log-multiplicative", &[&u, &v], lhs, rhs);
        }
        if laws.active("log-inverse") {
            let lhs = ring.inverse(&u).and_then(|inv| calc.log(&inv));
            let rhs = log_u.as_ref().map(|l| ring.neg(l)).map_err(Clone::clone);
            laws.eq_result("log-inverse", &[&u], lhs, rhs);
        }
        if laws.active("exp-log") {
            let w = ring.add(&one, &psi);
            laws.eq_result("exp-log", &[&w], calc.log(&w).and_then(|l| calc.exp(&l)), Ok(w.clone()));
        }
        if laws.active("log-exp") {
            let lhs = exp_phi.as_ref().map_err(Clone::clone).and_then(|e| calc.log(e));
            laws.eq_result("log-exp", &[&phi], lhs, Ok(phi.clone()));
        }
    }
    laws.finish()
}

/// Exponentiation laws: sums and products of exponents, products of
/// bases, logarithms of powers and powers of exponentials.
pub fn exponentiation_laws<R: IdRing>(ring: &R, samples: usize, seed: u64) -> LawSuite {
    let calc = Calculus::new(ring);
    let names = ["pow-sum", "pow-product-base", "pow-of-pow", "pow-log", "pow-of-exp"];
    let mut laws = Laws::new(calc, &names);
    let mul2 = |a: Result<R::Elem>, b: Result<R::Elem>| -> Result<R::Elem> { Ok(ring.mul(&a?, &b?)) };
    for i in 0..samples as u64 {
        let mut rng = sample_rng(seed, i);
        let phi = ring.sample_unit(&mut rng);
        let phi2 = ring.sample_unit(&mut rng);
        let psi1 = ring.sample(&mut rng);
        let psi2 = ring.sample(&mut rng);
        let omega = ring.sample_kernel(&mut rng);
        laws.next_sample();

        let p1 = calc.pow(&phi, &psi1);
        if laws.active("pow-sum") {
            let lhs = calc.pow(&phi, &ring.add(&psi1, &psi2));
            let rhs = mul2(p1.clone(), calc.pow(&phi, &psi2));
            laws.eq_result("pow-sum", &[&phi, &psi1, &psi2], lhs, rhs);
        }
        if laws.active("pow-product-base") {
            let lhs = calc.pow(&ring.mul(&phi, &phi2), &psi1);
            let rhs = mul2(p1.clone(), calc.pow(&phi2, &psi1));
            laws.eq_result("pow-product-base", &[&phi, &phi2, &psi1], lhs, rhs);
        }
        if laws.active("pow-of-pow") {
            let lhs = p1.clone().and_then(|p| calc.pow(&p, &psi2));
            let rhs = calc.pow(&phi, &ring.mul(&psi1, &psi2));
            laws.eq_result("pow-of-pow", &[&phi, &psi1, &psi2], lhs, rhs);
        }
        if laws.active("pow-log") {
            let lhs = p1.clone().and_then(|p| calc.log(&p));
            let rhs = calc.log(&phi).map(|l| ring.mul(&psi1, &l));
            laws.eq_result("pow-log", &[&phi, &psi1], lhs, rhs);
        }
        if laws.active("pow-of-exp") {
            let lhs = calc.exp(&omega).and_then(|e| calc.pow(&e, &psi1));
            let rhs = calc.exp(&ring.mul(&psi1, &omega));
            laws.eq_result("pow-of-exp", &[&omega, &psi1], lhs, rhs);
        }
    }
    laws.finish()
}

/// The eight composition laws with `Ω, Ψ ∈ ker E`.
pub fn composition_laws<R: IdRing>(ring: &R, samples: usize, seed: u64) -> LawSuite {
    let calc = Calculus::new(ring);
    let names = [
        "comp-evaluation",
        "comp-additive",
        "comp-multiplicative",
        "comp-constant",
        "comp-chain-rule",
        "comp-substitution",
        "comp-divided-power",
        "comp-associative",
    ];
    let mut laws = Laws::new(calc, &names);
    let comp = |a: &R::Elem, b: &R::Elem| calc.id_compose(a, b);
    for i in 0..samples as u64 {
        let mut rng = sample_rng(seed, i);
        let phi = ring.sample(&mut rng);
        let psi = ring.sample(&mut rng);
        let omega = ring.sample_kernel(&mut rng);
        let inner = ring.sample_kernel(&mut rng);
        let n = small_index(&mut rng);
        laws.next_sample();

        let phi_o = comp(&phi, &omega);
        let psi_o = comp(&psi, &omega);
        let d_omega = ring.derive(&omega);
        if laws.active("comp-evaluation") {
            let lhs = phi_o.as_ref().map(|c| ring.evaluate(c)).map_err(Clone::clone);
            laws.eq_result("comp-evaluation", &[&phi, &omega], lhs, Ok(ring.evaluate(&phi)));
        }
        if laws.active("comp-additive") {
            let lhs = comp(&ring.add(&phi, &psi), &omega);
            let rhs = match (&phi_o, &psi_o) {
                (Ok(a), Ok(b)) => Ok(ring.add(a, b)),
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            };
            laws.eq_result("comp-additive", &[&phi, &psi, &omega], lhs, rhs);
        }
        if laws.active("comp-multiplicative") {
            let lhs = comp(&ring.mul(&phi, &psi), &omega);
            let rhs = match (&phi_o, &psi_o) {
                (Ok(a), Ok(b)) => Ok(ring.mul(a, b)),
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            };
            laws.eq_result("comp-multiplicative", &[&phi, &psi, &omega], lhs, rhs);
        }
        if laws.active("comp-constant") {
            let k = ring.evaluate(&phi);
            laws.eq_result("comp-constant", &[&k, &omega], comp(&k, &omega), Ok(k.clone()));
        }
        if laws.active("comp-chain-rule") {
            let lhs = phi_o.as_ref().map(|c| ring.derive(c)).map_err(Clone::clone);
            let rhs = comp(&ring.derive(&phi), &omega).map(|c| ring.mul(&c, &d_omega));
            laws.eq_result("comp-chain-rule", &[&phi, &omega], lhs, rhs);
        }
        if laws.active("comp-substitution") {
            let lhs = phi_o.as_ref().map(|c| ring.integrate(&ring.mul(c, &d_omega))).map_err(Clone::clone);
            let rhs = comp(&ring.integrate(&phi), &omega);
            laws.eq_result("comp-substitution", &[&phi, &omega], lhs, rhs);
        }
        if laws.active("comp-divided-power") {
            let lhs = phi_o.as_ref().map(|c| calc.divided_power(c, n)).map_err(Clone::clone);
            let rhs = comp(&calc.divided_power(&phi, n), &omega);
            laws.eq_result("comp-divided-power", &[&phi, &omega], lhs, rhs);
        }
        if laws.active("comp-associative") {
            let lhs = comp(&phi, &inner).and_then(|c| comp(&c, &omega));
            let rhs = comp(&inner, &omega).and_then(|c| comp(&phi, &c));
            laws.eq_result("comp-associative", &[&phi, &inner, &omega], lhs, rhs);
        }
    }
    laws.finish()
}

/// Agreement of inputs to order `k` survives sums, products, derivatives
/// (one less), integrals (one more), divided powers and `exp`.
pub fn continuity_laws<R: IdRing>(ring: &R, samples: usize, seed: u64) -> LawSuite {
    let calc = Calculus::new(ring);
    let names = [
        "continuity-add",
        "continuity-mul",
        "continuity-derive",
        "continuity-integrate",
        "continuity-divided-power",
        "continuity-exp",
    ];
    let mut laws = Laws::new(calc, &names);
    for i in 0..samples as u64 {
        let mut rng = sample_rng(seed, i);
        let a = ring.sample(&mut rng);
        let c = ring.sample(&mut rng);
        let y = ring.sample(&mut rng);
        let k = rng.gen_range(1..=ring.trunc().saturating_sub(3).max(1));
        let n = small_index(&mut rng);
        laws.next_sample();

        let bump = (0..k).fold(y, |acc, _| ring.integrate(&acc));
        let tilde = ring.add(&a, &bump);
        let base = match calc.ord(&ring.sub(&a, &tilde)).lower_bound() {
            Some(m) => m,
            None => continue,
        };
        let ord_diff = |f: &dyn Fn(&R::Elem) -> R::Elem| calc.ord(&ring.sub(&f(&a), &f(&tilde)));
        let inputs = [&a, &tilde];
        laws.order_at_least("continuity-add", &inputs, ord_diff(&|x| ring.add(x, &c)), base);
        laws.order_at_least("continuity-mul", &inputs, ord_diff(&|x| ring.mul(x, &c)), base);
        laws.order_at_least(
            "continuity-derive",
            &inputs,
            ord_diff(&|x| ring.derive(x)),
            base.saturating_sub(1),
        );
        laws.order_at_least("continuity-integrate", &inputs, ord_diff(&|x| ring.integrate(x)), base + 1);
        laws.order_at_least(
            "continuity-divided-power",
            &inputs,
            ord_diff(&|x| calc.divided_power(x, n)),
            base,
        );
        let (ka, kt) = (ring.sub(&a, &ring.evaluate(&a)), ring.sub(&tilde, &ring.evaluate(&tilde)));
        let kbase = calc.ord(&ring.sub(&ka, &kt)).lower_bound().unwrap_or(ring.trunc() + 1);
        match (calc.exp(&ka), calc.exp(&kt)) {
            (Ok(ea), Ok(et)) => {
                laws.order_at_least("continuity-exp", &[&ka, &kt], calc.ord(&ring.sub(&ea, &et)), kbase)
            }
            (l, r) => laws.eq_result("continuity-exp", &[&ka, &kt], l, r),
        }
    }
    laws.finish()
}

/// `d` is symmetric, vanishes on the diagonal and satisfies the strong
/// triangle inequality.
pub fn metric_laws<R: IdRing>(ring: &R, samples: usize, seed: u64) -> LawSuite {
    let calc = Calculus::new(ring);
    let names = ["metric-diagonal", "metric-symmetric", "metric-ultrametric"];
    let mut laws = Laws::new(calc, &names);
    for i in 0..samples as u64 {
        let mut rng = sample_rng(seed, i);
        let a = ring.sample(&mut rng);
        let b = ring.sample(&mut rng);
        let c = ring.sample(&mut rng);
        laws.next_sample();
        let o = calc.ord(&ring.sub(&a, &a));
        laws.order_at_least("metric-diagonal", &[&a], o, ring.trunc() + 1);
        let (ab, ba) = (calc.ord(&ring.sub(&a, &b)), calc.ord(&ring.sub(&b, &a)));
        let i = laws.index("metric-symmetric");
        let precision = ring.trunc() + 1;
        laws.tallies[i].observe(ab == ba, precision, || Witness {
            inputs: vec![ring.format(&a), ring.format(&b)],
            lhs: ab.to_string(),
            rhs: ba.to_string(),
            window: 0,
        });
        let bc = calc.ord(&ring.sub(&b, &c));
        if let (Some(x), Some(y)) = (ab.lower_bound(), bc.lower_bound()) {
            let ac = calc.ord(&ring.sub(&a, &c));
            laws.order_at_least("metric-ultrametric", &[&a, &b, &c], ac, x.min(y));
        }
    }
    laws.finish()
}

/// Functorial composition against the integro-differential one, through
/// their generating series at bound `trunc`.
pub fn compare_compositions<F, G>(outer: F, inner: G, trunc: usize) -> Result<CompositionComparison>
where
    F: Fn(usize) -> Result<SpeciesPoly>,
    G: Fn(usize) -> Result<SpeciesPoly>,
{
    let functorial = functorial_compose_series(&outer, &inner, trunc)?;
    let ring = SetSpeciesRing::analytic(trunc);
    let calc = Calculus::new(&ring);
    let composed = calc.id_compose(&outer(trunc)?, &inner(trunc)?)?;
    Ok(compare_series(&functorial, &gs(&composed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{LinSpecies, LinearSpeciesRing};
    use crate::rational::{int, ratio};

    const N: usize = 8;

    fn set() -> SetSpeciesRing {
        SetSpeciesRing::analytic(N)
    }

    #[test]
    fn orders() {
        let ring = set();
        let calc = Calculus::new(&ring);
        let x = SpeciesPoly::x(N);
        assert_eq!(calc.ord(&x.pow(2)), Order::Finite(2));
        assert_eq!(calc.ord(&SpeciesPoly::zero(N)), Order::Infinite);
        let phi = SpeciesPoly::cycles(N);
        assert_eq!(calc.dist(&phi, &(&phi + &x.pow(3))), Distance::Exact(ratio(1, 8)));
        let lin = LinearSpeciesRing::new(N);
        let lcalc = Calculus::new(&lin);
        let f = LinSpecies::from_i64(N, &[0, 0, 0, 4, 1]);
        assert_eq!(lcalc.ord(&f), f.order());
    }

    #[test]
    fn divided_powers() {
        let ring = set();
        let calc = Calculus::new(&ring);
        let x = SpeciesPoly::x(N);
        assert_eq!(calc.divided_power(&x, 3), x.pow(3).scale(&ratio(1, 6)));
        assert_eq!(calc.divided_power(&x, 0), SpeciesPoly::one(N));
        let e = SpeciesPoly::combinatorial_exp(N);
        let j = calc.initialize(&e);
        assert!(calc.divided_power(&e, 2).eq_within(&j.pow(2).scale(&ratio(1, 2))));
    }

    #[test]
    fn exp_and_log() {
        let ring = set();
        let calc = Calculus::new(&ring);
        let x = SpeciesPoly::x(N);
        let ex = SpeciesPoly::analytic_exp(N, &int(1));
        assert!(calc.exp(&x).unwrap().eq_within(&ex));
        assert_eq!(calc.exp(&SpeciesPoly::zero(N)).unwrap(), SpeciesPoly::one(N));
        assert!(calc.exp(&(&x + &x)).unwrap().eq_within(&calc.exp(&x).unwrap().pow(2)));
        assert!(matches!(calc.exp(&SpeciesPoly::one(N)), Err(Error::Domain(_))));
        assert!(calc.log(&ex).unwrap().eq_within(&x));
        assert!(calc.log(&SpeciesPoly::combinatorial_exp(N)).unwrap().eq_within(&x));
        assert!(calc.log(&SpeciesPoly::one(N)).unwrap().is_zero());
        assert!(matches!(calc.log(&x), Err(Error::Domain(_))));
        let two = SpeciesPoly::constant(N, int(2));
        assert!(calc.pow(&ex, &two).unwrap().eq_within(&SpeciesPoly::analytic_exp(N, &int(2))));
        assert!(calc.pow(&ex, &SpeciesPoly::zero(N)).unwrap().eq_within(&SpeciesPoly::one(N)));
    }

    #[test]
    fn composition() {
        let ring = set();
        let calc = Calculus::new(&ring);
        let x = SpeciesPoly::x(N);
        let c3 = SpeciesPoly::cycle_species(N, 3);
        assert!(calc.id_compose(&c3, &x).unwrap().eq_within(&c3));
        let psi = x.pow(2).scale(&int(3));
        assert!(calc.id_compose(&SpeciesPoly::one(N), &psi).unwrap().eq_within(&SpeciesPoly::one(N)));
        let phi = SpeciesPoly::cycles(N);
        let e = ring.evaluate(&phi);
        assert!(calc.id_compose(&phi, &SpeciesPoly::zero(N)).unwrap().eq_within(&e));
        assert!(matches!(calc.id_compose(&phi, &SpeciesPoly::one(N)), Err(Error::Domain(_))));
    }

    #[test]
    fn certification() {
        let ring = set();
        assert!(Calculus::certify(&ring, 10, 0).is_ok());
        let bad = SetSpeciesRing::new(crate::towers::DifferentialTower::combinatorial(N));
        assert!(matches!(Calculus::certify(&bad, 20, 0), Err(Error::Certification(_))));
    }

    #[test]
    fn suites_on_set_species() {
        let ring = SetSpeciesRing::analytic(6);
        for suite in [
            divided_power_laws(&ring, 10, 1),
            exp_log_laws(&ring, 10, 1),
            exponentiation_laws(&ring, 5, 1),
            composition_laws(&ring, 5, 1),
            continuity_laws(&ring, 10, 1),
            metric_laws(&ring, 10, 1),
        ] {
            assert!(suite.holds(), "{suite}");
        }
    }
}
