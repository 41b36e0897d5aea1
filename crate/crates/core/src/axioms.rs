//! Sample-based checkers for the integro-differential axioms.
//!
//! A checker never proves anything. It evaluates both sides of an identity
//! on seeded samples and compares them below their common precision. A
//! comparison whose window falls below `N - 3` is counted as inconclusive.

use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::error::Result;
use crate::rational::{format_rational, Rational};
use crate::ring::{sample_rng, IdRing};

/// The identities a checker can test. `λ` is the weight.
#[derive(Clone, Debug)]
pub enum Axiom<E> {
    /// `∂ ∫ x = x`.
    Section,
    /// `∂(xy) = ∂x·y + x·∂y + λ ∂x·∂y`.
    Leibniz(Rational),
    /// `∫x·∫y = ∫(x∫y) + ∫(y∫x) + λ∫(xy)`.
    RotaBaxter(Rational),
    /// `∫(∂x·∫y) = x∫y - ∫(xy) - λ∫(∂x·y)`.
    HybridRb(Rational),
    /// `E(xy) = E(x)E(y)`.
    EvalMultiplicative,
    /// `P_α(x)P_β(y) = P_α(x P_β(y)) + P_β(P_α(x) y)` with `P_ω = ω∫`,
    /// for every ordered pair of the listed constants.
    MatchingRb(Vec<E>),
    /// `J(x)J(y) + J(xy) = J(x)y + xJ(y)` for `J = ∫∂`.
    InitializationWeight,
}

impl<E> Axiom<E> {
    pub fn name(&self) -> &'static str {
        match self {
            Axiom::Section => "section",
            Axiom::Leibniz(_) => "leibniz",
            Axiom::RotaBaxter(_) => "rota-baxter",
            Axiom::HybridRb(_) => "hybrid-rb",
            Axiom::EvalMultiplicative => "eval-multiplicative",
            Axiom::MatchingRb(_) => "matching-rb",
            Axiom::InitializationWeight => "initialization",
        }
    }

    pub fn lambda(&self) -> Option<&Rational> {
        match self {
            Axiom::Leibniz(l) | Axiom::RotaBaxter(l) | Axiom::HybridRb(l) => Some(l),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub inputs: Vec<String>,
    pub lhs: String,
    pub rhs: String,
    /// Largest degree compared.
    pub window: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub axiom: String,
    pub lambda: Option<String>,
    pub status: Status,
    pub holds: bool,
    pub samples: usize,
    pub comparisons: usize,
    pub inconclusive_count: usize,
    pub witness: Option<Witness>,
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.axiom)?;
        if let Some(l) = &self.lambda {
            write!(f, "(λ={l})")?;
        }
        write!(
            f,
            ": {} ({} comparisons, {} inconclusive)",
            self.status, self.comparisons, self.inconclusive_count
        )?;
        if let Some(w) = &self.witness {
            write!(
                f,
                "\n  inputs: {}\n  lhs: {}\n  rhs: {}\n  window: {}",
                w.inputs.join(", "),
                w.lhs,
                w.rhs,
                w.window
            )?;
        }
        Ok(())
    }
}

/// Accumulates comparisons into a report.
#[derive(Debug)]
pub struct Tally {
    axiom: String,
    lambda: Option<String>,
    min_precision: usize,
    samples: usize,
    comparisons: usize,
    inconclusive: usize,
    witness: Option<Witness>,
}

impl Tally {
    /// Comparisons need precision at least `N - 2`, i.e. window `N - 3`.
    pub fn new(axiom: impl Into<String>, lambda: Option<&Rational>, trunc: usize) -> Self {
        Tally {
            axiom: axiom.into(),
            lambda: lambda.map(format_rational),
            min_precision: trunc.saturating_sub(2),
            samples: 0,
            comparisons: 0,
            inconclusive: 0,
            witness: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.witness.is_some()
    }

    pub fn next_sample(&mut self) {
        self.samples += 1;
    }

    pub fn observe(&mut self, equal: bool, precision: usize, witness: impl FnOnce() -> Witness) {
        self.comparisons += 1;
        if precision < self.min_precision || precision == 0 {
            self.inconclusive += 1;
        } else if !equal && self.witness.is_none() {
            let mut w = witness();
            w.window = precision - 1;
            self.witness = Some(w);
        }
    }

    pub fn finish(self) -> AxiomReport {
        let conclusive = self.comparisons - self.inconclusive;
        let status = if self.witness.is_some() {
            Status::Fails
        } else if conclusive == 0 {
            Status::Inconclusive
        } else {
            Status::Holds
        };
        AxiomReport {
            axiom: self.axiom,
            lambda: self.lambda,
            status,
            holds: status == Status::Holds,
            samples: self.samples,
            comparisons: self.comparisons,
            inconclusive_count: self.inconclusive,
            witness: self.witness,
        }
    }
}

/// Compares `lhs` and `rhs` in `ring` and records the outcome.
pub fn compare<R: IdRing>(
    ring: &R,
    tally: &mut Tally,
    inputs: &[&R::Elem],
    lhs: &R::Elem,
    rhs: &R::Elem,
) {
    let precision = ring.common_precision(lhs, rhs);
    let equal = ring.eq_within(lhs, rhs);
    tally.observe(equal, precision, || Witness {
        inputs: inputs.iter().map(|e| ring.format(e)).collect(),
        lhs: ring.format(lhs),
        rhs: ring.format(rhs),
        window: 0,
    });
}

fn weighted<R: IdRing>(ring: &R, a: &R::Elem, lambda: &Rational) -> Result<R::Elem> {
    if lambda.is_integer() {
        Ok(ring.scale_int(a, lambda.numer()))
    } else {
        ring.scale(a, lambda)
    }
}

/// Both sides of the identity at `(x, y)`; several pairs for matching.
fn sides<R: IdRing>(
    ring: &R,
    axiom: &Axiom<R::Elem>,
    x: &R::Elem,
    y: &R::Elem,
) -> Result<Vec<(R::Elem, R::Elem)>> {
    let d = |a: &R::Elem| ring.derive(a);
    let i = |a: &R::Elem| ring.integrate(a);
    let m = |a: &R::Elem, b: &R::Elem| ring.mul(a, b);
    let add = |a: &R::Elem, b: &R::Elem| ring.add(a, b);
    let sub = |a: &R::Elem, b: &R::Elem| ring.sub(a, b);
    Ok(match axiom {
        Axiom::Section => vec![(d(&i(x)), x.clone())],
        Axiom::Leibniz(l) => {
            let (dx, dy) = (d(x), d(y));
            let lhs = d(&m(x, y));
            let rhs = add(&add(&m(&dx, y), &m(x, &dy)), &weighted(ring, &m(&dx, &dy), l)?);
            vec![(lhs, rhs)]
        }
        Axiom::RotaBaxter(l) => {
            let (ix, iy) = (i(x), i(y));
            let lhs = m(&ix, &iy);
            let rhs = add(
                &add(&i(&m(x, &iy)), &i(&m(y, &ix))),
                &weighted(ring, &i(&m(x, y)), l)?,
            );
            vec![(lhs, rhs)]
        }
        Axiom::HybridRb(l) => {
            let (dx, iy) = (d(x), i(y));
            let lhs = i(&m(&dx, &iy));
            let rhs = sub(
                &sub(&m(x, &iy), &i(&m(x, y))),
                &weighted(ring, &i(&m(&dx, y)), l)?,
            );
            vec![(lhs, rhs)]
        }
        Axiom::EvalMultiplicative => {
            let e = |a: &R::Elem| ring.evaluate(a);
            vec![(e(&m(x, y)), m(&e(x), &e(y)))]
        }
        Axiom::MatchingRb(omegas) => {
            let p = |w: &R::Elem, a: &R::Elem| m(w, &i(a));
            let mut out = Vec::new();
            for alpha in omegas {
                for beta in omegas {
                    let (pa, pb) = (p(alpha, x), p(beta, y));
                    let lhs = m(&pa, &pb);
                    let rhs = add(&p(alpha, &m(x, &pb)), &p(beta, &m(&pa, y)));
                    out.push((lhs, rhs));
                }
            }
            out
        }
        Axiom::InitializationWeight => {
            let j = |a: &R::Elem| ring.initialize(a);
            let (jx, jy) = (j(x), j(y));
            let lhs = add(&m(&jx, &jy), &j(&m(x, y)));
            let rhs = add(&m(&jx, y), &m(x, &jy));
            vec![(lhs, rhs)]
        }
    })
}

/// Checks `axiom` on explicitly given input pairs.
pub fn check_axiom_on<R: IdRing>(
    ring: &R,
    axiom: &Axiom<R::Elem>,
    pairs: &[(R::Elem, R::Elem)],
) -> Result<AxiomReport> {
    let mut tally = Tally::new(axiom.name(), axiom.lambda(), ring.trunc());
    for (x, y) in pairs {
        tally.next_sample();
        for (lhs, rhs) in sides(ring, axiom, x, y)? {
            compare(ring, &mut tally, &[x, y], &lhs, &rhs);
        }
        if tally.failed() {
            break;
        }
    }
    Ok(tally.finish())
}

/// Checks `axiom` on `samples` seeded random pairs.
pub fn check_axiom<R: IdRing>(
    ring: &R,
    axiom: &Axiom<R::Elem>,
    samples: usize,
    seed: u64,
) -> Result<AxiomReport> {
    let pairs: Vec<(R::Elem, R::Elem)> = (0..samples as u64)
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let x = ring.sample(&mut rng);
            let y = ring.sample(&mut rng);
            (x, y)
        })
        .collect();
    check_axiom_on(ring, axiom, &pairs)
}

/// The weight-0 integro-differential suite: section, Leibniz, hybrid and
/// plain Rota-Baxter, and multiplicativity of the evaluation.
pub fn integro_differential_suite<R: IdRing>(
    ring: &R,
    samples: usize,
    seed: u64,
) -> Result<Vec<AxiomReport>> {
    let zero = Rational::zero();
    let axioms: Vec<Axiom<R::Elem>> = vec![
        Axiom::Section,
        Axiom::Leibniz(zero.clone()),
        Axiom::HybridRb(zero.clone()),
        Axiom::RotaBaxter(zero),
        Axiom::EvalMultiplicative,
    ];
    axioms.iter().map(|a| check_axiom(ring, a, samples, seed)).collect()
}

pub fn all_hold(reports: &[AxiomReport]) -> bool {
    reports.iter().all(|r| r.holds)
}
