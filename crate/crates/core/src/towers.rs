//! Differential towers, Joyal integrals and the evaluations they induce.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::{binomial, int, Rational};
use crate::ring::IdRing;
use crate::species::{random_coefficient, Monomial, SpeciesPoly};

/// A graded family `T_0 … T_N` with `T_0 = 1` and `∂T_n = T_{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialTower {
    pieces: Vec<SpeciesPoly>,
}

impl DifferentialTower {
    /// Validates the tower invariants.
    pub fn new(pieces: Vec<SpeciesPoly>) -> Result<Self> {
        let trunc = pieces
            .first()
            .map(SpeciesPoly::trunc)
            .ok_or_else(|| Error::InvalidTower("empty tower".into()))?;
        if pieces.len() != trunc + 1 {
            return Err(Error::InvalidTower(format!(
                "expected {} pieces, got {}",
                trunc + 1,
                pieces.len()
            )));
        }
        if pieces[0] != SpeciesPoly::one(trunc) {
            return Err(Error::InvalidTower("T_0 must be 1".into()));
        }
        for (n, t) in pieces.iter().enumerate() {
            if t.trunc() != trunc || !t.is_exact() || !t.is_homogeneous_of_degree(n) {
                return Err(Error::InvalidTower(format!("T_{n} is not homogeneous of degree {n}")));
            }
            if n > 0 && !t.derive().eq_within(&pieces[n - 1]) {
                return Err(Error::InvalidTower(format!("∂T_{n} differs from T_{}", n - 1)));
            }
        }
        Ok(DifferentialTower { pieces })
    }

    /// The combinatorial exponential `E`, with `T_n = E_n`.
    pub fn combinatorial(trunc: usize) -> Self {
        DifferentialTower {
            pieces: (0..=trunc).map(|n| SpeciesPoly::set_species(trunc, n)).collect(),
        }
    }

    /// The analytic exponential `e^X`, with `T_n = X^n/n!`.
    pub fn analytic(trunc: usize) -> Self {
        let e = SpeciesPoly::analytic_exp(trunc, &Rational::one());
        DifferentialTower { pieces: e.components() }
    }

    /// `T = K·E`, i.e. `T_n = Σ K_i E_{n-i}`.
    pub fn from_constant(k: &SpeciesPoly) -> Result<Self> {
        if !k.is_exact() {
            return Err(Error::InvalidConstant(format!("{k} is only known below degree {}", k.precision())));
        }
        if !k.is_diff_constant() {
            return Err(Error::InvalidConstant(format!("{k} is not a differential constant")));
        }
        if !k.constant_term().is_one() {
            return Err(Error::InvalidConstant(format!("{k} has constant term other than 1")));
        }
        let trunc = k.trunc();
        let ks = k.components();
        let pieces = (0..=trunc)
            .map(|n| {
                (0..=n).fold(SpeciesPoly::zero(trunc), |acc, i| {
                    acc + &ks[i] * &SpeciesPoly::set_species(trunc, n - i)
                })
            })
            .collect();
        Ok(DifferentialTower { pieces })
    }

    /// Inverse of [`DifferentialTower::from_constant`]:
    /// `K_n = T_n - Σ_{i<n} K_i E_{n-i}`.
    pub fn constant(&self) -> SpeciesPoly {
        let trunc = self.trunc();
        let mut ks: Vec<SpeciesPoly> = Vec::with_capacity(trunc + 1);
        for n in 0..=trunc {
            let lower = (0..n).fold(SpeciesPoly::zero(trunc), |acc, i| {
                acc + &ks[i] * &SpeciesPoly::set_species(trunc, n - i)
            });
            ks.push(&self.pieces[n] - &lower);
        }
        ks.into_iter().fold(SpeciesPoly::zero(trunc), |acc, k| acc + k)
    }

    pub fn trunc(&self) -> usize {
        self.pieces.len() - 1
    }

    pub fn pieces(&self) -> &[SpeciesPoly] {
        &self.pieces
    }

    pub fn piece(&self, n: usize) -> &SpeciesPoly {
        &self.pieces[n]
    }

    /// `T = Σ T_n` as a jet.
    pub fn as_species(&self) -> SpeciesPoly {
        self.pieces.iter().fold(SpeciesPoly::zero(self.trunc()), |acc, t| acc + t)
    }

    /// The Joyal integral `∫_T Φ = Σ_{i≥1} (-1)^{i-1} T_i Φ^{(i-1)}`.
    pub fn integrate(&self, phi: &SpeciesPoly) -> SpeciesPoly {
        let trunc = self.trunc();
        assert_eq!(phi.trunc(), trunc, "truncation mismatch");
        let mut acc = SpeciesPoly::zero(trunc);
        let mut deriv = phi.clone();
        for i in 1..=trunc {
            if deriv.is_zero() {
                break;
            }
            let term = &self.pieces[i] * &deriv;
            acc = if i % 2 == 1 { acc + term } else { acc - term };
            deriv = deriv.derive();
        }
        acc.with_precision(phi.precision() + 1)
    }

    /// The evaluation `E_T(Φ) = Σ_n (-1)^n T_n Φ^{(n)} = Φ - ∫_T ∂Φ`.
    pub fn evaluate(&self, phi: &SpeciesPoly) -> SpeciesPoly {
        let trunc = self.trunc();
        assert_eq!(phi.trunc(), trunc, "truncation mismatch");
        let mut acc = phi.clone();
        let mut deriv = phi.derive();
        for n in 1..=trunc {
            if deriv.is_zero() {
                break;
            }
            let term = &self.pieces[n] * &deriv;
            acc = if n % 2 == 1 { acc - term } else { acc + term };
            deriv = deriv.derive();
        }
        acc.with_precision(phi.precision())
    }
}

pub fn joyal_integral(tower: &DifferentialTower, phi: &SpeciesPoly) -> SpeciesPoly {
    tower.integrate(phi)
}

pub fn evaluate_tower(tower: &DifferentialTower, phi: &SpeciesPoly) -> SpeciesPoly {
    tower.evaluate(phi)
}

/// Outcome of the two analytic-exponential tests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentialTest {
    /// `F ≠ 0` and `F_p F_q = C(p+q, p) F_{p+q}` for `p + q` within the window.
    pub binomial: bool,
    /// `F = e^{F_1}` within the window.
    pub exponential_form: bool,
    /// Coefficient of `X` in `F`.
    pub lambda: Rational,
}

impl ExponentialTest {
    pub fn agree(&self) -> bool {
        self.binomial == self.exponential_form
    }

    /// Analytic exponential: both tests pass and `λ ≠ 0`.
    pub fn is_analytic_exponential(&self) -> bool {
        self.binomial && self.exponential_form && !self.lambda.is_zero()
    }
}

pub fn exponential_test(f: &SpeciesPoly) -> Result<ExponentialTest> {
    let window = f.window().unwrap_or(0);
    if f.precision() < 3 {
        return Err(Error::WindowExceeded { degree: 2, precision: f.precision() });
    }
    let trunc = f.trunc();
    let parts = f.components();
    let mut binomial_ok = !parts[0].is_zero();
    'outer: for p in 0..=window {
        for q in p..=window - p {
            let lhs = &parts[p] * &parts[q];
            let rhs = parts[p + q].scale(&Rational::from_integer(binomial(p + q, p)));
            if !lhs.eq_within(&rhs) {
                binomial_ok = false;
                break 'outer;
            }
        }
    }
    let lambda = f.coeff(&Monomial::from_generator(crate::species::Generator::X));
    let candidate = SpeciesPoly::analytic_exp(trunc, &lambda).with_precision(f.precision());
    Ok(ExponentialTest {
        binomial: binomial_ok,
        exponential_form: f.eq_within(&candidate),
        lambda,
    })
}

pub fn is_analytic_exponential(f: &SpeciesPoly) -> Result<bool> {
    let test = exponential_test(f)?;
    if !test.agree() {
        return Err(Error::Invariant(format!("exponential tests disagree on {f}")));
    }
    Ok(test.is_analytic_exponential())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchingMode {
    /// `d_ω(Φ) = ωΦ'`.
    D,
    /// `P_ω(Φ) = ω ∫_{e^X} Φ`.
    P,
}

/// The matching family indexed by differential constants `ω`.
pub fn matching_ops(omega: &SpeciesPoly, mode: MatchingMode, phi: &SpeciesPoly) -> Result<SpeciesPoly> {
    if !omega.is_diff_constant() {
        return Err(Error::InvalidConstant(format!("{omega} is not a differential constant")));
    }
    if omega.trunc() != phi.trunc() {
        return Err(Error::TruncationMismatch { left: omega.trunc(), right: phi.trunc() });
    }
    Ok(match mode {
        MatchingMode::D => omega * &phi.derive(),
        MatchingMode::P => omega * &DifferentialTower::analytic(phi.trunc()).integrate(phi),
    })
}

/// Set species with the combinatorial derivation and the Joyal integral of
/// a chosen tower.
#[derive(Clone, Debug)]
pub struct SetSpeciesRing {
    tower: DifferentialTower,
}

impl SetSpeciesRing {
    pub fn new(tower: DifferentialTower) -> Self {
        SetSpeciesRing { tower }
    }

    /// The canonical choice `T = e^X`.
    pub fn analytic(trunc: usize) -> Self {
        Self::new(DifferentialTower::analytic(trunc))
    }

    pub fn tower(&self) -> &DifferentialTower {
        &self.tower
    }
}

impl IdRing for SetSpeciesRing {
    type Elem = SpeciesPoly;

    fn name(&self) -> String {
        "set".into()
    }

    fn trunc(&self) -> usize {
        self.tower.trunc()
    }

    fn zero(&self) -> SpeciesPoly {
        SpeciesPoly::zero(self.trunc())
    }

    fn one(&self) -> SpeciesPoly {
        SpeciesPoly::one(self.trunc())
    }

    fn from_int(&self, n: &BigInt) -> SpeciesPoly {
        SpeciesPoly::constant(self.trunc(), Rational::from_integer(n.clone()))
    }

    fn add(&self, a: &SpeciesPoly, b: &SpeciesPoly) -> SpeciesPoly {
        a + b
    }

    fn sub(&self, a: &SpeciesPoly, b: &SpeciesPoly) -> SpeciesPoly {
        a - b
    }

    fn mul(&self, a: &SpeciesPoly, b: &SpeciesPoly) -> SpeciesPoly {
        a * b
    }

    fn neg(&self, a: &SpeciesPoly) -> SpeciesPoly {
        -a
    }

    fn scale(&self, a: &SpeciesPoly, c: &Rational) -> Result<SpeciesPoly> {
        Ok(a.scale(c))
    }

    fn scale_int(&self, a: &SpeciesPoly, n: &BigInt) -> SpeciesPoly {
        a.scale(&Rational::from_integer(n.clone()))
    }

    fn derive(&self, a: &SpeciesPoly) -> SpeciesPoly {
        a.derive()
    }

    fn integrate(&self, a: &SpeciesPoly) -> SpeciesPoly {
        self.tower.integrate(a)
    }

    fn evaluate(&self, a: &SpeciesPoly) -> SpeciesPoly {
        self.tower.evaluate(a)
    }

    fn is_unit(&self, a: &SpeciesPoly) -> bool {
        a.precision() > 0 && !a.constant_term().is_zero()
    }

    fn inverse(&self, a: &SpeciesPoly) -> Result<SpeciesPoly> {
        a.mult_inverse()
    }

    fn precision(&self, a: &SpeciesPoly) -> usize {
        a.precision()
    }

    fn is_zero(&self, a: &SpeciesPoly) -> bool {
        a.is_zero()
    }

    fn eq_within(&self, a: &SpeciesPoly, b: &SpeciesPoly) -> bool {
        a.eq_within(b)
    }

    fn pow(&self, a: &SpeciesPoly, k: usize) -> SpeciesPoly {
        a.pow(k)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> SpeciesPoly {
        SpeciesPoly::random(self.trunc(), rng)
    }

    fn sample_unit(&self, rng: &mut ChaCha8Rng) -> SpeciesPoly {
        let a = SpeciesPoly::random(self.trunc(), rng);
        let c0 = a.constant_term();
        let shift = random_coefficient(rng) - c0;
        a + SpeciesPoly::constant(self.trunc(), shift)
    }

    fn format(&self, a: &SpeciesPoly) -> String {
        a.to_string()
    }
}

/// A random differential constant with constant term 1, built from the
/// basis `X^i - i C_i` of the nonscalar constants.
pub fn random_constant(trunc: usize, rng: &mut ChaCha8Rng) -> SpeciesPoly {
    use rand::Rng;
    let mut k = SpeciesPoly::one(trunc);
    for i in 3..=trunc {
        if rng.gen_bool(0.5) {
            let x = SpeciesPoly::x(trunc);
            let basis = x.pow(i) - SpeciesPoly::cycle_species(trunc, i).scale(&int(i as i64));
            k = k + basis.scale(&random_coefficient(rng));
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    const N: usize = 8;

    fn x() -> SpeciesPoly {
        SpeciesPoly::x(N)
    }

    fn k_example() -> SpeciesPoly {
        SpeciesPoly::one(N) + x().pow(3) - SpeciesPoly::cycle_species(N, 3).scale(&int(3))
    }

    #[test]
    fn towers_from_constants() {
        assert_eq!(
            DifferentialTower::from_constant(&SpeciesPoly::one(N)).unwrap(),
            DifferentialTower::combinatorial(N)
        );
        let t = DifferentialTower::from_constant(&k_example()).unwrap();
        let expected = SpeciesPoly::set_species(N, 3) + x().pow(3)
            - SpeciesPoly::cycle_species(N, 3).scale(&int(3));
        assert_eq!(t.piece(3), &expected);
        assert!(DifferentialTower::new(t.pieces().to_vec()).is_ok());
        assert!(matches!(
            DifferentialTower::from_constant(&x()),
            Err(Error::InvalidConstant(_))
        ));
    }

    #[test]
    fn tower_constants() {
        assert_eq!(DifferentialTower::combinatorial(N).constant(), SpeciesPoly::one(N));
        let k = DifferentialTower::analytic(N).constant();
        let k2 = k.graded_component(2).unwrap();
        let expected = x().pow(2).scale(&ratio(1, 2)) - SpeciesPoly::set_species(N, 2);
        assert_eq!(k2, expected);
        assert_eq!(DifferentialTower::from_constant(&k).unwrap(), DifferentialTower::analytic(N));
        assert_eq!(DifferentialTower::from_constant(&k_example()).unwrap().constant(), k_example());
    }

    #[test]
    fn joyal_integrals() {
        let ex = DifferentialTower::analytic(N);
        let half_sq = x().pow(2).scale(&ratio(1, 2));
        assert_eq!(ex.integrate(&half_sq), x().pow(3).scale(&ratio(1, 6)));
        let e = DifferentialTower::combinatorial(N);
        assert_eq!(e.integrate(&x()), x().pow(2) - SpeciesPoly::set_species(N, 2));
        assert!(ex.integrate(&SpeciesPoly::zero(N)).is_zero());
    }

    #[test]
    fn evaluations() {
        let ex = DifferentialTower::analytic(N);
        let c3 = SpeciesPoly::cycle_species(N, 3);
        assert_eq!(ex.evaluate(&c3).to_string(), "-1/3*X^3 + C3");
        let e = DifferentialTower::combinatorial(N);
        assert_eq!(
            e.evaluate(&x().pow(2)),
            SpeciesPoly::set_species(N, 2).scale(&int(2)) - x().pow(2)
        );
        assert_eq!(ex.evaluate(&SpeciesPoly::one(N)), SpeciesPoly::one(N));
    }

    #[test]
    fn exponential_detector() {
        let ex = SpeciesPoly::analytic_exp(N, &int(1));
        assert!(is_analytic_exponential(&ex).unwrap());
        assert!(is_analytic_exponential(&SpeciesPoly::analytic_exp(N, &ratio(-1, 2))).unwrap());
        assert!(!is_analytic_exponential(&SpeciesPoly::combinatorial_exp(N)).unwrap());
        assert!(!is_analytic_exponential(&SpeciesPoly::one(N)).unwrap());
        assert!(!is_analytic_exponential(&SpeciesPoly::zero(N)).unwrap());
        assert!(exponential_test(&SpeciesPoly::x(1)).is_err());
    }

    #[test]
    fn matching_examples() {
        let phi = SpeciesPoly::one(N);
        let p = matching_ops(&k_example(), MatchingMode::P, &phi).unwrap();
        let expected = x() + x().pow(4) - (&x() * &SpeciesPoly::cycle_species(N, 3)).scale(&int(3));
        assert_eq!(p, expected);
        let two = SpeciesPoly::constant(N, int(2));
        let c3 = SpeciesPoly::cycle_species(N, 3);
        let round = matching_ops(&two, MatchingMode::D, &matching_ops(&two, MatchingMode::P, &c3).unwrap())
            .unwrap();
        assert!(round.eq_within(&c3.scale(&int(4))));
        assert!(matching_ops(&x(), MatchingMode::D, &phi).is_err());
    }
}
