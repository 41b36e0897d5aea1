//! The interface shared by every integro-differential ring in the crate.

use std::fmt::Debug;

use num_bigint::BigInt;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::rational::Rational;

/// A commutative ring with a derivation, a section of it, and the induced
/// evaluation, all computed on truncated representatives.
///
/// Elements carry their own precision: every coefficient of degree below
/// [`IdRing::precision`] is exact. Equality is equality below the common
/// precision.
pub trait IdRing {
    type Elem: Clone + Debug;

    fn name(&self) -> String;

    /// Truncation bound `N`.
    fn trunc(&self) -> usize;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, n: &BigInt) -> Self::Elem;

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;

    /// Scalar multiple; fails where the ring has no such element
    /// (integer-count rings and non-integral scalars).
    fn scale(&self, a: &Self::Elem, c: &Rational) -> Result<Self::Elem>;

    fn derive(&self, a: &Self::Elem) -> Self::Elem;
    fn integrate(&self, a: &Self::Elem) -> Self::Elem;
    fn evaluate(&self, a: &Self::Elem) -> Self::Elem;

    /// False when the ring's evaluation is only the formal projection
    /// `id - ∫∂` rather than a genuine evaluation.
    fn has_evaluation(&self) -> bool {
        true
    }

    fn is_unit(&self, a: &Self::Elem) -> bool;
    fn inverse(&self, a: &Self::Elem) -> Result<Self::Elem>;

    /// Every coefficient of degree below this is exact.
    fn precision(&self, a: &Self::Elem) -> usize;

    /// Every known coefficient vanishes.
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn eq_within(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.is_zero(&self.sub(a, b))
    }

    /// Precision at which `a` and `b` are compared.
    fn common_precision(&self, a: &Self::Elem, b: &Self::Elem) -> usize {
        self.precision(a).min(self.precision(b))
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::Elem;

    /// A random invertible element.
    fn sample_unit(&self, rng: &mut ChaCha8Rng) -> Self::Elem;

    fn format(&self, a: &Self::Elem) -> String;

    fn scale_int(&self, a: &Self::Elem, n: &BigInt) -> Self::Elem {
        self.mul(a, &self.from_int(n))
    }

    fn pow(&self, a: &Self::Elem, k: usize) -> Self::Elem {
        (0..k).fold(self.one(), |acc, _| self.mul(&acc, a))
    }

    fn nth_derivative(&self, a: &Self::Elem, n: usize) -> Self::Elem {
        (0..n).fold(a.clone(), |acc, _| self.derive(&acc))
    }

    /// The initialization `J = ∫ ∘ ∂`.
    fn initialize(&self, a: &Self::Elem) -> Self::Elem {
        self.integrate(&self.derive(a))
    }

    /// A random element of `ker E`.
    fn sample_kernel(&self, rng: &mut ChaCha8Rng) -> Self::Elem {
        let a = self.sample(rng);
        self.sub(&a, &self.evaluate(&a))
    }
}

/// Deterministic per-sample generator: sample `i` depends only on the seed
/// and on `i`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
