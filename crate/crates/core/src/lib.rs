//! Exact integro-differential rings of virtual species.
//!
//! Every ring here is computed on truncated representatives: elements know
//! the degree below which their coefficients are exact, and every equality
//! is an equality below that degree.

pub mod axioms;
pub mod calculus;
pub mod error;
pub mod linear;
pub mod localization;
pub mod oracle;
pub mod rational;
pub mod ring;
pub mod series;
pub mod species;
pub mod towers;

pub use error::{Error, Result};
pub use rational::Rational;
pub use ring::IdRing;
pub use species::{Generator, Monomial, SpeciesPoly};
pub use towers::{DifferentialTower, SetSpeciesRing};
