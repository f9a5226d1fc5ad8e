//! Non-asymptotic Berry-Esseen bounds for sums of random variables with a
//! dependency graph, plus exact small-instance oracles and seeded Monte Carlo
//! certification.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod model;
pub mod numeric;
pub mod par;
pub mod cumulants;
pub mod fourier;
pub mod bounds;
pub mod generators;
pub mod montecarlo;
pub mod applications;

pub use error::{Error, Result};
pub use model::{
    derive_profile, sigma, xi, Atom, CenteringChoice, DependencyGraph, DiscreteFamily, DiscreteLaw,
    FamilyJson, MomentEntry, MomentProfile,
};
