//! Crystal-growth / last-passage-percolation workbench on locally finite
//! posets with independent exponential weights.
//!
//! The growth process adds an available cell alpha at rate lambda_alpha; the
//! passage time tau_A of a finite lower set A equals the maximal path sum of
//! exponential weights over the maximal paths of A. This crate provides:
//!
//! - the poset families (lattice, free words, abelian cones, columnar
//!   layers, explicit cover DAGs) and their lower-set machinery,
//! - an exact oracle for mean, variance, higher moments, MGF and CDF of
//!   tau_A via the memoized backward recursion over sub-lower-sets,
//! - Monte Carlo simulation through both the jump-chain and the static
//!   weight constructions, with reproducible per-replica streams,
//! - verification of the closed-form bounds (tail, variance, mean, MGF,
//!   higher/central moments, variance lower bounds) against the oracle,
//! - the monoid layer: set products, steadiness, superadditivity,
//!   entropy limits and shape-function traces,
//! - a configuration-driven experiment harness with deterministic,
//!   machine-readable report emission.

pub mod bounds;
pub mod element;
pub mod error;
pub mod harness;
pub mod lowerset;
pub mod mc;
pub mod monoid;
pub mod numeric;
pub mod oracle;
pub mod paths;
pub mod poset;
pub mod rates;
pub mod tolerances;

pub use element::ElementId;
pub use error::{Error, Result};
pub use lowerset::{LowerSet, SetKey};
pub use oracle::Oracle;
pub use poset::Poset;
pub use rates::{RateMap, RateRule};
