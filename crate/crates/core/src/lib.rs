//! Dirichlet characters and their maximal partial sums, pretentious distances,
//! Gauss sums, truncated Euler products and mean-value bound checks.
//!
//! Every bound check returns a [`BoundReport`] carrying both sides of the
//! inequality and their ratio. Implicit constants are never asserted here; the
//! callers freeze them against baselines.

pub mod angle;
pub mod arith;
pub mod charsum;
pub mod dirichlet;
pub mod euler;
pub mod extremal;
pub mod halasz;
pub mod pretentious;
pub mod quadrature;
pub mod report;
pub mod sieve;

mod error;

pub use angle::Angle;
pub use charsum::{ArcApprox, ArcClass, MaxSumResult};
pub use dirichlet::{build_group, enumerate_characters, CharacterFilter, CharacterInvariants, DirichletCharacter, DirichletGroup};
pub use error::{Error, Result};
pub use euler::MertensAPResult;
pub use extremal::PrescribedTargets;
pub use halasz::HalaszReport;
pub use num_complex::Complex64;
pub use pretentious::{BoundParams, CMFunction, DistanceResult};
pub use report::BoundReport;
