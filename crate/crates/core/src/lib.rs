//! Landscape analysis for objectives of the form
//! `F(U) = Σ_m ω_m Tr[U ρ_m U^† O_m]` over the unitary group.
//!
//! The crate is generic over the real scalar ([`Real`], implemented for
//! `f32` and `f64`); the aliases at the crate root fix it to `f64`, which is
//! what the default tolerances are calibrated for.

pub mod bundled;
pub mod catalog;
pub mod ensemble;
pub mod error;
pub mod export;
pub mod io;
pub mod landscape;
pub mod linalg;
pub mod optimizer;
#[cfg(test)]
mod properties;
pub mod random;
pub mod scalar;
pub mod traps;

pub use error::{Error, Result};
pub use scalar::Real;

/// Complex `f64` matrix.
pub type Matrix = linalg::CMatrix<f64>;
/// Real `f64` matrix.
pub type RealMatrix = linalg::RMatrix<f64>;
pub type Problem = ensemble::EnsembleProblem<f64>;
pub type Term = ensemble::Term<f64>;
pub type StructureReport = ensemble::StructureReport<f64>;
pub type Report = landscape::CriticalReport<f64>;
pub type Tolerances = landscape::Tolerances<f64>;
pub type Decomposition = catalog::BlockDecomposition<f64>;
pub type Point = catalog::PermutationPoint<f64>;
pub type Certificate = traps::TrapCertificate<f64>;
pub type Census = traps::TrapCensus<f64>;
pub type Run = optimizer::RunRecord<f64>;
pub type Survey = optimizer::CriticalSurvey<f64>;
