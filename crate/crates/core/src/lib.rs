//! Variance-based uncertainty relations for finite-dimensional quantum
//! systems: the usual lower bounds on products and sums of variances, and
//! reverse bounds that cap how large a sum of variances can get.
//!
//! Modules, bottom-up:
//!
//! - [`linalg`]: dense complex matrices, brackets and a Jacobi eigensolver.
//! - [`state`]: validated [`DensityMatrix`] / [`Observable`] types, moments
//!   and random instances.
//! - [`forward`]: Robertson, Schrödinger, Maccone–Pati and the
//!   auxiliary-operator ledger.
//! - [`reverse`]: reverse bounds, the N-observable phase bound and the purity
//!   estimate.
//! - [`experiments`]: figure sweeps, the randomized harness and reports.

pub mod error;
pub mod experiments;
pub mod forward;
pub mod io;
pub mod linalg;
pub mod reverse;
pub mod state;

pub use error::{Error, Result};
pub use forward::{BoundLedger, BranchedLowerBound, LedgerEntry};
pub use linalg::{Complex, ComplexMatrix};
pub use reverse::{PhaseVector, ReverseBoundResult, SignBranch};
pub use state::{DensityMatrix, Observable, RngStream};
