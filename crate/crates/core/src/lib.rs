//! Matrix-free compressed sensing recovery with iterative hard thresholding.
//!
//! The crate is organised around five pieces:
//!
//! * [`operators`]: measurement operators with forward and adjoint application
//!   (dense Gaussian/Bernoulli, subsampled Walsh–Hadamard), column restriction
//!   and RIP rescaling.
//! * [`signals`]: sparse and compressible signal models, hard thresholding and
//!   best s-term errors.
//! * [`iht`]: the hard thresholding iteration, its run loop and the closed-form
//!   error and iteration bounds.
//! * [`rip`]: exact and Monte Carlo restricted isometry constants and
//!   executable checks of the lemmas the recovery guarantees rest on.
//! * [`bench`]: seeded experiment sweeps emitting CSV.

pub mod bench;
mod error;
pub mod iht;
pub mod operators;
pub mod par;
pub mod rip;
pub mod signals;

pub use error::{Error, Result};
pub use iht::{run, IhtConfig, IhtState, RecoveryReport, StopReason};
pub use operators::{IndexSet, LinearOperator, MeasurementOperator};
pub use par::Execution;
pub use rip::RipEstimate;
pub use signals::SignalVector;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
