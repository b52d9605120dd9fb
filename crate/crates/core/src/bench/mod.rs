//! Seeded experiment harness: instance generation, phase-transition and
//! noise sweeps, convergence traces with bound audits, and an oracle
//! least-squares baseline.
//!
//! Every random draw is derived from `(seed, M, s, trial)` so sweeps are
//! reproducible bit for bit regardless of thread scheduling.

mod config;
mod instance;
mod oracle;
mod sweep;
mod trace;

pub use config::{ExperimentConfig, RescaleMode, SignalKind};
pub use instance::{make_instance, make_noise, make_operator, make_signal, rescale_order, rip_order, trial_seed, Instance};
pub use oracle::{oracle_recover, OracleEstimate};
pub use sweep::{
    bound_at, least_squares_slope, relative_error, run_noise_sweep, run_noise_sweep_with,
    run_phase_transition, run_phase_transition_with, run_trial, success_rates, write_records,
    CellSummary, TrialRecord, AUDIT_TOLERANCE, RECORD_HEADER,
};
pub use trace::{run_convergence_trace, trace_instance, ConvergenceTrace, TraceRecord, TRACE_HEADER};
