//! The hard thresholding iteration `y ← H_s(y + Φᵀ(x − Φy))` and its run loop.
//!
//! Each step costs exactly one adjoint application (on the cached residual)
//! and one forward application (to refresh the residual for the new
//! estimate). The residual is always recomputed from scratch, never updated
//! incrementally, so `residual == x − Φ·estimate` holds after every step.

mod bounds;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use bounds::{
    error_bound_exact_sparse, error_bound_general, predicted_iterations,
    residual_tol_for_accuracy, stopping_error_bound, BoundInputs, BETA_3S_LIMIT,
    STOPPING_CONSTANT,
};

use crate::error::check_len;
use crate::operators::LinearOperator;
use crate::signals::{hard_threshold_in_place, SignalVector};
use crate::{Error, Result};

/// A run aborts once the residual norm exceeds this multiple of `‖x‖₂`.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IhtConfig {
    pub sparsity: usize,
    pub max_iters: usize,
    /// Stop once `‖x − Φy‖₂ ≤ residual_tol`.
    pub residual_tol: f64,
    #[serde(default)]
    pub trace_enabled: bool,
}

impl IhtConfig {
    pub fn new(sparsity: usize, max_iters: usize, residual_tol: f64) -> Self {
        Self {
            sparsity,
            max_iters,
            residual_tol,
            trace_enabled: false,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace_enabled = true;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.sparsity == 0 {
            return Err(Error::invalid("sparsity must be at least 1"));
        }
        if self.sparsity > n {
            return Err(Error::invalid(format!(
                "sparsity {} exceeds signal length {n}",
                self.sparsity
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.residual_tol >= 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::invalid(format!(
                "residual_tol must be a nonnegative finite number, got {}",
                self.residual_tol
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IhtState {
    estimate: SignalVector,
    iteration: usize,
    residual: Vec<f64>,
    residual_norm: f64,
}

impl IhtState {
    /// `y⁰ = 0`, so the residual is `x` itself.
    pub fn initial<O: LinearOperator + ?Sized>(op: &O, x: &[f64]) -> Result<Self> {
        check_len("measurements", op.rows(), x.len())?;
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("measurement {i} is not finite")));
        }
        Ok(Self {
            estimate: SignalVector::zeros(op.cols()),
            iteration: 0,
            residual: x.to_vec(),
            residual_norm: crate::norm2(x),
        })
    }

    pub fn estimate(&self) -> &SignalVector {
        &self.estimate
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// `x − Φ·estimate`.
    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    fn check_shape<O: LinearOperator + ?Sized>(&self, op: &O, x: &[f64], s: usize) -> Result<()> {
        check_len("estimate", op.cols(), self.estimate.len())?;
        check_len("residual", op.rows(), self.residual.len())?;
        check_len("measurements", op.rows(), x.len())?;
        if s > op.cols() {
            return Err(Error::invalid(format!("sparsity {s} exceeds signal length {}", op.cols())));
        }
        Ok(())
    }

    /// One iteration in place. `scratch` must have length N.
    fn advance<O: LinearOperator + ?Sized>(
        &mut self,
        op: &O,
        x: &[f64],
        s: usize,
        scratch: &mut Vec<f64>,
    ) -> Result<()> {
        let next = self.iteration + 1;
        op.apply_adjoint_into(&self.residual, scratch)?;
        for (a, y) in scratch.iter_mut().zip(self.estimate.as_slice()) {
            *a += y;
        }
        if scratch.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric {
                iteration: next,
                reason: "gradient step produced a non-finite value".into(),
            });
        }
        hard_threshold_in_place(scratch, s);
        std::mem::swap(self.estimate.values_mut(), scratch);

        op.apply_into(self.estimate.as_slice(), &mut self.residual)?;
        for (r, xi) in self.residual.iter_mut().zip(x) {
            *r = xi - *r;
        }
        self.residual_norm = crate::norm2(&self.residual);
        if !self.residual_norm.is_finite() {
            return Err(Error::Numeric {
                iteration: next,
                reason: "residual is not finite".into(),
            });
        }
        self.iteration = next;
        Ok(())
    }
}

/// A single iteration from `state`, returning the next state.
pub fn iht_step<O: LinearOperator + ?Sized>(
    state: &IhtState,
    op: &O,
    x: &[f64],
    s: usize,
) -> Result<IhtState> {
    state.check_shape(op, x, s)?;
    let mut next = state.clone();
    let mut scratch = vec![0.0; op.cols()];
    next.advance(op, x, s, &mut scratch)?;
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ResidualTol,
    MaxIters,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::ResidualTol => "residual_tol",
            StopReason::MaxIters => "max_iters",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub residual_norm: f64,
    /// `‖truth − yⁿ‖₂` when a ground truth was supplied.
    pub error_norm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub estimate: SignalVector,
    pub iterations_used: usize,
    pub stop_reason: StopReason,
    pub residual_norm_final: f64,
    /// Row 0 is the zero starting point.
    pub trace: Option<Vec<TraceRow>>,
}

impl RecoveryReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// CSV with header `iteration,residual_norm,error_norm`; writes only the
    /// header when tracing was disabled.
    pub fn write_trace_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        match &self.trace {
            Some(rows) if !rows.is_empty() => {
                for row in rows {
                    csv.serialize(row)?;
                }
            }
            _ => csv.write_record(["iteration", "residual_norm", "error_norm"])?,
        }
        csv.flush()?;
        Ok(())
    }
}

/// Runs the iteration from `y⁰ = 0` until the residual drops to
/// `config.residual_tol` or `config.max_iters` steps have been taken.
pub fn run<O: LinearOperator + ?Sized>(
    op: &O,
    x: &[f64],
    config: &IhtConfig,
    truth: Option<&SignalVector>,
) -> Result<RecoveryReport> {
    config.validate(op.cols())?;
    if let Some(t) = truth {
        check_len("truth", op.cols(), t.len())?;
    }
    let mut state = IhtState::initial(op, x)?;
    let initial_norm = state.residual_norm;
    let s = config.sparsity;

    let mut trace = config.trace_enabled.then(Vec::new);
    let record = |trace: &mut Option<Vec<TraceRow>>, state: &IhtState| -> Result<()> {
        if let Some(rows) = trace.as_mut() {
            let error_norm = truth.map(|t| t.distance(&state.estimate)).transpose()?;
            rows.push(TraceRow {
                iteration: state.iteration,
                residual_norm: state.residual_norm,
                error_norm,
            });
        }
        Ok(())
    };
    record(&mut trace, &state)?;

    let mut scratch = vec![0.0; op.cols()];
    let stop_reason = loop {
        if state.residual_norm <= config.residual_tol {
            break StopReason::ResidualTol;
        }
        if state.iteration >= config.max_iters {
            break StopReason::MaxIters;
        }
        state.advance(op, x, s, &mut scratch)?;
        record(&mut trace, &state)?;
        if state.residual_norm > DIVERGENCE_FACTOR * initial_norm {
            return Err(Error::Numeric {
                iteration: state.iteration,
                reason: format!(
                    "residual norm {:.3e} exceeds {DIVERGENCE_FACTOR:e} times its initial value; \
                     the operator probably needs rescaling",
                    state.residual_norm
                ),
            });
        }
    };

    Ok(RecoveryReport {
        iterations_used: state.iteration,
        stop_reason,
        residual_norm_final: state.residual_norm,
        estimate: state.estimate,
        trace,
    })
}
