use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::instance::{make_instance, Instance};
use super::sweep::{bound_at, AUDIT_TOLERANCE};
use crate::iht::{predicted_iterations, BoundInputs};
use crate::{run, Error, IhtConfig, Result, RipEstimate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub residual_norm: f64,
    /// `‖y − yᵏ‖₂`
    pub error_norm: f64,
    pub envelope: f64,
    /// `error_norm ≤ envelope` (up to the audit tolerance).
    pub audit: bool,
    /// Empty when the unrecoverable error is zero and no finite count exists.
    pub predicted_iterations: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTrace {
    pub instance: Instance,
    pub rows: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    pub fn rip(&self) -> &RipEstimate {
        &self.instance.rip
    }

    pub fn certified(&self) -> bool {
        self.instance.certified()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(TRACE_HEADER)?;
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub const TRACE_HEADER: [&str; 6] = [
    "iteration",
    "residual_norm",
    "error_norm",
    "envelope",
    "audit",
    "predicted_iterations",
];

/// Traces the first trial of the first `(M, s)` cell at `noise_sigma`,
/// recording every iterate against the per-iteration guarantee.
pub fn run_convergence_trace(cfg: &ExperimentConfig) -> Result<ConvergenceTrace> {
    cfg.validate()?;
    let mut single = cfg.clone();
    single.noise_sigmas = None;
    let inst = make_instance(&single, cfg.m_values[0], cfg.s_values[0], 0, 0)?;
    trace_instance(&single, inst)
}

/// Runs IHT on `inst` with tracing and audits each iterate.
pub fn trace_instance(cfg: &ExperimentConfig, inst: Instance) -> Result<ConvergenceTrace> {
    let iht = IhtConfig::new(inst.s, cfg.max_iters, cfg.residual_tol).with_trace();
    let report = run(&inst.op, &inst.x, &iht, Some(&inst.truth))?;
    let predicted = match predicted_iterations(&BoundInputs::from_signal(&inst.truth, inst.s, inst.noise_norm())?) {
        Ok(k) => Some(k),
        Err(Error::UnboundedIterations) => None,
        Err(e) => return Err(e),
    };
    let rows = report
        .trace
        .unwrap_or_default()
        .into_iter()
        .map(|t| {
            let error_norm = t.error_norm.expect("truth supplied");
            let envelope = bound_at(cfg, &inst, t.iteration)?;
            Ok(TraceRecord {
                iteration: t.iteration,
                residual_norm: t.residual_norm,
                error_norm,
                envelope,
                audit: error_norm <= envelope + AUDIT_TOLERANCE,
                predicted_iterations: predicted,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTrace { instance: inst, rows })
}
