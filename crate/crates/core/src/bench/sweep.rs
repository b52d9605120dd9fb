use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SignalKind};
use super::instance::{make_instance, Instance};
use super::oracle::oracle_recover;
use crate::iht::{error_bound_exact_sparse, error_bound_general, BoundInputs};
use crate::rip::RipMethod;
use crate::signals::{hard_threshold, support};
use crate::{run, Execution, IhtConfig, Result, StopReason};

/// Slack on bound audits, absorbing floating-point rounding.
pub const AUDIT_TOLERANCE: f64 = 1e-10;

/// One CSV row. Column order is the field order below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub s: usize,
    pub trial: usize,
    pub noise_sigma: f64,
    pub rip_beta_estimate: Option<f64>,
    pub rip_method: Option<RipMethod>,
    /// Exact `β_3s < 1/8` on the operator actually used.
    pub certified: bool,
    pub iterations_used: Option<usize>,
    pub stop_reason: Option<StopReason>,
    pub relative_error: Option<f64>,
    pub success: bool,
    pub e_norm: Option<f64>,
    pub eps_tilde: Option<f64>,
    pub bound_value: Option<f64>,
    pub bound_satisfied: Option<bool>,
    pub oracle_relative_error: Option<f64>,
    pub wall_time_ms: Option<f64>,
    /// Why the trial produced no estimate; empty otherwise.
    pub failure: Option<String>,
}

impl TrialRecord {
    fn failed(cfg: &ExperimentConfig, m: usize, s: usize, trial: usize, sigma: f64, reason: String) -> Self {
        Self {
            m,
            n: cfg.n,
            s,
            trial,
            noise_sigma: sigma,
            rip_beta_estimate: None,
            rip_method: None,
            certified: false,
            iterations_used: None,
            stop_reason: None,
            relative_error: None,
            success: false,
            e_norm: None,
            eps_tilde: None,
            bound_value: None,
            bound_satisfied: None,
            oracle_relative_error: None,
            wall_time_ms: None,
            failure: Some(reason),
        }
    }
}

/// `‖a − b‖₂ / ‖b‖₂`, or the plain distance when `b = 0`.
pub fn relative_error(estimate: &[f64], truth: &[f64]) -> f64 {
    let diff: Vec<f64> = estimate.iter().zip(truth).map(|(a, b)| a - b).collect();
    let d = crate::norm2(&diff);
    let t = crate::norm2(truth);
    if t > 0.0 {
        d / t
    } else {
        d
    }
}

/// The recovery guarantee evaluated after `k` iterations: the exact-sparse
/// envelope `2^(−k)‖y‖₂ + 4‖e‖₂` for sparse truths, the general
/// `2^(−k)‖y^s‖₂ + 5ε̃_s` otherwise. Both bound `‖y − y^k‖₂`.
pub fn bound_at(cfg: &ExperimentConfig, inst: &Instance, k: usize) -> Result<f64> {
    let e_norm = inst.noise_norm();
    let k = k.min(u32::MAX as usize) as u32;
    Ok(match cfg.signal_kind {
        SignalKind::ExactSparse => error_bound_exact_sparse(inst.truth.norm_l2(), e_norm, k),
        SignalKind::Compressible { .. } => {
            error_bound_general(&BoundInputs::from_signal(&inst.truth, inst.s, e_norm)?, k)
        }
    })
}

fn run_instance(cfg: &ExperimentConfig, inst: &Instance) -> Result<TrialRecord> {
    let e_norm = inst.noise_norm();
    let eps_tilde = crate::signals::epsilon_tilde(&inst.truth, inst.s, e_norm)?;
    let iht = IhtConfig::new(inst.s, cfg.max_iters, cfg.residual_tol);
    let start = Instant::now();
    let report = run(&inst.op, &inst.x, &iht, None)?;
    let elapsed = start.elapsed();

    let truth = inst.truth.as_slice();
    let rel = relative_error(report.estimate.as_slice(), truth);
    let abs_err = inst.truth.distance(&report.estimate)?;
    let bound = bound_at(cfg, inst, report.iterations_used)?;

    let ys = hard_threshold(&inst.truth, inst.s)?;
    let oracle_rel = if inst.s <= inst.m {
        let o = oracle_recover(&inst.op, &inst.x, &support(&ys))?;
        Some(relative_error(o.estimate.as_slice(), truth))
    } else {
        None
    };

    Ok(TrialRecord {
        m: inst.m,
        n: cfg.n,
        s: inst.s,
        trial: inst.trial,
        noise_sigma: inst.noise_sigma,
        rip_beta_estimate: Some(inst.rip.beta),
        rip_method: Some(inst.rip.method),
        certified: inst.certified(),
        iterations_used: Some(report.iterations_used),
        stop_reason: Some(report.stop_reason),
        relative_error: Some(rel),
        success: rel <= cfg.success_threshold,
        e_norm: Some(e_norm),
        eps_tilde: Some(eps_tilde),
        bound_value: Some(bound),
        bound_satisfied: Some(abs_err <= bound + AUDIT_TOLERANCE),
        oracle_relative_error: oracle_rel,
        wall_time_ms: cfg.timing.then_some(elapsed.as_secs_f64() * 1e3),
        failure: None,
    })
}

/// Generates and solves one trial. Failures are reported in the row.
pub fn run_trial(cfg: &ExperimentConfig, m: usize, s: usize, trial: usize, level: usize) -> TrialRecord {
    let sigma = cfg.noise_levels()[level];
    make_instance(cfg, m, s, trial, level)
        .and_then(|inst| run_instance(cfg, &inst))
        .unwrap_or_else(|e| TrialRecord::failed(cfg, m, s, trial, sigma, e.to_string()))
}

fn sweep(cfg: &ExperimentConfig, levels: &[usize], exec: Execution) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &level in levels {
        for &m in &cfg.m_values {
            for &s in &cfg.s_values {
                for t in 0..cfg.trials_per_cell {
                    jobs.push((m, s, t, level));
                }
            }
        }
    }
    Ok(exec.map_range(jobs.len(), |i| {
        let (m, s, t, level) = jobs[i];
        run_trial(cfg, m, s, t, level)
    }))
}

/// Every `(M, s, trial)` cell at `noise_sigma`, in M-major, then s, then
/// trial order.
pub fn run_phase_transition(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    run_phase_transition_with(cfg, Execution::default())
}

pub fn run_phase_transition_with(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<TrialRecord>> {
    let mut single = cfg.clone();
    single.noise_sigmas = None;
    sweep(&single, &[0], exec)
}

/// The phase-transition grid repeated for each level of `noise_sigmas`,
/// noise-level major.
pub fn run_noise_sweep(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    run_noise_sweep_with(cfg, Execution::default())
}

pub fn run_noise_sweep_with(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<TrialRecord>> {
    let levels: Vec<usize> = (0..cfg.noise_levels().len()).collect();
    sweep(cfg, &levels, exec)
}

pub fn write_records<W: Write>(records: &[TrialRecord], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(RECORD_HEADER)?;
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Header of [`write_records`] output, written even when there are no rows.
pub const RECORD_HEADER: [&str; 19] = [
    "M",
    "N",
    "s",
    "trial",
    "noise_sigma",
    "rip_beta_estimate",
    "rip_method",
    "certified",
    "iterations_used",
    "stop_reason",
    "relative_error",
    "success",
    "e_norm",
    "eps_tilde",
    "bound_value",
    "bound_satisfied",
    "oracle_relative_error",
    "wall_time_ms",
    "failure",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    #[serde(rename = "M")]
    pub m: usize,
    pub s: usize,
    pub noise_sigma: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
}

/// Success rate per `(noise_sigma, M, s)` cell, in first-appearance order.
pub fn success_rates(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut out: Vec<CellSummary> = Vec::new();
    for r in records {
        let idx = out
            .iter()
            .position(|c| c.m == r.m && c.s == r.s && c.noise_sigma.to_bits() == r.noise_sigma.to_bits());
        let cell = match idx {
            Some(i) => &mut out[i],
            None => {
                out.push(CellSummary {
                    m: r.m,
                    s: r.s,
                    noise_sigma: r.noise_sigma,
                    trials: 0,
                    successes: 0,
                    success_rate: 0.0,
                });
                out.last_mut().expect("just pushed")
            }
        };
        cell.trials += 1;
        cell.successes += r.success as usize;
        cell.success_rate = cell.successes as f64 / cell.trials as f64;
    }
    out
}

/// Ordinary least-squares slope of `y` on `x` (with intercept). `None` when
/// fewer than two distinct `x` values are given.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::OperatorFamily;

    #[test]
    fn identity_regime_always_succeeds() {
        let mut cfg = ExperimentConfig::new(OperatorFamily::Identity, 16, vec![16], vec![1, 3]);
        cfg.trials_per_cell = 4;
        let rows = run_phase_transition(&cfg).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.success && r.certified && r.bound_satisfied == Some(true)));
        assert_eq!(rows[0].iterations_used, Some(1));
        let rates = success_rates(&rows);
        assert_eq!(rates.len(), 2);
        assert!(rates.iter().all(|c| c.success_rate == 1.0 && c.trials == 4));
    }

    #[test]
    fn failures_stay_in_row() {
        // 2 x 64 Gaussian: isometry spread far too large to rescale
        let mut cfg = ExperimentConfig::new(OperatorFamily::Gaussian, 64, vec![2], vec![4]);
        cfg.trials_per_cell = 2;
        let rows = run_phase_transition(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.failure.is_some() && !r.success));
    }

    #[test]
    fn csv_has_fixed_header() {
        let mut buf = Vec::new();
        write_records(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), RECORD_HEADER.join(",") + "\n");
    }

    #[test]
    fn slope() {
        assert_eq!(least_squares_slope(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]), Some(2.0));
        assert_eq!(least_squares_slope(&[(1.0, 1.0), (1.0, 3.0)]), None);
        assert_eq!(least_squares_slope(&[(1.0, 1.0)]), None);
    }
}
