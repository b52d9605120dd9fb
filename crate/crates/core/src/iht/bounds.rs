//! Closed-form error and iteration bounds for certified operators
//! (`β_3s < 1/8`).

use serde::{Deserialize, Serialize};

use crate::signals::{hard_threshold, SignalVector};
use crate::{Error, Result};

/// The recovery guarantees hold when `β_3s` is below this value.
pub const BETA_3S_LIMIT: f64 = 0.125;

/// Upper bound on `1/sqrt(1 − β_2s)` under `β_3s < 1/8`.
pub const STOPPING_CONSTANT: f64 = 1.07;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// `‖y^s‖₂`
    pub ys_norm: f64,
    /// `ε̃_s`
    pub eps_tilde: f64,
    /// `‖e‖₂`
    pub e_norm: f64,
}

impl BoundInputs {
    pub fn new(ys_norm: f64, eps_tilde: f64, e_norm: f64) -> Result<Self> {
        for (name, v) in [("ys_norm", ys_norm), ("eps_tilde", eps_tilde), ("e_norm", e_norm)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(Self {
            ys_norm,
            eps_tilde,
            e_norm,
        })
    }

    /// Evaluates `‖y^s‖₂` and `ε̃_s` for a known signal and noise norm.
    pub fn from_signal(y: &SignalVector, s: usize, e_norm: f64) -> Result<Self> {
        let ys = hard_threshold(y, s)?;
        let eps = crate::signals::epsilon_tilde(y, s, e_norm)?;
        Self::new(ys.norm_l2(), eps, e_norm)
    }
}

/// `k* = ⌈log₂(‖y^s‖₂ / ε̃_s)⌉`, floored at zero.
pub fn predicted_iterations(b: &BoundInputs) -> Result<u32> {
    if b.eps_tilde == 0.0 {
        return Err(Error::UnboundedIterations);
    }
    if b.ys_norm <= b.eps_tilde {
        return Ok(0);
    }
    Ok((b.ys_norm / b.eps_tilde).log2().ceil() as u32)
}

/// `2^(−k) ‖y^s‖₂ + 5 ε̃_s`, the per-iteration bound on `‖y − y^k‖₂`.
pub fn error_bound_general(b: &BoundInputs, k: u32) -> f64 {
    (-(k as f64)).exp2() * b.ys_norm + 5.0 * b.eps_tilde
}

/// `2^(−k) ‖y^s‖₂ + 4 ‖e‖₂`, the per-iteration bound for exactly sparse signals.
pub fn error_bound_exact_sparse(ys_norm: f64, e_norm: f64, k: u32) -> f64 {
    (-(k as f64)).exp2() * ys_norm + 4.0 * e_norm
}

/// `1.07 (ε + 2 ε̃_s)`: error guaranteed once the residual is at most `ε`.
pub fn stopping_error_bound(epsilon: f64, eps_tilde: f64) -> f64 {
    STOPPING_CONSTANT * (epsilon + 2.0 * eps_tilde)
}

/// Residual tolerance `(c/1.07 − 2) ε̃_s` that certifies error `≤ c ε̃_s`.
/// Only `c > 5` is covered by the guarantee.
pub fn residual_tol_for_accuracy(c: f64, eps_tilde: f64) -> Result<f64> {
    if c.is_nan() || c <= 5.0 {
        return Err(Error::invalid(format!(
            "accuracy multiple c must exceed 5 (the guaranteed asymptote), got {c}"
        )));
    }
    if eps_tilde.is_nan() || eps_tilde < 0.0 {
        return Err(Error::invalid(format!("eps_tilde must be nonnegative, got {eps_tilde}")));
    }
    Ok((c / STOPPING_CONSTANT - 2.0) * eps_tilde)
}
