use serde::{Deserialize, Serialize};

use crate::operators::OperatorFamily;
use crate::rip::DEFAULT_ENUMERATION_BUDGET;
use crate::{Error, Result};

/// Ground-truth model for generated signals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    /// Exactly s nonzeros with standard normal amplitudes.
    ExactSparse,
    /// Sorted magnitudes `r · i^(-1/p)`.
    Compressible { p: f64, r: f64 },
}

/// How each generated operator is normalised before recovery.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleMode {
    /// Use the operator as built; the isometry constant is still estimated.
    None,
    /// Monte Carlo isometry estimates throughout.
    MonteCarlo,
    /// Exact enumeration throughout; fails the trial when over budget.
    Exact,
    /// Exact for orders whose support count fits the budget, Monte Carlo otherwise.
    #[default]
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub operator_kind: OperatorFamily,
    pub n: usize,
    pub m_values: Vec<usize>,
    pub s_values: Vec<usize>,
    #[serde(default = "default_signal")]
    pub signal_kind: SignalKind,
    #[serde(default)]
    pub noise_sigma: f64,
    /// Levels for the noise sweep; defaults to `[noise_sigma]`.
    #[serde(default)]
    pub noise_sigmas: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub trials_per_cell: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub residual_tol: f64,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    #[serde(default = "default_threshold")]
    pub success_threshold: f64,
    #[serde(default)]
    pub rescale: RescaleMode,
    /// Rescale with the isometry estimate at `rescale_factor · s`; see
    /// [`rescale_order`](super::rescale_order) for the default.
    #[serde(default)]
    pub rescale_factor: Option<usize>,
    /// Supports sampled by each Monte Carlo isometry estimate.
    #[serde(default = "default_rip_trials")]
    pub rip_trials: u64,
    #[serde(default = "default_budget")]
    pub exact_budget: u64,
    /// Fill the `wall_time_ms` column. Off by default so reruns are byte-identical.
    #[serde(default)]
    pub timing: bool,
}

fn default_signal() -> SignalKind {
    SignalKind::ExactSparse
}
fn one() -> usize {
    1
}
fn default_tol() -> f64 {
    1e-10
}
fn default_iters() -> usize {
    100
}
fn default_threshold() -> f64 {
    1e-4
}
fn default_rip_trials() -> u64 {
    200
}
fn default_budget() -> u64 {
    DEFAULT_ENUMERATION_BUDGET
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(operator_kind: OperatorFamily, n: usize, m_values: Vec<usize>, s_values: Vec<usize>) -> Self {
        Self {
            operator_kind,
            n,
            m_values,
            s_values,
            signal_kind: default_signal(),
            noise_sigma: 0.0,
            noise_sigmas: None,
            trials_per_cell: 1,
            seed: 0,
            residual_tol: default_tol(),
            max_iters: default_iters(),
            success_threshold: default_threshold(),
            rescale: RescaleMode::default(),
            rescale_factor: None,
            rip_trials: default_rip_trials(),
            exact_budget: default_budget(),
            timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn noise_levels(&self) -> Vec<f64> {
        self.noise_sigmas.clone().unwrap_or_else(|| vec![self.noise_sigma])
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n == 0 {
            return fail("n must be positive".into());
        }
        if self.m_values.is_empty() || self.s_values.is_empty() {
            return fail("m_values and s_values must be non-empty".into());
        }
        if let Some(&m) = self.m_values.iter().find(|&&m| m == 0) {
            return fail(format!("measurement count {m} must be positive"));
        }
        if let Some(&s) = self.s_values.iter().find(|&&s| s == 0 || s > self.n) {
            return fail(format!("sparsity {s} must lie in [1, {}]", self.n));
        }
        match self.operator_kind {
            OperatorFamily::Identity => {
                if self.m_values.iter().any(|&m| m != self.n) {
                    return fail("the identity operator requires every M to equal n".into());
                }
            }
            OperatorFamily::PartialOrthonormal => {
                if !self.n.is_power_of_two() {
                    return fail(format!("partial_orthonormal needs n a power of two, got {}", self.n));
                }
                if self.m_values.iter().any(|&m| m > self.n) {
                    return fail("partial_orthonormal needs every M <= n".into());
                }
            }
            OperatorFamily::Gaussian | OperatorFamily::Bernoulli => {}
        }
        if let SignalKind::Compressible { p, r } = self.signal_kind {
            if !(p > 0.0 && p <= 1.0 && p.is_finite()) {
                return fail(format!("compressibility p must lie in (0, 1], got {p}"));
            }
            if !(r > 0.0 && r.is_finite()) {
                return fail(format!("compressible amplitude r must be positive, got {r}"));
            }
        }
        let levels = self.noise_levels();
        if levels.is_empty() {
            return fail("noise_sigmas must be non-empty".into());
        }
        if let Some(sigma) = levels.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return fail(format!("noise level {sigma} must be nonnegative"));
        }
        if self.trials_per_cell == 0 {
            return fail("trials_per_cell must be at least 1".into());
        }
        if !(self.residual_tol >= 0.0 && self.residual_tol.is_finite()) {
            return fail(format!("residual_tol must be nonnegative, got {}", self.residual_tol));
        }
        if !(self.success_threshold >= 0.0 && self.success_threshold.is_finite()) {
            return fail(format!("success_threshold must be nonnegative, got {}", self.success_threshold));
        }
        if self.rescale_factor == Some(0) {
            return fail("rescale_factor must be at least 1".into());
        }
        if self.rip_trials == 0 && self.rescale != RescaleMode::Exact {
            return fail("rip_trials must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"operator_kind":"gaussian","n":64,"m_values":[32],"s_values":[2],
                "signal_kind":{"compressible":{"p":0.5,"r":1.0}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.max_iters, 100);
        assert_eq!(cfg.success_threshold, 1e-4);
        assert_eq!(cfg.rescale, RescaleMode::Auto);
        assert_eq!(cfg.noise_levels(), vec![0.0]);
        assert_eq!(cfg.signal_kind, SignalKind::Compressible { p: 0.5, r: 1.0 });
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(ExperimentConfig::from_json("{}"), Err(Error::Config(_))));
        assert!(ExperimentConfig::from_json(r#"{"operator_kind":"gaussian","n":4,"m_values":[2],"s_values":[1],"bogus":1}"#).is_err());
        let ok = ExperimentConfig::new(OperatorFamily::Gaussian, 16, vec![8], vec![2]);
        ok.validate().unwrap();
        let mut c = ok.clone();
        c.m_values.clear();
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.s_values = vec![17];
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.trials_per_cell = 0;
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.noise_sigma = -1.0;
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.operator_kind = OperatorFamily::PartialOrthonormal;
        c.n = 12;
        assert!(c.validate().is_err());
    }
}
