use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{ExperimentConfig, RescaleMode, SignalKind};
use crate::iht::BETA_3S_LIMIT;
use crate::operators::{build, MeasurementOperator};
use crate::par::mix_seed;
use crate::rip::{binomial, estimate_beta_with, exact_beta_with, ExactOptions, RipEstimate};
use crate::signals::{gen_compressible, gen_sparse, CompressibleSpec};
use crate::{Error, Execution, LinearOperator, Result, SignalVector};

const OPERATOR_STREAM: u64 = 0;
const SIGNAL_STREAM: u64 = 1;
const RIP_STREAM: u64 = 2;
const NOISE_STREAM: u64 = 3;

/// Seed of trial `trial` in cell `(m, s)`. Depends only on the cell values,
/// so adding cells to a sweep leaves existing rows unchanged.
pub fn trial_seed(seed: u64, m: usize, s: usize, trial: usize) -> u64 {
    mix_seed(mix_seed(mix_seed(seed, m as u64), s as u64), trial as u64)
}

/// One generated problem `x = Φy + e`.
#[derive(Clone, Debug)]
pub struct Instance {
    pub m: usize,
    pub s: usize,
    pub trial: usize,
    pub noise_sigma: f64,
    /// Operator after rescaling.
    pub op: MeasurementOperator,
    pub truth: SignalVector,
    pub noise: Vec<f64>,
    pub x: Vec<f64>,
    /// Isometry estimate at order `min(3s, N)` on the rescaled operator.
    pub rip: RipEstimate,
}

impl Instance {
    /// Exact enumeration found `β_3s < 1/8` with the upper bound intact.
    pub fn certified(&self) -> bool {
        self.rip.certifies(BETA_3S_LIMIT)
    }

    pub fn noise_norm(&self) -> f64 {
        crate::norm2(&self.noise)
    }
}

/// The isometry order checked for sparsity `s`.
pub fn rip_order(s: usize, n: usize) -> usize {
    (3 * s).min(n)
}

fn uses_exact(cfg: &ExperimentConfig, n: usize, order: usize) -> bool {
    match cfg.rescale {
        RescaleMode::Exact => true,
        RescaleMode::MonteCarlo => false,
        RescaleMode::None | RescaleMode::Auto => binomial(n, order) <= cfg.exact_budget as u128,
    }
}

fn rip_estimate(cfg: &ExperimentConfig, op: &MeasurementOperator, order: usize, seed: u64) -> Result<RipEstimate> {
    if uses_exact(cfg, op.cols(), order) {
        let opts = ExactOptions {
            budget: cfg.exact_budget,
            execution: Execution::Sequential,
        };
        exact_beta_with(op, order, &opts)
    } else {
        estimate_beta_with(op, order, cfg.rip_trials.max(1), seed, Execution::Sequential)
    }
}

/// Sparsity whose isometry estimate sets the rescaling: `rescale_factor · s`,
/// defaulting to `3s` when that order is enumerated exactly and `s` otherwise.
pub fn rescale_order(cfg: &ExperimentConfig, s: usize) -> usize {
    let factor = cfg
        .rescale_factor
        .unwrap_or(if uses_exact(cfg, cfg.n, rip_order(s, cfg.n)) { 3 } else { 1 });
    (factor * s).clamp(1, cfg.n)
}

/// Builds the operator for a trial, rescales it according to `cfg.rescale`
/// and returns it with its order-`3s` isometry estimate.
pub fn make_operator(cfg: &ExperimentConfig, m: usize, s: usize, seed: u64) -> Result<(MeasurementOperator, RipEstimate)> {
    let op = build(cfg.operator_kind, m, cfg.n, mix_seed(seed, OPERATOR_STREAM))?;
    let order = rip_order(s, cfg.n);
    let rip_seed = mix_seed(seed, RIP_STREAM);
    if cfg.rescale == RescaleMode::None {
        let rip = rip_estimate(cfg, &op, order, rip_seed)?;
        return Ok((op, rip));
    }
    let scale_order = rescale_order(cfg, s);
    let first = rip_estimate(cfg, &op, scale_order, rip_seed)?;
    let delta = first.rescale_delta();
    if delta >= 1.0 {
        return Err(Error::Numeric {
            iteration: 0,
            reason: format!("isometry spread delta = {delta:.4} at order {scale_order} is too large to rescale"),
        });
    }
    let op = op.rescale_for_rip(delta)?;
    let rip = rip_estimate(cfg, &op, order, rip_seed)?;
    Ok((op, rip))
}

pub fn make_signal(cfg: &ExperimentConfig, s: usize, seed: u64) -> Result<SignalVector> {
    let seed = mix_seed(seed, SIGNAL_STREAM);
    match cfg.signal_kind {
        SignalKind::ExactSparse => gen_sparse(cfg.n, s, seed),
        SignalKind::Compressible { p, r } => gen_compressible(&CompressibleSpec {
            n: cfg.n,
            p,
            r_const: r,
            seed,
        }),
    }
}

/// i.i.d. `N(0, σ²)` entries; the stream also depends on the noise level index.
pub fn make_noise(m: usize, sigma: f64, seed: u64, level: usize) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![0.0; m];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(mix_seed(seed, NOISE_STREAM), level as u64));
    (0..m).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Generates trial `trial` of cell `(m, s)` at noise level `level` of
/// [`ExperimentConfig::noise_levels`]. Operator and signal are shared across
/// noise levels; the noise draw is not.
pub fn make_instance(cfg: &ExperimentConfig, m: usize, s: usize, trial: usize, level: usize) -> Result<Instance> {
    let seed = trial_seed(cfg.seed, m, s, trial);
    let noise_sigma = cfg.noise_levels()[level];
    let (op, rip) = make_operator(cfg, m, s, seed)?;
    let truth = make_signal(cfg, s, seed)?;
    let noise = make_noise(m, noise_sigma, seed, level);
    let mut x = op.apply(truth.as_slice())?;
    for (xi, ei) in x.iter_mut().zip(&noise) {
        *xi += ei;
    }
    Ok(Instance {
        m,
        s,
        trial,
        noise_sigma,
        op,
        truth,
        noise,
        x,
        rip,
    })
}
