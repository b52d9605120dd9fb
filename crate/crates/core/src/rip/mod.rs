//! Restricted isometry constants.
//!
//! For a support `Γ` of size `s` the local constant is read off the extreme
//! eigenvalues of the gram `Φ_ΓᵀΦ_Γ`:
//! `β_Γ = max(1 − λ_min, λ_max − 1)`, clamped at zero, and `β_s` is the
//! maximum over supports. When every `λ_max ≤ 1` this is the smallest `β`
//! with `(1 − β)‖y‖² ≤ ‖Φy‖² ≤ ‖y‖²` for all s-sparse `y`; otherwise the
//! estimate carries `upper_bound_violated` and the operator should be passed
//! through [`MeasurementOperator::rescale_for_rip`](crate::MeasurementOperator::rescale_for_rip)
//! with [`RipEstimate::rescale_delta`] first.
//!
//! [`exact_beta`] enumerates all `C(N, s)` supports in lexicographic order,
//! in parallel chunks, and can be resumed from an [`ExactCheckpoint`].
//! [`estimate_beta`] samples supports and therefore only ever returns a lower
//! bound on the true constant.

mod gram;
mod lemmas;

use std::collections::HashSet;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use lemmas::{
    check_adjoint_bound, check_gram_bounds, check_lemma1, check_lemma2, check_lemma3,
    effective_noise_norm, gram_eigenvalues,
};

pub(crate) use gram::binomial;
use gram::{extreme_eigenvalues, next_combination, unrank_combination, Columns, Gram};

use crate::operators::{IndexSet, LinearOperator};
use crate::par::mix_seed;
use crate::{Error, Execution, Result};

/// Slack allowed on `λ_max ≤ 1` before the upper isometry bound counts as violated.
pub const UPPER_BOUND_SLACK: f64 = 1e-10;

pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000;

const CHUNK: u64 = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RipMethod {
    Exact,
    MonteCarlo,
}

impl std::fmt::Display for RipMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RipMethod::Exact => "exact",
            RipMethod::MonteCarlo => "monte_carlo",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub sparsity: usize,
    pub beta: f64,
    /// `β/(2 − β)`; absent when `β ≥ 2`.
    pub delta: Option<f64>,
    pub method: RipMethod,
    /// Sampled supports (0 for exact enumeration).
    pub trials: u64,
    /// Distinct supports whose grams were examined.
    pub supports_examined: u64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub upper_bound_violated: bool,
    /// A support attaining `beta` (lowest lexicographic rank on ties for
    /// exact enumeration).
    pub worst_support: IndexSet,
}

impl RipEstimate {
    fn from_extremes(sparsity: usize, ext: &Extremes, method: RipMethod, trials: u64, examined: u64) -> Self {
        let beta = ext.beta;
        Self {
            sparsity,
            beta,
            delta: beta_to_delta(beta).ok(),
            method,
            trials,
            supports_examined: examined,
            lambda_min: ext.lambda_min,
            lambda_max: ext.lambda_max,
            upper_bound_violated: ext.lambda_max > 1.0 + UPPER_BOUND_SLACK,
            worst_support: IndexSet::from_sorted_unchecked(ext.worst_support.clone()),
        }
    }

    /// `max(λ_max − 1, 0)`: the `delta` that makes `rescale_for_rip` bring
    /// the largest examined gram eigenvalue down to one.
    pub fn rescale_delta(&self) -> f64 {
        (self.lambda_max - 1.0).max(0.0)
    }

    /// True only for exact enumerations that respect the upper bound and have
    /// `β < limit`.
    pub fn certifies(&self, limit: f64) -> bool {
        self.method == RipMethod::Exact && !self.upper_bound_violated && self.beta < limit
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Running extremes over a set of supports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremes {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub beta: f64,
    pub worst_support: Vec<usize>,
}

impl Extremes {
    fn of(support: &[usize], (lo, hi): (f64, f64)) -> Self {
        Self {
            lambda_min: lo,
            lambda_max: hi,
            beta: (1.0 - lo).max(hi - 1.0).max(0.0),
            worst_support: support.to_vec(),
        }
    }

    /// `other` comes later in enumeration order, so it only replaces the
    /// worst support when strictly worse.
    fn merge(&mut self, other: Extremes) {
        self.lambda_min = self.lambda_min.min(other.lambda_min);
        self.lambda_max = self.lambda_max.max(other.lambda_max);
        if other.beta > self.beta {
            self.beta = other.beta;
            self.worst_support = other.worst_support;
        }
    }
}

fn merge_all(parts: impl IntoIterator<Item = Extremes>) -> Option<Extremes> {
    parts.into_iter().reduce(|mut a, b| {
        a.merge(b);
        a
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ExactOptions {
    pub budget: u64,
    pub execution: Execution,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_ENUMERATION_BUDGET,
            execution: Execution::default(),
        }
    }
}

/// Progress of an exact enumeration; serialisable so long runs can resume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactCheckpoint {
    pub n: usize,
    pub sparsity: usize,
    pub total: u64,
    /// Rank of the next support to examine.
    pub next_rank: u64,
    /// Last support examined, if any.
    pub last_support: Option<Vec<usize>>,
    pub extremes: Option<Extremes>,
}

impl ExactCheckpoint {
    pub fn is_complete(&self) -> bool {
        self.next_rank >= self.total
    }

    /// The estimate over all supports examined so far.
    pub fn to_estimate(&self) -> Result<RipEstimate> {
        if !self.is_complete() {
            return Err(Error::invalid(format!(
                "enumeration incomplete: {} of {} supports examined",
                self.next_rank, self.total
            )));
        }
        let ext = self
            .extremes
            .as_ref()
            .ok_or_else(|| Error::invalid("enumeration examined no supports"))?;
        Ok(RipEstimate::from_extremes(self.sparsity, ext, RipMethod::Exact, 0, self.total))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

fn check_sparsity(s: usize, n: usize) -> Result<()> {
    if s == 0 || s > n {
        return Err(Error::invalid(format!("sparsity {s} must lie in [1, {n}]")));
    }
    Ok(())
}

/// Exact `β_s` by enumerating every support of size `s`.
pub fn exact_beta<O: LinearOperator + ?Sized>(op: &O, s: usize) -> Result<RipEstimate> {
    exact_beta_with(op, s, &ExactOptions::default())
}

pub fn exact_beta_with<O: LinearOperator + ?Sized>(
    op: &O,
    s: usize,
    opts: &ExactOptions,
) -> Result<RipEstimate> {
    exact_beta_resume(op, s, None, None, opts)?.to_estimate()
}

/// Continues (or starts) an exact enumeration, examining at most `limit`
/// further supports. The budget applies to the full `C(N, s)`.
pub fn exact_beta_resume<O: LinearOperator + ?Sized>(
    op: &O,
    s: usize,
    checkpoint: Option<ExactCheckpoint>,
    limit: Option<u64>,
    opts: &ExactOptions,
) -> Result<ExactCheckpoint> {
    let n = op.cols();
    check_sparsity(s, n)?;
    let total = binomial(n, s);
    if total > opts.budget as u128 {
        return Err(Error::BudgetExceeded {
            supports: total,
            budget: opts.budget,
        });
    }
    let total = total as u64;
    let mut cp = match checkpoint {
        Some(cp) => {
            if cp.n != n || cp.sparsity != s || cp.total != total {
                return Err(Error::invalid(format!(
                    "checkpoint is for N={}, s={} but the request is N={n}, s={s}",
                    cp.n, cp.sparsity
                )));
            }
            cp
        }
        None => ExactCheckpoint {
            n,
            sparsity: s,
            total,
            next_rank: 0,
            last_support: None,
            extremes: None,
        },
    };
    let start = cp.next_rank.min(total);
    let end = match limit {
        Some(l) => start.saturating_add(l).min(total),
        None => total,
    };
    if start == end {
        return Ok(cp);
    }

    let gram = Columns::materialize(op, opts.execution)?.full_gram(opts.execution);
    let chunks = (end - start).div_ceil(CHUNK);
    let parts = opts.execution.map_range(chunks as usize, |c| {
        let lo = start + c as u64 * CHUNK;
        let hi = (lo + CHUNK).min(end);
        scan_ranks(&gram, n, s, lo, hi)
    });
    let merged = merge_all(parts).expect("at least one chunk");
    match cp.extremes.as_mut() {
        Some(e) => e.merge(merged),
        None => cp.extremes = Some(merged),
    }
    cp.next_rank = end;
    cp.last_support = Some(unrank_combination(n, s, (end - 1) as u128));
    Ok(cp)
}

fn scan_ranks(gram: &Gram, n: usize, s: usize, lo: u64, hi: u64) -> Extremes {
    let mut support = unrank_combination(n, s, lo as u128);
    let mut acc: Option<Extremes> = None;
    for rank in lo..hi {
        let ext = Extremes::of(&support, extreme_eigenvalues(gram.sub(&support)));
        match acc.as_mut() {
            Some(a) => a.merge(ext),
            None => acc = Some(ext),
        }
        if rank + 1 < hi {
            next_combination(&mut support, n);
        }
    }
    acc.expect("non-empty rank range")
}

/// Monte Carlo lower bound on `β_s` from `trials` random supports.
///
/// Trial `t` draws its support from an RNG seeded by `(seed, t)`, so a run
/// with more trials examines a superset of the supports of a shorter run.
pub fn estimate_beta<O: LinearOperator + ?Sized>(
    op: &O,
    s: usize,
    trials: u64,
    seed: u64,
) -> Result<RipEstimate> {
    estimate_beta_with(op, s, trials, seed, Execution::default())
}

pub fn estimate_beta_with<O: LinearOperator + ?Sized>(
    op: &O,
    s: usize,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<RipEstimate> {
    let n = op.cols();
    check_sparsity(s, n)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let columns = Columns::materialize(op, exec)?;
    let parts = exec.map_range(trials as usize, |t| {
        let support = sample_support(n, s, seed, t as u64);
        Extremes::of(&support, extreme_eigenvalues(columns.gram(&support)))
    });
    let distinct: HashSet<&[usize]> = parts.iter().map(|e| e.worst_support.as_slice()).collect();
    let examined = distinct.len() as u64;
    let merged = merge_all(parts).expect("trials >= 1");
    Ok(RipEstimate::from_extremes(s, &merged, RipMethod::MonteCarlo, trials, examined))
}

/// Support used by trial `t` of [`estimate_beta`], sorted.
pub fn sample_support(n: usize, s: usize, seed: u64, t: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, t));
    let mut v = rand::seq::index::sample(&mut rng, n, s).into_vec();
    v.sort_unstable();
    v
}

/// `δ = β/(2 − β)` for `β ∈ [0, 2)`.
pub fn beta_to_delta(beta: f64) -> Result<f64> {
    if !(0.0..2.0).contains(&beta) {
        return Err(Error::invalid(format!("beta must lie in [0, 2), got {beta}")));
    }
    Ok(beta / (2.0 - beta))
}

/// `β = 2δ/(1 + δ)` for `δ ≥ 0`.
pub fn delta_to_beta(delta: f64) -> Result<f64> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("delta must be nonnegative, got {delta}")));
    }
    Ok(2.0 * delta / (1.0 + delta))
}
