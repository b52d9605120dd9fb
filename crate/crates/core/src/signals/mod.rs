//! Sparse and compressible signals, hard thresholding and best s-term errors.

pub mod io;

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::operators::IndexSet;
use crate::{Error, Result};

/// Real signal of length N with finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SignalVector(Vec<f64>);

impl SignalVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("signal entry {i} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub(crate) fn values_mut(&mut self) -> &mut Vec<f64> {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_l2(&self) -> f64 {
        crate::norm2(&self.0)
    }

    pub fn norm_l1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn count_nonzero(&self) -> usize {
        self.0.iter().filter(|v| **v != 0.0).count()
    }

    /// `‖self − other‖₂`.
    pub fn distance(&self, other: &SignalVector) -> Result<f64> {
        crate::error::check_len("signal", self.len(), other.len())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

impl TryFrom<Vec<f64>> for SignalVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        SignalVector::new(v)
    }
}

impl From<SignalVector> for Vec<f64> {
    fn from(s: SignalVector) -> Self {
        s.0
    }
}

impl AsRef<[f64]> for SignalVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
}

/// Power-law model `|y|_(i) = R · i^(-1/p)` for 1-based magnitude rank `i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressibleSpec {
    pub n: usize,
    pub p: f64,
    pub r_const: f64,
    pub seed: u64,
}

impl CompressibleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("compressible signal length must be positive"));
        }
        if !(self.p.is_finite() && self.p > 0.0) {
            return Err(Error::invalid(format!("decay exponent p must be positive, got {}", self.p)));
        }
        if !(self.r_const.is_finite() && self.r_const > 0.0) {
            return Err(Error::invalid(format!(
                "magnitude constant R must be positive, got {}",
                self.r_const
            )));
        }
        Ok(())
    }

    fn magnitude(&self, rank: usize) -> f64 {
        self.r_const * (rank as f64).powf(-1.0 / self.p)
    }
}

fn check_sparsity(s: usize, n: usize) -> Result<()> {
    if s > n {
        return Err(Error::invalid(format!("sparsity {s} exceeds signal length {n}")));
    }
    Ok(())
}

/// Larger magnitude first; equal magnitudes resolve to the lower index.
fn magnitude_order(values: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(a.cmp(&b))
    }
}

/// Indices of the `s` largest-magnitude entries, in increasing index order.
pub(crate) fn top_indices(values: &[f64], s: usize) -> Vec<usize> {
    let n = values.len();
    if s == 0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    if s < n {
        idx.select_nth_unstable_by(s - 1, magnitude_order(values));
        idx.truncate(s);
    }
    idx.sort_unstable();
    idx
}

/// Zeroes every entry outside the top `s` (by magnitude, lowest index on ties).
pub(crate) fn hard_threshold_in_place(values: &mut [f64], s: usize) {
    if s >= values.len() {
        return;
    }
    let keep = top_indices(values, s);
    let mut k = keep.iter().peekable();
    for (i, v) in values.iter_mut().enumerate() {
        if k.peek() == Some(&&i) {
            k.next();
        } else {
            *v = 0.0;
        }
    }
}

/// `H_s(v)`: keeps the `s` largest-magnitude entries and zeroes the rest.
/// Ties are broken in favour of the lower index.
pub fn hard_threshold(v: &SignalVector, s: usize) -> Result<SignalVector> {
    check_sparsity(s, v.len())?;
    let mut out = v.0.clone();
    hard_threshold_in_place(&mut out, s);
    Ok(SignalVector(out))
}

/// `‖v − H_s(v)‖` in the requested norm.
pub fn best_s_error(v: &SignalVector, s: usize, norm: Norm) -> Result<f64> {
    let kept = hard_threshold(v, s)?;
    let tail = v.0.iter().zip(&kept.0).map(|(a, b)| a - b);
    Ok(match norm {
        Norm::L1 => tail.map(f64::abs).sum(),
        Norm::L2 => tail.map(|d| d * d).sum::<f64>().sqrt(),
    })
}

/// A signal whose sorted magnitudes equal `R · i^(-1/p)` exactly, with random
/// signs and positions.
pub fn gen_compressible(spec: &CompressibleSpec) -> Result<SignalVector> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut positions: Vec<usize> = (0..spec.n).collect();
    positions.shuffle(&mut rng);
    let mut out = vec![0.0; spec.n];
    for (rank0, &pos) in positions.iter().enumerate() {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        out[pos] = sign * spec.magnitude(rank0 + 1);
    }
    SignalVector::new(out)
}

/// Exactly `s`-sparse signal: support drawn uniformly without replacement,
/// standard normal amplitudes.
pub fn gen_sparse(n: usize, s: usize, seed: u64) -> Result<SignalVector> {
    check_sparsity(s, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = rand::seq::index::sample(&mut rng, n, s);
    let mut out = vec![0.0; n];
    for i in support.iter() {
        let mut a: f64 = rng.sample(StandardNormal);
        while a == 0.0 {
            a = rng.sample(StandardNormal);
        }
        out[i] = a;
    }
    SignalVector::new(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailBounds {
    pub l2: f64,
    pub l1: f64,
}

/// Exact finite tails `R (Σ_{i>s} i^(-2/p))^(1/2)` and `R Σ_{i>s} i^(-1/p)`
/// over `i ≤ N`. They dominate the best s-term errors of any signal obeying
/// the power law.
pub fn compressible_tail_bounds(spec: &CompressibleSpec, s: usize) -> Result<TailBounds> {
    spec.validate()?;
    if s == 0 || s > spec.n {
        return Err(Error::invalid(format!("sparsity {s} must lie in [1, {}]", spec.n)));
    }
    let (mut sq, mut abs) = (0.0, 0.0);
    for i in s + 1..=spec.n {
        let m = spec.magnitude(i);
        sq += m * m;
        abs += m;
    }
    Ok(TailBounds { l2: sq.sqrt(), l1: abs })
}

/// `ε̃_s = ‖y − y^s‖₂ + ‖y − y^s‖₁/√s + ‖e‖₂`.
pub fn epsilon_tilde(y: &SignalVector, s: usize, e_norm: f64) -> Result<f64> {
    if s == 0 || s > y.len() {
        return Err(Error::invalid(format!("sparsity {s} must lie in [1, {}]", y.len())));
    }
    if !(e_norm >= 0.0 && e_norm.is_finite()) {
        return Err(Error::invalid(format!("noise norm must be nonnegative, got {e_norm}")));
    }
    let l2 = best_s_error(y, s, Norm::L2)?;
    let l1 = best_s_error(y, s, Norm::L1)?;
    Ok(l2 + l1 / (s as f64).sqrt() + e_norm)
}

/// Indices of the exactly nonzero entries.
pub fn support(v: &SignalVector) -> IndexSet {
    IndexSet::from_sorted_unchecked(
        v.0.iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(i, _)| i)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> SignalVector {
        SignalVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(hard_threshold(&sv(&[3.0, -1.0, 0.0, 2.0]), 2).unwrap(), sv(&[3.0, 0.0, 0.0, 2.0]));
        assert_eq!(hard_threshold(&sv(&[1.0, -1.0]), 1).unwrap(), sv(&[1.0, 0.0]));
        let v = sv(&[0.5, -4.0, 2.0]);
        assert_eq!(hard_threshold(&v, 3).unwrap(), v);
        assert_eq!(hard_threshold(&v, 0).unwrap(), SignalVector::zeros(3));
        assert!(hard_threshold(&v, 4).is_err());
    }

    #[test]
    fn ties_prefer_lower_index_everywhere() {
        let v = sv(&[-2.0, 1.0, 2.0, 2.0, -1.0]);
        assert_eq!(hard_threshold(&v, 2).unwrap(), sv(&[-2.0, 0.0, 2.0, 0.0, 0.0]));
        assert_eq!(hard_threshold(&v, 4).unwrap(), sv(&[-2.0, 1.0, 2.0, 2.0, 0.0]));
    }

    #[test]
    fn best_error_examples() {
        let v = sv(&[3.0, -1.0, 0.0, 2.0]);
        assert_eq!(best_s_error(&v, 2, Norm::L2).unwrap(), 1.0);
        assert_eq!(best_s_error(&v, 4, Norm::L1).unwrap(), 0.0);
        assert_eq!(best_s_error(&v, 4, Norm::L2).unwrap(), 0.0);
    }

    #[test]
    fn epsilon_tilde_examples() {
        let sparse = sv(&[0.0, 1.0, 0.0, -3.0]);
        assert_eq!(epsilon_tilde(&sparse, 2, 0.0).unwrap(), 0.0);
        assert_eq!(epsilon_tilde(&sparse, 2, 2.0).unwrap(), 2.0);
        let v = sv(&[3.0, -1.0, 0.0, 2.0]);
        let e = epsilon_tilde(&v, 2, 0.0).unwrap();
        assert!((e - (1.0 + 1.0 / 2f64.sqrt())).abs() < 1e-15);
        assert!(epsilon_tilde(&v, 0, 0.0).is_err());
        assert!(epsilon_tilde(&v, 2, -1.0).is_err());
    }

    #[test]
    fn support_examples() {
        assert_eq!(support(&sv(&[0.0, 5.0, 0.0, -2.0])).as_slice(), &[1, 3]);
        assert!(support(&SignalVector::zeros(4)).is_empty());
    }

    #[test]
    fn compressible_magnitudes_are_exact() {
        let spec = CompressibleSpec { n: 50, p: 0.7, r_const: 2.0, seed: 3 };
        let y = gen_compressible(&spec).unwrap();
        let mut mags: Vec<f64> = y.as_slice().iter().map(|v| v.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        for (i, m) in mags.iter().enumerate() {
            let want = 2.0 * ((i + 1) as f64).powf(-1.0 / 0.7);
            assert!((m - want).abs() <= 1e-12 * want.max(1.0));
        }
        assert_eq!(y, gen_compressible(&spec).unwrap());
    }

    #[test]
    fn smaller_p_concentrates_energy() {
        let steep = gen_compressible(&CompressibleSpec { n: 64, p: 0.2, r_const: 1.0, seed: 1 }).unwrap();
        let flat = gen_compressible(&CompressibleSpec { n: 64, p: 1.0, r_const: 1.0, seed: 1 }).unwrap();
        let rel = |y: &SignalVector| best_s_error(y, 1, Norm::L2).unwrap() / y.norm_l2();
        assert!(rel(&steep) < rel(&flat));
    }

    #[test]
    fn tail_bounds() {
        let spec = CompressibleSpec { n: 4, p: 1.0, r_const: 1.0, seed: 0 };
        let t = compressible_tail_bounds(&spec, 2).unwrap();
        assert!((t.l1 - (1.0 / 3.0 + 0.25)).abs() < 1e-15);
        assert!((t.l2 - (1.0 / 9.0 + 1.0 / 16.0f64).sqrt()).abs() < 1e-15);
        assert_eq!(compressible_tail_bounds(&spec, 4).unwrap(), TailBounds { l2: 0.0, l1: 0.0 });
        assert!(compressible_tail_bounds(&spec, 0).is_err());
        assert!(compressible_tail_bounds(&spec, 5).is_err());
    }

    #[test]
    fn tail_bounds_are_attained_by_generator() {
        let spec = CompressibleSpec { n: 40, p: 0.5, r_const: 1.5, seed: 11 };
        let y = gen_compressible(&spec).unwrap();
        for s in 1..=40 {
            let t = compressible_tail_bounds(&spec, s).unwrap();
            let l2 = best_s_error(&y, s, Norm::L2).unwrap();
            let l1 = best_s_error(&y, s, Norm::L1).unwrap();
            assert!(l2 <= t.l2 + 1e-12 && (l2 - t.l2).abs() <= 1e-12);
            assert!(l1 <= t.l1 + 1e-12 && (l1 - t.l1).abs() <= 1e-12);
        }
    }

    #[test]
    fn sparse_generator() {
        let y = gen_sparse(30, 4, 2).unwrap();
        assert_eq!(y.count_nonzero(), 4);
        assert_eq!(y, gen_sparse(30, 4, 2).unwrap());
        assert!(gen_sparse(3, 4, 0).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(SignalVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(serde_json::from_str::<SignalVector>("[1.0, 2.0]").is_ok());
    }
}
