//! Executable versions of the isometry inequalities behind the recovery
//! guarantees. Each check returns a margin; nonnegative means the inequality
//! holds for that input.

use nalgebra::DMatrix;

use super::gram::{sym_eigenvalues, Columns};
use crate::error::check_len;
use crate::operators::{IndexSet, LinearOperator};
use crate::signals::{hard_threshold, SignalVector};
use crate::{Error, Execution, Result};

fn restricted<O: LinearOperator + ?Sized>(op: &O, gamma: &IndexSet) -> Result<Columns> {
    gamma.check_bounds(op.cols())?;
    Columns::for_indices(op, gamma.as_slice(), Execution::Sequential)
}

fn local(k: usize) -> Vec<usize> {
    (0..k).collect()
}

/// Eigenvalues of `Φ_ΓᵀΦ_Γ`, ascending.
pub fn gram_eigenvalues<O: LinearOperator + ?Sized>(op: &O, gamma: &IndexSet) -> Result<Vec<f64>> {
    let cols = restricted(op, gamma)?;
    Ok(sym_eigenvalues(cols.gram(&local(gamma.len()))))
}

/// `β − ‖I − Φ_ΓᵀΦ_Γ‖₂`.
pub fn check_lemma1<O: LinearOperator + ?Sized>(op: &O, gamma: &IndexSet, beta: f64) -> Result<f64> {
    let ev = gram_eigenvalues(op, gamma)?;
    let norm = ev.iter().map(|l| (1.0 - l).abs()).fold(0.0, f64::max);
    Ok(beta - norm)
}

/// `β − ‖Φ_ΓᵀΦ_Λ‖₂` for disjoint `Γ` and `Λ`.
pub fn check_lemma2<O: LinearOperator + ?Sized>(
    op: &O,
    gamma: &IndexSet,
    lambda: &IndexSet,
    beta: f64,
) -> Result<f64> {
    if !gamma.is_disjoint(lambda) {
        return Err(Error::invalid("index sets must be disjoint"));
    }
    let a = restricted(op, gamma)?;
    let b = restricted(op, lambda)?;
    if gamma.is_empty() || lambda.is_empty() {
        return Ok(beta);
    }
    let cross = DMatrix::from_fn(gamma.len(), lambda.len(), |i, j| crate::dot(a.col(i), b.col(j)));
    let sigma = cross.singular_values().max();
    Ok(beta - sigma)
}

/// `‖y‖₂ + ‖y‖₁/√s − ‖Φy‖₂`.
pub fn check_lemma3<O: LinearOperator + ?Sized>(op: &O, y: &SignalVector, s: usize) -> Result<f64> {
    check_len("signal", op.cols(), y.len())?;
    if s == 0 {
        return Err(Error::invalid("sparsity must be at least 1"));
    }
    let phi_y = op.apply(y.as_slice())?;
    Ok(y.norm_l2() + y.norm_l1() / (s as f64).sqrt() - crate::norm2(&phi_y))
}

/// `‖Φ(y − y^s) + e‖₂`, the noise seen by a solver targeting `y^s`.
pub fn effective_noise_norm<O: LinearOperator + ?Sized>(
    op: &O,
    y: &SignalVector,
    s: usize,
    e: &[f64],
) -> Result<f64> {
    check_len("signal", op.cols(), y.len())?;
    check_len("noise", op.rows(), e.len())?;
    let ys = hard_threshold(y, s)?;
    let tail: Vec<f64> = y.as_slice().iter().zip(ys.as_slice()).map(|(a, b)| a - b).collect();
    let mut out = op.apply(&tail)?;
    for (o, ei) in out.iter_mut().zip(e) {
        *o += ei;
    }
    Ok(crate::norm2(&out))
}

/// `‖x‖₂ − ‖Φ_Γᵀx‖₂`.
pub fn check_adjoint_bound<O: LinearOperator + ?Sized>(op: &O, gamma: &IndexSet, x: &[f64]) -> Result<f64> {
    check_len("measurement", op.rows(), x.len())?;
    let cols = restricted(op, gamma)?;
    let sq: f64 = (0..gamma.len()).map(|k| crate::dot(cols.col(k), x).powi(2)).sum();
    Ok(crate::norm2(x) - sq.sqrt())
}

/// Margins of `(1 − β)‖u‖₂ ≤ ‖Φ_ΓᵀΦ_Γ u‖₂ ≤ ‖u‖₂` for `u` supported on `Γ`
/// (given as `|Γ|` coefficients), returned as `(lower, upper)`.
pub fn check_gram_bounds<O: LinearOperator + ?Sized>(
    op: &O,
    gamma: &IndexSet,
    u: &[f64],
    beta: f64,
) -> Result<(f64, f64)> {
    check_len("restricted vector", gamma.len(), u.len())?;
    let cols = restricted(op, gamma)?;
    let g = cols.gram(&local(gamma.len()));
    let gu = &g * DMatrix::from_column_slice(u.len(), 1, u);
    let gu_norm = gu.norm();
    let u_norm = crate::norm2(u);
    Ok((gu_norm - (1.0 - beta) * u_norm, u_norm - gu_norm))
}
