use nalgebra::{DMatrix, DVector};

use crate::error::check_len;
use crate::operators::{IndexSet, LinearOperator};
use crate::{Error, Result, SignalVector};

/// Least-squares solution restricted to a known support.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleEstimate {
    pub estimate: SignalVector,
    /// `Φ_Γ` lacks full column rank; `estimate` is then the minimum-norm solution.
    pub rank_deficient: bool,
}

/// `argmin ‖x − Φ_Γ z‖₂` over `z` supported on `support`.
pub fn oracle_recover<O: LinearOperator + ?Sized>(
    op: &O,
    x: &[f64],
    support: &IndexSet,
) -> Result<OracleEstimate> {
    check_len("measurements", op.rows(), x.len())?;
    support.check_bounds(op.cols())?;
    let (m, k) = (op.rows(), support.len());
    if k > m {
        return Err(Error::invalid(format!("support of size {k} exceeds {m} measurements")));
    }
    let mut out = vec![0.0; op.cols()];
    if k == 0 {
        return Ok(OracleEstimate {
            estimate: SignalVector::new(out)?,
            rank_deficient: false,
        });
    }
    let mut a = DMatrix::zeros(m, k);
    let mut col = vec![0.0; m];
    for (c, j) in support.iter().enumerate() {
        op.column_into(j, &mut col)?;
        a.column_mut(c).copy_from_slice(&col);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = f64::EPSILON * m.max(k) as f64 * smax;
    let rank = svd.rank(cutoff);
    let z = svd
        .solve(&DVector::from_column_slice(x), cutoff)
        .map_err(|e| Error::Numeric {
            iteration: 0,
            reason: format!("least-squares solve failed: {e}"),
        })?;
    for (c, j) in support.iter().enumerate() {
        out[j] = z[c];
    }
    Ok(OracleEstimate {
        estimate: SignalVector::new(out)?,
        rank_deficient: rank < k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_gaussian, MeasurementOperator};

    #[test]
    fn recovers_consistent_system() {
        let op = build_gaussian(10, 20, 5).unwrap();
        let mut y = vec![0.0; 20];
        y[3] = 1.5;
        y[11] = -0.25;
        let x = op.apply(&y).unwrap();
        let est = oracle_recover(&op, &x, &IndexSet::new([3, 11]).unwrap()).unwrap();
        assert!(!est.rank_deficient);
        for (a, b) in est.estimate.as_slice().iter().zip(&y) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn empty_support_and_rank_deficiency() {
        let op = build_gaussian(4, 6, 1).unwrap();
        let est = oracle_recover(&op, &[1.0; 4], &IndexSet::empty()).unwrap();
        assert_eq!(est.estimate.count_nonzero(), 0);

        // two identical columns
        let a = vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let op = MeasurementOperator::from_dense(2, 3, a).unwrap();
        let est = oracle_recover(&op, &[2.0, 0.0], &IndexSet::new([0, 1]).unwrap()).unwrap();
        assert!(est.rank_deficient);
        let v = est.estimate.as_slice();
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
        assert!(oracle_recover(&op, &[0.0; 2], &IndexSet::full(3)).is_err());
    }
}
