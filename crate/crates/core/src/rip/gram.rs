use nalgebra::{DMatrix, SymmetricEigen};

use crate::operators::LinearOperator;
use crate::{Execution, Result};

/// Operator columns stored contiguously, one after another.
pub(crate) struct Columns {
    rows: usize,
    data: Vec<f64>,
}

impl Columns {
    pub(crate) fn materialize<O: LinearOperator + ?Sized>(op: &O, exec: Execution) -> Result<Self> {
        let idx: Vec<usize> = (0..op.cols()).collect();
        Self::for_indices(op, &idx, exec)
    }

    pub(crate) fn for_indices<O: LinearOperator + ?Sized>(
        op: &O,
        idx: &[usize],
        exec: Execution,
    ) -> Result<Self> {
        let rows = op.rows();
        let cols = exec.try_map_range(idx.len(), |k| {
            let mut c = vec![0.0; rows];
            op.column_into(idx[k], &mut c).map(|_| c)
        })?;
        Ok(Self {
            rows,
            data: cols.concat(),
        })
    }

    pub(crate) fn col(&self, k: usize) -> &[f64] {
        &self.data[k * self.rows..(k + 1) * self.rows]
    }

    pub(crate) fn len(&self) -> usize {
        self.data.len().checked_div(self.rows).unwrap_or(0)
    }

    /// Gram of the listed (local) columns.
    pub(crate) fn gram(&self, idx: &[usize]) -> DMatrix<f64> {
        let k = idx.len();
        let mut g = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let v = crate::dot(self.col(idx[a]), self.col(idx[b]));
                g[(a, b)] = v;
                g[(b, a)] = v;
            }
        }
        g
    }

    pub(crate) fn full_gram(&self, exec: Execution) -> Gram {
        let n = self.len();
        let rows = exec.map_range(n, |a| {
            (0..n)
                .map(|b| crate::dot(self.col(a), self.col(b)))
                .collect::<Vec<_>>()
        });
        let mut data = rows.concat();
        // symmetrise exactly
        for a in 0..n {
            for b in a + 1..n {
                data[b * n + a] = data[a * n + b];
            }
        }
        Gram { n, data }
    }
}

/// Full `N × N` gram `ΦᵀΦ`, row-major.
pub(crate) struct Gram {
    n: usize,
    data: Vec<f64>,
}

impl Gram {
    pub(crate) fn sub(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.data[idx[a] * self.n + idx[b]])
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub(crate) fn sym_eigenvalues(g: DMatrix<f64>) -> Vec<f64> {
    match g.nrows() {
        0 => Vec::new(),
        1 => vec![g[(0, 0)]],
        _ => {
            let mut ev: Vec<f64> = SymmetricEigen::new(g).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev
        }
    }
}

pub(crate) fn extreme_eigenvalues(g: DMatrix<f64>) -> (f64, f64) {
    let ev = sym_eigenvalues(g);
    (ev[0], ev[ev.len() - 1])
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
pub(crate) fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for pos in 0..k {
        let mut c = next;
        loop {
            let count = binomial(n - c - 1, k - pos - 1);
            if rank < count {
                break;
            }
            rank -= count;
            c += 1;
        }
        out.push(c);
        next = c + 1;
    }
    out
}

/// Advances to the lexicographic successor; false after the last subset.
pub(crate) fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
