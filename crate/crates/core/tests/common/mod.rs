//! Independent oracles: plain dense linear algebra written without any of the
//! library's numerical code paths.

#![allow(dead_code, clippy::needless_range_loop)]

use iht_core::operators::{build_gaussian, MeasurementOperator};
use iht_core::rip::{exact_beta, RipEstimate};
use iht_core::LinearOperator;

pub type Matrix = Vec<Vec<f64>>;

/// Materialises `op` row by row from its action on the standard basis.
pub fn dense(op: &dyn LinearOperator) -> Matrix {
    let (m, n) = (op.rows(), op.cols());
    let mut a = vec![vec![0.0; n]; m];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = op.apply(&e).unwrap();
        for i in 0..m {
            a[i][j] = col[i];
        }
    }
    a
}

/// Explicit rows of the orthonormal Walsh–Hadamard matrix of size `n`,
/// entry `(i, j) = (−1)^popcount(i & j) / sqrt(n)`, times `gain`.
pub fn hadamard_rows(n: usize, rows: &[usize], gain: f64) -> Matrix {
    let norm = gain / (n as f64).sqrt();
    rows.iter()
        .map(|&i| {
            (0..n)
                .map(|j| if (i & j).count_ones() % 2 == 0 { norm } else { -norm })
                .collect()
        })
        .collect()
}

pub fn matvec(a: &Matrix, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn matvec_t(a: &Matrix, x: &[f64]) -> Vec<f64> {
    let n = a.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for (row, xi) in a.iter().zip(x) {
        for (o, aij) in out.iter_mut().zip(row) {
            *o += aij * xi;
        }
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `A_Γᵀ A_Λ` from a dense matrix.
pub fn cross_gram(a: &Matrix, g: &[usize], l: &[usize]) -> Matrix {
    g.iter()
        .map(|&p| l.iter().map(|&q| a.iter().map(|row| row[p] * row[q]).sum()).collect())
        .collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(mut a: Matrix) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Largest singular value of a rectangular matrix via the eigenvalues of `BᵀB`.
pub fn spectral_norm(b: &Matrix) -> f64 {
    if b.is_empty() || b[0].is_empty() {
        return 0.0;
    }
    let k = b[0].len();
    let btb: Matrix = (0..k)
        .map(|p| (0..k).map(|q| b.iter().map(|row| row[p] * row[q]).sum()).collect())
        .collect();
    jacobi_eigenvalues(btb).last().unwrap().max(0.0).sqrt()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// `β_k` by brute force: Jacobi eigenvalues of every k-column gram.
pub fn brute_force_beta(a: &Matrix, k: usize) -> f64 {
    let n = a[0].len();
    subsets(n, k)
        .iter()
        .map(|g| {
            let ev = jacobi_eigenvalues(cross_gram(a, g, g));
            (1.0 - ev[0]).max(ev[k - 1] - 1.0).max(0.0)
        })
        .fold(0.0, f64::max)
}

/// One thresholded gradient step written out longhand on a dense matrix.
pub fn dense_iht_step(a: &Matrix, x: &[f64], y: &[f64], s: usize) -> Vec<f64> {
    let ay = matvec(a, y);
    let r: Vec<f64> = x.iter().zip(&ay).map(|(p, q)| p - q).collect();
    let g = matvec_t(a, &r);
    let v: Vec<f64> = y.iter().zip(&g).map(|(p, q)| p + q).collect();
    let mut order: Vec<usize> = (0..v.len()).collect();
    // stable sort keeps lower indices first among equal magnitudes
    order.sort_by(|&i, &j| v[j].abs().partial_cmp(&v[i].abs()).unwrap());
    let mut out = vec![0.0; v.len()];
    for &i in order.iter().take(s) {
        out[i] = v[i];
    }
    out
}

/// Least squares on the listed columns by Gaussian elimination on the normal
/// equations, zero elsewhere.
pub fn support_least_squares(a: &Matrix, x: &[f64], support: &[usize]) -> Vec<f64> {
    let k = support.len();
    let n = a[0].len();
    let mut g = cross_gram(a, support, support);
    let mut rhs: Vec<f64> = support
        .iter()
        .map(|&j| a.iter().zip(x).map(|(row, xi)| row[j] * xi).sum())
        .collect();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| g[i][col].abs().partial_cmp(&g[j][col].abs()).unwrap()).unwrap();
        g.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..k {
            let f = g[r][col] / g[col][col];
            for c in col..k {
                g[r][c] -= f * g[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut z = vec![0.0; k];
    for r in (0..k).rev() {
        let tail: f64 = (r + 1..k).map(|c| g[r][c] * z[c]).sum();
        z[r] = (rhs[r] - tail) / g[r][r];
    }
    let mut out = vec![0.0; n];
    for (c, &j) in support.iter().enumerate() {
        out[j] = z[c];
    }
    out
}

/// A tall Gaussian operator rescaled so that exact `β_3s < 1/8` with the
/// upper isometry bound intact, or `None` if this seed does not certify.
pub fn certified_operator(m: usize, n: usize, s: usize, seed: u64) -> Option<(MeasurementOperator, RipEstimate)> {
    let op = build_gaussian(m, n, seed).unwrap();
    let order = (3 * s).min(n);
    let first = exact_beta(&op, order).unwrap();
    let op = op.rescale_for_rip(first.rescale_delta()).ok()?;
    let est = exact_beta(&op, order).unwrap();
    est.certifies(0.125).then_some((op, est))
}

/// Walks seeds from `start` until `count` certified operators are found.
pub fn certified_set(count: usize, m: usize, n: usize, s: usize, start: u64) -> Vec<(u64, MeasurementOperator, RipEstimate)> {
    let mut out = Vec::new();
    let mut seed = start;
    while out.len() < count {
        assert!(seed < start + 20 * count as u64, "too few certified operators");
        if let Some((op, est)) = certified_operator(m, n, s, seed) {
            out.push((seed, op, est));
        }
        seed += 1;
    }
    out
}
