//! Measurement operators.
//!
//! Everything downstream of this module sees an operator only through
//! [`LinearOperator`]: a forward map from length-N signals to length-M
//! measurements and its adjoint. [`MeasurementOperator`] is the concrete
//! implementation used by the builders, either a dense row-major matrix or
//! a row-subsampled orthonormal Walsh–Hadamard transform applied in
//! O(N log N) without ever forming the matrix.

mod counting;
mod hadamard;

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use counting::CountingOperator;
pub(crate) use hadamard::fwht_orthonormal;

use crate::error::check_len;
use crate::{Error, Result};

/// A linear map available through forward and adjoint application.
///
/// Implementations must be free of hidden shared mutable state so that one
/// operator can serve many concurrent solves.
pub trait LinearOperator: Send + Sync {
    /// Number of measurements M.
    fn rows(&self) -> usize;

    /// Signal length N.
    fn cols(&self) -> usize;

    /// `out = Φ v`.
    fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()>;

    /// `out = Φᵀ x`.
    fn apply_adjoint_into(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rows()];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    fn apply_adjoint(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.cols()];
        self.apply_adjoint_into(x, &mut out)?;
        Ok(out)
    }

    /// Writes column `j` of the operator into `out` (length M).
    fn column_into(&self, j: usize, out: &mut [f64]) -> Result<()> {
        if j >= self.cols() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.cols(),
            });
        }
        let mut e = vec![0.0; self.cols()];
        e[j] = 1.0;
        self.apply_into(&e, out)
    }
}

/// Sorted, duplicate-free list of column indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Sorts `indices`; duplicates are rejected.
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate index {} in index set", w[0])));
        }
        Ok(Self(v))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// `{0, 1, …, n-1}`.
    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Caller guarantees `v` is strictly increasing.
    pub(crate) fn from_sorted_unchecked(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut v: Vec<usize> = self.0.iter().chain(&other.0).copied().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        Self(self.0.iter().copied().filter(|i| !other.contains(*i)).collect())
    }

    /// Errors when any index is `>= n`.
    pub fn check_bounds(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= n => Err(Error::IndexOutOfRange { index: last, len: n }),
            _ => Ok(()),
        }
    }
}

impl TryFrom<Vec<usize>> for IndexSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        IndexSet::new(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Dense,
    SubsampledOrthonormal,
}

/// Seeded constructions an operator can be regenerated from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorFamily {
    Identity,
    Gaussian,
    Bernoulli,
    PartialOrthonormal,
}

impl std::fmt::Display for OperatorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            OperatorFamily::Identity => "identity",
            OperatorFamily::Gaussian => "gaussian",
            OperatorFamily::Bernoulli => "bernoulli",
            OperatorFamily::PartialOrthonormal => "partial_orthonormal",
        };
        f.write_str(name)
    }
}

/// JSON descriptor `{kind, M, N, seed, scale}`. Dense coefficients are never
/// serialized; they are regenerated from the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDescriptor {
    pub kind: OperatorFamily,
    #[serde(rename = "M")]
    pub rows: usize,
    #[serde(rename = "N")]
    pub cols: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl OperatorDescriptor {
    pub fn build(&self) -> Result<MeasurementOperator> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::invalid(format!("scale must be positive, got {}", self.scale)));
        }
        let mut op = match self.kind {
            OperatorFamily::Identity => {
                if self.rows != self.cols {
                    return Err(Error::invalid("identity operator requires M == N"));
                }
                MeasurementOperator::identity(self.rows)?
            }
            OperatorFamily::Gaussian => build_gaussian(self.rows, self.cols, self.seed)?,
            OperatorFamily::Bernoulli => build_bernoulli(self.rows, self.cols, self.seed)?,
            OperatorFamily::PartialOrthonormal => {
                build_partial_orthonormal(self.rows, self.cols, self.seed)?
            }
        };
        op.scale = self.scale;
        if let Some(d) = op.descriptor.as_mut() {
            d.scale = self.scale;
        }
        Ok(op)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[derive(Clone, Debug)]
enum Payload {
    /// Row-major `rows × cols` coefficients.
    Dense(Arc<[f64]>),
    Orthonormal {
        size: usize,
        row_indices: Arc<[usize]>,
        /// Column restriction into `0..size`; `None` keeps every column.
        columns: Option<Arc<[usize]>>,
        /// Row normalisation `sqrt(size / rows)`.
        gain: f64,
    },
}

/// Immutable measurement operator `Φ = scale · Φ̂`.
#[derive(Clone, Debug)]
pub struct MeasurementOperator {
    rows: usize,
    cols: usize,
    scale: f64,
    payload: Payload,
    descriptor: Option<OperatorDescriptor>,
}

impl MeasurementOperator {
    /// Dense operator from row-major coefficients.
    pub fn from_dense(rows: usize, cols: usize, coeffs: Vec<f64>) -> Result<Self> {
        validate_dims(rows, cols)?;
        check_len("dense coefficients", rows * cols, coeffs.len())?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("dense coefficients must be finite"));
        }
        Ok(Self {
            rows,
            cols,
            scale: 1.0,
            payload: Payload::Dense(coeffs.into()),
            descriptor: None,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        validate_dims(n, n)?;
        let mut coeffs = vec![0.0; n * n];
        for i in 0..n {
            coeffs[i * n + i] = 1.0;
        }
        let mut op = Self::from_dense(n, n, coeffs)?;
        op.descriptor = Some(OperatorDescriptor {
            kind: OperatorFamily::Identity,
            rows: n,
            cols: n,
            seed: 0,
            scale: 1.0,
        });
        Ok(op)
    }

    pub fn kind(&self) -> OperatorKind {
        match self.payload {
            Payload::Dense(_) => OperatorKind::Dense,
            Payload::Orthonormal { .. } => OperatorKind::SubsampledOrthonormal,
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The seeded recipe for this operator, if it came from a builder and has
    /// not been column-restricted.
    pub fn descriptor(&self) -> Option<&OperatorDescriptor> {
        self.descriptor.as_ref()
    }

    /// Selected rows of the underlying transform (subsampled kind only).
    pub fn row_indices(&self) -> Option<&[usize]> {
        match &self.payload {
            Payload::Orthonormal { row_indices, .. } => Some(row_indices),
            Payload::Dense(_) => None,
        }
    }

    /// The sub-operator `Φ_Γ` keeping only the columns in `gamma`.
    pub fn restrict_columns(&self, gamma: &IndexSet) -> Result<Self> {
        gamma.check_bounds(self.cols)?;
        let payload = match &self.payload {
            Payload::Dense(a) => {
                let k = gamma.len();
                let mut sub = Vec::with_capacity(self.rows * k);
                for i in 0..self.rows {
                    let row = &a[i * self.cols..(i + 1) * self.cols];
                    sub.extend(gamma.iter().map(|j| row[j]));
                }
                Payload::Dense(sub.into())
            }
            Payload::Orthonormal {
                size,
                row_indices,
                columns,
                gain,
            } => {
                let mapped: Vec<usize> = match columns {
                    Some(c) => gamma.iter().map(|j| c[j]).collect(),
                    None => gamma.as_slice().to_vec(),
                };
                Payload::Orthonormal {
                    size: *size,
                    row_indices: Arc::clone(row_indices),
                    columns: Some(mapped.into()),
                    gain: *gain,
                }
            }
        };
        Ok(Self {
            rows: self.rows,
            cols: gamma.len(),
            scale: self.scale,
            payload,
            descriptor: None,
        })
    }

    /// Multiplies the scale by `1/sqrt(1 + delta)`, turning a symmetric RIP
    /// constant `delta` into the one-sided form with `beta = 2δ/(1+δ)`.
    pub fn rescale_for_rip(&self, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::invalid(format!("delta must lie in [0, 1), got {delta}")));
        }
        let mut op = self.clone();
        op.scale /= (1.0 + delta).sqrt();
        if let Some(d) = op.descriptor.as_mut() {
            d.scale = op.scale;
        }
        Ok(op)
    }
}

impl LinearOperator for MeasurementOperator {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("forward input", self.cols, v.len())?;
        check_len("forward output", self.rows, out.len())?;
        match &self.payload {
            Payload::Dense(a) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &a[i * self.cols..(i + 1) * self.cols];
                    *o = self.scale * crate::dot(row, v);
                }
            }
            Payload::Orthonormal {
                size,
                row_indices,
                columns,
                gain,
            } => {
                let mut buf = vec![0.0; *size];
                match columns {
                    Some(c) => c.iter().zip(v).for_each(|(&j, &x)| buf[j] = x),
                    None => buf.copy_from_slice(v),
                }
                fwht_orthonormal(&mut buf);
                let g = self.scale * gain;
                for (o, &r) in out.iter_mut().zip(row_indices.iter()) {
                    *o = g * buf[r];
                }
            }
        }
        Ok(())
    }

    fn apply_adjoint_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("adjoint input", self.rows, x.len())?;
        check_len("adjoint output", self.cols, out.len())?;
        match &self.payload {
            Payload::Dense(a) => {
                out.fill(0.0);
                for (i, &xi) in x.iter().enumerate() {
                    let row = &a[i * self.cols..(i + 1) * self.cols];
                    for (o, &aij) in out.iter_mut().zip(row) {
                        *o += aij * xi;
                    }
                }
                out.iter_mut().for_each(|o| *o *= self.scale);
            }
            Payload::Orthonormal {
                size,
                row_indices,
                columns,
                gain,
            } => {
                let mut buf = vec![0.0; *size];
                for (&r, &xi) in row_indices.iter().zip(x) {
                    buf[r] = xi;
                }
                fwht_orthonormal(&mut buf);
                let g = self.scale * gain;
                match columns {
                    Some(c) => out.iter_mut().zip(c.iter()).for_each(|(o, &j)| *o = g * buf[j]),
                    None => out.iter_mut().zip(&buf).for_each(|(o, &b)| *o = g * b),
                }
            }
        }
        Ok(())
    }

    fn column_into(&self, j: usize, out: &mut [f64]) -> Result<()> {
        if j >= self.cols {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.cols,
            });
        }
        check_len("column output", self.rows, out.len())?;
        match &self.payload {
            Payload::Dense(a) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = self.scale * a[i * self.cols + j];
                }
                Ok(())
            }
            Payload::Orthonormal { .. } => {
                let mut e = vec![0.0; self.cols];
                e[j] = 1.0;
                self.apply_into(&e, out)
            }
        }
    }
}

fn validate_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "operator dimensions must be positive, got {rows}x{cols}"
        )));
    }
    if rows > cols {
        log::warn!("operator has more rows ({rows}) than columns ({cols}); not a compressed regime");
    }
    Ok(())
}

fn seeded(family: OperatorFamily, rows: usize, cols: usize, seed: u64) -> OperatorDescriptor {
    OperatorDescriptor {
        kind: family,
        rows,
        cols,
        seed,
        scale: 1.0,
    }
}

/// Dense operator with i.i.d. `N(0, 1/M)` entries.
pub fn build_gaussian(rows: usize, cols: usize, seed: u64) -> Result<MeasurementOperator> {
    validate_dims(rows, cols)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = 1.0 / (rows as f64).sqrt();
    let coeffs: Vec<f64> = (0..rows * cols)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut op = MeasurementOperator::from_dense(rows, cols, coeffs)?;
    op.descriptor = Some(seeded(OperatorFamily::Gaussian, rows, cols, seed));
    Ok(op)
}

/// Dense operator with i.i.d. `±1/sqrt(M)` entries; every column has unit norm.
pub fn build_bernoulli(rows: usize, cols: usize, seed: u64) -> Result<MeasurementOperator> {
    validate_dims(rows, cols)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mag = 1.0 / (rows as f64).sqrt();
    let coeffs: Vec<f64> = (0..rows * cols)
        .map(|_| if rng.random_bool(0.5) { mag } else { -mag })
        .collect();
    let mut op = MeasurementOperator::from_dense(rows, cols, coeffs)?;
    op.descriptor = Some(seeded(OperatorFamily::Bernoulli, rows, cols, seed));
    Ok(op)
}

/// `M` distinct rows of the orthonormal Walsh–Hadamard transform of size `N`,
/// scaled by `sqrt(N/M)`. `N` must be a power of two.
pub fn build_partial_orthonormal(rows: usize, cols: usize, seed: u64) -> Result<MeasurementOperator> {
    validate_dims(rows, cols)?;
    if rows > cols {
        return Err(Error::invalid(format!(
            "cannot select {rows} distinct rows from a transform of size {cols}"
        )));
    }
    if !cols.is_power_of_two() {
        return Err(Error::invalid(format!(
            "Walsh–Hadamard transform needs a power-of-two size, got {cols}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<usize> = (0..cols).collect();
    let (chosen, _) = all.partial_shuffle(&mut rng, rows);
    let mut row_indices = chosen.to_vec();
    row_indices.sort_unstable();
    Ok(MeasurementOperator {
        rows,
        cols,
        scale: 1.0,
        payload: Payload::Orthonormal {
            size: cols,
            row_indices: row_indices.into(),
            columns: None,
            gain: (cols as f64 / rows as f64).sqrt(),
        },
        descriptor: Some(seeded(OperatorFamily::PartialOrthonormal, rows, cols, seed)),
    })
}

/// Dispatches on `family`; `Identity` ignores `seed` and requires `rows == cols`.
pub fn build(family: OperatorFamily, rows: usize, cols: usize, seed: u64) -> Result<MeasurementOperator> {
    OperatorDescriptor {
        kind: family,
        rows,
        cols,
        seed,
        scale: 1.0,
    }
    .build()
}
