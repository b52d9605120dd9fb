use std::sync::atomic::{AtomicUsize, Ordering};

use super::LinearOperator;
use crate::Result;

/// Wraps an operator and counts forward and adjoint applications.
pub struct CountingOperator<'a, O: ?Sized> {
    inner: &'a O,
    forward: AtomicUsize,
    adjoint: AtomicUsize,
}

impl<'a, O: LinearOperator + ?Sized> CountingOperator<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        Self {
            inner,
            forward: AtomicUsize::new(0),
            adjoint: AtomicUsize::new(0),
        }
    }

    pub fn forward_count(&self) -> usize {
        self.forward.load(Ordering::Relaxed)
    }

    pub fn adjoint_count(&self) -> usize {
        self.adjoint.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.forward.store(0, Ordering::Relaxed);
        self.adjoint.store(0, Ordering::Relaxed);
    }
}

impl<O: LinearOperator + ?Sized> LinearOperator for CountingOperator<'_, O> {
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    fn cols(&self) -> usize {
        self.inner.cols()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.forward.fetch_add(1, Ordering::Relaxed);
        self.inner.apply_into(v, out)
    }

    fn apply_adjoint_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.adjoint.fetch_add(1, Ordering::Relaxed);
        self.inner.apply_adjoint_into(x, out)
    }
}
