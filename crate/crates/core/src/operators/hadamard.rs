/// In-place orthonormal fast Walsh–Hadamard transform (Sylvester ordering).
///
/// The transform is symmetric and orthogonal, so it is its own adjoint and
/// its own inverse. `buf.len()` must be a power of two.
pub(crate) fn fwht_orthonormal(buf: &mut [f64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in buf.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    let norm = 1.0 / (n as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= norm;
    }
}
