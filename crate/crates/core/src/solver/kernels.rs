//! Inner loops shared by the distributed and centralized iterations.
//! Both use the same routines so that a single-agent run reproduces ISTA
//! bit for bit.

use nalgebra::DMatrix;

/// Dot product with four independent accumulators; fixed summation order.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `grad = X^T (X theta - y) / n` where `xt = X^T` is `d x n`, so each
/// sample is a contiguous column and is read once.
pub(crate) fn least_squares_gradient(xt: &DMatrix<f64>, y: &[f64], theta: &[f64], grad: &mut [f64]) {
    let n = xt.ncols();
    let d = xt.nrows();
    let data = xt.as_slice();
    let scale = 1.0 / n as f64;
    grad.fill(0.0);
    for k in 0..n {
        let row = &data[k * d..(k + 1) * d];
        let c = (dot(row, theta) - y[k]) * scale;
        for (g, x) in grad.iter_mut().zip(row) {
            *g += c * x;
        }
    }
}
