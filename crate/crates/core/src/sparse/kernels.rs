//! Slice kernels shared by every layer pass.
//!
//! Summation order is fixed so results are reproducible bit for bit.

const LANES: usize = 8;

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Sparse row gather over feature-major blocks of `n` samples:
///
/// `out[r][b] = init[r] + sum_t weights[t] * src[index[t]][b]` for `t` in
/// `offsets[r]..offsets[r + 1]`, terms added in increasing `t`.
///
/// The per-element summation order equals the one of repeated [`axpy`]
/// calls on rows pre-filled with `init`. Samples are processed in blocks so
/// that one block of `src` stays cache resident across every output row.
pub fn gather_rows(out: &mut [f64], init: &[f64], offsets: &[usize], weights: &[f64], index: &[usize], src: &[f64], n: usize) {
    let rows = init.len();
    debug_assert_eq!(offsets.len(), rows + 1);
    debug_assert_eq!(out.len(), rows * n);
    let mut start = 0;
    while start + 16 <= n {
        gather_block::<16>(out, init, offsets, weights, index, src, n, start);
        start += 16;
    }
    while start + 4 <= n {
        gather_block::<4>(out, init, offsets, weights, index, src, n, start);
        start += 4;
    }
    while start < n {
        gather_block::<1>(out, init, offsets, weights, index, src, n, start);
        start += 1;
    }
}

#[allow(clippy::too_many_arguments)]
#[inline(always)]
fn gather_block<const N: usize>(
    out: &mut [f64],
    init: &[f64],
    offsets: &[usize],
    weights: &[f64],
    index: &[usize],
    src: &[f64],
    n: usize,
    start: usize,
) {
    for r in 0..init.len() {
        let mut acc = [init[r]; N];
        let (lo, hi) = (offsets[r], offsets[r + 1]);
        for (w, f) in weights[lo..hi].iter().zip(&index[lo..hi]) {
            let base = f * n + start;
            let x = &src[base..base + N];
            for l in 0..N {
                acc[l] += w * x[l];
            }
        }
        out[r * n + start..r * n + start + N].copy_from_slice(&acc);
    }
}

/// Dot product with eight interleaved partial sums, reduced pairwise.
#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = [0.0f64; LANES];
    let xs = x.chunks_exact(LANES);
    let ys = y.chunks_exact(LANES);
    let (xr, yr) = (xs.remainder(), ys.remainder());
    for (cx, cy) in xs.zip(ys) {
        for l in 0..LANES {
            acc[l] += cx[l] * cy[l];
        }
    }
    for (l, (a, b)) in xr.iter().zip(yr).enumerate() {
        acc[l] += a * b;
    }
    ((acc[0] + acc[4]) + (acc[2] + acc[6])) + ((acc[1] + acc[5]) + (acc[3] + acc[7]))
}

#[inline]
pub fn sum(x: &[f64]) -> f64 {
    let mut acc = [0.0f64; LANES];
    let xs = x.chunks_exact(LANES);
    let xr = xs.remainder();
    for c in xs {
        for l in 0..LANES {
            acc[l] += c[l];
        }
    }
    for (l, a) in xr.iter().enumerate() {
        acc[l] += a;
    }
    ((acc[0] + acc[4]) + (acc[2] + acc[6])) + ((acc[1] + acc[5]) + (acc[3] + acc[7]))
}
