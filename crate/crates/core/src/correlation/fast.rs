use rayon::prelude::*;

use super::reference::window_gamma;
use super::{clamp_unit, map_dims, CorrelationMap, Kernel};
use crate::error::Result;
use crate::raster::Grid;
use crate::scalar::Scalar;

use super::sat::SummedAreaTable;

/// Window variances below this fraction of the raw sum of squares are
/// recomputed two-pass; the one-pass `Σx² − (Σx)²/n` form cancels there.
const CANCELLATION_GUARD: f64 = 1e-8;

/// Windows whose |γ| comes this close to 1 are re-evaluated directly, so exact
/// matches report exactly ±1 as the reference does.
const NEAR_UNIT: f64 = 1e-6;

/// Summed-area-table evaluation of the NCC map.
///
/// Window sums and sums of squares come from the tables in O(1); only the
/// numerator touches every window pixel. The table mean is subtracted from the
/// window as an offset; the centred kernel sums to zero, so the result is
/// unchanged in exact arithmetic while large intensity offsets no longer
/// cancel. Each entry depends only on its own window, so the parallel row fill
/// does not depend on the thread count.
pub fn ncc_map_fast<T: Scalar>(image: &Grid<T>, kernel: &Kernel<T>) -> Result<CorrelationMap<T>> {
    let (kw, kh) = (kernel.width(), kernel.height());
    let (mw, mh) = map_dims(image.width(), image.height(), kw, kh)?;
    let sat = SummedAreaTable::new(image);
    let n = (kw * kh) as f64;
    let kernel_sum_sq = kernel.sum_sq().to_f64_lossy();

    let mut out = vec![T::zero(); mw * mh];
    out.par_chunks_mut(mw).enumerate().for_each(|(y, row)| {
        let mut scratch = Vec::new();
        for (x, slot) in row.iter_mut().enumerate() {
            if kernel_sum_sq <= 0.0 {
                continue;
            }
            let (sum, sum_sq) = sat.window(x, y, kw, kh);
            let mut var = sum_sq - sum * sum / n;
            if var < CANCELLATION_GUARD * sum_sq {
                var = two_pass_variance(image, x, y, kw, kh);
            }
            if var <= 0.0 {
                continue;
            }
            let offset = T::lit(sum / n);
            let num: T = (0..kh)
                .map(|t| dot(&image.row(y + t)[x..x + kw], &kernel.centered()[t * kw..(t + 1) * kw], offset))
                .sum();
            let g = num.to_f64_lossy() / (var * kernel_sum_sq).sqrt();
            *slot = if g.abs() > 1.0 - NEAR_UNIT {
                window_gamma(image, kernel, x, y, &mut scratch)
            } else {
                clamp_unit(T::lit(g))
            };
        }
    });
    Ok(CorrelationMap::from_grid(Grid::new(mw, mh, out)?))
}

fn two_pass_variance<T: Scalar>(image: &Grid<T>, x: usize, y: usize, w: usize, h: usize) -> f64 {
    let values = || (y..y + h).flat_map(move |t| image.row(t)[x..x + w].iter().map(|v| v.to_f64_lossy()));
    let mean = values().sum::<f64>() / (w * h) as f64;
    values().map(|v| (v - mean) * (v - mean)).sum()
}

/// Four-lane `Σ (a − offset)·b`.
#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T], offset: T) -> T {
    let mut acc = [T::zero(); 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += (x[0] - offset) * y[0];
        acc[1] += (x[1] - offset) * y[1];
        acc[2] += (x[2] - offset) * y[2];
        acc[3] += (x[3] - offset) * y[3];
    }
    let tail: T = ra.iter().zip(rb).map(|(&x, &y)| (x - offset) * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
