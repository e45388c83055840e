use super::{center, gamma, map_dims, CorrelationMap, Kernel};
use crate::error::Result;
use crate::raster::Grid;
use crate::scalar::Scalar;

/// Direct evaluation: every window is copied, centred on its own mean and
/// correlated with the centred kernel.
pub fn ncc_map_reference<T: Scalar>(image: &Grid<T>, kernel: &Kernel<T>) -> Result<CorrelationMap<T>> {
    let (kw, kh) = (kernel.width(), kernel.height());
    let (mw, mh) = map_dims(image.width(), image.height(), kw, kh)?;
    let mut window = Vec::with_capacity(kernel.len());
    let mut out = Vec::with_capacity(mw * mh);
    for y in 0..mh {
        for x in 0..mw {
            out.push(window_gamma(image, kernel, x, y, &mut window));
        }
    }
    Ok(CorrelationMap::from_grid(Grid::new(mw, mh, out)?))
}

/// γ of the single window at `(x, y)`; `window` is scratch space.
pub(super) fn window_gamma<T: Scalar>(
    image: &Grid<T>,
    kernel: &Kernel<T>,
    x: usize,
    y: usize,
    window: &mut Vec<T>,
) -> T {
    let kw = kernel.width();
    window.clear();
    for t in 0..kernel.height() {
        window.extend_from_slice(&image.row(y + t)[x..x + kw]);
    }
    let (_, deltas, sum_sq) = center(window);
    let num = deltas.iter().zip(kernel.centered()).map(|(&a, &b)| a * b).sum();
    gamma(num, sum_sq, kernel.sum_sq())
}
