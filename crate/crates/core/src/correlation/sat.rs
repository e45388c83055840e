use crate::raster::Grid;
use crate::scalar::Scalar;

/// Summed-area table of values and squared values, accumulated in `f64`.
///
/// Entry `(x, y)` of each table holds the sum over the rectangle `[0, x) × [0, y)`,
/// so the table is one larger than the source in each dimension.
#[derive(Clone, Debug)]
pub struct SummedAreaTable {
    stride: usize,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl SummedAreaTable {
    pub fn new<T: Scalar>(img: &Grid<T>) -> Self {
        let (w, h) = (img.width(), img.height());
        let stride = w + 1;
        let mut sum = vec![0.0; stride * (h + 1)];
        let mut sum_sq = vec![0.0; stride * (h + 1)];
        for y in 0..h {
            let (mut row, mut row_sq) = (0.0, 0.0);
            for (x, &v) in img.row(y).iter().enumerate() {
                let v = v.to_f64_lossy();
                row += v;
                row_sq += v * v;
                let i = (y + 1) * stride + x + 1;
                sum[i] = sum[i - stride] + row;
                sum_sq[i] = sum_sq[i - stride] + row_sq;
            }
        }
        Self { stride, sum, sum_sq }
    }

    /// Sum and sum of squares over the `w`×`h` window at `(x, y)`.
    #[inline]
    pub fn window(&self, x: usize, y: usize, w: usize, h: usize) -> (f64, f64) {
        let s = self.stride;
        let (a, b, c, d) = (y * s + x, y * s + x + w, (y + h) * s + x, (y + h) * s + x + w);
        (
            self.sum[d] - self.sum[b] - self.sum[c] + self.sum[a],
            self.sum_sq[d] - self.sum_sq[b] - self.sum_sq[c] + self.sum_sq[a],
        )
    }
}
