use rayon::prelude::*;

use super::{clamp_unit, map_dims, CorrelationMap};
use crate::error::{invalid, Result};
use crate::raster::{BinaryImage, Grid};
use crate::scalar::Scalar;

/// Row-major bit planes; each row is padded with one trailing zero word.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BitRows {
    words_per_row: usize,
    words: Vec<u64>,
}

impl BitRows {
    fn pack(img: &BinaryImage) -> Self {
        let w = img.width();
        let words_per_row = w.div_ceil(64) + 1;
        let mut words = vec![0u64; words_per_row * img.height()];
        for (y, row) in img.pixels().chunks_exact(w).enumerate() {
            for (x, &v) in row.iter().enumerate() {
                words[y * words_per_row + x / 64] |= (v as u64) << (x % 64);
            }
        }
        Self { words_per_row, words }
    }

    fn row(&self, y: usize) -> &[u64] {
        &self.words[y * self.words_per_row..(y + 1) * self.words_per_row]
    }
}

/// `len` ≤ 64 bits of `row` starting at bit `start`, low bit first.
#[inline]
fn extract(row: &[u64], start: usize, len: usize) -> u64 {
    let (i, shift) = (start / 64, start % 64);
    let mut bits = row[i] >> shift;
    if shift > 0 {
        bits |= row[i + 1] << (64 - shift);
    }
    if len < 64 {
        bits &= (1u64 << len) - 1;
    }
    bits
}

/// Splits a kernel row of `width` bits into 64-bit chunks `(start, len)`.
fn chunks(width: usize) -> Vec<(usize, usize)> {
    (0..width).step_by(64).map(|s| (s, (width - s).min(64))).collect()
}

/// Binary template packed for popcount correlation.
///
/// Words are stored chunk-major: all rows of the first 64 columns, then all
/// rows of the next 64, and so on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryKernel {
    width: usize,
    height: usize,
    ones: u64,
    columns: Vec<u64>,
}

impl BinaryKernel {
    pub fn new(mask: &BinaryImage) -> Self {
        let bits = BitRows::pack(mask);
        let columns = chunks(mask.width())
            .into_iter()
            .flat_map(|(start, len)| {
                let bits = &bits;
                (0..mask.height()).map(move |t| extract(bits.row(t), start, len))
            })
            .collect();
        Self { width: mask.width(), height: mask.height(), ones: mask.count_ones() as u64, columns }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of set pixels.
    pub fn ones(&self) -> u64 {
        self.ones
    }
}

/// Binary image prepared for correlation with kernels of one width.
///
/// For every horizontal window offset the image rows are pre-shifted so a
/// window reduces to contiguous word runs, shared by all kernels of that width.
#[derive(Clone, Debug)]
pub struct BinaryQuery {
    width: usize,
    height: usize,
    kernel_width: usize,
    /// `[chunk][x][row]`
    shifted: Vec<u64>,
    counts: CountTable,
}

impl BinaryQuery {
    pub fn new(image: &BinaryImage, kernel_width: usize) -> Result<Self> {
        if kernel_width == 0 || kernel_width > image.width() {
            return Err(invalid(format!("kernel width {kernel_width} outside 1..={}", image.width())));
        }
        let (w, h) = (image.width(), image.height());
        let offsets = w - kernel_width + 1;
        let bits = BitRows::pack(image);
        let mut shifted = Vec::with_capacity(chunks(kernel_width).len() * offsets * h);
        for (start, len) in chunks(kernel_width) {
            for x in 0..offsets {
                shifted.extend((0..h).map(|y| extract(bits.row(y), x + start, len)));
            }
        }
        Ok(Self { width: w, height: h, kernel_width, shifted, counts: CountTable::new(image) })
    }

    fn column(&self, chunk: usize, x: usize) -> &[u64] {
        let offsets = self.width - self.kernel_width + 1;
        let i = (chunk * offsets + x) * self.height;
        &self.shifted[i..i + self.height]
    }
}

/// NCC map of a binary image against a binary kernel.
///
/// With `N = p·q`, `k` kernel ones, `c` window ones and `b` coincident ones,
///
/// ```text
/// γ = (N·b − k·c) / sqrt((N·c − c²)(N·k − k²))
/// ```
///
/// The numerator and both variance factors are exact integers; only the final
/// division and square root round. `b` is a popcount over 64-bit row chunks and
/// `c` comes from an integer summed-area table.
pub fn ncc_map_binary<T: Scalar>(image: &BinaryImage, kernel: &BinaryKernel) -> Result<CorrelationMap<T>> {
    map_dims(image.width(), image.height(), kernel.width, kernel.height)?;
    ncc_map_binary_query(&BinaryQuery::new(image, kernel.width)?, kernel)
}

/// [`ncc_map_binary`] against a query packed once for many kernels.
pub fn ncc_map_binary_query<T: Scalar>(query: &BinaryQuery, kernel: &BinaryKernel) -> Result<CorrelationMap<T>> {
    if query.kernel_width != kernel.width {
        return Err(invalid(format!(
            "query packed for kernel width {}, kernel is {} wide",
            query.kernel_width, kernel.width
        )));
    }
    let (kw, kh) = (kernel.width, kernel.height);
    let (mw, mh) = map_dims(query.width, query.height, kw, kh)?;
    let n = (kw * kh) as i128;
    let k = kernel.ones as i128;
    let kernel_var = n * k - k * k;

    let mut out = vec![T::zero(); mw * mh];
    if kernel_var != 0 {
        let ctx = RowContext { query, kernel, n, k, kernel_var };
        out.par_chunks_mut(mw).enumerate().for_each(|(y, row)| ctx.fill(y, row));
    }
    Ok(CorrelationMap::from_grid(Grid::new(mw, mh, out)?))
}

struct RowContext<'a> {
    query: &'a BinaryQuery,
    kernel: &'a BinaryKernel,
    n: i128,
    k: i128,
    kernel_var: i128,
}

impl RowContext<'_> {
    fn fill<T: Scalar>(&self, y: usize, row: &mut [T]) {
        #[cfg(target_arch = "x86_64")]
        if std::arch::is_x86_feature_detected!("popcnt") {
            // SAFETY: the CPU supports popcnt, checked just above.
            unsafe { self.fill_popcnt(y, row) };
            return;
        }
        self.fill_portable(y, row);
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "popcnt")]
    unsafe fn fill_popcnt<T: Scalar>(&self, y: usize, row: &mut [T]) {
        self.fill_portable(y, row);
    }

    #[inline(always)]
    fn fill_portable<T: Scalar>(&self, y: usize, row: &mut [T]) {
        let (kw, kh) = (self.kernel.width, self.kernel.height);
        let nchunks = kw.div_ceil(64);
        for (x, slot) in row.iter_mut().enumerate() {
            let c = self.query.counts.window(x, y, kw, kh) as i128;
            let window_var = self.n * c - c * c;
            if window_var == 0 {
                continue;
            }
            let mut b = 0u64;
            for chunk in 0..nchunks {
                let image = &self.query.column(chunk, x)[y..y + kh];
                let kernel = &self.kernel.columns[chunk * kh..(chunk + 1) * kh];
                b += image.iter().zip(kernel).map(|(a, b)| (a & b).count_ones() as u64).sum::<u64>();
            }
            let num = self.n * b as i128 - self.k * c;
            *slot = clamp_unit(T::lit(num as f64 / ((window_var * self.kernel_var) as f64).sqrt()));
        }
    }
}

/// Integer summed-area table of set pixels.
#[derive(Clone, Debug)]
struct CountTable {
    stride: usize,
    table: Vec<u32>,
}

impl CountTable {
    fn new(img: &BinaryImage) -> Self {
        let (w, h) = (img.width(), img.height());
        let stride = w + 1;
        let mut table = vec![0u32; stride * (h + 1)];
        for y in 0..h {
            let mut run = 0;
            for x in 0..w {
                run += img.pixels()[y * w + x] as u32;
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + run;
            }
        }
        Self { stride, table }
    }

    #[inline]
    fn window(&self, x: usize, y: usize, w: usize, h: usize) -> u32 {
        let s = self.stride;
        self.table[(y + h) * s + x + w] + self.table[y * s + x]
            - self.table[y * s + x + w]
            - self.table[(y + h) * s + x]
    }
}

#[cfg(test)]
mod tests {
    use super::super::{make_kernel, ncc_map_reference};
    use super::*;

    #[test]
    fn extract_spans_word_boundary() {
        let row = [0xF000_0000_0000_0000u64, 0b1011, 0];
        assert_eq!(extract(&row, 60, 8), 0b1011_1111);
        assert_eq!(extract(&row, 0, 64), row[0]);
        assert_eq!(extract(&row, 64, 3), 0b011);
    }

    #[test]
    fn matches_reference_on_wide_kernel() {
        // kernel wider than one word exercises the multi-chunk path
        let img = BinaryImage::from_fn(150, 6, |x, y| (x * 7 + y * 3) % 5 < 2 || x % 11 == 0).unwrap();
        let crop = BinaryImage::from_fn(70, 3, |x, y| img.get(x + 40, y + 2)).unwrap();
        let fast: CorrelationMap<f64> = ncc_map_binary(&img, &BinaryKernel::new(&crop)).unwrap();
        let reference = ncc_map_reference(&img.to_grid(), &make_kernel(&crop.to_grid())).unwrap();
        assert!(fast.max_abs_diff(&reference).unwrap() <= 1e-12);
        assert_eq!(fast.get(40, 2), 1.0);
    }

    #[test]
    fn flat_inputs_give_zero() {
        let img = BinaryImage::new(4, 4, vec![1; 16]).unwrap();
        let k = BinaryKernel::new(&BinaryImage::new(2, 2, vec![1, 0, 0, 1]).unwrap());
        let m: CorrelationMap<f64> = ncc_map_binary(&img, &k).unwrap();
        assert!(m.values().iter().all(|&v| v == 0.0));
        let k = BinaryKernel::new(&BinaryImage::zeros(2, 2).unwrap());
        let img = BinaryImage::from_fn(4, 4, |x, _| x % 2 == 0).unwrap();
        let m: CorrelationMap<f32> = ncc_map_binary(&img, &k).unwrap();
        assert!(m.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn query_width_must_match_kernel() {
        let img = BinaryImage::from_fn(8, 8, |x, y| x > y).unwrap();
        let q = BinaryQuery::new(&img, 3).unwrap();
        let k = BinaryKernel::new(&BinaryImage::from_fn(4, 4, |x, _| x > 1).unwrap());
        assert!(ncc_map_binary_query::<f64>(&q, &k).is_err());
        assert!(BinaryQuery::new(&img, 9).is_err());
    }
}
