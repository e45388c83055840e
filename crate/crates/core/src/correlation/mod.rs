//! Zero-mean normalized cross-correlation (NCC).
//!
//! For a `p`×`q` kernel `T` slid over an `m`×`n` image `I`, the map entry at
//! window offset `(x, y)` is
//!
//! ```text
//! γ(x, y) = Σ δI·δT / sqrt(Σ δI² · Σ δT²)
//! δI = I(x+s, y+t) − mean of the window,   δT = T(s, t) − mean of T
//! ```
//!
//! which lies in `[-1, 1]`. Windows or kernels with zero variance carry no
//! information and are assigned `γ = 0`.
//!
//! Three kernels compute the same map:
//! - [`ncc_map_reference`]: direct two-pass evaluation per window.
//! - [`ncc_map_fast`]: window statistics from summed-area tables, numerator
//!   as a plain correlation with the centred kernel.
//! - [`ncc_map_binary`]: for {0,1} images, bit-packed popcounts plus integer
//!   window counts.

mod binary;
mod fast;
mod reference;
mod sat;

pub use binary::{ncc_map_binary, ncc_map_binary_query, BinaryKernel, BinaryQuery};
pub use fast::ncc_map_fast;
pub use reference::ncc_map_reference;
pub use sat::SummedAreaTable;

use crate::error::{invalid, Result};
use crate::raster::Grid;
use crate::scalar::Scalar;

/// Template prepared for correlation: its mean, centred values and centred norm.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<T> {
    width: usize,
    height: usize,
    mean: T,
    centered: Vec<T>,
    sum_sq: T,
}

impl<T: Scalar> Kernel<T> {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    /// `T(s, t) − mean`, row-major.
    pub fn centered(&self) -> &[T] {
        &self.centered
    }

    /// `Σ δT²`.
    pub fn sum_sq(&self) -> T {
        self.sum_sq
    }

    /// `sqrt(Σ δT²)`.
    pub fn centered_norm(&self) -> T {
        self.sum_sq.sqrt()
    }

    fn len(&self) -> usize {
        self.width * self.height
    }
}

/// Precomputes the kernel mean and centred norm of a template grid.
pub fn make_kernel<T: Scalar>(img: &Grid<T>) -> Kernel<T> {
    let (mean, centered, sum_sq) = center(img.values());
    Kernel { width: img.width(), height: img.height(), mean, centered, sum_sq }
}

/// Mean, centred values and centred sum of squares, summed in row-major order.
fn center<T: Scalar>(values: &[T]) -> (T, Vec<T>, T) {
    let n = T::from_count(values.len() as u64);
    let mean = values.iter().copied().sum::<T>() / n;
    let centered: Vec<T> = values.iter().map(|&v| v - mean).collect();
    let sum_sq = centered.iter().map(|&d| d * d).sum();
    (mean, centered, sum_sq)
}

/// `num / sqrt(a · b)` clamped to `[-1, 1]`, or zero when either variance
/// term vanishes.
#[inline]
fn gamma<T: Scalar>(num: T, window_sum_sq: T, kernel_sum_sq: T) -> T {
    if window_sum_sq <= T::zero() || kernel_sum_sq <= T::zero() {
        T::zero()
    } else {
        clamp_unit(num / (window_sum_sq * kernel_sum_sq).sqrt())
    }
}

/// Rounding can push a perfect (anti-)match a few ulps past ±1.
#[inline]
fn clamp_unit<T: Scalar>(g: T) -> T {
    g.max(-T::one()).min(T::one())
}

/// Grid of γ values, one per window offset.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMap<T> {
    grid: Grid<T>,
}

impl<T: Scalar> CorrelationMap<T> {
    pub fn from_grid(grid: Grid<T>) -> Self {
        Self { grid }
    }

    pub fn width(&self) -> usize {
        self.grid.width()
    }

    pub fn height(&self) -> usize {
        self.grid.height()
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.grid.get(x, y)
    }

    pub fn values(&self) -> &[T] {
        self.grid.values()
    }

    pub fn as_grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Largest absolute entry-wise difference; `None` if the shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> Option<T> {
        if (self.width(), self.height()) != (other.width(), other.height()) {
            return None;
        }
        Some(self.values().iter().zip(other.values()).map(|(&a, &b)| (a - b).abs()).fold(T::zero(), T::max))
    }
}

fn map_dims(img_w: usize, img_h: usize, k_w: usize, k_h: usize) -> Result<(usize, usize)> {
    if k_w > img_w || k_h > img_h {
        return Err(invalid(format!("kernel {k_w}x{k_h} larger than image {img_w}x{img_h}")));
    }
    Ok((img_w - k_w + 1, img_h - k_h + 1))
}

/// Location and value of the largest map entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchPoint<T> {
    pub x: usize,
    pub y: usize,
    pub gamma: T,
}

/// Maximum entry of the map; the first in row-major order wins ties.
pub fn match_point<T: Scalar>(map: &CorrelationMap<T>) -> MatchPoint<T> {
    let mut best = 0;
    for (i, &v) in map.values().iter().enumerate() {
        if v > map.values()[best] {
            best = i;
        }
    }
    MatchPoint { x: best % map.width(), y: best / map.width(), gamma: map.values()[best] }
}

/// Placement of the centred kernel crop inside a template.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CropGeometry {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl CropGeometry {
    /// Central crop whose sides are `floor(side × fraction)`.
    pub fn central(width: usize, height: usize, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(invalid(format!("kernel fraction {fraction} outside (0, 1]")));
        }
        let cw = (width as f64 * fraction).floor() as usize;
        let ch = (height as f64 * fraction).floor() as usize;
        if cw == 0 || ch == 0 {
            return Err(invalid(format!(
                "kernel fraction {fraction} gives an empty crop of a {width}x{height} template"
            )));
        }
        Ok(Self { x0: (width - cw) / 2, y0: (height - ch) / 2, width: cw, height: ch })
    }
}

/// NCC map of a template against its own central crop.
pub fn autocorrelation_map<T: Scalar>(template: &Grid<T>, kernel_fraction: f64) -> Result<CorrelationMap<T>> {
    let g = CropGeometry::central(template.width(), template.height(), kernel_fraction)?;
    let crop = template.crop(g.x0, g.y0, g.width, g.height)?;
    ncc_map_reference(template, &make_kernel(&crop))
}
