//! Global Otsu thresholding of 8-bit images into hand/background masks.

use crate::error::{invalid, Result};
use crate::raster::{BinaryImage, GrayImage};

pub const LEVELS: usize = 256;

/// Relative tolerance under which two between-class variances count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Intensity histogram over the 256 levels of an 8-bit image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    counts: [u64; LEVELS],
    total: u64,
}

impl Histogram {
    pub fn from_counts(counts: [u64; LEVELS]) -> Result<Self> {
        let total = counts.iter().sum();
        if total == 0 {
            return Err(invalid("histogram is empty"));
        }
        Ok(Self { counts, total })
    }

    pub fn counts(&self) -> &[u64; LEVELS] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Between-class variance of the split {levels ≤ k} / {levels > k}.
    ///
    /// Uses the integer identity `σ² = (s0·n1 − s1·n0)² / (N²·n0·n1)`, so any two
    /// splits with the same class populations produce bit-identical values.
    pub fn between_class_variance(&self, k: u8) -> f64 {
        let (mut n0, mut s0) = (0u64, 0u64);
        for (level, &c) in self.counts.iter().enumerate().take(k as usize + 1) {
            n0 += c;
            s0 += c * level as u64;
        }
        let n1 = self.total - n0;
        let s1 = self.weighted_sum() - s0;
        variance_from_sums(n0, s0, n1, s1, self.total)
    }

    fn weighted_sum(&self) -> u64 {
        self.counts.iter().enumerate().map(|(v, &c)| c * v as u64).sum()
    }
}

fn variance_from_sums(n0: u64, s0: u64, n1: u64, s1: u64, total: u64) -> f64 {
    if n0 == 0 || n1 == 0 {
        return 0.0;
    }
    let d = (s0 as i128) * (n1 as i128) - (s1 as i128) * (n0 as i128);
    let d = d as f64;
    let n = total as f64;
    d * d / (n * n * n0 as f64 * n1 as f64)
}

/// Selected Otsu level and the between-class variance it attains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdResult {
    pub level: u8,
    pub between_class_variance: f64,
}

pub fn histogram(img: &GrayImage) -> Histogram {
    let mut counts = [0u64; LEVELS];
    for &v in img.pixels() {
        counts[v as usize] += 1;
    }
    Histogram { counts, total: img.pixels().len() as u64 }
}

/// Otsu's threshold: the level maximising between-class variance, smallest on ties.
///
/// A histogram with a single occupied level has zero variance everywhere; the
/// occupied level itself is returned so the resulting mask is empty.
pub fn otsu_threshold(h: &Histogram) -> ThresholdResult {
    let total_sum = h.weighted_sum();
    let mut variances = [0f64; LEVELS];
    let (mut n0, mut s0) = (0u64, 0u64);
    for (k, &c) in h.counts.iter().enumerate() {
        n0 += c;
        s0 += c * k as u64;
        variances[k] = variance_from_sums(n0, s0, h.total - n0, total_sum - s0, h.total);
    }

    let max = variances.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        let occupied = h.counts.iter().position(|&c| c > 0).unwrap_or(0);
        return ThresholdResult { level: occupied as u8, between_class_variance: 0.0 };
    }
    let floor = max - max * TIE_TOLERANCE;
    let level = variances.iter().position(|&v| v >= floor).unwrap_or(0);
    ThresholdResult { level: level as u8, between_class_variance: variances[level] }
}

/// Pixels strictly above `level` become hand (1); the rest background (0).
pub fn binarize(img: &GrayImage, level: u8) -> BinaryImage {
    let data = img.pixels().iter().map(|&v| (v > level) as u8).collect();
    BinaryImage::new(img.width(), img.height(), data).expect("dimensions come from a valid image")
}

/// Binarizes at the image's own Otsu level.
pub fn otsu_binarize(img: &GrayImage) -> (BinaryImage, ThresholdResult) {
    let t = otsu_threshold(&histogram(img));
    (binarize(img, t.level), t)
}
