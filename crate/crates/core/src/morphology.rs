//! Binary morphology: erosion, dilation, opening, closing and blob isolation.
//!
//! Pixels outside the frame are treated as background by every operator.

use crate::error::{invalid, Result};
use crate::raster::BinaryImage;

/// Binary probe shape with odd sides; its origin is the centre cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    width: usize,
    height: usize,
    mask: Vec<u8>,
}

impl StructuringElement {
    pub fn new(width: usize, height: usize, mask: Vec<u8>) -> Result<Self> {
        if width.is_multiple_of(2) || height.is_multiple_of(2) {
            return Err(invalid(format!("structuring element sides must be odd, got {width}x{height}")));
        }
        if mask.len() != width * height {
            return Err(invalid("structuring element mask length does not match its size"));
        }
        if mask.iter().any(|&v| v > 1) || !mask.contains(&1) {
            return Err(invalid("structuring element mask must be binary with at least one set cell"));
        }
        Ok(Self { width, height, mask })
    }

    /// Full `side`×`side` square.
    pub fn square(side: usize) -> Result<Self> {
        Self::new(side, side, vec![1; side * side])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn origin(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.width + i] == 1
    }

    /// Offsets `(i − ox, j − oy)` of the set cells.
    pub fn offsets(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        let (ox, oy) = self.origin();
        (0..self.height).flat_map(move |j| {
            (0..self.width)
                .filter(move |&i| self.contains(i, j))
                .map(move |i| (i as isize - ox as isize, j as isize - oy as isize))
        })
    }

    /// Largest distance from the origin to any cell, in either axis.
    pub fn radius(&self) -> usize {
        self.width.max(self.height) / 2
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self::square(3).expect("3x3 square is a valid element")
    }
}

/// Combines `img` shifted by each offset into `out` with `op`; out-of-frame reads give 0.
fn shift_combine(
    img: &BinaryImage,
    offsets: impl Iterator<Item = (isize, isize)>,
    init: u8,
    op: fn(u8, u8) -> u8,
) -> BinaryImage {
    let (w, h) = (img.width() as isize, img.height() as isize);
    let src = img.pixels();
    let mut out = vec![init; src.len()];
    for (dx, dy) in offsets {
        for y in 0..h {
            let sy = y + dy;
            let row = &mut out[(y * w) as usize..((y + 1) * w) as usize];
            if sy < 0 || sy >= h {
                row.iter_mut().for_each(|v| *v = op(*v, 0));
                continue;
            }
            let srow = &src[(sy * w) as usize..((sy + 1) * w) as usize];
            for (x, v) in row.iter_mut().enumerate() {
                let sx = x as isize + dx;
                let s = if sx >= 0 && sx < w { srow[sx as usize] } else { 0 };
                *v = op(*v, s);
            }
        }
    }
    BinaryImage::new(img.width(), img.height(), out).expect("same dimensions as input")
}

pub fn erode(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    shift_combine(img, se.offsets(), 1, |a, b| a & b)
}

/// A pixel is set when the reflected element placed over it hits a set input
/// pixel, i.e. the Minkowski sum of the foreground and the element. Together
/// with [`erode`] this makes opening and closing idempotent for any element.
pub fn dilate(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    shift_combine(img, se.offsets().map(|(dx, dy)| (-dx, -dy)), 0, |a, b| a | b)
}

pub fn open(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    dilate(&erode(img, se), se)
}

pub fn close(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    erode(&dilate(img, se), se)
}

/// Keeps only the largest 8-connected foreground component.
///
/// Equal-sized components are resolved in favour of the one whose first pixel
/// comes earliest in row-major order.
pub fn largest_component(img: &BinaryImage) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let px = img.pixels();
    let mut uf = UnionFind::default();
    let mut labels = vec![usize::MAX; px.len()];

    // first pass: provisional labels, merging with already-visited 8-neighbours
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if px[i] == 0 {
                continue;
            }
            let mut label = usize::MAX;
            let neighbours = [
                (x > 0).then(|| i - 1),
                (y > 0 && x > 0).then(|| i - w - 1),
                (y > 0).then(|| i - w),
                (y > 0 && x + 1 < w).then(|| i - w + 1),
            ];
            for n in neighbours.into_iter().flatten() {
                let l = labels[n];
                if l == usize::MAX {
                    continue;
                }
                if label == usize::MAX {
                    label = l;
                } else {
                    uf.union(label, l);
                }
            }
            labels[i] = if label == usize::MAX { uf.make() } else { label };
        }
    }

    // second pass: sizes per root, remembering which root was seen first
    let mut size = vec![0usize; uf.parent.len()];
    let mut first_seen = Vec::new();
    for l in labels.iter_mut().filter(|l| **l != usize::MAX) {
        let r = uf.find(*l);
        *l = r;
        if size[r] == 0 {
            first_seen.push(r);
        }
        size[r] += 1;
    }
    let Some(best) = first_seen.iter().copied().reduce(|a, b| if size[b] > size[a] { b } else { a }) else {
        return img.clone();
    };
    let data = labels.iter().map(|&l| (l == best) as u8).collect();
    BinaryImage::new(w, h, data).expect("same dimensions as input")
}

#[derive(Default)]
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn make(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Opening, then closing, then largest-component isolation.
pub fn denoise_pipeline(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    largest_component(&close(&open(img, se), se))
}
