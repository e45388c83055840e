//! Independent oracles and fixture generators shared by the integration tests.
//!
//! Everything here is written straight from the definitions, with no shortcuts
//! taken by the library (no summed-area tables, no bit packing, no float ties).

#![allow(dead_code)]

use std::collections::VecDeque;

use handcorr::{BinaryImage, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Otsu level by exhaustive search in exact integer arithmetic.
///
/// Compares `(s0·n1 − s1·n0)² / (n0·n1)` across splits by cross-multiplying, so
/// ties are exact. Totals must stay below 2^16 for the products to fit.
pub fn otsu_exact(counts: &[u64; 256]) -> u8 {
    let total: u64 = counts.iter().sum();
    let weighted: u64 = counts.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
    assert!(total > 0 && total < 1 << 16);
    let mut best: Option<(usize, u128, u128)> = None;
    for k in 0..256 {
        let n0: u64 = counts[..=k].iter().sum();
        let s0: u64 = counts[..=k].iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
        let (n1, s1) = (total - n0, weighted - s0);
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let d = (s0 as i128 * n1 as i128 - s1 as i128 * n0 as i128).unsigned_abs();
        let (num, den) = (d * d, n0 as u128 * n1 as u128);
        match best {
            Some((_, bn, bd)) if num * bd <= bn * den => {}
            _ => best = Some((k, num, den)),
        }
    }
    match best {
        Some((k, num, _)) if num > 0 => k as u8,
        // no split separates anything: the lowest occupied level
        _ => counts.iter().position(|&c| c > 0).unwrap() as u8,
    }
}

/// NCC map by the textbook double loop, one window at a time.
pub fn ncc_direct(image: &Grid<f64>, kernel: &Grid<f64>) -> Grid<f64> {
    let (p, q) = (kernel.width(), kernel.height());
    let (mw, mh) = (image.width() - p + 1, image.height() - q + 1);
    let n = (p * q) as f64;
    let mut out = Vec::with_capacity(mw * mh);
    for y in 0..mh {
        for x in 0..mw {
            let mut wsum = 0.0;
            let mut ksum = 0.0;
            for t in 0..q {
                for s in 0..p {
                    wsum += image.get(x + s, y + t);
                    ksum += kernel.get(s, t);
                }
            }
            let (wm, km) = (wsum / n, ksum / n);
            let (mut num, mut wv, mut kv) = (0.0, 0.0, 0.0);
            for t in 0..q {
                for s in 0..p {
                    let a = image.get(x + s, y + t) - wm;
                    let b = kernel.get(s, t) - km;
                    num += a * b;
                    wv += a * a;
                    kv += b * b;
                }
            }
            out.push(if wv > 0.0 && kv > 0.0 { num / (wv * kv).sqrt() } else { 0.0 });
        }
    }
    Grid::new(mw, mh, out).unwrap()
}

/// Central crop at `fraction`, placed as `(side − crop) / 2`.
pub fn central_crop(img: &Grid<f64>, fraction: f64) -> Grid<f64> {
    let cw = (img.width() as f64 * fraction).floor() as usize;
    let ch = (img.height() as f64 * fraction).floor() as usize;
    let (x0, y0) = ((img.width() - cw) / 2, (img.height() - ch) / 2);
    Grid::from_fn(cw, ch, |x, y| img.get(x0 + x, y0 + y)).unwrap()
}

/// Mean squared difference between the auto map of `template` and the cross
/// map of `query` against the template's central crop.
pub fn mse_direct(query: &BinaryImage, template: &BinaryImage, fraction: f64) -> f64 {
    let t = template.to_grid::<f64>();
    let crop = central_crop(&t, fraction);
    let auto = ncc_direct(&t, &crop);
    let cross = ncc_direct(&query.to_grid(), &crop);
    let n = auto.values().len() as f64;
    auto.values().iter().zip(cross.values()).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / n
}

/// Structuring element as a raw mask, for the morphology oracles.
pub struct Se {
    pub w: usize,
    pub h: usize,
    pub mask: Vec<u8>,
}

impl Se {
    fn cells(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        let (ox, oy) = ((self.w / 2) as isize, (self.h / 2) as isize);
        (0..self.h).flat_map(move |j| {
            (0..self.w)
                .filter(move |&i| self.mask[j * self.w + i] == 1)
                .map(move |i| (i as isize - ox, j as isize - oy))
        })
    }
}

fn pixel(img: &BinaryImage, x: isize, y: isize) -> bool {
    x >= 0 && y >= 0 && (x as usize) < img.width() && (y as usize) < img.height() && img.get(x as usize, y as usize)
}

/// Set iff every element cell lands on an in-frame foreground pixel.
pub fn erode_direct(img: &BinaryImage, se: &Se) -> BinaryImage {
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        se.cells().all(|(dx, dy)| pixel(img, x as isize + dx, y as isize + dy))
    })
    .unwrap()
}

/// Set iff some cell of the reflected element lands on an in-frame foreground pixel.
pub fn dilate_direct(img: &BinaryImage, se: &Se) -> BinaryImage {
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        se.cells().any(|(dx, dy)| pixel(img, x as isize - dx, y as isize - dy))
    })
    .unwrap()
}

/// Largest 8-connected component by breadth-first flood fill; components are
/// discovered in row-major order and a later one must be strictly larger.
pub fn largest_component_flood(img: &BinaryImage) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut seen = vec![false; w * h];
    let mut best: Vec<usize> = Vec::new();
    for start in 0..w * h {
        if seen[start] || img.pixels()[start] == 0 {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            comp.push(i);
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if pixel(img, nx, ny) {
                        let j = ny as usize * w + nx as usize;
                        if !seen[j] {
                            seen[j] = true;
                            queue.push_back(j);
                        }
                    }
                }
            }
        }
        if comp.len() > best.len() {
            best = comp;
        }
    }
    let mut out = BinaryImage::zeros(w, h).unwrap();
    for i in best {
        out.set(i % w, i / w, true);
    }
    out
}

/// Random mask of discs, rectangles and stray pixels, all at least `margin`
/// pixels away from the frame edge.
pub fn random_margin_mask(rng: &mut ChaCha8Rng, w: usize, h: usize, margin: usize) -> BinaryImage {
    assert!(w > 2 * margin + 2 && h > 2 * margin + 2);
    let mut m = BinaryImage::zeros(w, h).unwrap();
    let inner = |rng: &mut ChaCha8Rng| (rng.random_range(margin..w - margin), rng.random_range(margin..h - margin));
    for _ in 0..rng.random_range(1..=4) {
        let (cx, cy) = inner(rng);
        let r = rng.random_range(1..=6) as isize;
        let rect = rng.random_bool(0.5);
        for dy in -r..=r {
            for dx in -r..=r {
                let (x, y) = (cx as isize + dx, cy as isize + dy);
                let inside = rect || dx * dx + dy * dy <= r * r;
                if inside
                    && x >= margin as isize
                    && y >= margin as isize
                    && (x as usize) < w - margin
                    && (y as usize) < h - margin
                {
                    m.set(x as usize, y as usize, true);
                }
            }
        }
    }
    for _ in 0..rng.random_range(0..20) {
        let (x, y) = inner(rng);
        let v = !m.get(x, y);
        m.set(x, y, v);
    }
    m
}

/// Random square element of odd side up to 5; the origin cell is always set.
pub fn random_se(rng: &mut ChaCha8Rng) -> Se {
    let side = [1, 3, 3, 5][rng.random_range(0..4)];
    let mut mask: Vec<u8> = (0..side * side).map(|_| rng.random_bool(0.6) as u8).collect();
    mask[side * side / 2] = 1;
    Se { w: side, h: side, mask }
}

/// Mix of dense, sparse, bimodal and single-level histograms.
pub fn random_counts(rng: &mut ChaCha8Rng) -> [u64; 256] {
    let mut c = [0u64; 256];
    match rng.random_range(0..4) {
        0 => c.iter_mut().for_each(|v| *v = rng.random_range(0..=255)),
        1 => {
            for _ in 0..rng.random_range(1..8) {
                c[rng.random_range(0..256)] += rng.random_range(1..=200);
            }
        }
        2 => {
            let (a, b) = (rng.random_range(0..128), rng.random_range(128..256));
            for _ in 0..rng.random_range(50..2000) {
                let centre = if rng.random_bool(0.4) { a } else { b };
                let v = (centre + rng.random_range(-12..=12)).clamp(0, 255);
                c[v as usize] += 1;
            }
        }
        _ => c[rng.random_range(0..256)] = rng.random_range(1..=5000),
    }
    c
}

/// Image and kernel of random shape and content style; the kernel fits the image.
pub fn random_pair(r: &mut ChaCha8Rng) -> (Grid<f64>, Grid<f64>) {
    let (w, h) = (r.random_range(1..24), r.random_range(1..24));
    let (p, q) = (r.random_range(1..=w), r.random_range(1..=h));
    let style = r.random_range(0..3);
    let value = |r: &mut ChaCha8Rng| match style {
        0 => r.random_range(0..256) as f64,
        1 => r.random_range(0..2) as f64,
        _ => r.random_range(-1.0..1.0),
    };
    let img = Grid::from_fn(w, h, |_, _| value(r)).unwrap();
    let ker = Grid::from_fn(p, q, |_, _| value(r)).unwrap();
    (img, ker)
}
