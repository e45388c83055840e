//! Deterministic synthetic gesture datasets.
//!
//! A gesture is a palm disc with up to five rectangular fingers radiating
//! from the palm centre. Classes are drawn from a seeded candidate stream and
//! kept only if their clean silhouette differs enough from every class already
//! accepted. Samples are renders of a class under a small rigid motion, with
//! Gaussian intensity noise and salt specks.
//!
//! Randomness comes from ChaCha8 streams: one stream per class candidate and
//! one per `(class, sample)` pair, all keyed by the dataset seed, so every
//! sample can be generated independently and in any order.

use std::fs;
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::morphology::{denoise_pipeline, StructuringElement};
use crate::raster::{decode_pgm, encode_pgm, BinaryImage, GrayImage};

/// Side of rendered images. Larger than the default canonical size, as a
/// camera frame would be.
pub const DEFAULT_FRAME: usize = 192;
/// Minimum distance in pixels between any foreground pixel and the frame edge.
pub const FRAME_MARGIN: usize = 8;
/// Required fraction of differing pixels between the clean masks of two classes.
pub const MIN_CLASS_SEPARATION: f64 = 0.05;
pub const MANIFEST_FILE: &str = "manifest.json";

/// Static fingerspelling letters (J and Z need motion and are excluded).
const LETTERS: [&str; 24] = [
    "A", "B", "C", "D", "E", "F", "G", "H", "I", "K", "L", "M", "N", "O", "P", "Q", "R", "S", "T", "U", "V", "W", "X",
    "Y",
];

/// Report label for a class: a letter while they last, `cNN` beyond.
pub fn class_label(class_id: usize, classes: usize) -> String {
    if classes <= LETTERS.len() {
        LETTERS[class_id].to_owned()
    } else {
        format!("c{class_id:02}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Palm {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

/// Finger as a rectangle starting at the palm centre. Angle 0 points up,
/// positive angles turn clockwise on screen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Finger {
    pub angle: f64,
    pub length: f64,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GestureSpec {
    pub class_id: usize,
    pub frame: usize,
    pub palm: Palm,
    pub fingers: Vec<Finger>,
}

impl GestureSpec {
    /// Whether the point lies inside the untransformed shape.
    fn contains(&self, px: f64, py: f64) -> bool {
        let (dx, dy) = (px - self.palm.cx, py - self.palm.cy);
        if dx * dx + dy * dy <= self.palm.radius * self.palm.radius {
            return true;
        }
        self.fingers.iter().any(|f| {
            let (s, c) = f.angle.to_radians().sin_cos();
            // direction (s, −c); perpendicular (c, s)
            let along = dx * s - dy * c;
            let across = dx * c + dy * s;
            (0.0..=f.length).contains(&along) && across.abs() <= f.width / 2.0
        })
    }

    /// Farthest extent of the shape from the palm centre.
    fn reach(&self) -> f64 {
        self.fingers.iter().map(|f| f.length.hypot(f.width / 2.0)).fold(self.palm.radius, f64::max)
    }
}

/// Rendering parameters for one sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderParams {
    pub fg_level: u8,
    pub bg_level: u8,
    pub noise_sigma: f64,
    pub speck_prob: f64,
    /// Rotation about the palm centre, degrees clockwise.
    pub rotation: f64,
    pub translation: (f64, f64),
    pub seed: u64,
}

impl RenderParams {
    /// Noise-free, unmoved render.
    pub fn clean(fg_level: u8, bg_level: u8) -> Self {
        Self { fg_level, bg_level, noise_sigma: 0.0, speck_prob: 0.0, rotation: 0.0, translation: (0.0, 0.0), seed: 0 }
    }

    fn validate(&self) -> Result<()> {
        if (self.fg_level as i32) - (self.bg_level as i32) < 64 {
            return Err(invalid(format!(
                "foreground level {} must exceed background {} by at least 64",
                self.fg_level, self.bg_level
            )));
        }
        if !(0.0..=0.01).contains(&self.speck_prob) {
            return Err(invalid(format!("speck probability {} outside [0, 0.01]", self.speck_prob)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(invalid(format!("noise sigma {} must be finite and non-negative", self.noise_sigma)));
        }
        Ok(())
    }
}

/// Candidate-stream bit keeping class streams apart from sample streams.
const CLASS_DOMAIN: u64 = 1 << 63;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample_stream(class_id: usize, index: usize) -> u64 {
    ((class_id as u64) << 32) | index as u64
}

/// Draws one candidate gesture from its stream.
///
/// Geometry is laid out on a 128-pixel design grid and scaled to the frame.
fn candidate(seed: u64, n: u64, frame: usize) -> GestureSpec {
    let mut rng = stream_rng(seed, CLASS_DOMAIN | n);
    let scale = frame as f64 / 128.0;
    let palm = Palm {
        cx: 64.0 * scale,
        cy: (64.0 + rng.random_range(0.0..6.0)) * scale,
        radius: rng.random_range(10.0..26.0) * scale,
    };
    // nineteen 10° slots from −90° to +90°; fingers take distinct slots
    let count = rng.random_range(0..=5usize);
    let mut slots: Vec<i32> = (0..19).collect();
    let mut fingers = Vec::with_capacity(count);
    for _ in 0..count {
        let slot = slots.swap_remove(rng.random_range(0..slots.len()));
        fingers.push(Finger {
            angle: -90.0 + 10.0 * slot as f64,
            length: rng.random_range(28.0..47.0) * scale,
            width: rng.random_range(8.0..20.0) * scale,
        });
    }
    fingers.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    GestureSpec { class_id: 0, frame, palm, fingers }
}

/// Largest reach a shape may have and still clear the margin after the
/// default perturbation.
fn max_reach(frame: usize, palm: &Palm, perturbation: &Perturbation) -> f64 {
    let room =
        [palm.cx, palm.cy, frame as f64 - palm.cx, frame as f64 - palm.cy].into_iter().fold(f64::INFINITY, f64::min);
    room - FRAME_MARGIN as f64 - perturbation.translation_px * std::f64::consts::SQRT_2 - 2.0
}

/// The first `classes` accepted gesture specs for `seed`.
///
/// Candidates are accepted in stream order when their clean mask differs from
/// every accepted mask in at least [`MIN_CLASS_SEPARATION`] of the pixels, so
/// class `k` does not depend on how many classes are requested.
pub fn class_specs(classes: usize, seed: u64, frame: usize) -> Result<Vec<GestureSpec>> {
    if frame < 4 * FRAME_MARGIN {
        return Err(invalid(format!("frame {frame} too small")));
    }
    let perturbation = Perturbation::default();
    let threshold = (MIN_CLASS_SEPARATION * (frame * frame) as f64).ceil() as usize;
    let mut specs: Vec<GestureSpec> = Vec::with_capacity(classes);
    let mut masks: Vec<BinaryImage> = Vec::with_capacity(classes);
    let mut n = 0u64;
    while specs.len() < classes {
        if n > 100_000 {
            return Err(Error::Generation(format!("could not find {classes} separable classes")));
        }
        let mut spec = candidate(seed, n, frame);
        n += 1;
        if spec.reach() > max_reach(frame, &spec.palm, &perturbation) {
            continue;
        }
        spec.class_id = specs.len();
        let (_, mask) = render(&spec, &RenderParams::clean(255, 0))?;
        if masks.iter().all(|m| m.hamming(&mask) >= threshold) {
            specs.push(spec);
            masks.push(mask);
        }
    }
    Ok(specs)
}

/// Spec of a single class; see [`class_specs`].
pub fn class_spec(class_id: usize, classes: usize, seed: u64) -> Result<GestureSpec> {
    if class_id >= classes {
        return Err(invalid(format!("class id {class_id} outside 0..{classes}")));
    }
    Ok(class_specs(class_id + 1, seed, DEFAULT_FRAME)?.pop().expect("at least one spec"))
}

/// Rasterizes the transformed shape and renders it.
///
/// A pixel is foreground when its centre falls inside the shape. The raw
/// raster is then regularized with the default opening/closing so the ground
/// truth is exactly what the denoising stage reproduces from a clean render.
pub fn render(spec: &GestureSpec, params: &RenderParams) -> Result<(GrayImage, BinaryImage)> {
    params.validate()?;
    let frame = spec.frame;
    let (sin, cos) = params.rotation.to_radians().sin_cos();
    let (tx, ty) = params.translation;
    let (cx, cy) = (spec.palm.cx, spec.palm.cy);
    let raw = BinaryImage::from_fn(frame, frame, |x, y| {
        // inverse motion: undo translation, then rotate back about the palm centre
        let (dx, dy) = (x as f64 + 0.5 - cx - tx, y as f64 + 0.5 - cy - ty);
        let (ux, uy) = (dx * cos + dy * sin, -dx * sin + dy * cos);
        spec.contains(cx + ux, cy + uy)
    })?;
    let truth = denoise_pipeline(&raw, &StructuringElement::default());
    check_margin(&truth)?;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = (params.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, params.noise_sigma).map_err(|e| invalid(e.to_string())))
        .transpose()?;
    let data = truth
        .pixels()
        .iter()
        .map(|&m| {
            let base = if m == 1 { params.fg_level } else { params.bg_level } as f64;
            let v = match &noise {
                Some(n) => (base + n.sample(&mut rng)).round().clamp(0.0, 255.0) as u8,
                None => base as u8,
            };
            if params.speck_prob > 0.0 && rng.random::<f64>() < params.speck_prob {
                255
            } else {
                v
            }
        })
        .collect();
    Ok((GrayImage::new(frame, frame, data)?, truth))
}

fn check_margin(mask: &BinaryImage) -> Result<()> {
    let (w, h) = (mask.width(), mask.height());
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y)
                && (x < FRAME_MARGIN || y < FRAME_MARGIN || x + FRAME_MARGIN >= w || y + FRAME_MARGIN >= h)
            {
                return Err(Error::Generation(format!(
                    "foreground pixel ({x}, {y}) within {FRAME_MARGIN} px of the frame edge"
                )));
            }
        }
    }
    if mask.is_empty() {
        return Err(Error::Generation("rendered mask is empty".into()));
    }
    Ok(())
}

/// Ranges of the per-sample random motion and noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    /// Rotation drawn uniformly from ±this many degrees.
    pub rotation_deg: f64,
    /// Translation per axis drawn uniformly from ±this many pixels.
    pub translation_px: f64,
    pub noise_sigma: f64,
    pub speck_prob: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self { rotation_deg: 6.0, translation_px: 4.0, noise_sigma: 8.0, speck_prob: 0.002 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub classes: usize,
    pub per_class: usize,
    pub seed: u64,
    pub frame: usize,
    pub fg_level: u8,
    pub bg_level: u8,
    pub perturbation: Perturbation,
}

impl DatasetConfig {
    pub fn new(classes: usize, per_class: usize, seed: u64) -> Self {
        Self {
            classes,
            per_class,
            seed,
            frame: DEFAULT_FRAME,
            fg_level: 200,
            bg_level: 30,
            perturbation: Perturbation::default(),
        }
    }

    /// Parameters of sample `index` of class `class_id`; index 0 is the clean
    /// enrollment render.
    pub fn sample_params(&self, class_id: usize, index: usize) -> RenderParams {
        let mut rng = stream_rng(self.seed, sample_stream(class_id, index));
        let render_seed = rng.next_u64();
        if index == 0 {
            return RenderParams { seed: render_seed, ..RenderParams::clean(self.fg_level, self.bg_level) };
        }
        let p = &self.perturbation;
        let mut sym = |r: f64| if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
        let rotation = sym(p.rotation_deg);
        let translation = (sym(p.translation_px), sym(p.translation_px));
        RenderParams {
            fg_level: self.fg_level,
            bg_level: self.bg_level,
            noise_sigma: p.noise_sigma,
            speck_prob: p.speck_prob,
            rotation,
            translation,
            seed: render_seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub label: String,
    pub class_id: usize,
    pub index: usize,
    pub params: RenderParams,
    pub image: GrayImage,
    /// Ground-truth mask; absent for samples read back from disk.
    pub truth: Option<BinaryImage>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub config: DatasetConfig,
    /// Class-major: all samples of class 0, then class 1, ...
    pub samples: Vec<Sample>,
}

impl Dataset {
    /// Clean enrollment sample (index 0) of each class, in class order.
    pub fn enrollment(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.index == 0)
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.config.classes).map(|c| class_label(c, self.config.classes)).collect()
    }
}

pub fn generate_dataset(config: &DatasetConfig) -> Result<Dataset> {
    if config.classes < 2 || config.per_class < 1 {
        return Err(invalid(format!(
            "need at least 2 classes and 1 sample per class, got {} x {}",
            config.classes, config.per_class
        )));
    }
    let specs = class_specs(config.classes, config.seed, config.frame)?;
    let jobs: Vec<(usize, usize)> =
        (0..config.classes).flat_map(|c| (0..config.per_class).map(move |i| (c, i))).collect();
    let samples = jobs
        .par_iter()
        .map(|&(class_id, index)| {
            let params = config.sample_params(class_id, index);
            let (image, truth) = render(&specs[class_id], &params)?;
            Ok(Sample {
                label: class_label(class_id, config.classes),
                class_id,
                index,
                params,
                image,
                truth: Some(truth),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { config: *config, samples })
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetManifest {
    seed: u64,
    classes: usize,
    per_class: usize,
    frame: usize,
    fg_level: u8,
    bg_level: u8,
    perturbation: Perturbation,
    samples: Vec<SampleRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRecord {
    label: String,
    class_id: usize,
    index: usize,
    file: String,
    params: RenderParams,
}

/// Writes `<dir>/<label>/<index>.pgm` for every sample plus `<dir>/manifest.json`.
pub fn save_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    let c = &dataset.config;
    let mut records = Vec::with_capacity(dataset.samples.len());
    for s in &dataset.samples {
        let file = format!("{}/{}.pgm", s.label, s.index);
        fs::create_dir_all(dir.join(&s.label))?;
        fs::write(dir.join(&file), encode_pgm(&s.image))?;
        records.push(SampleRecord {
            label: s.label.clone(),
            class_id: s.class_id,
            index: s.index,
            file,
            params: s.params,
        });
    }
    let manifest = DatasetManifest {
        seed: c.seed,
        classes: c.classes,
        per_class: c.per_class,
        frame: c.frame,
        fg_level: c.fg_level,
        bg_level: c.bg_level,
        perturbation: c.perturbation,
        samples: records,
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(dir.join(MANIFEST_FILE), json)?;
    Ok(())
}

/// Reads a dataset written by [`save_dataset`]. Ground truths are not stored
/// and come back as `None`.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let path = dir.join(MANIFEST_FILE);
    let raw = fs::read(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let m: DatasetManifest =
        serde_json::from_slice(&raw).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut samples = Vec::with_capacity(m.samples.len());
    for r in m.samples {
        if r.file.starts_with('/') || r.file.split('/').any(|p| p == "..") {
            return Err(Error::Config(format!("sample path {:?} escapes the dataset directory", r.file)));
        }
        let bytes = fs::read(dir.join(&r.file)).map_err(|e| Error::Config(format!("{}: {e}", r.file)))?;
        let image = decode_pgm(&bytes).map_err(|e| Error::Config(format!("{}: {e}", r.file)))?;
        samples.push(Sample {
            label: r.label,
            class_id: r.class_id,
            index: r.index,
            params: r.params,
            image,
            truth: None,
        });
    }
    let config = DatasetConfig {
        classes: m.classes,
        per_class: m.per_class,
        seed: m.seed,
        frame: m.frame,
        fg_level: m.fg_level,
        bg_level: m.bg_level,
        perturbation: m.perturbation,
    };
    Ok(Dataset { config, samples })
}
