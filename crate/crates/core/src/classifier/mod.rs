//! Template enrollment and minimum-MSE recognition.
//!
//! Every input is reduced to a canonical `S`×`S` silhouette. A template keeps
//! the central crop of its silhouette as a correlation kernel, together with
//! the map of that kernel over the template itself (its auto-correlation
//! surface). A query is scored against a template by sliding the template's
//! kernel over the query and taking the mean squared difference between the
//! resulting map and the stored surface; the smallest score wins.
//!
//! Both maps are produced by [`ncc_map_binary`], so a query identical to an
//! enrolled silhouette scores exactly zero.

mod store;

pub use store::{load_registry, save_registry, MANIFEST_FILE};

use rayon::prelude::*;

use crate::correlation::{
    ncc_map_binary, ncc_map_binary_query, BinaryKernel, BinaryQuery, CorrelationMap, CropGeometry,
};
use crate::error::{invalid, Error, Result};
use crate::morphology::{denoise_pipeline, StructuringElement};
use crate::raster::{resize_nearest, BinaryImage, GrayImage};
use crate::scalar::Scalar;
use crate::segmentation::otsu_binarize;

pub const DEFAULT_CANONICAL_SIZE: usize = 128;
pub const DEFAULT_KERNEL_FRACTION: f64 = 0.5;

/// Segmentation, denoising and canonical resize of a grayscale hand image.
pub fn preprocess(img: &GrayImage, se: &StructuringElement, size: usize) -> Result<BinaryImage> {
    let (mask, _) = otsu_binarize(img);
    let clean = denoise_pipeline(&mask, se);
    if clean.is_empty() {
        return Err(Error::EmptyForeground);
    }
    let canonical = resize_nearest(&clean, size, size)?;
    if canonical.is_empty() {
        return Err(Error::EmptyForeground);
    }
    Ok(canonical)
}

/// Labels double as file stems in saved registries.
fn check_label(label: &str) -> Result<()> {
    let ok = !label.is_empty() && label.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-');
    if ok {
        Ok(())
    } else {
        Err(invalid(format!("label {label:?} must be non-empty ASCII letters, digits, '_' or '-'")))
    }
}

/// One enrolled gesture class.
#[derive(Clone, Debug, PartialEq)]
pub struct GestureTemplate<T> {
    label: String,
    canonical: BinaryImage,
    kernel: BinaryKernel,
    auto_map: CorrelationMap<T>,
}

impl<T: Scalar> GestureTemplate<T> {
    /// Builds a template from an already canonical silhouette.
    pub fn from_canonical(label: &str, canonical: BinaryImage, kernel_fraction: f64) -> Result<Self> {
        check_label(label)?;
        let g = CropGeometry::central(canonical.width(), canonical.height(), kernel_fraction)?;
        let crop = BinaryImage::from_fn(g.width, g.height, |x, y| canonical.get(g.x0 + x, g.y0 + y))?;
        let kernel = BinaryKernel::new(&crop);
        let auto_map = ncc_map_binary(&canonical, &kernel)?;
        Ok(Self { label: label.to_owned(), canonical, kernel, auto_map })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn canonical(&self) -> &BinaryImage {
        &self.canonical
    }

    pub fn kernel(&self) -> &BinaryKernel {
        &self.kernel
    }

    pub fn auto_map(&self) -> &CorrelationMap<T> {
        &self.auto_map
    }

    /// Map of this template's kernel slid over `query`.
    pub fn cross_map(&self, query: &BinaryImage) -> Result<CorrelationMap<T>> {
        if (query.width(), query.height()) != (self.canonical.width(), self.canonical.height()) {
            return Err(invalid(format!(
                "query is {}x{}, template {:?} is {}x{}",
                query.width(),
                query.height(),
                self.label,
                self.canonical.width(),
                self.canonical.height()
            )));
        }
        ncc_map_binary(query, &self.kernel)
    }
}

/// Mean squared difference between the template's auto-correlation surface and
/// the map of its kernel over `query`.
pub fn score<T: Scalar>(query: &BinaryImage, template: &GestureTemplate<T>) -> Result<T> {
    let cross = template.cross_map(query)?;
    Ok(map_mse(template.auto_map(), &cross))
}

fn score_packed<T: Scalar>(query: &BinaryQuery, template: &GestureTemplate<T>) -> Result<T> {
    let cross = ncc_map_binary_query(query, &template.kernel)?;
    Ok(map_mse(template.auto_map(), &cross))
}

fn map_mse<T: Scalar>(a: &CorrelationMap<T>, b: &CorrelationMap<T>) -> T {
    let sum: T = a.values().iter().zip(b.values()).map(|(&x, &y)| (x - y) * (x - y)).sum();
    sum / T::from_count(a.values().len() as u64)
}

/// Outcome of recognizing one query.
#[derive(Clone, Debug, PartialEq)]
pub struct RecognitionResult<T> {
    pub label: String,
    pub mse: T,
    /// Score against every template, in registry order.
    pub per_class_scores: Vec<(String, T)>,
}

/// Ordered set of templates sharing one canonical geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct TemplateRegistry<T> {
    canonical_size: usize,
    kernel_fraction: f64,
    se: StructuringElement,
    entries: Vec<GestureTemplate<T>>,
}

impl<T: Scalar> Default for TemplateRegistry<T> {
    fn default() -> Self {
        Self::new(DEFAULT_CANONICAL_SIZE, DEFAULT_KERNEL_FRACTION, StructuringElement::default())
            .expect("default geometry is valid")
    }
}

impl<T: Scalar> TemplateRegistry<T> {
    pub fn new(canonical_size: usize, kernel_fraction: f64, se: StructuringElement) -> Result<Self> {
        CropGeometry::central(canonical_size, canonical_size, kernel_fraction)?;
        Ok(Self { canonical_size, kernel_fraction, se, entries: Vec::new() })
    }

    pub fn canonical_size(&self) -> usize {
        self.canonical_size
    }

    pub fn kernel_fraction(&self) -> f64 {
        self.kernel_fraction
    }

    pub fn structuring_element(&self) -> &StructuringElement {
        &self.se
    }

    pub fn entries(&self) -> &[GestureTemplate<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<&GestureTemplate<T>> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.label.as_str())
    }

    pub fn preprocess(&self, img: &GrayImage) -> Result<BinaryImage> {
        preprocess(img, &self.se, self.canonical_size)
    }

    /// Preprocesses `img` and stores it as the template for `label`.
    pub fn enroll(&mut self, label: &str, img: &GrayImage) -> Result<&GestureTemplate<T>> {
        check_label(label)?;
        if self.get(label).is_some() {
            return Err(Error::Conflict(format!("label {label:?} is already enrolled")));
        }
        let canonical = self.preprocess(img)?;
        self.insert(GestureTemplate::from_canonical(label, canonical, self.kernel_fraction)?)
    }

    /// Adds a prepared template after checking it fits this registry.
    pub fn insert(&mut self, template: GestureTemplate<T>) -> Result<&GestureTemplate<T>> {
        if self.get(&template.label).is_some() {
            return Err(Error::Conflict(format!("label {:?} is already enrolled", template.label)));
        }
        let s = self.canonical_size;
        if (template.canonical.width(), template.canonical.height()) != (s, s) {
            return Err(invalid(format!("template {:?} is not {s}x{s}", template.label)));
        }
        let g = CropGeometry::central(s, s, self.kernel_fraction)?;
        if (template.kernel.width(), template.kernel.height()) != (g.width, g.height) {
            return Err(invalid(format!("template {:?} uses a different kernel fraction", template.label)));
        }
        self.entries.push(template);
        Ok(self.entries.last().expect("just pushed"))
    }

    /// Scores an already canonical query against every template.
    pub fn recognize_canonical(&self, query: &BinaryImage) -> Result<RecognitionResult<T>> {
        if self.entries.is_empty() {
            return Err(Error::InvalidState("template registry is empty".into()));
        }
        let s = self.canonical_size;
        if (query.width(), query.height()) != (s, s) {
            return Err(invalid(format!("query is {}x{}, registry expects {s}x{s}", query.width(), query.height())));
        }
        let packed = BinaryQuery::new(query, self.entries[0].kernel.width())?;
        let scores = self
            .entries
            .par_iter()
            .map(|t| score_packed(&packed, t).map(|s| (t.label.clone(), s)))
            .collect::<Result<Vec<_>>>()?;
        let (label, mse) = scores
            .iter()
            .min_by(|(la, a), (lb, b)| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal).then_with(|| la.cmp(lb)))
            .map(|(l, s)| (l.clone(), *s))
            .expect("registry is non-empty");
        Ok(RecognitionResult { label, mse, per_class_scores: scores })
    }

    /// Preprocesses `img` and returns the minimum-MSE class.
    pub fn recognize(&self, img: &GrayImage) -> Result<RecognitionResult<T>> {
        if self.entries.is_empty() {
            return Err(Error::InvalidState("template registry is empty".into()));
        }
        let query = self.preprocess(img)?;
        self.recognize_canonical(&query)
    }
}
