//! Static hand-gesture recognition by template correlation.
//!
//! The pipeline binarizes a grayscale hand image with Otsu's threshold,
//! cleans the mask with binary morphology, brings it to a canonical square
//! frame and classifies it by comparing correlation surfaces: each enrolled
//! class keeps the NCC map of its silhouette against its own central kernel,
//! and a query is assigned to the class whose kernel produces the most similar
//! map (minimum mean squared difference) when slid over the query.
//!
//! Modules:
//! - [`raster`]: image containers, PGM I/O, nearest-neighbour resize.
//! - [`segmentation`]: histograms, Otsu threshold, binarization.
//! - [`morphology`]: erosion, dilation, opening, closing, largest blob.
//! - [`correlation`]: NCC maps (reference, summed-area, bit-packed), match points.
//! - [`classifier`]: template registry, scoring, recognition, persistence.
//! - [`synthgest`]: deterministic synthetic gesture datasets.
//! - [`evalkit`]: accuracy tables and confusion matrices.
//!
//! Correlation types are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the `f64` instantiation used by the tools.

pub mod classifier;
pub mod correlation;
pub mod error;
pub mod evalkit;
pub mod morphology;
pub mod raster;
pub mod scalar;
pub mod segmentation;
pub mod synthgest;

pub use error::{Error, Result};
pub use raster::{BinaryImage, GrayImage, Grid};
pub use scalar::Scalar;

pub type Kernel = correlation::Kernel<f64>;
pub type CorrelationMap = correlation::CorrelationMap<f64>;
pub type MatchPoint = correlation::MatchPoint<f64>;
pub type GestureTemplate = classifier::GestureTemplate<f64>;
pub type TemplateRegistry = classifier::TemplateRegistry<f64>;
pub type RecognitionResult = classifier::RecognitionResult<f64>;

pub type CorrelationMapF32 = correlation::CorrelationMap<f32>;
pub type TemplateRegistryF32 = classifier::TemplateRegistry<f32>;
