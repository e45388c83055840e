//! On-disk registry: `registry.json` plus one canonical PGM per template.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GestureTemplate, TemplateRegistry};
use crate::error::{Error, Result};
use crate::morphology::StructuringElement;
use crate::raster::{binary_to_gray, decode_pgm, encode_pgm, BinaryImage};
use crate::scalar::Scalar;

pub const MANIFEST_FILE: &str = "registry.json";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    canonical_size: usize,
    kernel_fraction: f64,
    #[serde(default)]
    structuring_element: Option<SeRecord>,
    entries: Vec<EntryRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SeRecord {
    width: usize,
    height: usize,
    mask: Vec<u8>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EntryRecord {
    label: String,
    file: String,
    checksum: String,
}

fn checksum(bytes: &[u8]) -> String {
    format!("{:08x}", crc32fast::hash(bytes))
}

fn load_err(entry: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Load { entry: entry.into(), message: message.into() }
}

/// Writes `registry` into `dir`, creating it if needed.
///
/// Refuses to overwrite a directory that already holds a manifest.
pub fn save_registry<T: Scalar>(registry: &TemplateRegistry<T>, dir: &Path) -> Result<()> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.exists() {
        return Err(Error::Conflict(format!("{} already exists", manifest_path.display())));
    }
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(registry.len());
    for t in registry.entries() {
        let bytes = encode_pgm(&binary_to_gray(t.canonical(), 255, 0)?);
        let file = format!("{}.pgm", t.label());
        fs::write(dir.join(&file), &bytes)?;
        entries.push(EntryRecord { label: t.label().to_owned(), file, checksum: checksum(&bytes) });
    }
    let se = registry.structuring_element();
    let manifest = Manifest {
        canonical_size: registry.canonical_size(),
        kernel_fraction: registry.kernel_fraction(),
        structuring_element: Some(SeRecord {
            width: se.width(),
            height: se.height(),
            mask: (0..se.height()).flat_map(|j| (0..se.width()).map(move |i| se.contains(i, j) as u8)).collect(),
        }),
        entries,
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(manifest_path, json)?;
    Ok(())
}

/// Reads a registry written by [`save_registry`], verifying every checksum and
/// recomputing the auto-correlation surfaces.
pub fn load_registry<T: Scalar>(dir: &Path) -> Result<TemplateRegistry<T>> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let raw =
        fs::read(&manifest_path).map_err(|e| load_err(MANIFEST_FILE, format!("{}: {e}", manifest_path.display())))?;
    let manifest: Manifest = serde_json::from_slice(&raw).map_err(|e| load_err(MANIFEST_FILE, e.to_string()))?;

    let se = match manifest.structuring_element {
        Some(r) => {
            StructuringElement::new(r.width, r.height, r.mask).map_err(|e| load_err(MANIFEST_FILE, e.to_string()))?
        }
        None => StructuringElement::default(),
    };
    let mut registry = TemplateRegistry::new(manifest.canonical_size, manifest.kernel_fraction, se)
        .map_err(|e| load_err(MANIFEST_FILE, e.to_string()))?;

    let size = manifest.canonical_size;
    for entry in &manifest.entries {
        let fail = |msg: String| load_err(entry.label.clone(), msg);
        if entry.file.contains(['/', '\\']) || entry.file.starts_with('.') {
            return Err(fail(format!("file name {:?} escapes the registry directory", entry.file)));
        }
        let bytes = fs::read(dir.join(&entry.file)).map_err(|e| fail(format!("{}: {e}", entry.file)))?;
        let actual = checksum(&bytes);
        if actual != entry.checksum {
            return Err(fail(format!("checksum mismatch: manifest {} file {actual}", entry.checksum)));
        }
        let gray = decode_pgm(&bytes).map_err(|e| fail(e.to_string()))?;
        if (gray.width(), gray.height()) != (size, size) {
            return Err(fail(format!(
                "canonical image is {}x{}, registry size is {size}",
                gray.width(),
                gray.height()
            )));
        }
        if gray.pixels().iter().any(|&v| v != 0 && v != 255) {
            return Err(fail("canonical image is not two-valued 0/255".into()));
        }
        let mask = BinaryImage::new(size, size, gray.pixels().iter().map(|&v| (v == 255) as u8).collect())?;
        let template = GestureTemplate::from_canonical(&entry.label, mask, manifest.kernel_fraction)
            .map_err(|e| fail(e.to_string()))?;
        registry.insert(template).map_err(|e| fail(e.to_string()))?;
    }
    Ok(registry)
}
