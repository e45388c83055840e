use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use handcorr::classifier::{load_registry, save_registry};
use handcorr::correlation::{make_kernel, ncc_map_fast, ncc_map_reference};
use handcorr::evalkit::{evaluate, render_report, ReportFormat};
use handcorr::raster::decode_pgm;
use handcorr::synthgest::{self, generate_dataset, load_dataset, save_dataset, DatasetConfig};
use handcorr::{Error, Grid, Result, TemplateRegistry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;

/// Largest fast-vs-reference disagreement tolerated before timing.
const BENCH_TOLERANCE: f64 = 1e-9;

pub fn synth(config: &RunConfig, classes: usize, per_class: usize, out: &Path) -> Result<()> {
    if out.join(synthgest::MANIFEST_FILE).exists() {
        return Err(Error::Conflict(format!("{} already holds a dataset", out.display())));
    }
    let mut dc = DatasetConfig::new(classes, per_class, config.seed);
    dc.perturbation = config.perturbation;
    let dataset = generate_dataset(&dc).map_err(|e| Error::Config(e.to_string()))?;
    save_dataset(&dataset, out).map_err(|e| Error::Config(format!("{}: {e}", out.display())))?;
    eprintln!("wrote {} samples to {}", dataset.samples.len(), out.display());
    Ok(())
}

pub fn enroll(config: &RunConfig, dataset_dir: &Path, out: &Path) -> Result<()> {
    let dataset = load_dataset(dataset_dir)?;
    let mut registry: TemplateRegistry =
        TemplateRegistry::new(config.canonical_size, config.kernel_fraction, config.structuring_element()?)?;
    for s in dataset.enrollment() {
        registry.enroll(&s.label, &s.image).map_err(|e| match e {
            Error::Conflict(_) => e,
            e => Error::Config(format!("sample {}/{}: {e}", s.label, s.index)),
        })?;
    }
    if registry.is_empty() {
        return Err(Error::Config(format!("{} has no enrollment samples", dataset_dir.display())));
    }
    save_registry(&registry, out)?;
    eprintln!("enrolled {} classes into {}", registry.len(), out.display());
    Ok(())
}

pub fn recognize(image: &Path, registry_dir: &Path, scores: bool) -> Result<()> {
    let registry: TemplateRegistry = load_registry(registry_dir)?;
    let bytes = fs::read(image).map_err(|e| Error::Config(format!("{}: {e}", image.display())))?;
    let img = decode_pgm(&bytes)?;
    let result = registry.recognize(&img)?;
    if scores {
        let mut rows = result.per_class_scores.clone();
        rows.sort_by(|(la, a), (lb, b)| a.total_cmp(b).then_with(|| la.cmp(lb)));
        for (label, mse) in rows {
            println!("{label}\t{mse:.12}");
        }
    } else {
        println!("{}\t{:.12}", result.label, result.mse);
    }
    Ok(())
}

pub fn eval(dataset_dir: &Path, registry_dir: &Path, csv: Option<&Path>) -> Result<()> {
    let registry: TemplateRegistry = load_registry(registry_dir)?;
    let dataset = load_dataset(dataset_dir)?;
    let report = evaluate(&registry, dataset.samples.iter().map(|s| (s.label.as_str(), &s.image)))?;
    print!("{}", String::from_utf8_lossy(&render_report(&report, ReportFormat::Text)));
    if let Some(path) = csv {
        fs::write(path, render_report(&report, ReportFormat::Csv))
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn bench(config: &RunConfig, size: usize, kernel: usize, iters: usize) -> Result<()> {
    if iters == 0 {
        return Err(Error::Config("--iters must be at least 1".into()));
    }
    if kernel == 0 || kernel > size {
        return Err(Error::Config(format!("kernel {kernel} must be between 1 and the image size {size}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let image = Grid::from_fn(size, size, |_, _| rng.random_range(0..256) as f64)?;
    let k = make_kernel(&Grid::from_fn(kernel, kernel, |_, _| rng.random_range(0..256) as f64)?);

    let reference = ncc_map_reference(&image, &k)?;
    let fast = ncc_map_fast(&image, &k)?;
    let diff = fast.max_abs_diff(&reference).expect("maps share dimensions");
    if diff > BENCH_TOLERANCE {
        return Err(Error::InvalidState(format!("fast map deviates from reference by {diff:e}")));
    }

    let windows = (reference.width() * reference.height()) as f64;
    let time = |f: &dyn Fn() -> Result<()>| -> Result<Duration> {
        let mut best = Duration::MAX;
        for _ in 0..iters {
            let start = Instant::now();
            f()?;
            best = best.min(start.elapsed());
        }
        Ok(best)
    };
    let t_ref = time(&|| ncc_map_reference(&image, &k).map(drop))?;
    let t_fast = time(&|| ncc_map_fast(&image, &k).map(drop))?;
    let ns = |d: Duration| d.as_nanos() as f64 / windows;
    println!("size\t{size}");
    println!("kernel\t{kernel}");
    println!("max_abs_diff\t{diff:.3e}");
    println!("reference_ns_per_window\t{:.1}", ns(t_ref));
    println!("fast_ns_per_window\t{:.1}", ns(t_fast));
    println!("speedup\t{:.2}", t_ref.as_secs_f64() / t_fast.as_secs_f64().max(1e-12));
    Ok(())
}
