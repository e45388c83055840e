//! Generates a synthetic dataset, enrolls the clean renders and prints the
//! accuracy table.
//!
//! Usage: `synthetic_table [seed] [rotation_deg] [translation_px] [noise_sigma] [speck_prob]`
//! Set `CSV=1` to print the CSV report with its confusion matrix.

use std::time::Instant;

use handcorr::evalkit::{evaluate, render_report, ReportFormat};
use handcorr::synthgest::{generate_dataset, DatasetConfig};
use handcorr::TemplateRegistry;

fn main() -> handcorr::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let mut config = DatasetConfig::new(24, 21, args.first().map_or(42, |&s| s as u64));
    let p = &mut config.perturbation;
    let slots = [&mut p.rotation_deg, &mut p.translation_px, &mut p.noise_sigma, &mut p.speck_prob];
    for (slot, value) in slots.into_iter().zip(args.iter().skip(1)) {
        *slot = *value;
    }

    let start = Instant::now();
    let dataset = generate_dataset(&config)?;
    let mut registry = TemplateRegistry::default();
    for s in dataset.enrollment() {
        registry.enroll(&s.label, &s.image)?;
    }
    let report = evaluate(&registry, dataset.samples.iter().map(|s| (s.label.as_str(), &s.image)))?;
    let format = if std::env::var_os("CSV").is_some() { ReportFormat::Csv } else { ReportFormat::Text };
    print!("{}", String::from_utf8_lossy(&render_report(&report, format)));
    eprintln!("elapsed {:.2?}", start.elapsed());
    Ok(())
}
