//! `handcorr` command-line tool.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 when the query
//! image has no foreground to recognize.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use handcorr::classifier::{DEFAULT_CANONICAL_SIZE, DEFAULT_KERNEL_FRACTION};
use handcorr::synthgest::Perturbation;
use handcorr::Error;

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "handcorr", version, about = "Static hand gesture recognition by correlation maps")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Side of the square canonical silhouette.
    #[arg(long, global = true, default_value_t = DEFAULT_CANONICAL_SIZE)]
    canonical_size: usize,
    /// Side of the template kernel as a fraction of the canonical side.
    #[arg(long, global = true, default_value_t = DEFAULT_KERNEL_FRACTION)]
    kernel_fraction: f64,
    /// Side of the square structuring element used for denoising.
    #[arg(long, global = true, default_value_t = 3)]
    se: usize,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic gesture dataset.
    Synth(SynthArgs),
    /// Enroll the clean render of every class into a new registry.
    Enroll {
        /// Dataset directory written by `synth`.
        #[arg(long)]
        dataset: PathBuf,
        /// Registry directory to create.
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify one PGM image.
    Recognize {
        image: PathBuf,
        #[arg(long)]
        registry: PathBuf,
        /// Print every class with its score, best first.
        #[arg(long)]
        scores: bool,
    },
    /// Classify a whole dataset and print the accuracy table.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        registry: PathBuf,
        /// Also write the CSV report, with its confusion matrix, here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Time the reference and summed-area NCC kernels.
    Bench {
        /// Side of the square test image.
        #[arg(long, default_value_t = 128)]
        size: usize,
        /// Side of the square kernel.
        #[arg(long, default_value_t = 64)]
        kernel: usize,
        #[arg(long, default_value_t = 5)]
        iters: usize,
    },
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 24)]
    classes: usize,
    #[arg(long, default_value_t = 21)]
    per_class: usize,
    #[arg(long)]
    out: PathBuf,
    /// Rotation range in degrees (±).
    #[arg(long, default_value_t = Perturbation::default().rotation_deg)]
    rotation: f64,
    /// Translation range per axis in pixels (±).
    #[arg(long, default_value_t = Perturbation::default().translation_px)]
    translation: f64,
    #[arg(long, default_value_t = Perturbation::default().noise_sigma)]
    noise_sigma: f64,
    #[arg(long, default_value_t = Perturbation::default().speck_prob)]
    speck_prob: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let mut config = RunConfig {
        canonical_size: g.canonical_size,
        kernel_fraction: g.kernel_fraction,
        se_side: g.se,
        perturbation: Perturbation::default(),
        seed: g.seed,
    };
    if let Command::Synth(a) = &cli.command {
        config.perturbation = Perturbation {
            rotation_deg: a.rotation,
            translation_px: a.translation,
            noise_sigma: a.noise_sigma,
            speck_prob: a.speck_prob,
        };
    }

    let result = config.validate().and_then(|()| match cli.command {
        Command::Synth(a) => commands::synth(&config, a.classes, a.per_class, &a.out),
        Command::Enroll { dataset, out } => commands::enroll(&config, &dataset, &out),
        Command::Recognize { image, registry, scores } => commands::recognize(&image, &registry, scores),
        Command::Eval { dataset, registry, csv } => commands::eval(&dataset, &registry, csv.as_deref()),
        Command::Bench { size, kernel, iters } => commands::bench(&config, size, kernel, iters),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::EmptyForeground => 3,
        _ => 2,
    }
}
