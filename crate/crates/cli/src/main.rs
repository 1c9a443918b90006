//! `camtrace`: batch source-camera forensics from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use camtrace_core::fingerprint::{ExportFormat, ShiftMode, DEFAULT_CROPS};
use camtrace_core::{FeatureLayout, ManipulationTag, Split, SvmParams};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "camtrace",
    version,
    about = "Identify source cameras from sensor noise, CFA and texture traces"
)]
struct Cli {
    /// Worker threads for batch processing (default: logical cores).
    #[arg(long, global = true, env = "CAMTRACE_JOBS", value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a synthetic multi-camera benchmark with a manifest.
    Simulate(SimulateArgs),
    /// Apply alterations to an image or to every image of a manifest.
    Manipulate(ManipulateArgs),
    /// Write the feature table of every manifest image.
    Extract(ExtractArgs),
    /// Export averaged FFT noise fingerprints of an image or a manifest.
    Fingerprint(FingerprintArgs),
    /// Train a two-layer SVM ensemble on a feature table.
    Train(TrainArgs),
    /// Predict camera labels for feature tables or images.
    Predict(PredictArgs),
    /// Score a model on a manifest with the weighted accuracy metric.
    Evaluate(EvaluateArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Output directory; receives `camXX/imgNNNN.png` and `manifest.csv`.
    out_dir: PathBuf,
    /// Number of synthetic cameras.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    cameras: u32,
    /// Images per camera.
    #[arg(long, default_value_t = 120, value_parser = clap::value_parser!(u32).range(1..))]
    per_camera: u32,
    /// Benchmark seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Side of the square captures in pixels.
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u32).range(64..))]
    size: u32,
    /// Fraction of each camera's training images that are altered.
    #[arg(long, default_value_t = 0.5, value_parser = parse_fraction)]
    train_altered_fraction: f64,
}

#[derive(Args, Debug)]
struct ManipulateArgs {
    /// Input image, or a manifest CSV.
    input: PathBuf,
    /// Output image file, or output directory for a manifest.
    output: PathBuf,
    /// Alteration to apply to every input.
    #[arg(long, required_unless_present = "random", conflicts_with = "random")]
    tag: Option<ManipulationTag>,
    /// Assign seeded alterations to a fraction of each camera's images.
    #[arg(long, requires = "fraction")]
    random: bool,
    /// Fraction of each camera's images altered with `--random`.
    #[arg(long, value_parser = parse_fraction, requires = "random")]
    fraction: Option<f64>,
    /// Seed for `--random`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Manifest CSV listing the images.
    manifest: PathBuf,
    /// Output feature CSV.
    output: PathBuf,
    /// Comma-separated feature blocks: spn, cfa, glcm.
    #[arg(long, default_value_t = FeatureLayout::ALL)]
    blocks: FeatureLayout,
    /// Only extract entries of this split (train or test).
    #[arg(long)]
    split: Option<Split>,
}

#[derive(Args, Debug)]
struct FingerprintArgs {
    /// Input image, or a manifest CSV.
    input: PathBuf,
    /// Output directory for `<stem>_shift<k>.<ext>` files.
    out_dir: PathBuf,
    /// Random 256x256 crops averaged per shift.
    #[arg(long, default_value_t = DEFAULT_CROPS, value_parser = parse_positive)]
    crops: usize,
    /// Crop placement seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Export format: png or jpg.
    #[arg(long, default_value = "png")]
    format: ExportFormat,
    /// Shift reading: circular or offset-crop.
    #[arg(long, default_value_t = ShiftMode::Circular)]
    shift_mode: ShiftMode,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Labelled feature CSV.
    features: PathBuf,
    /// Output model file.
    model: PathBuf,
    /// Regularization strength.
    #[arg(long, default_value_t = SvmParams::default().lambda, value_parser = parse_lambda)]
    lambda: f64,
    /// Training epochs per SVM.
    #[arg(long, default_value_t = SvmParams::default().epochs, value_parser = parse_positive)]
    epochs: usize,
    /// Training seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Model file written by `train`.
    model: PathBuf,
    /// Feature CSVs or images.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output CSV (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Training features, used to fit conflict models the saved model lacks.
    #[arg(long)]
    train_features: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Model file written by `train`.
    model: PathBuf,
    /// Manifest CSV; its test split is scored, or every entry if it has none.
    manifest: PathBuf,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 1]"))
    }
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_lambda(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not a positive finite number"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or_default().trim_start_matches("error: ");
            commands::report_error(None, "argument", first);
            return ExitCode::from(2);
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs as usize)
            .build_global()
        {
            commands::report_error(None, "state", &e.to_string());
            return ExitCode::FAILURE;
        }
    }
    let failures = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Manipulate(a) => commands::manipulate(a),
        Command::Extract(a) => commands::extract(a),
        Command::Fingerprint(a) => commands::fingerprint(a),
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Evaluate(a) => commands::evaluate(a),
    };
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
