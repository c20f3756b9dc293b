//! The `glyph` command line.
//!
//! ```text
//! glyph extract  --image x.png [--format csv|annotated]
//! glyph extract  --dataset d/ [--manifest all] --out features.csv
//! glyph train    --dataset d/ --manifest nist-digits [--k 64] [--seed 1] --out m.bin
//! glyph classify --model m.bin --image x.png [--top 3]
//! glyph evaluate --model m.bin --dataset d/ --manifest nist-digits [--top 3] [--format text|csv|json] [--out r.txt]
//! ```
//!
//! `--jobs N` (any subcommand) caps the worker threads; results do not
//! depend on it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glyph_core::classifier::{self, KMeansParams, LabeledVector};
use glyph_core::dataset::{apply_split, scan_dataset, LabeledSample, SplitManifest};
use glyph_core::eval::{self, ReportFormat};
use glyph_core::features::{extract, FeatureVector};
use glyph_core::preprocess::{load_char_matrix, ThresholdMode};
use glyph_core::Error;
use log::info;
use rayon::prelude::*;

#[derive(Debug, Parser)]
#[command(name = "glyph", version, about = "Handwritten character recognition with structural features")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the 256 features of one image, or write a CSV for a dataset.
    Extract(ExtractArgs),
    /// Fit per-class k-means codebooks and write a model file.
    Train(TrainArgs),
    /// Rank the classes for one image.
    Classify(ClassifyArgs),
    /// Top-t accuracy of a model on the test side of a split.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ImageOptions {
    /// `otsu` or a fixed intensity: pixels strictly darker become ink.
    #[arg(long, default_value = "otsu", value_parser = parse_threshold)]
    pub threshold: ThresholdMode,
}

fn parse_threshold(s: &str) -> Result<ThresholdMode, String> {
    if s.eq_ignore_ascii_case("otsu") {
        return Ok(ThresholdMode::Otsu);
    }
    s.parse::<u8>()
        .map(ThresholdMode::Fixed)
        .map_err(|_| format!("expected `otsu` or an intensity 0-255, got {s:?}"))
}

#[derive(Debug, Clone, Args)]
pub struct DatasetOptions {
    /// Dataset root: `<root>/<label>/<image>`.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Built-in split (nist-digits, nist-uppercase, nist-lowercase, all) or a manifest file.
    #[arg(long, default_value = "all")]
    pub manifest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureFormat {
    Csv,
    Annotated,
}

#[derive(Debug, Clone, Args)]
pub struct ExtractArgs {
    #[arg(long, conflicts_with = "dataset", required_unless_present = "dataset")]
    pub image: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: FeatureFormat,
    /// Extract every sample selected by `--manifest` (train and test sides).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, default_value = "all", requires = "dataset")]
    pub manifest: String,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub image_options: ImageOptions,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DatasetOptions,
    #[arg(long, default_value_t = classifier::kmeans::DEFAULT_K, value_parser = parse_positive)]
    pub k: usize,
    #[arg(long, default_value_t = classifier::kmeans::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = classifier::kmeans::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = classifier::kmeans::DEFAULT_TOL)]
    pub tol: f64,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub image_options: ImageOptions,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub image: PathBuf,
    /// Number of ranked choices.
    #[arg(long, default_value_t = 3, value_parser = parse_positive)]
    pub top: usize,
    #[command(flatten)]
    pub image_options: ImageOptions,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DatasetOptions,
    /// Report accuracy for choices 1..=top.
    #[arg(long, default_value_t = 3, value_parser = parse_positive)]
    pub top: usize,
    #[arg(long, default_value = "text", value_parser = parse_report_format)]
    pub format: ReportFormat,
    /// Report file (the text table always goes to standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub image_options: ImageOptions,
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive integer, got {s:?}")),
        Ok(n) => Ok(n),
    }
}

fn parse_report_format(s: &str) -> Result<ReportFormat, String> {
    ReportFormat::from_str(s).map_err(|e| e.to_string())
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => 3,
        Error::InvalidInput(_) | Error::Image { .. } => 4,
        Error::InvalidDataset(_) | Error::InvalidManifest(_) => 5,
        Error::VersionMismatch { .. } | Error::CorruptModel(_) | Error::DimensionMismatch { .. } => 6,
        Error::InvalidArgument(_) => 7,
        Error::Json(_) => 8,
    }
}

/// Runs one subcommand, writing its normal output to `stdout`.
pub fn run(config: &RunConfig, stdout: &mut dyn std::io::Write) -> Result<(), Error> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(match config.jobs {
            Some(0) => return Err(Error::InvalidArgument("--jobs must be at least 1".into())),
            Some(n) => n,
            None => 0,
        })
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let text = pool.install(|| match &config.command {
        Command::Extract(args) => run_extract(args),
        Command::Train(args) => run_train(args),
        Command::Classify(args) => run_classify(args),
        Command::Evaluate(args) => run_evaluate(args),
    })?;
    write_out(stdout, &text)
}

fn write_out(stdout: &mut dyn std::io::Write, text: &str) -> Result<(), Error> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Error::Io { path: PathBuf::from("<stdout>"), source: e })
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn split(data: &DatasetOptions) -> Result<(SplitManifest, Vec<LabeledSample>, Vec<LabeledSample>), Error> {
    let manifest = SplitManifest::resolve(&data.manifest)?;
    let scan = scan_dataset(&data.dataset)?;
    if scan.skipped > 0 {
        log::warn!("skipped {} unusable files under {}", scan.skipped, data.dataset.display());
    }
    let (train, test) = apply_split(&scan.samples, &manifest);
    info!(
        "{}: {} samples scanned, {} train, {} test",
        manifest.name,
        scan.samples.len(),
        train.len(),
        test.len()
    );
    Ok((manifest, train, test))
}

/// Loads and featurizes samples in parallel, keeping their order.
fn featurize(samples: &[LabeledSample], mode: ThresholdMode) -> Result<Vec<LabeledVector>, Error> {
    samples
        .par_iter()
        .map(|s| {
            let matrix = load_char_matrix(&s.image_path, mode)
                .map_err(|e| match e {
                    Error::InvalidInput(msg) => {
                        Error::InvalidInput(format!("{}: {msg}", s.image_path.display()))
                    }
                    other => other,
                })?;
            Ok(LabeledVector::new(s.label.clone(), extract(&matrix)))
        })
        .collect()
}

fn run_extract(args: &ExtractArgs) -> Result<String, Error> {
    let mode = args.image_options.threshold;
    let text = if let Some(image) = &args.image {
        let v: FeatureVector = extract(&load_char_matrix(image, mode)?);
        match args.format {
            FeatureFormat::Csv => v.to_csv() + "\n",
            FeatureFormat::Annotated => v.to_annotated(),
        }
    } else {
        let data = DatasetOptions {
            dataset: args.dataset.clone().expect("clap requires --dataset without --image"),
            manifest: args.manifest.clone(),
        };
        let (_, train, test) = split(&data)?;
        let samples: Vec<_> = train.into_iter().chain(test).collect();
        let vectors = featurize(&samples, mode)?;
        let mut out = String::new();
        for (s, v) in samples.iter().zip(&vectors) {
            writeln!(out, "{},{},{}", s.image_path.display(), s.label, v.features.to_csv()).unwrap();
        }
        out
    };
    match &args.out {
        Some(path) => write_file(path, &text).map(|()| String::new()),
        None => Ok(text),
    }
}

fn run_train(args: &TrainArgs) -> Result<String, Error> {
    let (manifest, train, _) = split(&args.data)?;
    if train.is_empty() {
        return Err(Error::InvalidDataset(format!(
            "manifest {} selects no training samples",
            manifest.name
        )));
    }
    let vectors = featurize(&train, args.image_options.threshold)?;
    let params = KMeansParams {
        k: args.k,
        seed: args.seed,
        max_iter: args.max_iter,
        tol: args.tol,
    };
    let model = classifier::train(&vectors, manifest.category, &params)?;
    classifier::save_model(&model, &args.out)?;

    let mut summary = format!(
        "trained {} classes ({}) from {} samples, k = {}, seed = {}\n",
        model.codebooks().len(),
        model.category(),
        vectors.len(),
        params.k,
        params.seed
    );
    for cb in model.codebooks() {
        writeln!(summary, "{}\t{} samples\t{} centroids", cb.label, cb.training_count, cb.centroids.len()).unwrap();
    }
    Ok(summary)
}

fn run_classify(args: &ClassifyArgs) -> Result<String, Error> {
    let model = classifier::load_model(&args.model)?;
    let v = extract(&load_char_matrix(&args.image, args.image_options.threshold)?);
    let ranked = classifier::classify(&model, &v, args.top)?;
    let mut out = String::new();
    for choice in &ranked.choices {
        writeln!(out, "{}\t{:.6}", choice.label, choice.distance).unwrap();
    }
    Ok(out)
}

fn run_evaluate(args: &EvaluateArgs) -> Result<String, Error> {
    let model = classifier::load_model(&args.model)?;
    let (manifest, _, test) = split(&args.data)?;
    if test.is_empty() {
        return Err(Error::InvalidDataset(format!(
            "manifest {} selects no test samples",
            manifest.name
        )));
    }
    let vectors = featurize(&test, args.image_options.threshold)?;
    let depths: Vec<usize> = (1..=args.top).collect();
    let report = eval::evaluate(&model, &vectors, &depths)?;
    if let Some(path) = &args.out {
        eval::emit_report(&report, args.format, path)?;
    }
    let mut summary = eval::render_text_table(std::slice::from_ref(&report));
    writeln!(summary, "n_test = {}", report.n_test).unwrap();
    Ok(summary)
}
