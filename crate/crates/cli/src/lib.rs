//! Command implementations behind the `tensvd` binary.
//!
//! Each command writes its human-readable or JSON output to the supplied
//! writer so that tests can drive them without spawning a process.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use tensvd::bench::{ranks_for_budget, Scenario, SummaryStats};
use tensvd::codec::{self, Container};
use tensvd::media_io::{load_frames, load_image, save_frames, save_image};
use tensvd::metrics::{timed, PsnrForm};
use tensvd::{
    compress, decompress, hosvd_storage_cost, reconstruct, t_hosvd_with, CompressionTarget,
    DenseTensor, FactorMethod, QualityReport,
};

#[derive(Debug, Parser)]
#[command(
    name = "tensvd",
    version,
    about = "Lossy compression of images and frame sequences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress an image or a directory of frames.
    Compress(CompressArgs),
    /// Rebuild media from a `.tsvd` or `.thsv` file.
    Decompress(DecompressArgs),
    /// Print the header and accounting of a `.tsvd` file.
    Info(InfoArgs),
    /// Compare two images or frame directories.
    Score(ScoreArgs),
    /// Time both compressors on uniform random tensors at a matched stored fraction.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    #[default]
    Tensvd,
    Thosvd,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum SvdRoute {
    #[default]
    Gram,
    Direct,
}

impl From<SvdRoute> for FactorMethod {
    fn from(r: SvdRoute) -> Self {
        match r {
            SvdRoute::Gram => FactorMethod::Gram,
            SvdRoute::Direct => FactorMethod::Direct,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MediaArgs {
    /// File-name pattern when the input is a frame directory.
    #[arg(long, default_value = "*.png")]
    pub pattern: String,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Report PSNR with a square root over the MSE.
    #[arg(long)]
    pub psnr_as_printed: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompressArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Relative error bound.
    #[arg(long, conflicts_with = "cr")]
    pub eps: Option<f64>,
    /// Stored fraction of the original element count.
    #[arg(long)]
    pub cr: Option<f64>,
    /// Order of the reshaped tensor.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    pub algorithm: Algorithm,
    /// Per-mode ranks for thosvd, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
    /// Factor route for thosvd.
    #[arg(long, value_enum, default_value_t)]
    pub svd: SvdRoute,
    #[command(flatten)]
    pub media: MediaArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DecompressArgs {
    pub input: PathBuf,
    /// Image file, or a directory for frame sequences.
    pub output: PathBuf,
    /// Original media to score the reconstruction against.
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub media: MediaArgs,
}

#[derive(Debug, Clone, Args)]
pub struct InfoArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    pub reference: PathBuf,
    pub candidate: PathBuf,
    /// Stored element count to account the candidate with (defaults to the full size).
    #[arg(long)]
    pub stored: Option<u64>,
    #[command(flatten)]
    pub media: MediaArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// hd, fullhd, twok, qhd, qkuhd, fk, sk, ek or HxWxC; repeatable.
    #[arg(long = "scenario")]
    pub scenarios: Vec<String>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Stored-fraction budget that fixes the t-HOSVD ranks.
    #[arg(long, default_value_t = 0.166)]
    pub cr: f64,
    #[arg(long)]
    pub json: bool,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Compress(a) => cmd_compress(&a, out).map(|_| ()),
        Command::Decompress(a) => cmd_decompress(&a, out).map(|_| ()),
        Command::Info(a) => cmd_info(&a, out).map(|_| ()),
        Command::Score(a) => cmd_score(&a, out).map(|_| ()),
        Command::Bench(a) => cmd_bench(&a, out).map(|_| ()),
    }
}

/// Sizes the global rayon pool from `TENSVD_THREADS` (default 1).
pub fn configure_threads() -> Result<usize> {
    let threads = match std::env::var("TENSVD_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("TENSVD_THREADS must be a positive integer, got {v:?}"))?,
        Err(_) => 1,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(threads)
}

/// An image file or a directory of frames.
pub fn load_media(path: &Path, pattern: &str) -> Result<DenseTensor> {
    let t = if path.is_dir() {
        load_frames(path, pattern)?
    } else {
        load_image(path)?
    };
    Ok(t)
}

/// Order-4 tensors become a frame directory, order-3 an image file.
pub fn save_media(t: &DenseTensor, path: &Path) -> Result<()> {
    match t.order() {
        4 => {
            save_frames(t, path)?;
        }
        3 => save_image(t, path)?,
        _ => bail!("cannot write a tensor of shape {:?} as media", t.dims()),
    }
    Ok(())
}

fn psnr_form(media: &MediaArgs) -> PsnrForm {
    if media.psnr_as_printed {
        PsnrForm::AsPrinted
    } else {
        PsnrForm::Conventional
    }
}

fn join_dims(dims: &[usize]) -> String {
    dims.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("x")
}

#[derive(Debug, Serialize)]
struct CompressSummary<'a> {
    algorithm: &'a str,
    dims: &'a [usize],
    #[serde(skip_serializing_if = "Option::is_none")]
    reshaped_dims: Option<&'a [usize]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ranks: Option<&'a [usize]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<usize>,
    file_bytes: usize,
    #[serde(flatten)]
    report: &'a QualityReport,
}

fn print_summary(s: &CompressSummary, json: bool, out: &mut dyn Write) -> Result<()> {
    if json {
        writeln!(out, "{}", serde_json::to_string(s)?)?;
        return Ok(());
    }
    writeln!(out, "algorithm={}", s.algorithm)?;
    writeln!(out, "dims={}", join_dims(s.dims))?;
    if let Some(r) = s.reshaped_dims {
        writeln!(out, "reshaped_dims={}", join_dims(r))?;
    }
    if let Some(r) = s.ranks {
        writeln!(out, "ranks={}", join_dims(r))?;
    }
    if let Some(k) = s.entries {
        writeln!(out, "entries={k}")?;
    }
    writeln!(out, "file_bytes={}", s.file_bytes)?;
    write!(out, "{}", s.report.to_key_value())?;
    Ok(())
}

pub fn cmd_compress(a: &CompressArgs, out: &mut dyn Write) -> Result<QualityReport> {
    let x = load_media(&a.input, &a.media.pattern)?;
    info!("loaded {:?} from {}", x.dims(), a.input.display());
    let form = psnr_form(&a.media);

    match a.algorithm {
        Algorithm::Tensvd => {
            if a.ranks.is_some() {
                bail!("--ranks applies only to --algorithm thosvd");
            }
            let target = match (a.eps, a.cr) {
                (Some(e), None) => CompressionTarget::epsilon(e)?,
                (None, Some(c)) => CompressionTarget::stored_fraction(c)?,
                _ => bail!("give exactly one of --eps or --cr"),
            };
            let (c, elapsed) = timed(|| compress(&x, target, a.order));
            let c = c?;
            let bytes = codec::encode(&c);
            fs::write(&a.output, &bytes)
                .with_context(|| format!("writing {}", a.output.display()))?;
            let xhat = decompress(&c)?;
            let report = QualityReport::evaluate(&x, &xhat, c.stored_count, elapsed, form)?;
            print_summary(
                &CompressSummary {
                    algorithm: "tensvd",
                    dims: x.dims(),
                    reshaped_dims: Some(c.plan.reshaped_dims()),
                    ranks: None,
                    entries: Some(c.sparse_core.len()),
                    file_bytes: bytes.len(),
                    report: &report,
                },
                a.media.json,
                out,
            )?;
            Ok(report)
        }
        Algorithm::Thosvd => {
            if a.order.is_some() {
                bail!("--order applies only to --algorithm tensvd");
            }
            let ranks = match (&a.ranks, a.eps, a.cr) {
                (Some(r), None, None) => r.clone(),
                (None, None, Some(c)) => ranks_for_budget(x.dims(), c)?,
                (Some(_), _, _) => bail!("--ranks already fixes the budget; drop --eps/--cr"),
                (None, Some(_), _) => bail!("thosvd takes --ranks or --cr, not --eps"),
                (None, None, None) => bail!("thosvd requires --ranks r1,r2,… or --cr"),
            };
            let (f, elapsed) = timed(|| t_hosvd_with(&x, &ranks, a.svd.into()));
            let f = f?;
            let bytes = codec::encode_tucker(&f);
            fs::write(&a.output, &bytes)
                .with_context(|| format!("writing {}", a.output.display()))?;
            let xhat = reconstruct(&f)?;
            let report = QualityReport::evaluate(&x, &xhat, f.storage_cost(), elapsed, form)?;
            print_summary(
                &CompressSummary {
                    algorithm: "thosvd",
                    dims: x.dims(),
                    reshaped_dims: None,
                    ranks: Some(&ranks),
                    entries: None,
                    file_bytes: bytes.len(),
                    report: &report,
                },
                a.media.json,
                out,
            )?;
            Ok(report)
        }
    }
}

/// Decodes either container into a tensor and its stored element count.
pub fn read_container(path: &Path) -> Result<(DenseTensor, u64)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let decoded = match codec::sniff(&bytes)? {
        Container::Tsvd => {
            let c = codec::decode(&bytes)?;
            (decompress(&c)?, c.stored_count)
        }
        Container::Thsv => {
            let f = codec::decode_tucker(&bytes)?;
            (reconstruct(&f)?, f.storage_cost())
        }
    };
    Ok(decoded)
}

pub fn cmd_decompress(a: &DecompressArgs, out: &mut dyn Write) -> Result<Option<QualityReport>> {
    let (decoded, elapsed) = timed(|| read_container(&a.input));
    let (xhat, stored) = decoded?;
    save_media(&xhat, &a.output)?;
    let Some(reference) = &a.reference else {
        writeln!(
            out,
            "wrote {} ({})",
            a.output.display(),
            join_dims(xhat.dims())
        )?;
        return Ok(None);
    };
    // Scored against the unquantized reconstruction.
    let x = load_media(reference, &a.media.pattern)?;
    let report = QualityReport::evaluate(&x, &xhat, stored, elapsed, psnr_form(&a.media))?;
    if a.media.json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        write!(out, "{}", report.to_key_value())?;
    }
    Ok(Some(report))
}

#[derive(Debug, Serialize)]
pub struct FileInfo {
    pub version: u16,
    pub original_dims: Vec<usize>,
    pub reshaped_dims: Vec<usize>,
    pub entries: usize,
    pub stored_count: u64,
    pub original_count: usize,
    pub stored_fraction: f64,
    pub total_energy: f64,
    pub predicted_relative_error: f64,
    pub file_bytes: usize,
}

pub fn cmd_info(a: &InfoArgs, out: &mut dyn Write) -> Result<FileInfo> {
    let bytes = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let c = codec::decode(&bytes)?;
    let info = FileInfo {
        version: codec::VERSION,
        original_dims: c.plan.original_dims().to_vec(),
        reshaped_dims: c.plan.reshaped_dims().to_vec(),
        entries: c.sparse_core.len(),
        stored_count: c.stored_count,
        original_count: c.original_count(),
        stored_fraction: c.stored_fraction(),
        total_energy: c.total_energy,
        predicted_relative_error: c.predicted_relative_error(),
        file_bytes: bytes.len(),
    };
    if a.json {
        writeln!(out, "{}", serde_json::to_string(&info)?)?;
    } else {
        writeln!(out, "version={}", info.version)?;
        writeln!(out, "original_dims={}", join_dims(&info.original_dims))?;
        writeln!(out, "reshaped_dims={}", join_dims(&info.reshaped_dims))?;
        writeln!(out, "entries={}", info.entries)?;
        writeln!(out, "stored_count={}", info.stored_count)?;
        writeln!(out, "original_count={}", info.original_count)?;
        writeln!(out, "stored_fraction={:.6}", info.stored_fraction)?;
        writeln!(out, "total_energy={:.6e}", info.total_energy)?;
        writeln!(out, "predicted_err={:.6}", info.predicted_relative_error)?;
        writeln!(out, "file_bytes={}", info.file_bytes)?;
    }
    Ok(info)
}

pub fn cmd_score(a: &ScoreArgs, out: &mut dyn Write) -> Result<QualityReport> {
    let x = load_media(&a.reference, &a.media.pattern)?;
    let xhat = load_media(&a.candidate, &a.media.pattern)?;
    let stored = a.stored.unwrap_or(x.len() as u64);
    let report = QualityReport::evaluate(&x, &xhat, stored, 0.0, psnr_form(&a.media))?;
    if a.media.json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        write!(out, "{}", report.to_key_value())?;
    }
    Ok(report)
}

/// Timings for one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct BenchResult {
    pub scenario: String,
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub stored_fraction: f64,
    pub tensvd_seconds: Vec<f64>,
    pub thosvd_seconds: Vec<f64>,
    pub tensvd: SummaryStats,
    pub thosvd: SummaryStats,
    /// Median t-HOSVD time over median tenSVD time.
    pub ratio: f64,
}

/// A `[0, 1)` uniform tensor drawn from `rng`.
pub fn uniform_tensor(rng: &mut impl Rng, dims: &[usize]) -> Result<DenseTensor> {
    let n: usize = dims.iter().product();
    let data = (0..n).map(|_| rng.gen::<f64>()).collect();
    Ok(DenseTensor::new(dims.to_vec(), data)?)
}

/// Runs `reps` sequential repetitions of both compressors on one scenario.
///
/// The t-HOSVD ranks come from the budget; tenSVD then gets the stored fraction
/// those ranks actually use.
pub fn bench_scenario(scenario: &Scenario, reps: usize, seed: u64, cr: f64) -> Result<BenchResult> {
    if reps == 0 {
        bail!("--reps must be at least 1");
    }
    let dims = scenario.dims();
    let total: u64 = dims.iter().map(|&d| d as u64).product();
    let ranks = ranks_for_budget(&dims, cr)?;
    let fraction = hosvd_storage_cost(&dims, &ranks) as f64 / total as f64;
    let target = CompressionTarget::stored_fraction(fraction)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut t_times, mut h_times) = (Vec::with_capacity(reps), Vec::with_capacity(reps));
    for rep in 0..reps {
        let x = uniform_tensor(&mut rng, &dims)?;
        let (c, t_sec) = timed(|| compress(&x, target, None));
        let c = c?;
        let (f, h_sec) = timed(|| t_hosvd_with(&x, &ranks, FactorMethod::Gram));
        let f = f?;
        let gap = c.stored_count.abs_diff(f.storage_cost()) as f64 / total as f64;
        if gap >= 0.01 {
            warn!(
                "{scenario} rep {rep}: stored counts differ by {:.2}% of the original",
                gap * 100.0
            );
        }
        info!("{scenario} rep {rep}: tensvd {t_sec:.3}s, thosvd {h_sec:.3}s");
        t_times.push(t_sec);
        h_times.push(h_sec);
    }
    let tensvd = SummaryStats::from_samples(&t_times).expect("reps ≥ 1");
    let thosvd = SummaryStats::from_samples(&h_times).expect("reps ≥ 1");
    Ok(BenchResult {
        scenario: scenario.label(),
        dims,
        ranks,
        stored_fraction: fraction,
        ratio: thosvd.median / tensvd.median,
        tensvd_seconds: t_times,
        thosvd_seconds: h_times,
        tensvd,
        thosvd,
    })
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<Vec<BenchResult>> {
    let scenarios: Vec<Scenario> = if a.scenarios.is_empty() {
        Scenario::DESK_DEFAULT.to_vec()
    } else {
        a.scenarios
            .iter()
            .map(|s| s.parse())
            .collect::<tensvd::Result<_>>()?
    };
    let mut results = Vec::with_capacity(scenarios.len());
    if !a.json {
        writeln!(
            out,
            "{:<16} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>7}",
            "scenario", "min", "lq", "mean", "median", "uq", "max", "ratio"
        )?;
    }
    for s in &scenarios {
        let r = bench_scenario(s, a.reps, a.seed, a.cr)?;
        if !a.json {
            for (tag, st) in [("t", &r.tensvd), ("h", &r.thosvd)] {
                let ratio = if tag == "t" {
                    format!("{:.2}", r.ratio)
                } else {
                    String::new()
                };
                writeln!(
                    out,
                    "{:<16} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>7}",
                    format!("{} ({tag})", r.scenario),
                    st.min,
                    st.lq,
                    st.mean,
                    st.median,
                    st.uq,
                    st.max,
                    ratio
                )?;
            }
        }
        results.push(r);
    }
    if a.json {
        writeln!(out, "{}", serde_json::to_string(&results)?)?;
    }
    Ok(results)
}
