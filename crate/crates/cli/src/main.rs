//! `vcm`: command-line front end for the contrast-reduction coding experiments.
//!
//! Exit status: 0 on success, 1 on domain errors (I/O, formats, codec
//! failures), 2 on usage errors. Errors are printed to stderr as one line.

mod commands;
mod media;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vcm_core::detmetrics::{DEFAULT_CONFIDENCE_THRESHOLD, DEFAULT_IOU_THRESHOLD};

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    pub fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }

    pub fn usage(e: impl std::fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "vcm",
    version,
    about = "Contrast-reduction preprocessing and rate/accuracy evaluation for video coding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce contrast, then resize with bicubic interpolation
    Preprocess(PreprocessArgs),
    /// Encode a sequence and print its rate
    Encode(EncodeArgs),
    /// Decode a bitstream back to frames
    Decode(DecodeArgs),
    /// Print per-frame and mean Shannon entropy (bits/sample)
    Entropy(EntropyArgs),
    /// Score detections against annotations (per-class AP and mAP)
    EvalAp(EvalApArgs),
    /// Run both pipelines over their QP lists and write rd.csv / rd.svg
    RdSweep(RdSweepArgs),
    /// BD-rate of a test curve against an anchor curve
    BdRate(BdRateArgs),
    /// Plot RD curves from a CSV file as SVG
    Plot(PlotArgs),
}

/// Geometry for raw `.yuv` inputs; ignored for image directories.
#[derive(Debug, Args, Clone)]
pub struct RawGeometry {
    /// Frame width of a raw .yuv input
    #[arg(long)]
    pub width: Option<usize>,
    /// Frame height of a raw .yuv input
    #[arg(long)]
    pub height: Option<usize>,
    /// Frame rate of the input
    #[arg(long, default_value_t = 30.0, value_parser = positive_f64)]
    pub fps: f64,
    /// Read at most this many frames
    #[arg(long)]
    pub frame_limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Input: directory of PNG frames or a raw I420 .yuv file
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output: a path ending in .yuv writes I420, anything else a PNG directory
    #[arg(long)]
    pub out: PathBuf,
    /// Contrast reduction ratio in [0, 1]
    #[arg(long, default_value_t = vcm_core::ContrastParams::DEFAULT_ALPHA, value_parser = unit_interval)]
    pub alpha: f64,
    /// Per-axis resize factor in (0, 1]; sizes are rounded to even values
    #[arg(long, default_value_t = vcm_core::dataio::DEFAULT_SCALE, value_parser = scale_factor)]
    pub scale: f64,
    #[command(flatten)]
    pub geometry: RawGeometry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CodecChoice {
    Builtin,
    External,
}

#[derive(Debug, Args)]
pub struct CodecArgs {
    /// Codec to use
    #[arg(long, value_enum, default_value_t = CodecChoice::Builtin)]
    pub codec: CodecChoice,
    /// JSON file with external codec templates
    /// (`encode_template`, `decode_template`, optional `timeout`)
    #[arg(long)]
    pub cfg: Option<PathBuf>,
    /// Quantization parameter, 0 to 63
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u8).range(0..=63))]
    pub qp: u8,
    /// Scratch directory for external codec runs [default: next to the output]
    #[arg(long)]
    pub workdir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Input: directory of PNG frames or a raw I420 .yuv file
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output bitstream file
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub codec: CodecArgs,
    #[command(flatten)]
    pub geometry: RawGeometry,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Input bitstream file
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output: a path ending in .yuv writes I420, anything else a PNG directory
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub codec: CodecArgs,
    /// Frame rate attached to the decoded sequence
    #[arg(long, default_value_t = 30.0, value_parser = positive_f64)]
    pub fps: f64,
    /// Frame width (external codec only)
    #[arg(long)]
    pub width: Option<usize>,
    /// Frame height (external codec only)
    #[arg(long)]
    pub height: Option<usize>,
    /// Frame count (external codec only)
    #[arg(long)]
    pub frames: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Input: directory of PNG frames or a raw I420 .yuv file
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub geometry: RawGeometry,
}

#[derive(Debug, Args)]
pub struct EvalApArgs {
    /// Ground-truth annotation JSON
    #[arg(long)]
    pub gt: PathBuf,
    /// Detection JSON
    #[arg(long)]
    pub det: PathBuf,
    /// IoU threshold for a true positive
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD, value_parser = unit_interval)]
    pub iou: f64,
    /// Minimum detection score kept (inclusive)
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE_THRESHOLD, value_parser = unit_interval)]
    pub conf: f64,
}

#[derive(Debug, Args)]
pub struct RdSweepArgs {
    /// Experiment config JSON. Defaults: alpha 0.25, scale 0.5, proposed QPs
    /// 32-45, anchor QPs 35-47, IoU 0.5, confidence 0.25, built-in codec
    #[arg(long)]
    pub config: PathBuf,
    /// Parallel runs (0 = one per core)
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Skip writing decoded PNG frames for each run
    #[arg(long)]
    pub no_frames: bool,
}

#[derive(Debug, Args)]
pub struct BdRateArgs {
    /// CSV holding the anchor curve
    #[arg(long)]
    pub anchor_csv: PathBuf,
    /// CSV holding the test curve
    #[arg(long)]
    pub test_csv: PathBuf,
    /// Curve label to take from the anchor CSV [default: the only curve, else `anchor`]
    #[arg(long)]
    pub anchor_label: Option<String>,
    /// Curve label to take from the test CSV [default: the only curve, else `proposed`]
    #[arg(long)]
    pub test_label: Option<String>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// RD CSV as written by rd-sweep
    #[arg(long)]
    pub csv: PathBuf,
    /// Output SVG path
    #[arg(long)]
    pub svg: PathBuf,
    /// Plot title
    #[arg(long)]
    pub title: Option<String>,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn scale_factor(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1]"))
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                eprintln!("error: usage: missing subcommand, see `vcm --help`");
                return ExitCode::from(2);
            }
            // clap renders several lines; keep the first, which names the problem
            let rendered = e.render().to_string();
            let first = rendered
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid usage");
            let first = first.trim_start_matches("error: ");
            eprintln!("error: usage: {}", one_line(first));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Preprocess(a) => commands::preprocess(a),
        Command::Encode(a) => commands::encode(a),
        Command::Decode(a) => commands::decode(a),
        Command::Entropy(a) => commands::entropy(a),
        Command::EvalAp(a) => commands::eval_ap(a),
        Command::RdSweep(a) => commands::rd_sweep(a),
        Command::BdRate(a) => commands::bd_rate(a),
        Command::Plot(a) => commands::plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: usage: {}", one_line(&msg));
            ExitCode::from(2)
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {}", one_line(&msg));
            ExitCode::from(1)
        }
    }
}
