//! The two processing flows and the QP sweep around them.
//!
//! * proposed: contrast reduction, bicubic downsampling, coding, bicubic
//!   upsampling back to the source size
//! * anchor: the same without contrast reduction
//!
//! Frames stay in the source's own format (RGB444, YUV420 or GRAY) between
//! stages; RGB content is converted to 4:2:0 only around the codec.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::codec::{code_sequence, CodecConfig, CodecError};
use crate::dataio::{
    load_annotations, load_detections, write_image_dir, write_rd_csv, write_svg_plot, DataError, ExperimentConfig,
    PlotSpec,
};
use crate::detmetrics::{bd_rate, evaluate, GroundTruthBox, MetricsError, QualityMetric, RDCurve, RDPoint};
use crate::imagecore::{
    bicubic_resize_planewise, contrast_reduce, contrast_reduce_yuv420, metrics, rgb_to_yuv420, yuv420_to_rgb,
    ColorFormat, ContrastParams, Frame, ImageError, VideoSequence,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("pipeline input must have even dimensions, got {width}x{height}")]
    OddDimensions { width: usize, height: usize },
    #[error("pipeline does not accept {0:?} sources")]
    UnsupportedFormat(ColorFormat),
    #[error("scale must lie in (0, 1], got {0}")]
    InvalidScale(f64),
    #[error("missing detection file {0}")]
    MissingDetections(PathBuf),
    #[error("no QPs to sweep for {0}")]
    EmptyQpList(&'static str),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineKind {
    Proposed,
    Anchor,
}

impl PipelineKind {
    pub fn name(self) -> &'static str {
        match self {
            PipelineKind::Proposed => "proposed",
            PipelineKind::Anchor => "anchor",
        }
    }
}

/// Stage parameters shared by both flows.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    pub contrast: ContrastParams,
    pub scale: f64,
    pub codec: CodecConfig,
}

impl PipelineParams {
    pub fn new(contrast: ContrastParams, scale: f64, codec: CodecConfig) -> Result<Self, PipelineError> {
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(PipelineError::InvalidScale(scale));
        }
        Ok(Self { contrast, scale, codec })
    }
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            contrast: ContrastParams::default(),
            scale: crate::dataio::DEFAULT_SCALE,
            codec: CodecConfig::default(),
        }
    }
}

impl From<&ExperimentConfig> for PipelineParams {
    fn from(c: &ExperimentConfig) -> Self {
        Self {
            contrast: c.contrast(),
            scale: c.scale,
            codec: c.codec.clone(),
        }
    }
}

/// Outcome of one coded run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub kind: PipelineKind,
    pub qp: u8,
    pub total_bits: u64,
    pub bitrate_kbps: f64,
    /// Against the unmodified source; infinite when bit-exact.
    pub psnr_db: f64,
    /// Against the pre-coding target at full size (the contrast-reduced
    /// source for the proposed flow, the source itself for the anchor).
    pub target_psnr_db: f64,
    /// Reconstruction at source size, in the source format.
    pub decoded: VideoSequence,
    pub bitstream: Vec<u8>,
    pub seconds: f64,
}

/// Downsampled size along one axis: `dim * scale` rounded to the nearest even
/// value, at least 2.
pub fn scaled_dim(dim: usize, scale: f64) -> usize {
    let half = (dim as f64 * scale / 2.0).round() as usize;
    (half * 2).max(2)
}

fn reduce_contrast(frame: &Frame, params: ContrastParams) -> Result<Frame, ImageError> {
    match frame.format() {
        ColorFormat::Rgb444 | ColorFormat::Yuv444 => contrast_reduce(frame, params),
        ColorFormat::Yuv420 => contrast_reduce_yuv420(frame, params),
        ColorFormat::Gray => {
            // a gray frame is an RGB frame with three equal planes
            let p = frame.planes()[0].clone();
            let rgb = Frame::new(ColorFormat::Rgb444, vec![p.clone(), p.clone(), p])?;
            let out = contrast_reduce(&rgb, params)?;
            Ok(Frame::gray(out.into_planes().swap_remove(0)))
        }
    }
}

/// Contrast reduction followed by bicubic resizing to `width x height`, in the
/// sequence's own format. YUV420 targets must be even.
pub fn preprocess(
    seq: &VideoSequence,
    contrast: ContrastParams,
    width: usize,
    height: usize,
) -> Result<VideoSequence, ImageError> {
    seq.try_map(|f| bicubic_resize_planewise(&reduce_contrast(f, contrast)?, width, height))
}

fn to_codec_format(frame: &Frame) -> Result<Frame, ImageError> {
    match frame.format() {
        ColorFormat::Rgb444 => rgb_to_yuv420(frame),
        _ => Ok(frame.clone()),
    }
}

fn from_codec_format(frame: &Frame, source: ColorFormat) -> Result<Frame, ImageError> {
    match source {
        ColorFormat::Rgb444 => yuv420_to_rgb(frame),
        _ => Ok(frame.clone()),
    }
}

fn sequence_psnr(a: &VideoSequence, b: &VideoSequence) -> Result<f64, ImageError> {
    let mut sse = 0u64;
    let mut n = 0u64;
    for (fa, fb) in a.frames().iter().zip(b.frames()) {
        if !fa.same_geometry(fb) {
            return Err(ImageError::DimensionMismatch);
        }
        let (s, c) = metrics::squared_error(fa, fb);
        sse += s;
        n += c;
    }
    Ok(metrics::psnr_from_sse(sse, n))
}

/// Runs one flow at one QP. `workdir` is only used by external codecs.
pub fn run_pipeline(
    kind: PipelineKind,
    seq: &VideoSequence,
    params: &PipelineParams,
    qp: u8,
    workdir: Option<&Path>,
) -> Result<RunRecord, PipelineError> {
    let start = Instant::now();
    let (w, h) = (seq.width(), seq.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(PipelineError::OddDimensions { width: w, height: h });
    }
    let format = seq.format();
    if format == ColorFormat::Yuv444 {
        return Err(PipelineError::UnsupportedFormat(format));
    }
    if !(params.scale > 0.0 && params.scale <= 1.0) {
        return Err(PipelineError::InvalidScale(params.scale));
    }

    let target = match kind {
        PipelineKind::Proposed => seq.try_map(|f| reduce_contrast(f, params.contrast))?,
        PipelineKind::Anchor => seq.clone(),
    };
    let (sw, sh) = (scaled_dim(w, params.scale), scaled_dim(h, params.scale));
    let small = target.try_map(|f| to_codec_format(&bicubic_resize_planewise(f, sw, sh)?))?;

    let coded = code_sequence(&small, &params.codec.with_qp(qp), workdir)?;
    let stats = coded.stats;

    let restored = coded
        .decoded
        .try_map(|f| bicubic_resize_planewise(&from_codec_format(f, format)?, w, h))?;
    Ok(RunRecord {
        kind,
        qp,
        total_bits: stats.total_bits,
        bitrate_kbps: stats.bitrate_kbps,
        psnr_db: sequence_psnr(seq, &restored)?,
        target_psnr_db: sequence_psnr(&target, &restored)?,
        decoded: restored,
        bitstream: coded.coded,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_proposed(seq: &VideoSequence, params: &PipelineParams, qp: u8) -> Result<RunRecord, PipelineError> {
    run_pipeline(PipelineKind::Proposed, seq, params, qp, None)
}

pub fn run_anchor(seq: &VideoSequence, params: &PipelineParams, qp: u8) -> Result<RunRecord, PipelineError> {
    run_pipeline(PipelineKind::Anchor, seq, params, qp, None)
}

/// Per-run results kept by a sweep (decoded frames are not retained).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub kind: PipelineKind,
    pub qp: u8,
    pub total_bits: u64,
    pub bitrate_kbps: f64,
    pub psnr_db: f64,
    pub target_psnr_db: f64,
    pub map: Option<f64>,
    pub per_class_ap: BTreeMap<u32, f64>,
    pub seconds: f64,
}

impl RunSummary {
    fn to_point(&self) -> RDPoint {
        RDPoint {
            qp: self.qp,
            bitrate_kbps: self.bitrate_kbps,
            psnr_db: Some(self.psnr_db),
            map: self.map,
            per_class_ap: self.per_class_ap.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Worker threads; 0 means rayon's default.
    pub jobs: usize,
    /// Write each reconstruction to `<output_dir>/<kind>/qpNN/` as PNG frames.
    pub write_frames: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            jobs: 1,
            write_frames: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub proposed: RDCurve,
    pub anchor: RDCurve,
    /// Ordered by kind (proposed first) then by position in the QP list.
    pub runs: Vec<RunSummary>,
}

/// Directory for a run's frames (or, under `work/`, its codec scratch files).
pub fn run_dir(root: &Path, kind: PipelineKind, qp: u8) -> PathBuf {
    root.join(kind.name()).join(format!("qp{qp:02}"))
}

/// Detection file expected for a run: `<detections_dir>/<kind>/qpNN.json`.
pub fn detection_file(detections_dir: &Path, kind: PipelineKind, qp: u8) -> PathBuf {
    detections_dir.join(kind.name()).join(format!("qp{qp:02}.json"))
}

fn to_rgb_for_output(seq: &VideoSequence) -> Result<VideoSequence, ImageError> {
    match seq.format() {
        ColorFormat::Yuv420 => seq.try_map(yuv420_to_rgb),
        _ => Ok(seq.clone()),
    }
}

/// Runs both flows over their QP lists and builds one RD curve per flow.
/// When `detections_dir` is configured, every run is scored against the
/// annotations; otherwise points carry rate and PSNR only.
pub fn rd_sweep(
    seq: &VideoSequence,
    config: &ExperimentConfig,
    opts: &SweepOptions,
) -> Result<SweepResult, PipelineError> {
    config.validate().map_err(PipelineError::Config)?;
    if config.qp_list_proposed.is_empty() {
        return Err(PipelineError::EmptyQpList("proposed"));
    }
    if config.qp_list_anchor.is_empty() {
        return Err(PipelineError::EmptyQpList("anchor"));
    }
    let params = PipelineParams::from(config);
    let ground_truth: Option<Vec<GroundTruthBox>> = match &config.detections_dir {
        Some(_) => Some(load_annotations(&config.annotations)?),
        None => None,
    };

    let tasks: Vec<(PipelineKind, u8)> = config
        .qp_list_proposed
        .iter()
        .map(|&qp| (PipelineKind::Proposed, qp))
        .chain(config.qp_list_anchor.iter().map(|&qp| (PipelineKind::Anchor, qp)))
        .collect();

    let one = |&(kind, qp): &(PipelineKind, u8)| -> Result<RunSummary, PipelineError> {
        let workdir = run_dir(&config.output_dir.join("work"), kind, qp);
        let rec = run_pipeline(kind, seq, &params, qp, Some(&workdir))?;
        if opts.write_frames {
            write_image_dir(
                &to_rgb_for_output(&rec.decoded)?,
                &run_dir(&config.output_dir, kind, qp),
            )?;
        }
        let (map, per_class_ap) = match (&config.detections_dir, &ground_truth) {
            (Some(dir), Some(gts)) => {
                let path = detection_file(dir, kind, qp);
                if !path.is_file() {
                    return Err(PipelineError::MissingDetections(path));
                }
                let dets = load_detections(&path)?;
                let report = evaluate(&dets, gts, config.iou_threshold, config.confidence_threshold)?;
                (Some(report.map), report.per_class)
            }
            _ => (None, BTreeMap::new()),
        };
        Ok(RunSummary {
            kind,
            qp,
            total_bits: rec.total_bits,
            bitrate_kbps: rec.bitrate_kbps,
            psnr_db: rec.psnr_db,
            target_psnr_db: rec.target_psnr_db,
            map,
            per_class_ap,
            seconds: rec.seconds,
        })
    };

    let runs: Vec<RunSummary> = if opts.jobs == 1 {
        tasks.iter().map(one).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(one).collect::<Result<_, _>>())?
    };

    let curve = |kind: PipelineKind| {
        RDCurve::new(
            kind.name(),
            runs.iter()
                .filter(|r| r.kind == kind)
                .map(RunSummary::to_point)
                .collect(),
        )
    };
    Ok(SweepResult {
        proposed: curve(PipelineKind::Proposed),
        anchor: curve(PipelineKind::Anchor),
        runs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub csv_path: PathBuf,
    pub svg_path: PathBuf,
    pub plotted: QualityMetric,
    /// BD-rate of the proposed curve against the anchor, in percent.
    pub bd_rate_percent: Option<f64>,
    pub notice: Option<String>,
}

/// Writes `rd.csv` and `rd.svg` to `out_dir` and computes the mAP BD-rate
/// when both curves carry mAP at four or more points.
pub fn compare_curves(proposed: &RDCurve, anchor: &RDCurve, out_dir: &Path) -> Result<ComparisonReport, PipelineError> {
    if proposed.is_empty() || anchor.is_empty() {
        return Err(PipelineError::Config("cannot compare empty curves".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| DataError::Io {
        path: out_dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let curves = [proposed.clone(), anchor.clone()];
    let csv_path = out_dir.join("rd.csv");
    write_rd_csv(&curves, &csv_path)?;

    let has_map = proposed.has_metric(QualityMetric::Map) && anchor.has_metric(QualityMetric::Map);
    let plotted = if has_map {
        QualityMetric::Map
    } else {
        QualityMetric::Psnr
    };
    let svg_path = out_dir.join("rd.svg");
    write_svg_plot(&curves, &svg_path, &PlotSpec::for_metric(plotted))?;

    let (bd_rate_percent, notice) = if !has_map {
        (None, Some("BD-rate skipped: curves carry no mAP".to_string()))
    } else if proposed.len() < 4 || anchor.len() < 4 {
        (
            None,
            Some(format!(
                "BD-rate skipped: insufficient points (proposed {}, anchor {}, need 4)",
                proposed.len(),
                anchor.len()
            )),
        )
    } else {
        match bd_rate(anchor, proposed) {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(format!("BD-rate skipped: {e}"))),
        }
    };
    Ok(ComparisonReport {
        csv_path,
        svg_path,
        plotted,
        bd_rate_percent,
        notice,
    })
}
