//! File formats: raw planar YUV 4:2:0, PNG frame directories, detection and
//! annotation JSON, experiment configuration, and CSV/SVG reports.

mod annotations;
mod config;
mod imagedir;
mod report;
mod yuv;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::imagecore::ImageError;

pub use annotations::{load_annotations, load_detections, write_annotations, write_detections};
pub use config::{load_config, ExperimentConfig, SequenceSource, SourceKind, DEFAULT_IMAGE_DIR_FPS, DEFAULT_SCALE};
pub use imagedir::{frame_file_name, read_image_dir, write_image_dir};
pub use report::{rd_csv_string, read_rd_csv, svg_plot_string, write_rd_csv, write_svg_plot, PlotSpec};
pub use yuv::{read_yuv420, write_yuv420, yuv420_frame_bytes};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("i/o on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: size {size} is not a positive multiple of the {frame_bytes}-byte frame")]
    SizeMismatch {
        path: PathBuf,
        size: u64,
        frame_bytes: usize,
    },
    #[error("4:2:0 needs even dimensions, got {width}x{height}")]
    OddDimensions { width: usize, height: usize },
    #[error("{0} contains no PNG frames")]
    EmptyDir(PathBuf),
    #[error("{path}: {width}x{height} differs from the first frame")]
    MixedDims { path: PathBuf, width: u32, height: u32 },
    #[error("{path}: unreadable image: {message}")]
    UnreadableImage { path: PathBuf, message: String },
    #[error("{path}: expected 8-bit RGB or gray, got {color}")]
    UnsupportedPixels { path: PathBuf, color: String },
    #[error("{path}: malformed JSON: {message}")]
    MalformedJson { path: PathBuf, message: String },
    #[error("{path}: schema violation: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("{path}: frame {frame_id} object {index}: bbox extents must be positive")]
    NonPositiveExtent { path: PathBuf, frame_id: u64, index: usize },
    #[error("{path}: frame {frame_id} object {index}: detection lacks a score")]
    MissingScore { path: PathBuf, frame_id: u64, index: usize },
    #[error("{path}: frame {frame_id} object {index}: annotations must not carry a score")]
    UnexpectedScore { path: PathBuf, frame_id: u64, index: usize },
    #[error("{path}: frame {frame_id} object {index}: score {score} outside [0, 1]")]
    ScoreRange {
        path: PathBuf,
        frame_id: u64,
        index: usize,
        score: f64,
    },
    #[error("{path}: frame_id {frame_id} listed twice")]
    DuplicateFrame { path: PathBuf, frame_id: u64 },
    #[error("{path}: unknown key: {message}")]
    UnknownKey { path: PathBuf, message: String },
    #[error("{path}: type mismatch: {message}")]
    TypeMismatch { path: PathBuf, message: String },
    #[error("{path}: constraint violated: {message}")]
    Constraint { path: PathBuf, message: String },
    #[error("{path}: CSV: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("nothing to report: {0}")]
    EmptyReport(&'static str),
    #[error(transparent)]
    Image(#[from] ImageError),
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |e| DataError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}
