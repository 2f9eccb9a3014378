//! Experiment harness for machine-vision video coding with contrast reduction.
//!
//! The crate is organised by stage:
//!
//! * [`imagecore`]: frames, contrast reduction, bicubic resampling, entropy, PSNR
//! * [`codec`]: built-in 8x8 DCT intra codec, external encoder driver, bitrate accounting
//! * [`detmetrics`]: IoU, AP@IoU, mAP and Bjøntegaard delta rate
//! * [`dataio`]: YUV/PNG sequence I/O, JSON annotations and configuration, CSV/SVG reports
//! * [`pipeline`]: the contrast-reduced ("proposed") and plain ("anchor") flows and QP sweeps
//! * [`corpus`]: deterministic synthetic test sequences

pub mod codec;
pub mod corpus;
pub mod dataio;
pub mod detmetrics;
pub mod imagecore;
pub mod pipeline;

pub use codec::{Bitstream, CodecConfig, CodecKind, CodingStats, ExternalCodecSpec};
pub use detmetrics::{BoundingBox, Detection, GroundTruthBox, RDCurve, RDPoint};
pub use imagecore::{ColorFormat, ContrastParams, Frame, Plane, VideoSequence};
pub use pipeline::{PipelineKind, RunRecord};
