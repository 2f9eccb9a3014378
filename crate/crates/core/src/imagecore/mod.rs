//! Pixel-level primitives: planar frames, BT.601 color conversion, global-mean
//! contrast reduction, Catmull-Rom bicubic resampling, histogram entropy and PSNR.
//!
//! Every operation is a pure function of its inputs. Real-valued intermediate
//! results are rounded half away from zero and clamped to `[0, 255]`.

mod color;
mod contrast;
mod frame;
pub(crate) mod metrics;
mod resize;

pub use color::{rgb_to_yuv420, yuv420_to_rgb};
pub use contrast::{contrast_reduce, contrast_reduce_yuv420, global_mean, ContrastParams};
pub use frame::{ColorFormat, Frame, Plane, VideoSequence};
pub use metrics::{psnr, shannon_entropy};
pub use resize::{bicubic_resize, bicubic_resize_planewise, catmull_rom, resize_plane};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImageError {
    #[error("plane dimensions must be at least 1x1")]
    EmptyPlane,
    #[error("expected {expected} samples, got {actual}")]
    SampleCount { expected: usize, actual: usize },
    #[error("{format:?} needs {expected} planes, got {actual}")]
    PlaneCount {
        format: ColorFormat,
        expected: usize,
        actual: usize,
    },
    #[error("plane dimensions inconsistent with {0:?}")]
    PlaneGeometry(ColorFormat),
    #[error("4:2:0 needs even luma dimensions, got {width}x{height}")]
    OddDimensions { width: usize, height: usize },
    #[error("{op} does not accept {format:?} frames")]
    UnsupportedFormat { op: &'static str, format: ColorFormat },
    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("output dimensions must be at least 1x1, got {width}x{height}")]
    ZeroDimensions { width: usize, height: usize },
    #[error("frame geometry mismatch")]
    DimensionMismatch,
    #[error("sequence has no frames")]
    EmptySequence,
    #[error("frame rate must be finite and positive, got {0}")]
    InvalidFps(f64),
    #[error("frame {0} differs in format or dimensions from frame 0")]
    HeterogeneousFrame(usize),
}

/// Rounds half away from zero and clamps into the 8-bit sample range.
#[inline]
pub fn quantize_sample(v: f64) -> u8 {
    // f64::round already rounds half away from zero
    v.round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::quantize_sample;

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(quantize_sample(0.5), 1);
        assert_eq!(quantize_sample(127.5), 128);
        assert_eq!(quantize_sample(127.49), 127);
        assert_eq!(quantize_sample(-0.5), 0);
        assert_eq!(quantize_sample(300.0), 255);
    }
}
