//! Reading and writing frame sequences by path: a directory holds PNG frames,
//! a `.yuv` file holds raw I420.

use std::path::Path;

use vcm_core::dataio::{read_image_dir, read_yuv420, write_image_dir, write_yuv420};
use vcm_core::imagecore::{rgb_to_yuv420, yuv420_to_rgb, ColorFormat, Frame, Plane};
use vcm_core::VideoSequence;

use crate::{CliError, CliResult, RawGeometry};

pub fn is_raw_yuv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("yuv"))
}

pub fn load(path: &Path, geometry: &RawGeometry) -> CliResult<VideoSequence> {
    if path.is_dir() {
        let seq = read_image_dir(path, geometry.fps).map_err(CliError::domain)?;
        return match geometry.frame_limit {
            Some(n) if n < seq.len() => {
                let frames = seq.frames()[..n.max(1)].to_vec();
                VideoSequence::new(frames, seq.fps()).map_err(CliError::domain)
            }
            _ => Ok(seq),
        };
    }
    if !path.exists() {
        return Err(CliError::Domain(format!(
            "{}: no such file or directory",
            path.display()
        )));
    }
    if !is_raw_yuv(path) {
        return Err(CliError::Domain(format!(
            "{}: expected a directory of PNG frames or a .yuv file",
            path.display()
        )));
    }
    let (Some(w), Some(h)) = (geometry.width, geometry.height) else {
        return Err(CliError::usage("--width and --height are required for .yuv input"));
    };
    read_yuv420(path, w, h, geometry.fps, geometry.frame_limit).map_err(CliError::domain)
}

/// Converts to I420 for coding or raw output. Gray gets neutral chroma.
pub fn to_yuv420(seq: &VideoSequence) -> CliResult<VideoSequence> {
    match seq.format() {
        ColorFormat::Yuv420 => Ok(seq.clone()),
        ColorFormat::Rgb444 => seq.try_map(rgb_to_yuv420).map_err(CliError::domain),
        ColorFormat::Gray => seq
            .try_map(|f| {
                let luma = f.planes()[0].clone();
                let (cw, ch) = (luma.width() / 2, luma.height() / 2);
                if luma.width() % 2 != 0 || luma.height() % 2 != 0 {
                    return Err(vcm_core::imagecore::ImageError::OddDimensions {
                        width: luma.width(),
                        height: luma.height(),
                    });
                }
                let chroma = Plane::filled(cw, ch, 128)?;
                Frame::new(ColorFormat::Yuv420, vec![luma, chroma.clone(), chroma])
            })
            .map_err(CliError::domain),
        other => Err(CliError::Domain(format!("cannot convert {other:?} to I420"))),
    }
}

pub fn save(seq: &VideoSequence, path: &Path) -> CliResult {
    if is_raw_yuv(path) {
        let yuv = to_yuv420(seq)?;
        return write_yuv420(&yuv, path).map_err(CliError::domain);
    }
    let out = match seq.format() {
        ColorFormat::Yuv420 => seq.try_map(yuv420_to_rgb).map_err(CliError::domain)?,
        _ => seq.clone(),
    };
    write_image_dir(&out, path).map_err(CliError::domain)
}
