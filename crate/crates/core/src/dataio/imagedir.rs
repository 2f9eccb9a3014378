use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, RgbImage};

use super::{io_err, DataError};
use crate::imagecore::{ColorFormat, Frame, ImageError, Plane, VideoSequence};

/// Name of the `index`-th frame written by [`write_image_dir`].
pub fn frame_file_name(index: usize) -> String {
    format!("{index:06}.png")
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

fn png_files(dir: &Path) -> Result<Vec<PathBuf>, DataError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_file() && is_png(&path) {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Reads every `.png` in `dir`, ordered by file name, as one sequence. Frames
/// must be 8-bit RGB (or 8-bit gray) and share one size.
pub fn read_image_dir(dir: &Path, fps: f64) -> Result<VideoSequence, DataError> {
    let files = png_files(dir)?;
    if files.is_empty() {
        return Err(DataError::EmptyDir(dir.to_path_buf()));
    }
    let mut frames = Vec::with_capacity(files.len());
    let mut dims = None;
    for path in &files {
        let img = image::open(path).map_err(|e| DataError::UnreadableImage {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let (w, h) = (img.width(), img.height());
        if *dims.get_or_insert((w, h)) != (w, h) {
            return Err(DataError::MixedDims {
                path: path.clone(),
                width: w,
                height: h,
            });
        }
        let frame = match img {
            DynamicImage::ImageRgb8(rgb) => Frame::from_rgb_interleaved(w as usize, h as usize, rgb.as_raw())?,
            DynamicImage::ImageLuma8(gray) => Frame::gray(Plane::new(w as usize, h as usize, gray.into_raw())?),
            other => {
                return Err(DataError::UnsupportedPixels {
                    path: path.clone(),
                    color: format!("{:?}", other.color()),
                })
            }
        };
        frames.push(frame);
    }
    Ok(VideoSequence::new(frames, fps)?)
}

/// Writes each frame as `NNNNNN.png`. Previously written numbered frames in
/// the directory are removed first so that a re-read sees only this sequence.
pub fn write_image_dir(seq: &VideoSequence, dir: &Path) -> Result<(), DataError> {
    if !matches!(seq.format(), ColorFormat::Rgb444 | ColorFormat::Gray) {
        return Err(ImageError::UnsupportedFormat {
            op: "write_image_dir",
            format: seq.format(),
        }
        .into());
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for stale in png_files(dir)? {
        let numbered = stale
            .file_stem()
            .and_then(|s| s.to_str())
            .is_some_and(|s| s.len() == 6 && s.bytes().all(|b| b.is_ascii_digit()));
        if numbered {
            fs::remove_file(&stale).map_err(io_err(&stale))?;
        }
    }
    let (w, h) = (seq.width() as u32, seq.height() as u32);
    for (i, f) in seq.frames().iter().enumerate() {
        let path = dir.join(frame_file_name(i));
        let encoded = match f.format() {
            ColorFormat::Gray => GrayImage::from_raw(w, h, f.planes()[0].data().to_vec())
                .expect("plane size checked")
                .save_with_format(&path, image::ImageFormat::Png),
            _ => RgbImage::from_raw(w, h, f.to_rgb_interleaved()?)
                .expect("plane size checked")
                .save_with_format(&path, image::ImageFormat::Png),
        };
        encoded.map_err(|e| DataError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
    }
    Ok(())
}
