use std::fs;
use std::path::Path;

use super::{io_err, DataError};
use crate::imagecore::{ColorFormat, Frame, Plane, VideoSequence};

/// Bytes per I420 frame: `w * h` luma plus two `w/2 * h/2` chroma planes.
pub fn yuv420_frame_bytes(width: usize, height: usize) -> usize {
    width * height * 3 / 2
}

/// Reads planar I420 (Y, then U, then V per frame). The file size must be an
/// exact, nonzero multiple of the frame size.
pub fn read_yuv420(
    path: &Path,
    width: usize,
    height: usize,
    fps: f64,
    frame_limit: Option<usize>,
) -> Result<VideoSequence, DataError> {
    if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
        return Err(DataError::OddDimensions { width, height });
    }
    let bytes = fs::read(path).map_err(io_err(path))?;
    let frame_bytes = yuv420_frame_bytes(width, height);
    if bytes.is_empty() || bytes.len() % frame_bytes != 0 {
        return Err(DataError::SizeMismatch {
            path: path.to_path_buf(),
            size: bytes.len() as u64,
            frame_bytes,
        });
    }
    let available = bytes.len() / frame_bytes;
    let count = frame_limit.map_or(available, |n| n.min(available));

    let (luma, chroma) = (width * height, width * height / 4);
    let frames = bytes
        .chunks_exact(frame_bytes)
        .take(count)
        .map(|chunk| {
            let (y, rest) = chunk.split_at(luma);
            let (u, v) = rest.split_at(chroma);
            Frame::new(
                ColorFormat::Yuv420,
                vec![
                    Plane::new(width, height, y.to_vec())?,
                    Plane::new(width / 2, height / 2, u.to_vec())?,
                    Plane::new(width / 2, height / 2, v.to_vec())?,
                ],
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VideoSequence::new(frames, fps)?)
}

pub fn write_yuv420(seq: &VideoSequence, path: &Path) -> Result<(), DataError> {
    if seq.format() != ColorFormat::Yuv420 {
        return Err(crate::imagecore::ImageError::UnsupportedFormat {
            op: "write_yuv420",
            format: seq.format(),
        }
        .into());
    }
    let mut out = Vec::with_capacity(seq.len() * yuv420_frame_bytes(seq.width(), seq.height()));
    for f in seq.frames() {
        for p in f.planes() {
            out.extend_from_slice(p.data());
        }
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, out).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numbered(w: usize, h: usize, frames: usize) -> VideoSequence {
        let frames = (0..frames)
            .map(|k| {
                let mut f = Frame::filled(ColorFormat::Yuv420, w, h, 0).unwrap();
                for (pi, p) in f.planes_mut().iter_mut().enumerate() {
                    for (i, v) in p.data_mut().iter_mut().enumerate() {
                        *v = (i * 7 + pi * 50 + k * 3) as u8;
                    }
                }
                f
            })
            .collect();
        VideoSequence::new(frames, 25.0).unwrap()
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.yuv");
        let seq = numbered(6, 4, 3);
        write_yuv420(&seq, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 3 * 36);
        let back = read_yuv420(&path, 6, 4, 25.0, None).unwrap();
        assert_eq!(back, seq);
        write_yuv420(&back, &path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), bytes);
        assert_eq!(read_yuv420(&path, 6, 4, 25.0, Some(2)).unwrap().len(), 2);
    }

    #[test]
    fn single_frame_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.yuv");
        fs::write(&path, vec![9u8; 8 * 4 * 3 / 2]).unwrap();
        let seq = read_yuv420(&path, 8, 4, 30.0, None).unwrap();
        assert_eq!(seq.len(), 1);
        assert_eq!(seq.frames()[0].planes()[2].data().len(), 8);
    }

    #[test]
    fn rejects_bad_sizes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.yuv");
        fs::write(&path, vec![0u8; 47]).unwrap();
        assert!(matches!(
            read_yuv420(&path, 8, 4, 30.0, None),
            Err(DataError::SizeMismatch { .. })
        ));
        fs::write(&path, vec![]).unwrap();
        assert!(matches!(
            read_yuv420(&path, 8, 4, 30.0, None),
            Err(DataError::SizeMismatch { .. })
        ));
        assert!(matches!(
            read_yuv420(&path, 7, 4, 30.0, None),
            Err(DataError::OddDimensions { .. })
        ));
        assert!(matches!(
            read_yuv420(&dir.path().join("missing.yuv"), 8, 4, 30.0, None),
            Err(DataError::Io { .. })
        ));
    }
}
