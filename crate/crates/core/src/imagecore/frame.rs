use super::ImageError;

/// Layout of the planes held by a [`Frame`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorFormat {
    Gray,
    Rgb444,
    Yuv444,
    Yuv420,
}

impl ColorFormat {
    pub fn plane_count(self) -> usize {
        match self {
            ColorFormat::Gray => 1,
            _ => 3,
        }
    }

    /// Formats whose three planes share the luma dimensions.
    pub fn is_full_resolution_color(self) -> bool {
        matches!(self, ColorFormat::Rgb444 | ColorFormat::Yuv444)
    }
}

/// A single 8-bit sample plane stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyPlane);
        }
        if data.len() != width * height {
            return Err(ImageError::SampleCount {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, u8> {
        self.data.chunks_exact(self.width)
    }
}

/// A planar 8-bit picture with one (gray) or three planes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    format: ColorFormat,
    planes: Vec<Plane>,
}

impl Frame {
    /// Builds a frame, checking plane count and per-format plane geometry.
    pub fn new(format: ColorFormat, planes: Vec<Plane>) -> Result<Self, ImageError> {
        if planes.len() != format.plane_count() {
            return Err(ImageError::PlaneCount {
                format,
                expected: format.plane_count(),
                actual: planes.len(),
            });
        }
        let (w, h) = (planes[0].width, planes[0].height);
        match format {
            ColorFormat::Gray => {}
            ColorFormat::Rgb444 | ColorFormat::Yuv444 => {
                if planes.iter().any(|p| p.width != w || p.height != h) {
                    return Err(ImageError::PlaneGeometry(format));
                }
            }
            ColorFormat::Yuv420 => {
                if w % 2 != 0 || h % 2 != 0 {
                    return Err(ImageError::OddDimensions { width: w, height: h });
                }
                if planes[1..].iter().any(|p| p.width != w / 2 || p.height != h / 2) {
                    return Err(ImageError::PlaneGeometry(format));
                }
            }
        }
        Ok(Self { format, planes })
    }

    pub fn gray(plane: Plane) -> Self {
        Self {
            format: ColorFormat::Gray,
            planes: vec![plane],
        }
    }

    /// Builds an RGB444 frame from interleaved `RGBRGB...` samples.
    pub fn from_rgb_interleaved(width: usize, height: usize, rgb: &[u8]) -> Result<Self, ImageError> {
        if rgb.len() != width * height * 3 {
            return Err(ImageError::SampleCount {
                expected: width * height * 3,
                actual: rgb.len(),
            });
        }
        let mut planes = [
            Vec::with_capacity(width * height),
            Vec::with_capacity(width * height),
            Vec::with_capacity(width * height),
        ];
        for px in rgb.chunks_exact(3) {
            planes[0].push(px[0]);
            planes[1].push(px[1]);
            planes[2].push(px[2]);
        }
        let [r, g, b] = planes;
        Frame::new(
            ColorFormat::Rgb444,
            vec![
                Plane::new(width, height, r)?,
                Plane::new(width, height, g)?,
                Plane::new(width, height, b)?,
            ],
        )
    }

    /// Interleaves a three-plane full-resolution frame into `RGBRGB...` order.
    pub fn to_rgb_interleaved(&self) -> Result<Vec<u8>, ImageError> {
        if !self.format.is_full_resolution_color() {
            return Err(ImageError::UnsupportedFormat {
                op: "interleave",
                format: self.format,
            });
        }
        let [r, g, b] = [&self.planes[0], &self.planes[1], &self.planes[2]];
        let mut out = Vec::with_capacity(r.data.len() * 3);
        for ((&r, &g), &b) in r.data.iter().zip(&g.data).zip(&b.data) {
            out.extend_from_slice(&[r, g, b]);
        }
        Ok(out)
    }

    /// Constant-valued frame in any format.
    pub fn filled(format: ColorFormat, width: usize, height: usize, value: u8) -> Result<Self, ImageError> {
        let planes = (0..format.plane_count())
            .map(|i| {
                if format == ColorFormat::Yuv420 && i > 0 {
                    Plane::filled(width / 2, height / 2, value)
                } else {
                    Plane::filled(width, height, value)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Frame::new(format, planes)
    }

    #[inline]
    pub fn format(&self) -> ColorFormat {
        self.format
    }

    #[inline]
    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn planes_mut(&mut self) -> &mut [Plane] {
        &mut self.planes
    }

    pub fn into_planes(self) -> Vec<Plane> {
        self.planes
    }

    /// Luma (first plane) width.
    #[inline]
    pub fn width(&self) -> usize {
        self.planes[0].width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.planes[0].height
    }

    pub fn sample_count(&self) -> usize {
        self.planes.iter().map(|p| p.data.len()).sum()
    }

    pub fn samples(&self) -> impl Iterator<Item = u8> + '_ {
        self.planes.iter().flat_map(|p| p.data.iter().copied())
    }

    pub fn same_geometry(&self, other: &Frame) -> bool {
        self.format == other.format
            && self
                .planes
                .iter()
                .zip(&other.planes)
                .all(|(a, b)| a.width == b.width && a.height == b.height)
    }
}

/// An ordered, homogeneous list of frames with a frame rate.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoSequence {
    frames: Vec<Frame>,
    fps: f64,
}

impl VideoSequence {
    pub fn new(frames: Vec<Frame>, fps: f64) -> Result<Self, ImageError> {
        if frames.is_empty() {
            return Err(ImageError::EmptySequence);
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(ImageError::InvalidFps(fps));
        }
        if let Some(i) = frames.iter().position(|f| !f.same_geometry(&frames[0])) {
            return Err(ImageError::HeterogeneousFrame(i));
        }
        Ok(Self { frames, fps })
    }

    #[inline]
    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    #[inline]
    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn format(&self) -> ColorFormat {
        self.frames[0].format()
    }

    /// Applies a fallible per-frame transform, keeping the frame rate.
    pub fn try_map<F, E>(&self, f: F) -> Result<VideoSequence, E>
    where
        F: FnMut(&Frame) -> Result<Frame, E>,
        E: From<ImageError>,
    {
        let frames = self.frames.iter().map(f).collect::<Result<Vec<_>, E>>()?;
        Ok(VideoSequence::new(frames, self.fps)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_rejects_bad_sample_count() {
        assert!(matches!(
            Plane::new(2, 2, vec![0; 3]),
            Err(ImageError::SampleCount { expected: 4, actual: 3 })
        ));
        assert!(matches!(Plane::new(0, 2, vec![]), Err(ImageError::EmptyPlane)));
    }

    #[test]
    fn yuv420_geometry_is_checked() {
        let y = Plane::filled(4, 4, 0).unwrap();
        let c = Plane::filled(2, 2, 128).unwrap();
        assert!(Frame::new(ColorFormat::Yuv420, vec![y.clone(), c.clone(), c.clone()]).is_ok());
        let bad = Plane::filled(4, 4, 128).unwrap();
        assert!(matches!(
            Frame::new(ColorFormat::Yuv420, vec![y, bad, c]),
            Err(ImageError::PlaneGeometry(_))
        ));
        let odd = Plane::filled(3, 4, 0).unwrap();
        let c1 = Plane::filled(1, 2, 0).unwrap();
        assert!(matches!(
            Frame::new(ColorFormat::Yuv420, vec![odd, c1.clone(), c1]),
            Err(ImageError::OddDimensions { .. })
        ));
    }

    #[test]
    fn plane_count_follows_format() {
        let p = Plane::filled(2, 2, 0).unwrap();
        assert!(Frame::new(ColorFormat::Gray, vec![p.clone(), p.clone()]).is_err());
        assert!(Frame::new(ColorFormat::Rgb444, vec![p]).is_err());
    }

    #[test]
    fn interleave_round_trip() {
        let rgb: Vec<u8> = (0..2 * 3 * 3).map(|v| v as u8).collect();
        let f = Frame::from_rgb_interleaved(3, 2, &rgb).unwrap();
        assert_eq!(f.planes()[1].get(1, 0), 4);
        assert_eq!(f.to_rgb_interleaved().unwrap(), rgb);
    }

    #[test]
    fn sequence_must_be_homogeneous() {
        let a = Frame::filled(ColorFormat::Rgb444, 4, 4, 1).unwrap();
        let b = Frame::filled(ColorFormat::Rgb444, 4, 2, 1).unwrap();
        assert!(matches!(
            VideoSequence::new(vec![a.clone(), b], 30.0),
            Err(ImageError::HeterogeneousFrame(1))
        ));
        assert!(matches!(
            VideoSequence::new(vec![], 30.0),
            Err(ImageError::EmptySequence)
        ));
        assert!(matches!(
            VideoSequence::new(vec![a], 0.0),
            Err(ImageError::InvalidFps(_))
        ));
    }
}
