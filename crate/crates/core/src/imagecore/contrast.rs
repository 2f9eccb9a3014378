use super::{color, quantize_sample, ColorFormat, Frame, ImageError, Plane};

/// Blend ratio toward the global mean. `alpha = 0` leaves a frame untouched,
/// `alpha = 1` collapses it to its mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastParams {
    alpha: f64,
}

impl ContrastParams {
    pub const DEFAULT_ALPHA: f64 = 0.25;

    pub fn new(alpha: f64) -> Result<Self, ImageError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ImageError::InvalidAlpha(alpha));
        }
        Ok(Self { alpha })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_identity(&self) -> bool {
        self.alpha == 0.0
    }
}

impl Default for ContrastParams {
    fn default() -> Self {
        Self {
            alpha: Self::DEFAULT_ALPHA,
        }
    }
}

/// Mean over all samples of a three-plane full-resolution frame, i.e. the
/// channel sum divided by `3 * width * height`.
pub fn global_mean(frame: &Frame) -> Result<f64, ImageError> {
    if !frame.format().is_full_resolution_color() {
        return Err(ImageError::UnsupportedFormat {
            op: "global_mean",
            format: frame.format(),
        });
    }
    // exact integer accumulation; the only rounding is the final division
    let sum: u64 = frame
        .planes()
        .iter()
        .flat_map(|p| p.data())
        .map(|&v| u64::from(v))
        .sum();
    let count = 3 * frame.width() * frame.height();
    Ok(sum as f64 / count as f64)
}

/// Blends every sample toward the global mean:
/// `out = clamp(round((1 - alpha) * v + alpha * mean))`.
pub fn contrast_reduce(frame: &Frame, params: ContrastParams) -> Result<Frame, ImageError> {
    let mean = global_mean(frame)?;
    let alpha = params.alpha;
    let offset = alpha * mean;
    // per-value lookup: the map depends only on the sample value
    let lut: [u8; 256] = std::array::from_fn(|v| quantize_sample((1.0 - alpha) * v as f64 + offset));

    let planes = frame
        .planes()
        .iter()
        .map(|p| {
            let data = p.data().iter().map(|&v| lut[v as usize]).collect();
            Plane::new(p.width(), p.height(), data)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Frame::new(frame.format(), planes)
}

/// Contrast reduction for 4:2:0 frames: converted to RGB444, reduced, and
/// converted back. With `alpha = 0` the frame is returned as is, since the
/// blend is the identity and the conversion round trip is not lossless.
pub fn contrast_reduce_yuv420(frame: &Frame, params: ContrastParams) -> Result<Frame, ImageError> {
    if frame.format() != ColorFormat::Yuv420 {
        return Err(ImageError::UnsupportedFormat {
            op: "contrast_reduce_yuv420",
            format: frame.format(),
        });
    }
    if params.is_identity() {
        return Ok(frame.clone());
    }
    let rgb = color::yuv420_to_rgb(frame)?;
    color::rgb_to_yuv420(&contrast_reduce(&rgb, params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rgb1(r: u8, g: u8, b: u8) -> Frame {
        Frame::from_rgb_interleaved(1, 1, &[r, g, b]).unwrap()
    }

    #[test]
    fn mean_of_single_pixel() {
        let m = global_mean(&rgb1(0, 128, 255)).unwrap();
        assert_eq!(m, 383.0 / 3.0);
        let z = Frame::filled(ColorFormat::Rgb444, 2, 2, 0).unwrap();
        assert_eq!(global_mean(&z).unwrap(), 0.0);
        let c = Frame::filled(ColorFormat::Yuv444, 5, 3, 77).unwrap();
        assert_eq!(global_mean(&c).unwrap(), 77.0);
    }

    #[test]
    fn mean_rejects_gray_and_420() {
        let g = Frame::filled(ColorFormat::Gray, 2, 2, 0).unwrap();
        assert!(matches!(global_mean(&g), Err(ImageError::UnsupportedFormat { .. })));
        let y = Frame::filled(ColorFormat::Yuv420, 2, 2, 0).unwrap();
        assert!(global_mean(&y).is_err());
        assert!(contrast_reduce(&y, ContrastParams::default()).is_err());
    }

    #[test]
    fn golden_quarter_alpha() {
        let out = contrast_reduce(&rgb1(0, 128, 255), ContrastParams::new(0.25).unwrap()).unwrap();
        assert_eq!(out.to_rgb_interleaved().unwrap(), vec![32, 128, 223]);
    }

    #[test]
    fn alpha_bounds() {
        assert!(ContrastParams::new(-0.01).is_err());
        assert!(ContrastParams::new(1.01).is_err());
        assert!(ContrastParams::new(f64::NAN).is_err());
        assert_eq!(ContrastParams::default().alpha(), 0.25);
    }

    #[test]
    fn yuv420_identity_at_zero_alpha() {
        let mut f = Frame::filled(ColorFormat::Yuv420, 4, 2, 0).unwrap();
        f.planes_mut()[0]
            .data_mut()
            .copy_from_slice(&[0, 10, 20, 30, 200, 210, 220, 230]);
        let out = contrast_reduce_yuv420(&f, ContrastParams::new(0.0).unwrap()).unwrap();
        assert_eq!(out, f);
        let reduced = contrast_reduce_yuv420(&f, ContrastParams::new(0.5).unwrap()).unwrap();
        assert_eq!(reduced.format(), ColorFormat::Yuv420);
        assert_ne!(reduced, f);
    }

    fn arb_rgb() -> impl Strategy<Value = Frame> {
        (1usize..6, 1usize..6).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), w * h * 3)
                .prop_map(move |s| Frame::from_rgb_interleaved(w, h, &s).unwrap())
        })
    }

    proptest! {
        #[test]
        fn identity_and_collapse(f in arb_rgb()) {
            prop_assert_eq!(&contrast_reduce(&f, ContrastParams::new(0.0).unwrap()).unwrap(), &f);
            let mean = global_mean(&f).unwrap();
            let full = contrast_reduce(&f, ContrastParams::new(1.0).unwrap()).unwrap();
            let expect = mean.round() as u8;
            prop_assert!(full.samples().all(|v| v == expect));
        }

        #[test]
        fn monotone_and_within_hull(f in arb_rgb(), alpha in 0.0f64..=1.0) {
            let out = contrast_reduce(&f, ContrastParams::new(alpha).unwrap()).unwrap();
            let lo = f.samples().min().unwrap();
            let hi = f.samples().max().unwrap();
            let pairs: Vec<(u8, u8)> = f.samples().zip(out.samples()).collect();
            for &(v, o) in &pairs {
                prop_assert!(lo <= o && o <= hi);
                for &(v2, o2) in &pairs {
                    if v <= v2 {
                        prop_assert!(o <= o2);
                    }
                }
            }
        }
    }
}
