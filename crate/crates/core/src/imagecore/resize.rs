use super::{quantize_sample, ColorFormat, Frame, ImageError, Plane};

const CUBIC_A: f64 = -0.5;

/// Catmull-Rom cubic convolution kernel (Keys, `a = -0.5`).
#[inline]
pub fn catmull_rom(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        ((CUBIC_A + 2.0) * x - (CUBIC_A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((CUBIC_A * x - 5.0 * CUBIC_A) * x + 8.0 * CUBIC_A) * x - 4.0 * CUBIC_A
    } else {
        0.0
    }
}

/// Four clamped source taps and their weights for one output coordinate.
#[derive(Debug, Clone, Copy)]
struct Taps {
    index: [usize; 4],
    weight: [f64; 4],
}

fn axis_taps(in_size: usize, out_size: usize) -> Vec<Taps> {
    let ratio = in_size as f64 / out_size as f64;
    let last = in_size as isize - 1;
    (0..out_size)
        .map(|dst| {
            let src = (dst as f64 + 0.5) * ratio - 0.5;
            let base = src.floor();
            let frac = src - base;
            let base = base as isize;
            let mut taps = Taps {
                index: [0; 4],
                weight: [0.0; 4],
            };
            for k in 0..4 {
                let offset = k as isize - 1;
                taps.index[k] = (base + offset).clamp(0, last) as usize;
                taps.weight[k] = catmull_rom(frac - offset as f64);
            }
            taps
        })
        .collect()
}

/// Separable bicubic resampling of one plane. Out-of-range taps clamp to the
/// nearest edge sample.
#[allow(clippy::needless_range_loop)]
pub fn resize_plane(plane: &Plane, out_w: usize, out_h: usize) -> Result<Plane, ImageError> {
    if out_w == 0 || out_h == 0 {
        return Err(ImageError::ZeroDimensions {
            width: out_w,
            height: out_h,
        });
    }
    let (in_w, in_h) = (plane.width(), plane.height());
    let xtaps = axis_taps(in_w, out_w);
    let ytaps = axis_taps(in_h, out_h);

    // horizontal pass, kept in full precision
    let mut tmp = vec![0.0f64; in_h * out_w];
    for (row, out_row) in plane.rows().zip(tmp.chunks_exact_mut(out_w)) {
        for (o, t) in out_row.iter_mut().zip(&xtaps) {
            *o = (0..4).map(|k| t.weight[k] * row[t.index[k]] as f64).sum();
        }
    }

    let mut out = Vec::with_capacity(out_w * out_h);
    for t in &ytaps {
        let rows = t.index.map(|i| &tmp[i * out_w..(i + 1) * out_w]);
        for x in 0..out_w {
            let v: f64 = (0..4).map(|k| t.weight[k] * rows[k][x]).sum();
            out.push(quantize_sample(v));
        }
    }
    Plane::new(out_w, out_h, out)
}

/// Resizes every plane of a GRAY, RGB444 or YUV444 frame to `out_w x out_h`.
pub fn bicubic_resize(frame: &Frame, out_w: usize, out_h: usize) -> Result<Frame, ImageError> {
    if frame.format() == ColorFormat::Yuv420 {
        return Err(ImageError::UnsupportedFormat {
            op: "bicubic_resize",
            format: frame.format(),
        });
    }
    let planes = frame
        .planes()
        .iter()
        .map(|p| resize_plane(p, out_w, out_h))
        .collect::<Result<Vec<_>, _>>()?;
    Frame::new(frame.format(), planes)
}

/// Plane-wise resize that also handles 4:2:0: luma goes to `out_w x out_h`,
/// chroma to half of that (so the target must be even).
pub fn bicubic_resize_planewise(frame: &Frame, out_w: usize, out_h: usize) -> Result<Frame, ImageError> {
    if frame.format() != ColorFormat::Yuv420 {
        return bicubic_resize(frame, out_w, out_h);
    }
    if !out_w.is_multiple_of(2) || !out_h.is_multiple_of(2) {
        return Err(ImageError::OddDimensions {
            width: out_w,
            height: out_h,
        });
    }
    let planes = frame
        .planes()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if i == 0 {
                resize_plane(p, out_w, out_h)
            } else {
                resize_plane(p, out_w / 2, out_h / 2)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Frame::new(ColorFormat::Yuv420, planes)
}
