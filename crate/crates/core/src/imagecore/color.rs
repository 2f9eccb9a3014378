//! BT.601 full-range RGB <-> YCbCr 4:2:0.
//!
//! Chroma is computed at full resolution, averaged over each 2x2 block on the
//! way down, and replicated (nearest neighbour) on the way up.

use super::{quantize_sample, ColorFormat, Frame, ImageError, Plane};

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;
const CB_SCALE: f64 = 0.564;
const CR_SCALE: f64 = 0.713;

pub fn rgb_to_yuv420(frame: &Frame) -> Result<Frame, ImageError> {
    if frame.format() != ColorFormat::Rgb444 {
        return Err(ImageError::UnsupportedFormat {
            op: "rgb_to_yuv420",
            format: frame.format(),
        });
    }
    let (w, h) = (frame.width(), frame.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(ImageError::OddDimensions { width: w, height: h });
    }
    let [r, g, b] = [0, 1, 2].map(|i| frame.planes()[i].data());

    let mut luma = Vec::with_capacity(w * h);
    let mut cb_full = Vec::with_capacity(w * h);
    let mut cr_full = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let (r, g, b) = (r[i] as f64, g[i] as f64, b[i] as f64);
        let y = KR * r + KG * g + KB * b;
        luma.push(quantize_sample(y));
        cb_full.push(128.0 + (b - y) * CB_SCALE);
        cr_full.push(128.0 + (r - y) * CR_SCALE);
    }

    let (cw, ch) = (w / 2, h / 2);
    let down = |full: &[f64]| -> Vec<u8> {
        let mut out = Vec::with_capacity(cw * ch);
        for cy in 0..ch {
            for cx in 0..cw {
                let i = 2 * cy * w + 2 * cx;
                let sum = full[i] + full[i + 1] + full[i + w] + full[i + w + 1];
                out.push(quantize_sample(sum / 4.0));
            }
        }
        out
    };

    Frame::new(
        ColorFormat::Yuv420,
        vec![
            Plane::new(w, h, luma)?,
            Plane::new(cw, ch, down(&cb_full))?,
            Plane::new(cw, ch, down(&cr_full))?,
        ],
    )
}

pub fn yuv420_to_rgb(frame: &Frame) -> Result<Frame, ImageError> {
    if frame.format() != ColorFormat::Yuv420 {
        return Err(ImageError::UnsupportedFormat {
            op: "yuv420_to_rgb",
            format: frame.format(),
        });
    }
    let (w, h) = (frame.width(), frame.height());
    let [yp, up, vp] = [0, 1, 2].map(|i| &frame.planes()[i]);

    let mut r = Vec::with_capacity(w * h);
    let mut g = Vec::with_capacity(w * h);
    let mut b = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let luma = yp.get(x, y) as f64;
            let cb = up.get(x / 2, y / 2) as f64 - 128.0;
            let cr = vp.get(x / 2, y / 2) as f64 - 128.0;
            let rf = luma + cr / CR_SCALE;
            let bf = luma + cb / CB_SCALE;
            let gf = (luma - KR * rf - KB * bf) / KG;
            r.push(quantize_sample(rf));
            g.push(quantize_sample(gf));
            b.push(quantize_sample(bf));
        }
    }
    Frame::new(
        ColorFormat::Rgb444,
        vec![Plane::new(w, h, r)?, Plane::new(w, h, g)?, Plane::new(w, h, b)?],
    )
}
