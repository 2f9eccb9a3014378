//! Deterministic synthetic content: textured backgrounds with moving shapes
//! (plus their ground-truth boxes), and single frames with assorted
//! statistics for property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detmetrics::{BoundingBox, GroundTruthBox};
use crate::imagecore::{quantize_sample, Frame, VideoSequence};

/// Class ids used for generated objects.
pub const CLASS_RECT: u32 = 0;
pub const CLASS_ELLIPSE: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub shapes: usize,
    pub fps: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SyntheticSequence {
    pub name: String,
    pub sequence: VideoSequence,
    pub objects: Vec<GroundTruthBox>,
}

/// The generator every function here is driven by.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Multi-octave value noise in roughly `[0, 1]`, sampled on a `w x h` grid.
pub fn value_noise(w: usize, h: usize, base_cell: f64, octaves: u32, rng: &mut impl Rng) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    let mut amp = 1.0;
    let mut cell = base_cell;
    let mut total = 0.0;
    for _ in 0..octaves {
        let gw = (w as f64 / cell).ceil() as usize + 2;
        let gh = (h as f64 / cell).ceil() as usize + 2;
        let grid: Vec<f64> = (0..gw * gh).map(|_| rng.random::<f64>()).collect();
        for y in 0..h {
            let fy = y as f64 / cell;
            let (gy, ty) = (fy.floor() as usize, fy.fract());
            let ty = ty * ty * (3.0 - 2.0 * ty);
            for x in 0..w {
                let fx = x as f64 / cell;
                let (gx, tx) = (fx.floor() as usize, fx.fract());
                let tx = tx * tx * (3.0 - 2.0 * tx);
                let g = |i: usize, j: usize| grid[j * gw + i];
                let top = g(gx, gy) * (1.0 - tx) + g(gx + 1, gy) * tx;
                let bottom = g(gx, gy + 1) * (1.0 - tx) + g(gx + 1, gy + 1) * tx;
                out[y * w + x] += amp * (top * (1.0 - ty) + bottom * ty);
            }
        }
        total += amp;
        amp *= 0.5;
        cell = (cell / 2.0).max(1.0);
    }
    out.iter_mut().for_each(|v| *v /= total);
    out
}

fn rgb_from_fn(w: usize, h: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Frame {
    let mut rgb = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            rgb.extend(f(x, y).map(quantize_sample));
        }
    }
    Frame::from_rgb_interleaved(w, h, &rgb).expect("consistent size")
}

pub fn noise_frame(w: usize, h: usize, rng: &mut impl Rng) -> Frame {
    rgb_from_fn(w, h, |_, _| [0; 3].map(|_| rng.random_range(0..=255) as f64))
}

pub fn gradient_frame(w: usize, h: usize, rng: &mut impl Rng) -> Frame {
    let dir: [(f64, f64); 3] = std::array::from_fn(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let base: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..255.0));
    let span = rng.random_range(20.0..255.0);
    rgb_from_fn(w, h, |x, y| {
        let (u, v) = (x as f64 / w as f64, y as f64 / h as f64);
        std::array::from_fn(|c| base[c] + span * (dir[c].0 * u + dir[c].1 * v))
    })
}

/// Colored fractal texture with a random tint and contrast.
pub fn texture_frame(w: usize, h: usize, rng: &mut impl Rng) -> Frame {
    let cell = rng.random_range(4.0..24.0);
    let noise = value_noise(w, h, cell, 4, rng);
    let tint: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.4..1.0));
    let offset: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..60.0));
    let gain = rng.random_range(120.0..300.0);
    rgb_from_fn(w, h, |x, y| {
        let n = noise[y * w + x];
        std::array::from_fn(|c| offset[c] + gain * tint[c] * n)
    })
}

/// A mix of noise, gradient and texture frames of assorted sizes.
pub fn property_frames(count: usize, seed: u64) -> Vec<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let w = rng.random_range(4..=48);
            let h = rng.random_range(4..=48);
            match i % 3 {
                0 => noise_frame(w, h, &mut rng),
                1 => gradient_frame(w, h, &mut rng),
                _ => texture_frame(w, h, &mut rng),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Shape {
    class: u32,
    w: f64,
    h: f64,
    x0: f64,
    y0: f64,
    vx: f64,
    vy: f64,
    color: [f64; 3],
}

impl Shape {
    fn position(&self, t: usize, fw: f64, fh: f64) -> (f64, f64) {
        // bounce inside the frame
        let fold = |p: f64, span: f64| {
            if span <= 0.0 {
                return 0.0;
            }
            let m = p.rem_euclid(2.0 * span);
            if m > span {
                2.0 * span - m
            } else {
                m
            }
        };
        (
            fold(self.x0 + self.vx * t as f64, fw - self.w),
            fold(self.y0 + self.vy * t as f64, fh - self.h),
        )
    }

    fn covers(&self, px: f64, py: f64, x: f64, y: f64) -> bool {
        match self.class {
            CLASS_RECT => px >= x && px < x + self.w && py >= y && py < y + self.h,
            _ => {
                let (cx, cy) = (x + self.w / 2.0, y + self.h / 2.0);
                let (dx, dy) = ((px - cx) / (self.w / 2.0), (py - cy) / (self.h / 2.0));
                dx * dx + dy * dy <= 1.0
            }
        }
    }
}

/// Shapes moving over a slowly drifting texture. Ground truth holds the
/// bounding box of every shape in every frame.
pub fn moving_shapes(spec: &SceneSpec) -> SyntheticSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h) = (spec.width, spec.height);
    let (fw, fh) = (w as f64, h as f64);
    let pad = 16;
    let noise = value_noise(w + pad, h + pad, rng.random_range(6.0..20.0), 4, &mut rng);
    let tint: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.5..1.0));
    let base: [f64; 3] = std::array::from_fn(|_| rng.random_range(10.0..70.0));
    let gain = rng.random_range(120.0..200.0);

    let shapes: Vec<Shape> = (0..spec.shapes)
        .map(|i| {
            let sw = rng.random_range(fw * 0.15..fw * 0.35);
            let sh = rng.random_range(fh * 0.15..fh * 0.35);
            Shape {
                class: if i % 2 == 0 { CLASS_RECT } else { CLASS_ELLIPSE },
                w: sw,
                h: sh,
                x0: rng.random_range(0.0..fw - sw),
                y0: rng.random_range(0.0..fh - sh),
                vx: rng.random_range(-2.5..2.5),
                vy: rng.random_range(-2.5..2.5),
                color: std::array::from_fn(|_| rng.random_range(0.0..255.0)),
            }
        })
        .collect();

    let mut frames = Vec::with_capacity(spec.frames);
    let mut objects = Vec::new();
    for t in 0..spec.frames {
        let shift = t % pad;
        let placed: Vec<(Shape, f64, f64)> = shapes
            .iter()
            .map(|s| {
                let (x, y) = s.position(t, fw, fh);
                (*s, x, y)
            })
            .collect();
        let frame = rgb_from_fn(w, h, |x, y| {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            // later shapes are drawn on top
            if let Some((s, _, _)) = placed.iter().rev().find(|(s, sx, sy)| s.covers(px, py, *sx, *sy)) {
                return s.color;
            }
            let n = noise[y * (w + pad) + x + shift];
            std::array::from_fn(|c| base[c] + gain * tint[c] * n)
        });
        frames.push(frame);
        for (s, x, y) in placed {
            objects.push(GroundTruthBox {
                frame_id: t as u64,
                class_id: s.class,
                bbox: BoundingBox::new(x, y, s.w, s.h).expect("positive extent"),
            });
        }
    }
    SyntheticSequence {
        name: format!("shapes_{}x{}_s{}", w, h, spec.seed),
        sequence: VideoSequence::new(frames, spec.fps).expect("homogeneous frames"),
        objects,
    }
}

/// Six small sequences (64x64 to 128x128, 10 to 30 frames).
pub fn desk_corpus() -> Vec<SyntheticSequence> {
    const SCENES: [(usize, usize, usize, usize); 6] = [
        (64, 64, 10, 2),
        (96, 64, 12, 3),
        (64, 96, 16, 2),
        (128, 128, 10, 4),
        (112, 80, 20, 3),
        (80, 112, 30, 2),
    ];
    SCENES
        .iter()
        .enumerate()
        .map(|(i, &(width, height, frames, shapes))| {
            moving_shapes(&SceneSpec {
                width,
                height,
                frames,
                shapes,
                fps: 30.0,
                seed: 1000 + i as u64,
            })
        })
        .collect()
}
