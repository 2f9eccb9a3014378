//! Orthonormal 8x8 DCT-II and the JPEG zigzag scan.

use std::sync::OnceLock;

pub(crate) const N: usize = 8;

type Matrix = [[f64; N]; N];

/// Row `u` holds basis function `u`: `c(u) * cos((2x + 1) * u * pi / 16)`.
fn basis() -> &'static Matrix {
    static BASIS: OnceLock<Matrix> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; N]; N];
        for (u, row) in m.iter_mut().enumerate() {
            let c = if u == 0 {
                (1.0 / N as f64).sqrt()
            } else {
                (2.0 / N as f64).sqrt()
            };
            for (x, v) in row.iter_mut().enumerate() {
                *v = c * (((2 * x + 1) * u) as f64 * std::f64::consts::PI / (2 * N) as f64).cos();
            }
        }
        m
    })
}

pub(crate) fn forward(block: &Matrix) -> Matrix {
    let c = basis();
    // rows first, then columns: F = C B C^T
    let mut tmp = [[0.0; N]; N];
    for y in 0..N {
        for u in 0..N {
            tmp[y][u] = (0..N).map(|x| c[u][x] * block[y][x]).sum();
        }
    }
    let mut out = [[0.0; N]; N];
    for v in 0..N {
        for u in 0..N {
            out[v][u] = (0..N).map(|y| c[v][y] * tmp[y][u]).sum();
        }
    }
    out
}

pub(crate) fn inverse(coefs: &Matrix) -> Matrix {
    let c = basis();
    let mut tmp = [[0.0; N]; N];
    for v in 0..N {
        for x in 0..N {
            tmp[v][x] = (0..N).map(|u| c[u][x] * coefs[v][u]).sum();
        }
    }
    let mut out = [[0.0; N]; N];
    for y in 0..N {
        for x in 0..N {
            out[y][x] = (0..N).map(|v| c[v][y] * tmp[v][x]).sum();
        }
    }
    out
}

/// Zigzag position -> raster index (`row * 8 + col`).
pub(crate) fn zigzag() -> &'static [usize; N * N] {
    static ZIGZAG: OnceLock<[usize; N * N]> = OnceLock::new();
    ZIGZAG.get_or_init(|| {
        let mut order = [0usize; N * N];
        let mut k = 0;
        for s in 0..(2 * N - 1) {
            let lo = s.saturating_sub(N - 1);
            let hi = s.min(N - 1);
            if s % 2 == 0 {
                // up-right: row decreasing
                for row in (lo..=hi).rev() {
                    order[k] = row * N + (s - row);
                    k += 1;
                }
            } else {
                for row in lo..=hi {
                    order[k] = row * N + (s - row);
                    k += 1;
                }
            }
        }
        order
    })
}
