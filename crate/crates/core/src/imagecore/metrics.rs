use super::{Frame, ImageError};

/// Histogram entropy in bits per sample, pooled over all planes.
pub fn shannon_entropy(frame: &Frame) -> f64 {
    let mut hist = [0u64; 256];
    for v in frame.samples() {
        hist[v as usize] += 1;
    }
    entropy_of_counts(&hist)
}

/// Entropy of a count histogram. Counts are summed in sorted order so that
/// histograms that are permutations of each other give bit-identical results.
pub(crate) fn entropy_of_counts(counts: &[u64]) -> f64 {
    let mut nonzero: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    if nonzero.len() <= 1 {
        return 0.0;
    }
    nonzero.sort_unstable();
    let total: u64 = nonzero.iter().sum();
    let total = total as f64;
    let h: f64 = nonzero
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    h.clamp(0.0, 8.0)
}

/// Peak signal-to-noise ratio over all samples of all planes, in dB.
/// Identical inputs give `f64::INFINITY`.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64, ImageError> {
    if !a.same_geometry(b) {
        return Err(ImageError::DimensionMismatch);
    }
    let (sse, n) = squared_error(a, b);
    Ok(psnr_from_sse(sse, n))
}

pub(crate) fn squared_error(a: &Frame, b: &Frame) -> (u64, u64) {
    let sse = a
        .samples()
        .zip(b.samples())
        .map(|(x, y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    (sse, a.sample_count() as u64)
}

pub(crate) fn psnr_from_sse(sse: u64, n: u64) -> f64 {
    if sse == 0 {
        return f64::INFINITY;
    }
    let mse = sse as f64 / n as f64;
    10.0 * (255.0f64 * 255.0 / mse).log10()
}
