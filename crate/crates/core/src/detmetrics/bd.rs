//! Bjøntegaard delta rate: mean log-rate gap between two RD curves over their
//! common quality interval, using a least-squares cubic of `log10(rate)` as a
//! function of quality.

use super::{MetricsError, QualityMetric, RDCurve};

const MIN_POINTS: usize = 4;

/// Cubic in a normalised variable `t = (q - center) / half_width`.
#[derive(Debug, Clone, Copy)]
struct CubicFit {
    coef: [f64; 4],
    center: f64,
    half_width: f64,
}

impl CubicFit {
    fn fit(samples: &[(f64, f64)], label: &str) -> Result<Self, MetricsError> {
        let (lo, hi) = quality_range(samples);
        let center = 0.5 * (lo + hi);
        let half_width = 0.5 * (hi - lo);
        if half_width <= 0.0 {
            return Err(MetricsError::SingularFit(label.to_string()));
        }

        // normal equations A^T A c = A^T y with A = [1 t t^2 t^3]
        let mut m = [[0.0f64; 5]; 4];
        for &(rate, q) in samples {
            let t = (q - center) / half_width;
            let y = rate.log10();
            let pow = [1.0, t, t * t, t * t * t];
            for r in 0..4 {
                for c in 0..4 {
                    m[r][c] += pow[r] * pow[c];
                }
                m[r][4] += pow[r] * y;
            }
        }
        let coef = solve4(m).ok_or_else(|| MetricsError::SingularFit(label.to_string()))?;
        Ok(Self {
            coef,
            center,
            half_width,
        })
    }

    fn antiderivative_t(&self, t: f64) -> f64 {
        let c = &self.coef;
        t * (c[0] + t * (c[1] / 2.0 + t * (c[2] / 3.0 + t * c[3] / 4.0)))
    }

    /// Integral over `[lo, hi]` in quality units.
    fn integral(&self, lo: f64, hi: f64) -> f64 {
        let t = |q: f64| (q - self.center) / self.half_width;
        self.half_width * (self.antiderivative_t(t(hi)) - self.antiderivative_t(t(lo)))
    }
}

/// Gauss-Jordan elimination with partial pivoting on an augmented 4x5 system.
fn solve4(mut m: [[f64; 5]; 4]) -> Option<[f64; 4]> {
    let scale = m.iter().flat_map(|r| r[..4].iter()).fold(0.0f64, |a, v| a.max(v.abs()));
    for col in 0..4 {
        let pivot = (col..4).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() <= scale * 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        let pivot = m[col];
        for (r, row) in m.iter_mut().enumerate() {
            let f = row[col];
            if r != col && f != 0.0 {
                for (v, p) in row.iter_mut().zip(pivot) {
                    *v -= f * p;
                }
            }
        }
    }
    Some([m[0][4], m[1][4], m[2][4], m[3][4]])
}

fn quality_range(samples: &[(f64, f64)]) -> (f64, f64) {
    samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, q)| {
            (lo.min(q), hi.max(q))
        })
}

/// BD-rate in percent of `test` against `anchor` from raw `(rate, quality)`
/// samples. Negative means `test` needs fewer bits for the same quality.
pub fn bd_rate_points(anchor: &[(f64, f64)], test: &[(f64, f64)]) -> Result<f64, MetricsError> {
    bd_rate_labeled(("anchor", anchor), ("test", test))
}

fn bd_rate_labeled(anchor: (&str, &[(f64, f64)]), test: (&str, &[(f64, f64)])) -> Result<f64, MetricsError> {
    for (label, s) in [anchor, test] {
        if s.len() < MIN_POINTS {
            return Err(MetricsError::InsufficientPoints {
                label: label.to_string(),
                points: s.len(),
            });
        }
        if s.iter().any(|&(r, q)| !(r.is_finite() && r > 0.0 && q.is_finite())) {
            return Err(MetricsError::NonFinite);
        }
    }
    let (a_lo, a_hi) = quality_range(anchor.1);
    let (t_lo, t_hi) = quality_range(test.1);
    let lo = a_lo.max(t_lo);
    let hi = a_hi.min(t_hi);
    if hi <= lo {
        return Err(MetricsError::DisjointQuality);
    }
    let fa = CubicFit::fit(anchor.1, anchor.0)?;
    let ft = CubicFit::fit(test.1, test.0)?;
    let avg_diff = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
    Ok(100.0 * (10f64.powf(avg_diff) - 1.0))
}

/// BD-rate on a chosen quality axis.
pub fn bd_rate_by(anchor: &RDCurve, test: &RDCurve, metric: QualityMetric) -> Result<f64, MetricsError> {
    let a = anchor.samples(metric)?;
    let t = test.samples(metric)?;
    bd_rate_labeled((&anchor.label, &a), (&test.label, &t))
}

/// BD-rate with mAP as the quality axis.
pub fn bd_rate(anchor: &RDCurve, test: &RDCurve) -> Result<f64, MetricsError> {
    bd_rate_by(anchor, test, QualityMetric::Map)
}
