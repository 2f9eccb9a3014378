//! Detection accuracy (IoU, AP at a fixed IoU threshold, mAP) and
//! rate-distortion curve comparison (Bjøntegaard delta rate).

mod ap;
mod bd;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ap::{average_precision, evaluate, match_detections, mean_ap, ApReport, MatchResult, Matched};
pub use bd::{bd_rate, bd_rate_by, bd_rate_points};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;
pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("box extents must be positive and finite, got {w}x{h}")]
    InvalidBox { w: f64, h: f64 },
    #[error("score must lie in [0, 1], got {0}")]
    InvalidScore(f64),
    #[error("threshold must lie in [0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("mean AP over an empty class set")]
    EmptyApMap,
    #[error("insufficient points: curve `{label}` has {points}, BD-rate needs at least 4")]
    InsufficientPoints { label: String, points: usize },
    #[error("quality ranges of the two curves do not overlap")]
    DisjointQuality,
    #[error("cubic fit is singular (repeated quality values in `{0}`)")]
    SingularFit(String),
    #[error("point qp={qp} of curve `{label}` lacks a {metric} value")]
    MissingMetric {
        label: String,
        qp: u8,
        metric: &'static str,
    },
    #[error("rate and quality values must be finite with positive rate")]
    NonFinite,
}

/// Axis-aligned box: top-left corner plus positive width and height, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self, MetricsError> {
        let ok = x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0;
        if !ok {
            return Err(MetricsError::InvalidBox { w, h });
        }
        Ok(Self { x, y, w, h })
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    /// Area from corner differences, so that a box intersected with itself
    /// yields exactly its own area.
    pub fn area(&self) -> f64 {
        (self.right() - self.x) * (self.bottom() - self.y)
    }
}

/// Intersection over union; 0 for disjoint boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = a.right().min(b.right()) - a.x.max(b.x);
    let ih = a.bottom().min(b.bottom()) - a.y.max(b.y);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub frame_id: u64,
    pub class_id: u32,
    pub bbox: BoundingBox,
    pub score: f64,
}

impl Detection {
    pub fn new(frame_id: u64, class_id: u32, bbox: BoundingBox, score: f64) -> Result<Self, MetricsError> {
        if !(0.0..=1.0).contains(&score) {
            return Err(MetricsError::InvalidScore(score));
        }
        Ok(Self {
            frame_id,
            class_id,
            bbox,
            score,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthBox {
    pub frame_id: u64,
    pub class_id: u32,
    pub bbox: BoundingBox,
}

/// Keeps detections scoring at or above `threshold`, preserving order.
pub fn filter_by_confidence(dets: &[Detection], threshold: f64) -> Vec<Detection> {
    dets.iter().filter(|d| d.score >= threshold).copied().collect()
}

/// Quality axis of a rate-distortion curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QualityMetric {
    Map,
    Psnr,
}

impl QualityMetric {
    pub fn name(self) -> &'static str {
        match self {
            QualityMetric::Map => "mAP",
            QualityMetric::Psnr => "PSNR",
        }
    }

    pub fn of(self, p: &RDPoint) -> Option<f64> {
        match self {
            QualityMetric::Map => p.map,
            QualityMetric::Psnr => p.psnr_db,
        }
    }
}

/// One coded operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct RDPoint {
    pub qp: u8,
    pub bitrate_kbps: f64,
    pub psnr_db: Option<f64>,
    pub map: Option<f64>,
    pub per_class_ap: BTreeMap<u32, f64>,
}

impl RDPoint {
    pub fn new(qp: u8, bitrate_kbps: f64) -> Self {
        Self {
            qp,
            bitrate_kbps,
            psnr_db: None,
            map: None,
            per_class_ap: BTreeMap::new(),
        }
    }
}

/// A labelled set of operating points kept in ascending bitrate order
/// (ties broken by QP).
#[derive(Debug, Clone, PartialEq)]
pub struct RDCurve {
    pub label: String,
    points: Vec<RDPoint>,
}

impl RDCurve {
    pub fn new(label: impl Into<String>, mut points: Vec<RDPoint>) -> Self {
        points.sort_by(|a, b| a.bitrate_kbps.total_cmp(&b.bitrate_kbps).then(a.qp.cmp(&b.qp)));
        Self {
            label: label.into(),
            points,
        }
    }

    pub fn points(&self) -> &[RDPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_metric(&self, metric: QualityMetric) -> bool {
        !self.points.is_empty() && self.points.iter().all(|p| metric.of(p).is_some())
    }

    /// `(rate, quality)` pairs for the given metric.
    pub fn samples(&self, metric: QualityMetric) -> Result<Vec<(f64, f64)>, MetricsError> {
        self.points
            .iter()
            .map(|p| {
                metric
                    .of(p)
                    .map(|q| (p.bitrate_kbps, q))
                    .ok_or_else(|| MetricsError::MissingMetric {
                        label: self.label.clone(),
                        qp: p.qp,
                        metric: metric.name(),
                    })
            })
            .collect()
    }
}
