use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::annotations::json_error;
use super::{io_err, read_image_dir, read_yuv420, DataError};
use crate::codec::{CodecConfig, MAX_QP};
use crate::detmetrics::{DEFAULT_CONFIDENCE_THRESHOLD, DEFAULT_IOU_THRESHOLD};
use crate::imagecore::{ContrastParams, VideoSequence};

pub const DEFAULT_SCALE: f64 = 0.5;
pub const DEFAULT_IMAGE_DIR_FPS: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Yuv420,
    ImageDir,
}

/// Where the input sequence comes from. Raw YUV needs explicit geometry and
/// frame rate; image directories default to 30 fps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSource {
    pub kind: SourceKind,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_limit: Option<usize>,
}

impl SequenceSource {
    pub fn image_dir(path: impl Into<PathBuf>) -> Self {
        Self {
            kind: SourceKind::ImageDir,
            path: path.into(),
            width: None,
            height: None,
            fps: None,
            frame_limit: None,
        }
    }

    pub fn yuv420(path: impl Into<PathBuf>, width: usize, height: usize, fps: f64) -> Self {
        Self {
            kind: SourceKind::Yuv420,
            path: path.into(),
            width: Some(width),
            height: Some(height),
            fps: Some(fps),
            frame_limit: None,
        }
    }

    pub fn fps(&self) -> f64 {
        self.fps.unwrap_or(DEFAULT_IMAGE_DIR_FPS)
    }

    fn validate(&self) -> Result<(), String> {
        if let Some(fps) = self.fps {
            if !(fps.is_finite() && fps > 0.0) {
                return Err(format!("source.fps must be positive, got {fps}"));
            }
        }
        if self.frame_limit == Some(0) {
            return Err("source.frame_limit must be at least 1".into());
        }
        if self.kind == SourceKind::Yuv420 {
            let (Some(w), Some(h), Some(_)) = (self.width, self.height, self.fps) else {
                return Err("yuv420 source needs width, height and fps".into());
            };
            if w == 0 || h == 0 || w % 2 != 0 || h % 2 != 0 {
                return Err(format!("yuv420 source needs even nonzero dimensions, got {w}x{h}"));
            }
        }
        Ok(())
    }

    pub fn load(&self) -> Result<VideoSequence, DataError> {
        match self.kind {
            SourceKind::Yuv420 => read_yuv420(
                &self.path,
                self.width.unwrap_or(0),
                self.height.unwrap_or(0),
                self.fps(),
                self.frame_limit,
            ),
            SourceKind::ImageDir => {
                let seq = read_image_dir(&self.path, self.fps())?;
                match self.frame_limit {
                    Some(n) if n < seq.len() => {
                        let fps = seq.fps();
                        let frames = seq.into_frames().into_iter().take(n).collect();
                        Ok(VideoSequence::new(frames, fps)?)
                    }
                    _ => Ok(seq),
                }
            }
        }
    }
}

fn default_alpha() -> f64 {
    ContrastParams::DEFAULT_ALPHA
}
fn default_scale() -> f64 {
    DEFAULT_SCALE
}
fn default_qp_proposed() -> Vec<u8> {
    (32..=45).collect()
}
fn default_qp_anchor() -> Vec<u8> {
    (35..=47).collect()
}
fn default_confidence() -> f64 {
    DEFAULT_CONFIDENCE_THRESHOLD
}
fn default_iou() -> f64 {
    DEFAULT_IOU_THRESHOLD
}

/// A full proposed-vs-anchor experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: SequenceSource,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Per-axis downsampling factor before coding.
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default = "default_qp_proposed")]
    pub qp_list_proposed: Vec<u8>,
    #[serde(default = "default_qp_anchor")]
    pub qp_list_anchor: Vec<u8>,
    #[serde(default)]
    pub codec: CodecConfig,
    #[serde(default = "default_confidence")]
    pub confidence_threshold: f64,
    #[serde(default = "default_iou")]
    pub iou_threshold: f64,
    pub annotations: PathBuf,
    /// Holds `<kind>/qpNN.json` detection files, one per coded run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detections_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(source: SequenceSource, annotations: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            source,
            alpha: default_alpha(),
            scale: default_scale(),
            qp_list_proposed: default_qp_proposed(),
            qp_list_anchor: default_qp_anchor(),
            codec: CodecConfig::default(),
            confidence_threshold: default_confidence(),
            iou_threshold: default_iou(),
            annotations: annotations.into(),
            detections_dir: None,
            output_dir: output_dir.into(),
        }
    }

    pub fn contrast(&self) -> ContrastParams {
        ContrastParams::new(self.alpha).expect("validated alpha")
    }

    /// Checks every constraint; the error string names the offending field.
    pub fn validate(&self) -> Result<(), String> {
        self.source.validate()?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(format!("scale must lie in (0, 1], got {}", self.scale));
        }
        for (name, list) in [
            ("qp_list_proposed", &self.qp_list_proposed),
            ("qp_list_anchor", &self.qp_list_anchor),
        ] {
            if list.is_empty() {
                return Err(format!("{name} must not be empty"));
            }
            if let Some(qp) = list.iter().find(|&&q| q > MAX_QP) {
                return Err(format!("{name} contains qp {qp} > {MAX_QP}"));
            }
        }
        for (name, v) in [
            ("confidence_threshold", self.confidence_threshold),
            ("iou_threshold", self.iou_threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        self.codec.validate().map_err(|e| e.to_string())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.source.path);
        fix(&mut self.annotations);
        fix(&mut self.output_dir);
        if let Some(d) = self.detections_dir.as_mut() {
            fix(d);
        }
    }
}

/// Parses and validates an experiment config. Relative paths are taken
/// relative to the config file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, DataError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| match json_error(path, e) {
        DataError::Schema { path, message } if message.starts_with("unknown field") => {
            DataError::UnknownKey { path, message }
        }
        DataError::Schema { path, message } if message.starts_with("missing field") => {
            DataError::Schema { path, message }
        }
        DataError::Schema { path, message } => DataError::TypeMismatch { path, message },
        other => other,
    })?;
    cfg.validate().map_err(|message| DataError::Constraint {
        path: path.to_path_buf(),
        message,
    })?;
    if let Some(base) = path.parent() {
        cfg.resolve_paths(base);
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<ExperimentConfig, DataError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, text).unwrap();
        load_config(&path)
    }

    const MINIMAL: &str =
        r#"{"source":{"kind":"image_dir","path":"frames"},"annotations":"gt.json","output_dir":"out"}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = load(MINIMAL).unwrap();
        assert_eq!(c.alpha, 0.25);
        assert_eq!(c.scale, 0.5);
        assert_eq!(c.iou_threshold, 0.5);
        assert_eq!(c.confidence_threshold, 0.25);
        assert_eq!(c.qp_list_proposed, (32..=45).collect::<Vec<u8>>());
        assert_eq!(c.qp_list_anchor, (35..=47).collect::<Vec<u8>>());
        assert_eq!(c.codec, CodecConfig::default());
        assert!(c.output_dir.is_absolute());
        assert_eq!(c.source.fps(), 30.0);
    }

    #[test]
    fn error_kinds() {
        let with = |extra: &str| MINIMAL.replacen('{', &format!("{{{extra},"), 1);
        assert!(matches!(load(&with(r#""scale":0"#)), Err(DataError::Constraint { .. })));
        assert!(matches!(
            load(&with(r#""qp_list_anchor":[]"#)),
            Err(DataError::Constraint { .. })
        ));
        assert!(matches!(
            load(&with(r#""qp_list_anchor":[64]"#)),
            Err(DataError::Constraint { .. })
        ));
        assert!(matches!(
            load(&with(r#""alpha":"high""#)),
            Err(DataError::TypeMismatch { .. })
        ));
        assert!(matches!(
            load(&with(r#""colour":1"#)),
            Err(DataError::UnknownKey { .. })
        ));
        assert!(matches!(load("{"), Err(DataError::MalformedJson { .. })));
        assert!(matches!(
            load(r#"{"source":{"kind":"image_dir","path":"x"}}"#),
            Err(DataError::Schema { .. })
        ));
        let yuv_no_dims = r#"{"source":{"kind":"yuv420","path":"a.yuv"},"annotations":"g","output_dir":"o"}"#;
        assert!(matches!(load(yuv_no_dims), Err(DataError::Constraint { .. })));
        let ext_no_output = with(
            r#""codec":{"kind":"external","external":{"encode_template":"enc {input}","decode_template":"dec {input} {output}"}}"#,
        );
        assert!(matches!(load(&ext_no_output), Err(DataError::Constraint { .. })));
    }
}
