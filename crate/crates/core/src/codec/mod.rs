//! The coding stage: a built-in 8x8 DCT intra codec, a driver for external
//! encoder/decoder executables, and bitrate accounting.

mod bits;
mod builtin;
mod dct;
mod external;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::DataError;
use crate::imagecore::{ColorFormat, ImageError, VideoSequence};

pub use builtin::{decode_builtin, encode_builtin, Bitstream, BitstreamHeader, MAGIC, VERSION};
pub use external::{decode_external, encode_external, DecodeGeometry, ExternalOutcome};

pub const MAX_QP: u8 = 63;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("qp {0} outside 0..=63")]
    QpOutOfRange(i64),
    #[error("codec input must be YUV420 or GRAY, got {0:?}")]
    UnsupportedFormat(ColorFormat),
    #[error("bad magic, not a TIC1 stream")]
    BadMagic,
    #[error("unsupported bitstream version {0}")]
    UnsupportedVersion(u8),
    #[error("invalid header: {0}")]
    InvalidHeader(&'static str),
    #[error("bitstream truncated")]
    Truncated,
    #[error("{0} trailing bytes after payload")]
    TrailingData(usize),
    #[error("invalid payload: {0}")]
    InvalidPayload(&'static str),
    #[error("frame count must be at least 1")]
    ZeroFrames,
    #[error("frame rate must be finite and positive, got {0}")]
    InvalidFps(f64),
    #[error("codec config: {0}")]
    Config(String),
    #[error("{stage} command failed ({status}): {stderr}")]
    ProcessFailed {
        stage: &'static str,
        status: String,
        stderr: String,
    },
    #[error("{stage} command timed out after {seconds}s: {stderr}")]
    Timeout {
        stage: &'static str,
        seconds: f64,
        stderr: String,
    },
    #[error("{stage} output {path}: {reason}")]
    BadOutput {
        stage: &'static str,
        path: PathBuf,
        reason: String,
    },
    #[error("i/o on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Data(#[from] DataError),
}

pub(crate) fn validate_qp(qp: i64) -> Result<u8, CodecError> {
    u8::try_from(qp)
        .ok()
        .filter(|&q| q <= MAX_QP)
        .ok_or(CodecError::QpOutOfRange(qp))
}

/// Quantizer step size, doubling every 6 QP: `2^((qp - 4) / 6)`.
pub fn qstep_from_qp(qp: u8) -> Result<f64, CodecError> {
    validate_qp(qp as i64)?;
    Ok(2f64.powf((qp as f64 - 4.0) / 6.0))
}

/// Bitrate in kbps of `total_bytes` spread over `frames` frames at `fps`.
pub fn measure_bitrate(total_bytes: u64, frames: usize, fps: f64) -> Result<f64, CodecError> {
    if frames == 0 {
        return Err(CodecError::ZeroFrames);
    }
    if !(fps.is_finite() && fps > 0.0) {
        return Err(CodecError::InvalidFps(fps));
    }
    Ok(total_bytes as f64 * 8.0 * fps / frames as f64 / 1000.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodingStats {
    pub total_bits: u64,
    pub frames: usize,
    pub bitrate_kbps: f64,
}

impl CodingStats {
    pub fn from_bytes(total_bytes: u64, frames: usize, fps: f64) -> Result<Self, CodecError> {
        Ok(Self {
            total_bits: total_bytes * 8,
            frames,
            bitrate_kbps: measure_bitrate(total_bytes, frames, fps)?,
        })
    }
}

/// Command templates for an external encoder/decoder pair.
///
/// Placeholders: `{input}`, `{output}`, `{qp}`, `{width}`, `{height}`,
/// `{frames}`, `{fps}`. Templates are split shell-style into arguments before
/// substitution and run without a shell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalCodecSpec {
    pub encode_template: String,
    pub decode_template: String,
    #[serde(default = "default_timeout")]
    pub timeout: f64,
}

fn default_timeout() -> f64 {
    3600.0
}

pub(crate) const PLACEHOLDERS: [&str; 7] = ["input", "output", "qp", "width", "height", "frames", "fps"];

impl ExternalCodecSpec {
    pub fn new(encode_template: impl Into<String>, decode_template: impl Into<String>) -> Self {
        Self {
            encode_template: encode_template.into(),
            decode_template: decode_template.into(),
            timeout: default_timeout(),
        }
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        for (name, t) in [("encode", &self.encode_template), ("decode", &self.decode_template)] {
            let args = shlex::split(t)
                .filter(|a| !a.is_empty())
                .ok_or_else(|| CodecError::Config(format!("{name} template is empty or has unbalanced quotes")))?;
            for key in ["{input}", "{output}"] {
                if !t.contains(key) {
                    return Err(CodecError::Config(format!("{name} template lacks {key}")));
                }
            }
            for arg in &args {
                if let Some(unknown) = unknown_placeholder(arg) {
                    return Err(CodecError::Config(format!(
                        "{name} template has unknown placeholder {{{unknown}}}"
                    )));
                }
            }
        }
        if !(self.timeout.is_finite() && self.timeout > 0.0) {
            return Err(CodecError::Config(format!(
                "timeout must be positive, got {}",
                self.timeout
            )));
        }
        Ok(())
    }
}

fn unknown_placeholder(arg: &str) -> Option<&str> {
    let mut rest = arg;
    while let Some(open) = rest.find('{') {
        let tail = &rest[open + 1..];
        let close = tail.find('}')?;
        let name = &tail[..close];
        let is_ident = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if is_ident && !PLACEHOLDERS.contains(&name) {
            return Some(name);
        }
        rest = &tail[close + 1..];
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodecKind {
    Builtin,
    External,
}

/// Which codec to run, at what QP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecConfig {
    pub kind: CodecKind,
    #[serde(default = "default_qp")]
    pub qp: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<ExternalCodecSpec>,
}

fn default_qp() -> u8 {
    32
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self::builtin(default_qp())
    }
}

impl CodecConfig {
    pub fn builtin(qp: u8) -> Self {
        Self {
            kind: CodecKind::Builtin,
            qp,
            external: None,
        }
    }

    pub fn external(qp: u8, spec: ExternalCodecSpec) -> Self {
        Self {
            kind: CodecKind::External,
            qp,
            external: Some(spec),
        }
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        match self.kind {
            CodecKind::Builtin => {
                validate_qp(self.qp as i64)?;
            }
            CodecKind::External => match &self.external {
                Some(spec) => spec.validate()?,
                None => return Err(CodecError::Config("external codec needs an `external` spec".into())),
            },
        }
        Ok(())
    }

    pub fn with_qp(&self, qp: u8) -> Self {
        Self { qp, ..self.clone() }
    }
}

/// Codes a YUV 4:2:0 sequence and returns the reconstruction plus rate.
/// External codecs run inside `workdir`, which must be private to this call.
/// Result of pushing a sequence through a codec.
#[derive(Debug, Clone)]
pub struct CodedSequence {
    /// The bitstream exactly as produced by the encoder.
    pub coded: Vec<u8>,
    pub decoded: VideoSequence,
    pub stats: CodingStats,
}

/// Encodes and decodes `seq` with the configured codec. External codecs run in
/// `workdir`, which is required for them and ignored by the built-in codec.
pub fn code_sequence(
    seq: &VideoSequence,
    config: &CodecConfig,
    workdir: Option<&Path>,
) -> Result<CodedSequence, CodecError> {
    config.validate()?;
    match config.kind {
        CodecKind::Builtin => {
            let bs = encode_builtin(seq, config.qp)?;
            let stats = CodingStats::from_bytes(bs.len() as u64, seq.len(), seq.fps())?;
            let decoded = decode_builtin(&bs, seq.fps())?;
            Ok(CodedSequence {
                coded: bs.into_bytes(),
                decoded,
                stats,
            })
        }
        CodecKind::External => {
            let spec = config.external.as_ref().expect("validated");
            let workdir = workdir.ok_or_else(|| CodecError::Config("external codec needs a work directory".into()))?;
            let out = encode_external(seq, spec, config.qp, workdir)?;
            let coded = std::fs::read(&out.coded_path).map_err(|e| CodecError::Io {
                path: out.coded_path.clone(),
                message: e.to_string(),
            })?;
            Ok(CodedSequence {
                coded,
                decoded: out.decoded,
                stats: out.stats,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qstep_values() {
        assert_eq!(qstep_from_qp(4).unwrap(), 1.0);
        assert_eq!(qstep_from_qp(10).unwrap(), 2.0);
        let q32 = qstep_from_qp(32).unwrap();
        // 2^(28/6) = 2^(14/3)
        assert!((q32 - 25.398416831491197).abs() < 1e-12, "{q32}");
        assert!(qstep_from_qp(64).is_err());
    }

    #[test]
    fn bitrate_arithmetic() {
        assert_eq!(measure_bitrate(1000, 30, 30.0).unwrap(), 8.0);
        assert_eq!(measure_bitrate(0, 7, 24.0).unwrap(), 0.0);
        assert_eq!(measure_bitrate(2500, 10, 24.0).unwrap(), 48.0);
        assert_eq!(measure_bitrate(10, 0, 24.0), Err(CodecError::ZeroFrames));
        assert!(measure_bitrate(10, 1, 0.0).is_err());
    }

    #[test]
    fn external_spec_validation() {
        assert!(ExternalCodecSpec::new("cp {input} {output}", "cp {input} {output}")
            .validate()
            .is_ok());
        let missing = ExternalCodecSpec::new("cp {input} out.bin", "cp {input} {output}");
        assert!(matches!(missing.validate(), Err(CodecError::Config(m)) if m.contains("{output}")));
        let unknown = ExternalCodecSpec::new("enc -i {input} -o {output} --q {quality}", "cp {input} {output}");
        assert!(matches!(unknown.validate(), Err(CodecError::Config(m)) if m.contains("{quality}")));
        assert!(ExternalCodecSpec::new("", "cp {input} {output}").validate().is_err());
    }

    #[test]
    fn codec_config_validation() {
        assert!(CodecConfig::builtin(63).validate().is_ok());
        assert!(CodecConfig::builtin(64).validate().is_err());
        let ext = CodecConfig {
            kind: CodecKind::External,
            qp: 30,
            external: None,
        };
        assert!(ext.validate().is_err());
    }

    #[test]
    fn codec_config_json() {
        let c: CodecConfig = serde_json::from_str(r#"{"kind":"builtin"}"#).unwrap();
        assert_eq!(c, CodecConfig::builtin(32));
        let e: CodecConfig = serde_json::from_str(
            r#"{"kind":"external","external":{"encode_template":"enc {input} {output} {qp}","decode_template":"dec {input} {output}","timeout":5}}"#,
        )
        .unwrap();
        assert_eq!(e.external.unwrap().timeout, 5.0);
        assert!(serde_json::from_str::<CodecConfig>(r#"{"kind":"builtin","bogus":1}"#).is_err());
    }
}
