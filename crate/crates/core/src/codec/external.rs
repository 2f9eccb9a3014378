//! Subprocess driver for external encoder/decoder executables.
//!
//! The sequence is written as raw I420 to `<workdir>/input.yuv`; the encoder
//! writes `<workdir>/coded.bin` and the decoder `<workdir>/decoded.yuv`. Each
//! command's stdout/stderr go to `<stage>.stdout.log` / `<stage>.stderr.log`.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitStatus, Stdio};
use std::time::{Duration, Instant};

use super::{validate_qp, CodecError, CodingStats, ExternalCodecSpec};
use crate::dataio::{read_yuv420, write_yuv420, yuv420_frame_bytes};
use crate::imagecore::{ColorFormat, VideoSequence};

#[derive(Debug, Clone)]
pub struct ExternalOutcome {
    pub coded_path: PathBuf,
    pub decoded: VideoSequence,
    pub stats: CodingStats,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CodecError + '_ {
    move |e| CodecError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

struct Substitutions<'a> {
    input: &'a Path,
    output: &'a Path,
    qp: u8,
    width: usize,
    height: usize,
    frames: usize,
    fps: f64,
}

impl Substitutions<'_> {
    fn apply(&self, template: &str) -> Result<Vec<String>, CodecError> {
        let args = shlex::split(template)
            .filter(|a| !a.is_empty())
            .ok_or_else(|| CodecError::Config(format!("cannot split template `{template}`")))?;
        Ok(args
            .into_iter()
            .map(|a| {
                a.replace("{input}", &self.input.to_string_lossy())
                    .replace("{output}", &self.output.to_string_lossy())
                    .replace("{qp}", &self.qp.to_string())
                    .replace("{width}", &self.width.to_string())
                    .replace("{height}", &self.height.to_string())
                    .replace("{frames}", &self.frames.to_string())
                    .replace("{fps}", &self.fps.to_string())
            })
            .collect())
    }
}

fn tail(path: &Path) -> String {
    const MAX: usize = 2000;
    let text = fs::read_to_string(path).unwrap_or_default();
    let text = text.trim();
    let start = text.len().saturating_sub(MAX);
    let start = (start..=text.len())
        .find(|&i| text.is_char_boundary(i))
        .unwrap_or(text.len());
    text[start..].replace('\n', " | ")
}

fn run(stage: &'static str, args: &[String], workdir: &Path, timeout: f64) -> Result<(), CodecError> {
    let out_log = workdir.join(format!("{stage}.stdout.log"));
    let err_log = workdir.join(format!("{stage}.stderr.log"));
    let stdout = File::create(&out_log).map_err(io(&out_log))?;
    let stderr = File::create(&err_log).map_err(io(&err_log))?;

    let mut child = Command::new(&args[0])
        .args(&args[1..])
        .current_dir(workdir)
        .stdin(Stdio::null())
        .stdout(stdout)
        .stderr(stderr)
        .spawn()
        .map_err(|e| CodecError::ProcessFailed {
            stage,
            status: "not started".into(),
            stderr: format!("{}: {e}", args[0]),
        })?;

    let deadline = Instant::now() + Duration::from_secs_f64(timeout);
    let status: ExitStatus = loop {
        if let Some(status) = child.try_wait().map_err(io(workdir))? {
            break status;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            return Err(CodecError::Timeout {
                stage,
                seconds: timeout,
                stderr: tail(&err_log),
            });
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    if !status.success() {
        let status = status
            .code()
            .map_or_else(|| "killed by signal".to_string(), |c| format!("exit status {c}"));
        return Err(CodecError::ProcessFailed {
            stage,
            status,
            stderr: tail(&err_log),
        });
    }
    Ok(())
}

fn prepare(workdir: &Path, stale: &[&str]) -> Result<PathBuf, CodecError> {
    fs::create_dir_all(workdir).map_err(io(workdir))?;
    let workdir = workdir.canonicalize().map_err(io(workdir))?;
    for name in stale {
        let path = workdir.join(name);
        if path.exists() {
            fs::remove_file(&path).map_err(io(&path))?;
        }
    }
    Ok(workdir)
}

fn output_len(stage: &'static str, path: &Path) -> Result<u64, CodecError> {
    fs::metadata(path).map(|m| m.len()).map_err(|e| CodecError::BadOutput {
        stage,
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Runs the decode template on `subs.input` and reads `subs.output` back,
/// insisting on exactly `subs.frames` frames.
fn decode_with(
    subs: &Substitutions<'_>,
    spec: &ExternalCodecSpec,
    workdir: &Path,
) -> Result<VideoSequence, CodecError> {
    run("decode", &subs.apply(&spec.decode_template)?, workdir, spec.timeout)?;
    let decoded_len = output_len("decode", subs.output)?;
    let (width, height, frames) = (subs.width, subs.height, subs.frames);
    let expected = (frames * yuv420_frame_bytes(width, height)) as u64;
    if decoded_len != expected {
        return Err(CodecError::BadOutput {
            stage: "decode",
            path: subs.output.to_path_buf(),
            reason: format!("{decoded_len} bytes, expected {expected} for {frames} frames of {width}x{height}"),
        });
    }
    Ok(read_yuv420(subs.output, width, height, subs.fps, None)?)
}

/// Writes `seq` as I420, runs the encode then decode templates inside
/// `workdir`, and reads the reconstruction back. The rate is measured from the
/// size of the coded file.
pub fn encode_external(
    seq: &VideoSequence,
    spec: &ExternalCodecSpec,
    qp: u8,
    workdir: &Path,
) -> Result<ExternalOutcome, CodecError> {
    spec.validate()?;
    validate_qp(qp as i64)?;
    if seq.format() != ColorFormat::Yuv420 {
        return Err(CodecError::UnsupportedFormat(seq.format()));
    }
    let workdir = prepare(workdir, &["coded.bin", "decoded.yuv"])?;
    let input = workdir.join("input.yuv");
    let coded = workdir.join("coded.bin");
    let decoded = workdir.join("decoded.yuv");
    write_yuv420(seq, &input)?;

    let (width, height, frames, fps) = (seq.width(), seq.height(), seq.len(), seq.fps());
    let enc = Substitutions {
        input: &input,
        output: &coded,
        qp,
        width,
        height,
        frames,
        fps,
    };
    run("encode", &enc.apply(&spec.encode_template)?, &workdir, spec.timeout)?;
    let coded_len = output_len("encode", &coded)?;

    let dec = Substitutions {
        input: &coded,
        output: &decoded,
        ..enc
    };
    let recon = decode_with(&dec, spec, &workdir)?;
    Ok(ExternalOutcome {
        coded_path: coded,
        decoded: recon,
        stats: CodingStats::from_bytes(coded_len, frames, fps)?,
    })
}

/// Frame geometry that an external decoder cannot be asked for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeGeometry {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub fps: f64,
    pub qp: u8,
}

/// Runs only the decode template on an existing coded file.
pub fn decode_external(
    coded: &Path,
    spec: &ExternalCodecSpec,
    geometry: DecodeGeometry,
    workdir: &Path,
) -> Result<VideoSequence, CodecError> {
    spec.validate()?;
    validate_qp(geometry.qp as i64)?;
    if geometry.frames == 0 {
        return Err(CodecError::ZeroFrames);
    }
    let coded = coded.canonicalize().map_err(io(coded))?;
    let workdir = prepare(workdir, &["decoded.yuv"])?;
    let decoded = workdir.join("decoded.yuv");
    let subs = Substitutions {
        input: &coded,
        output: &decoded,
        qp: geometry.qp,
        width: geometry.width,
        height: geometry.height,
        frames: geometry.frames,
        fps: geometry.fps,
    };
    decode_with(&subs, spec, &workdir)
}
