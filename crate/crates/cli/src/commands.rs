use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use vcm_core::codec::{
    decode_builtin, decode_external, encode_builtin, encode_external, Bitstream, CodingStats, DecodeGeometry,
    ExternalCodecSpec,
};
use vcm_core::dataio::{load_annotations, load_config, load_detections, read_rd_csv, write_svg_plot, PlotSpec};
use vcm_core::detmetrics::{evaluate, QualityMetric, RDCurve};
use vcm_core::imagecore::shannon_entropy;
use vcm_core::pipeline::{compare_curves, preprocess as preprocess_seq, rd_sweep as sweep, scaled_dim, SweepOptions};
use vcm_core::ContrastParams;

use crate::media;
use crate::{
    BdRateArgs, CliError, CliResult, CodecArgs, CodecChoice, DecodeArgs, EncodeArgs, EntropyArgs, EvalApArgs, PlotArgs,
    PreprocessArgs, RdSweepArgs,
};

fn print_json(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("json values serialize")
    );
}

pub fn preprocess(a: PreprocessArgs) -> CliResult {
    let seq = media::load(&a.input, &a.geometry)?;
    let contrast = ContrastParams::new(a.alpha).map_err(CliError::usage)?;
    let (w, h) = if a.scale == 1.0 {
        (seq.width(), seq.height())
    } else {
        (scaled_dim(seq.width(), a.scale), scaled_dim(seq.height(), a.scale))
    };
    let out = preprocess_seq(&seq, contrast, w, h).map_err(CliError::domain)?;
    media::save(&out, &a.out)?;
    print_json(&json!({
        "frames": out.len(),
        "width": w,
        "height": h,
        "alpha": a.alpha,
        "scale": a.scale,
        "output": a.out,
    }));
    Ok(())
}

/// Loads and checks the external codec templates named by `--cfg`.
fn external_spec(c: &CodecArgs) -> CliResult<ExternalCodecSpec> {
    let path = c
        .cfg
        .as_ref()
        .ok_or_else(|| CliError::usage("--codec external needs --cfg <templates.json>"))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    let spec: ExternalCodecSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    spec.validate()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(spec)
}

fn workdir_for(c: &CodecArgs, out: &Path) -> PathBuf {
    c.workdir.clone().unwrap_or_else(|| {
        let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".work");
        out.with_file_name(name)
    })
}

fn stats_json(codec: &str, qp: u8, width: usize, height: usize, stats: &CodingStats) -> serde_json::Value {
    json!({
        "codec": codec,
        "qp": qp,
        "width": width,
        "height": height,
        "frames": stats.frames,
        "total_bits": stats.total_bits,
        "bitrate_kbps": stats.bitrate_kbps,
    })
}

pub fn encode(a: EncodeArgs) -> CliResult {
    if a.codec.codec == CodecChoice::Builtin && a.codec.cfg.is_some() {
        return Err(CliError::usage("--cfg only applies to --codec external"));
    }
    let seq = media::load(&a.input, &a.geometry)?;
    let (w, h) = (seq.width(), seq.height());
    match a.codec.codec {
        CodecChoice::Builtin => {
            let seq = match seq.format() {
                vcm_core::ColorFormat::Gray => seq,
                _ => media::to_yuv420(&seq)?,
            };
            let bs = encode_builtin(&seq, a.codec.qp).map_err(CliError::domain)?;
            write_file(&a.out, bs.bytes())?;
            let stats = CodingStats::from_bytes(bs.len() as u64, seq.len(), seq.fps()).map_err(CliError::domain)?;
            print_json(&stats_json("builtin", a.codec.qp, w, h, &stats));
        }
        CodecChoice::External => {
            let spec = external_spec(&a.codec)?;
            let seq = media::to_yuv420(&seq)?;
            let workdir = workdir_for(&a.codec, &a.out);
            let out = encode_external(&seq, &spec, a.codec.qp, &workdir).map_err(CliError::domain)?;
            let bytes = fs::read(&out.coded_path)
                .map_err(|e| CliError::Domain(format!("{}: {e}", out.coded_path.display())))?;
            write_file(&a.out, &bytes)?;
            print_json(&stats_json("external", a.codec.qp, w, h, &out.stats));
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Domain(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

pub fn decode(a: DecodeArgs) -> CliResult {
    let seq = match a.codec.codec {
        CodecChoice::Builtin => {
            if a.codec.cfg.is_some() {
                return Err(CliError::usage("--cfg only applies to --codec external"));
            }
            let bytes = fs::read(&a.input).map_err(|e| CliError::Domain(format!("{}: {e}", a.input.display())))?;
            decode_builtin(&Bitstream::from_bytes(bytes), a.fps).map_err(CliError::domain)?
        }
        CodecChoice::External => {
            let spec = external_spec(&a.codec)?;
            let (Some(width), Some(height), Some(frames)) = (a.width, a.height, a.frames) else {
                return Err(CliError::usage(
                    "--codec external decoding needs --width, --height and --frames",
                ));
            };
            let geometry = DecodeGeometry {
                width,
                height,
                frames,
                fps: a.fps,
                qp: a.codec.qp,
            };
            decode_external(&a.input, &spec, geometry, &workdir_for(&a.codec, &a.out)).map_err(CliError::domain)?
        }
    };
    media::save(&seq, &a.out)?;
    print_json(&json!({
        "frames": seq.len(),
        "width": seq.width(),
        "height": seq.height(),
        "output": a.out,
    }));
    Ok(())
}

pub fn entropy(a: EntropyArgs) -> CliResult {
    let seq = media::load(&a.input, &a.geometry)?;
    let per_frame: Vec<f64> = seq.frames().iter().map(shannon_entropy).collect();
    let mean = per_frame.iter().sum::<f64>() / per_frame.len() as f64;
    print_json(&json!({ "frames": per_frame, "mean": mean }));
    Ok(())
}

pub fn eval_ap(a: EvalApArgs) -> CliResult {
    let gts = load_annotations(&a.gt).map_err(CliError::domain)?;
    let dets = load_detections(&a.det).map_err(CliError::domain)?;
    let report = evaluate(&dets, &gts, a.iou, a.conf).map_err(CliError::domain)?;
    let per_class: serde_json::Map<String, serde_json::Value> = report
        .per_class
        .iter()
        .map(|(c, ap)| (c.to_string(), json!(ap)))
        .collect();
    print_json(&json!({
        "iou_threshold": a.iou,
        "confidence_threshold": a.conf,
        "per_class": per_class,
        "map": report.map,
    }));
    Ok(())
}

pub fn rd_sweep(a: RdSweepArgs) -> CliResult {
    let cfg = load_config(&a.config).map_err(CliError::domain)?;
    let seq = cfg.source.load().map_err(CliError::domain)?;
    let opts = SweepOptions {
        jobs: a.jobs,
        write_frames: !a.no_frames,
    };
    let result = sweep(&seq, &cfg, &opts).map_err(CliError::domain)?;
    let report = compare_curves(&result.proposed, &result.anchor, &cfg.output_dir).map_err(CliError::domain)?;
    let runs_path = cfg.output_dir.join("runs.json");
    let runs = serde_json::to_string_pretty(&result.runs).map_err(CliError::domain)?;
    write_file(&runs_path, format!("{runs}\n").as_bytes())?;
    if let Some(notice) = &report.notice {
        eprintln!("note: {notice}");
    }
    print_json(&json!({
        "proposed_points": result.proposed.len(),
        "anchor_points": result.anchor.len(),
        "csv": report.csv_path,
        "svg": report.svg_path,
        "runs": runs_path,
        "plotted": report.plotted.name(),
        "bd_rate_percent": report.bd_rate_percent,
    }));
    Ok(())
}

/// Picks a curve by label, or the only curve when no label is given and the
/// file holds one; otherwise falls back to `fallback`.
fn pick_curve(path: &Path, label: Option<&str>, fallback: &str) -> CliResult<RDCurve> {
    let mut curves = read_rd_csv(path).map_err(CliError::domain)?;
    let want = match label {
        Some(l) => l,
        None if curves.len() == 1 => return Ok(curves.remove(0)),
        None => fallback,
    };
    let labels: Vec<String> = curves.iter().map(|c| c.label.clone()).collect();
    curves.into_iter().find(|c| c.label == want).ok_or_else(|| {
        CliError::Domain(format!(
            "{}: no curve `{want}` (found {})",
            path.display(),
            labels.join(", ")
        ))
    })
}

pub fn bd_rate(a: BdRateArgs) -> CliResult {
    let anchor = pick_curve(&a.anchor_csv, a.anchor_label.as_deref(), "anchor")?;
    let test = pick_curve(&a.test_csv, a.test_label.as_deref(), "proposed")?;
    let v = vcm_core::detmetrics::bd_rate(&anchor, &test).map_err(CliError::domain)?;
    print_json(&json!({
        "anchor": anchor.label,
        "test": test.label,
        "bd_rate_percent": v,
        "bd_rate": format!("{v:+.4}%"),
    }));
    Ok(())
}

pub fn plot(a: PlotArgs) -> CliResult {
    let curves = read_rd_csv(&a.csv).map_err(CliError::domain)?;
    let mut spec = PlotSpec::for_metric(QualityMetric::Map);
    if let Some(t) = a.title {
        spec.title = t;
    }
    write_svg_plot(&curves, &a.svg, &spec).map_err(CliError::domain)?;
    print_json(&json!({ "curves": curves.len(), "svg": a.svg }));
    Ok(())
}
