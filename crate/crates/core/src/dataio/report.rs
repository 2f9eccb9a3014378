//! RD-curve CSV (`label,qp,bitrate_kbps,map,ap_<class>...`) and a small
//! dependency-free SVG line plot.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{io_err, DataError};
use crate::detmetrics::{QualityMetric, RDCurve, RDPoint};

const FIXED_COLUMNS: [&str; 4] = ["label", "qp", "bitrate_kbps", "map"];

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Serialises curves in order; AP columns cover the union of classes, sorted.
pub fn rd_csv_string(curves: &[RDCurve]) -> Result<String, DataError> {
    if curves.is_empty() {
        return Err(DataError::EmptyReport("no curves"));
    }
    let classes: BTreeSet<u32> = curves
        .iter()
        .flat_map(|c| c.points())
        .flat_map(|p| p.per_class_ap.keys().copied())
        .collect();

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(classes.iter().map(|c| format!("ap_{c}")));
    w.write_record(&header).expect("in-memory write");
    for curve in curves {
        for p in curve.points() {
            let mut row = vec![
                curve.label.clone(),
                p.qp.to_string(),
                p.bitrate_kbps.to_string(),
                fmt_opt(p.map),
            ];
            row.extend(classes.iter().map(|c| fmt_opt(p.per_class_ap.get(c).copied())));
            w.write_record(&row).expect("in-memory write");
        }
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 fields"))
}

pub fn write_rd_csv(curves: &[RDCurve], path: &Path) -> Result<(), DataError> {
    let text = rd_csv_string(curves)?;
    fs::write(path, text).map_err(io_err(path))
}

/// Reads curves back, grouped by label in order of first appearance.
pub fn read_rd_csv(path: &Path) -> Result<Vec<RDCurve>, DataError> {
    let csv_err = |message: String| DataError::Csv {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| csv_err(e.to_string()))?.clone();
    if header.len() < FIXED_COLUMNS.len() || header.iter().zip(FIXED_COLUMNS).any(|(a, b)| a != b) {
        return Err(csv_err(format!("header must start with {}", FIXED_COLUMNS.join(","))));
    }
    let classes = header
        .iter()
        .skip(FIXED_COLUMNS.len())
        .map(|h| {
            h.strip_prefix("ap_")
                .and_then(|c| c.parse::<u32>().ok())
                .ok_or_else(|| csv_err(format!("unexpected column `{h}`")))
        })
        .collect::<Result<Vec<u32>, _>>()?;

    let mut groups: Vec<(String, Vec<RDPoint>)> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(e.to_string()))?;
        let at = |msg: &str| csv_err(format!("row {}: {msg}", line + 2));
        let num = |s: &str| -> Result<Option<f64>, DataError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<f64>().map(Some).map_err(|_| at(&format!("bad number `{s}`")))
            }
        };
        let qp = rec[1].parse::<u8>().map_err(|_| at("bad qp"))?;
        let bitrate = num(&rec[2])?.ok_or_else(|| at("missing bitrate"))?;
        let mut point = RDPoint::new(qp, bitrate);
        point.map = num(&rec[3])?;
        for (c, field) in classes.iter().zip(rec.iter().skip(FIXED_COLUMNS.len())) {
            if let Some(ap) = num(field)? {
                point.per_class_ap.insert(*c, ap);
            }
        }
        let label = &rec[0];
        match groups.iter_mut().find(|(l, _)| l == label) {
            Some((_, pts)) => pts.push(point),
            None => groups.push((label.to_string(), vec![point])),
        }
    }
    if groups.is_empty() {
        return Err(csv_err("no data rows".into()));
    }
    Ok(groups.into_iter().map(|(l, p)| RDCurve::new(l, p)).collect())
}

/// What to put on the plot axes.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub metric: QualityMetric,
}

impl PlotSpec {
    pub fn for_metric(metric: QualityMetric) -> Self {
        Self {
            title: format!("Bitrate vs {}", metric.name()),
            x_label: "bitrate [kbps]".into(),
            y_label: match metric {
                QualityMetric::Map => "mAP".into(),
                QualityMetric::Psnr => "PSNR [dB]".into(),
            },
            metric,
        }
    }
}

// first curve blue, second red
const PALETTE: [&str; 6] = ["#1f4fd8", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn nice_step(range: f64) -> f64 {
    let raw = range / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        // snap tiny values so "-0" never shows up
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10()).ceil() as usize
    };
    format!("{v:.decimals$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders one polyline per curve with axis ticks and a legend. Points lacking
/// the selected metric are skipped.
pub fn svg_plot_string(curves: &[RDCurve], spec: &PlotSpec) -> Result<String, DataError> {
    if curves.is_empty() {
        return Err(DataError::EmptyReport("no curves"));
    }
    let series: Vec<(&str, Vec<(f64, f64)>)> = curves
        .iter()
        .map(|c| {
            let pts = c
                .points()
                .iter()
                .filter_map(|p| spec.metric.of(p).map(|q| (p.bitrate_kbps, q)))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect();
            (c.label.as_str(), pts)
        })
        .collect();
    let all: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    if all.is_empty() {
        return Err(DataError::EmptyReport("no point carries the plotted metric"));
    }
    let fold = |f: fn(&(f64, f64)) -> f64| {
        all.iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (x0, x1) = {
        let (lo, hi) = fold(|p| p.0);
        padded_range(lo, hi)
    };
    let (y0, y1) = {
        let (lo, hi) = fold(|p| p.1);
        padded_range(lo, hi)
    };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    let xstep = nice_step(x1 - x0);
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r#"<line class="tick" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            TOP + ph,
            TOP + ph + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            tick_label(t, xstep)
        );
    }
    let ystep = nice_step(y1 - y0);
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r#"<line class="tick" x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#,
            LEFT - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + 4.0,
            tick_label(t, ystep)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&spec.y_label)
    );

    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            coords.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = TOP + 16.0 + 16.0 * i as f64;
        let lx = LEFT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn write_svg_plot(curves: &[RDCurve], path: &Path, spec: &PlotSpec) -> Result<(), DataError> {
    let text = svg_plot_string(curves, spec)?;
    fs::write(path, text).map_err(io_err(path))
}
