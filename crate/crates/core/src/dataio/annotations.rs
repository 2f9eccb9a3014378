//! Detection / annotation JSON:
//!
//! ```json
//! {"frames": [{"frame_id": 0, "objects": [{"class_id": 0, "bbox": [x, y, w, h], "score": 0.9}]}]}
//! ```
//!
//! `score` is required in detection files and forbidden in annotation files.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, DataError};
use crate::detmetrics::{BoundingBox, Detection, GroundTruthBox};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    frames: Vec<FrameEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameEntry {
    frame_id: u64,
    objects: Vec<ObjectEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectEntry {
    class_id: u32,
    bbox: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
}

/// Maps a serde_json failure onto the syntax / schema split.
pub(crate) fn json_error(path: &Path, e: serde_json::Error) -> DataError {
    use serde_json::error::Category;
    let path = path.to_path_buf();
    let message = e.to_string();
    match e.classify() {
        Category::Syntax | Category::Eof | Category::Io => DataError::MalformedJson { path, message },
        Category::Data => DataError::Schema { path, message },
    }
}

fn parse(path: &Path) -> Result<Document, DataError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let doc: Document = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
    let mut seen = HashSet::new();
    for f in &doc.frames {
        if !seen.insert(f.frame_id) {
            return Err(DataError::DuplicateFrame {
                path: path.to_path_buf(),
                frame_id: f.frame_id,
            });
        }
    }
    Ok(doc)
}

fn to_box(path: &Path, frame_id: u64, index: usize, b: [f64; 4]) -> Result<BoundingBox, DataError> {
    BoundingBox::new(b[0], b[1], b[2], b[3]).map_err(|_| DataError::NonPositiveExtent {
        path: path.to_path_buf(),
        frame_id,
        index,
    })
}

pub fn load_annotations(path: &Path) -> Result<Vec<GroundTruthBox>, DataError> {
    let doc = parse(path)?;
    let mut out = Vec::new();
    for f in doc.frames {
        for (index, o) in f.objects.into_iter().enumerate() {
            if o.score.is_some() {
                return Err(DataError::UnexpectedScore {
                    path: path.to_path_buf(),
                    frame_id: f.frame_id,
                    index,
                });
            }
            out.push(GroundTruthBox {
                frame_id: f.frame_id,
                class_id: o.class_id,
                bbox: to_box(path, f.frame_id, index, o.bbox)?,
            });
        }
    }
    Ok(out)
}

pub fn load_detections(path: &Path) -> Result<Vec<Detection>, DataError> {
    let doc = parse(path)?;
    let mut out = Vec::new();
    for f in doc.frames {
        for (index, o) in f.objects.into_iter().enumerate() {
            let score = o.score.ok_or_else(|| DataError::MissingScore {
                path: path.to_path_buf(),
                frame_id: f.frame_id,
                index,
            })?;
            let bbox = to_box(path, f.frame_id, index, o.bbox)?;
            let det = Detection::new(f.frame_id, o.class_id, bbox, score).map_err(|_| DataError::ScoreRange {
                path: path.to_path_buf(),
                frame_id: f.frame_id,
                index,
                score,
            })?;
            out.push(det);
        }
    }
    Ok(out)
}

fn write_doc(path: &Path, entries: Vec<(u64, ObjectEntry)>) -> Result<(), DataError> {
    let mut frames: Vec<FrameEntry> = Vec::new();
    for (frame_id, obj) in entries {
        match frames.iter_mut().find(|f| f.frame_id == frame_id) {
            Some(f) => f.objects.push(obj),
            None => frames.push(FrameEntry {
                frame_id,
                objects: vec![obj],
            }),
        }
    }
    frames.sort_by_key(|f| f.frame_id);
    let text = serde_json::to_string_pretty(&Document { frames }).expect("serializable");
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn write_annotations(gts: &[GroundTruthBox], path: &Path) -> Result<(), DataError> {
    let entries = gts
        .iter()
        .map(|g| {
            let b = g.bbox;
            (
                g.frame_id,
                ObjectEntry {
                    class_id: g.class_id,
                    bbox: [b.x, b.y, b.w, b.h],
                    score: None,
                },
            )
        })
        .collect();
    write_doc(path, entries)
}

pub fn write_detections(dets: &[Detection], path: &Path) -> Result<(), DataError> {
    let entries = dets
        .iter()
        .map(|d| {
            let b = d.bbox;
            (
                d.frame_id,
                ObjectEntry {
                    class_id: d.class_id,
                    bbox: [b.x, b.y, b.w, b.h],
                    score: Some(d.score),
                },
            )
        })
        .collect();
    write_doc(path, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str<T>(text: &str, f: fn(&Path) -> Result<T, DataError>) -> Result<T, DataError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        fs::write(&path, text).unwrap();
        f(&path)
    }

    #[test]
    fn basic_documents() {
        assert!(load_str(r#"{"frames":[]}"#, load_annotations).unwrap().is_empty());
        let gts = load_str(
            r#"{"frames":[{"frame_id":3,"objects":[{"class_id":1,"bbox":[0,0,10,10]}]}]}"#,
            load_annotations,
        )
        .unwrap();
        assert_eq!(gts.len(), 1);
        assert_eq!(gts[0].bbox, BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap());
        assert_eq!((gts[0].frame_id, gts[0].class_id), (3, 1));
    }

    #[test]
    fn errors_are_named() {
        let e = load_str(
            r#"{"frames":[{"frame_id":0,"objects":[{"class_id":1,"bbox":[0,0,0,10]}]}]}"#,
            load_annotations,
        );
        assert!(matches!(
            e,
            Err(DataError::NonPositiveExtent {
                frame_id: 0,
                index: 0,
                ..
            })
        ));
        assert!(matches!(
            load_str(r#"{"frames":["#, load_annotations),
            Err(DataError::MalformedJson { .. })
        ));
        assert!(matches!(
            load_str(r#"{"frame":[]}"#, load_annotations),
            Err(DataError::Schema { .. })
        ));
        let e = load_str(
            r#"{"frames":[{"frame_id":0,"objects":[{"bbox":[0,0,1,1]}]}]}"#,
            load_annotations,
        );
        assert!(matches!(e, Err(DataError::Schema { message, .. }) if message.contains("class_id")));
        let e = load_str(
            r#"{"frames":[{"frame_id":0,"objects":[{"class_id":0,"bbox":[0,0,1,1]}]}]}"#,
            load_detections,
        );
        assert!(matches!(e, Err(DataError::MissingScore { .. })));
        let e = load_str(
            r#"{"frames":[{"frame_id":0,"objects":[{"class_id":0,"bbox":[0,0,1,1],"score":0.5}]}]}"#,
            load_annotations,
        );
        assert!(matches!(e, Err(DataError::UnexpectedScore { .. })));
        let e = load_str(
            r#"{"frames":[{"frame_id":0,"objects":[{"class_id":0,"bbox":[0,0,1,1],"score":1.5}]}]}"#,
            load_detections,
        );
        assert!(matches!(e, Err(DataError::ScoreRange { .. })));
        let e = load_str(
            r#"{"frames":[{"frame_id":0,"objects":[]},{"frame_id":0,"objects":[]}]}"#,
            load_annotations,
        );
        assert!(matches!(e, Err(DataError::DuplicateFrame { frame_id: 0, .. })));
    }

    #[test]
    fn detections_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        let b = BoundingBox::new(1.5, 2.0, 3.0, 4.25).unwrap();
        let dets = vec![
            Detection::new(2, 0, b, 0.5).unwrap(),
            Detection::new(0, 1, b, 0.75).unwrap(),
            Detection::new(2, 3, b, 1.0).unwrap(),
        ];
        write_detections(&dets, &path).unwrap();
        let mut back = load_detections(&path).unwrap();
        back.sort_by_key(|d| (d.frame_id, d.class_id));
        let mut expect = dets.clone();
        expect.sort_by_key(|d| (d.frame_id, d.class_id));
        assert_eq!(back, expect);
    }
}
