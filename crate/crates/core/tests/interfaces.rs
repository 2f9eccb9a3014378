//! File contracts shared with the external detector: it reads the PNG frame
//! directories written by a sweep and writes one detection JSON per run.

use std::fs;

use vcm_core::corpus::{moving_shapes, SceneSpec};
use vcm_core::dataio::{
    frame_file_name, load_annotations, load_detections, rd_csv_string, read_image_dir, DataError, ExperimentConfig,
    SequenceSource,
};
use vcm_core::detmetrics::evaluate;
use vcm_core::pipeline::{rd_sweep, SweepOptions};

const DETECTOR_OUTPUT: &str = r#"{
  "frames": [
    {"frame_id": 0, "objects": [
      {"class_id": 2, "bbox": [10.5, 4.0, 20.0, 12.25], "score": 0.91},
      {"class_id": 0, "bbox": [0.0, 0.0, 3.0, 3.0], "score": 0.25}
    ]},
    {"frame_id": 1, "objects": []},
    {"frame_id": 2, "objects": [
      {"class_id": 2, "bbox": [11.0, 4.5, 20.0, 12.0], "score": 0.2}
    ]}
  ]
}"#;

#[test]
fn detector_output_parses_and_scores() {
    let dir = tempfile::tempdir().unwrap();
    let det_path = dir.path().join("qp32.json");
    fs::write(&det_path, DETECTOR_OUTPUT).unwrap();
    let dets = load_detections(&det_path).unwrap();
    assert_eq!(dets.len(), 3);
    assert_eq!(dets[0].bbox.h, 12.25);

    let gt_path = dir.path().join("gt.json");
    fs::write(
        &gt_path,
        r#"{"frames":[{"frame_id":0,"objects":[{"class_id":2,"bbox":[10,4,20,12]}]},
                     {"frame_id":2,"objects":[{"class_id":2,"bbox":[11,4,20,12]}]}]}"#,
    )
    .unwrap();
    let gts = load_annotations(&gt_path).unwrap();
    // the 0.2 detection on frame 2 falls under the 0.25 threshold
    let r = evaluate(&dets, &gts, 0.5, 0.25).unwrap();
    assert_eq!(r.per_class.len(), 1);
    assert_eq!(r.map, 0.5);
}

#[test]
fn schema_violations_are_typed_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    let cases = [
        (
            r#"{"frames":[{"frame_id":0,"objects":[{"class_id":0,"bbox":[0,0,1,1]}]}]}"#,
            "missing score",
        ),
        (
            r#"{"frames":[{"frame_id":0,"objects":[{"class_id":0,"bbox":[0,0,1,1],"score":1.5}]}]}"#,
            "score range",
        ),
        (
            r#"{"frames":[{"frame_id":0,"objects":[{"class_id":0,"bbox":[0,0,0,1],"score":0.5}]}]}"#,
            "zero width",
        ),
        (
            r#"{"frames":[{"frame_id":0,"objects":[{"class_id":0,"bbox":[0,0,1],"score":0.5}]}]}"#,
            "short bbox",
        ),
        (r#"{"frames":[{"frame_id":0,"objects":[]}],"model":"x"}"#, "unknown key"),
        (
            r#"{"frames":[{"frame_id":0,"objects":[]},{"frame_id":0,"objects":[]}]}"#,
            "duplicate frame",
        ),
        (r#"{"frames":[{"frame_id":0,"objects":[]"#, "truncated"),
    ];
    for (text, what) in cases {
        fs::write(&path, text).unwrap();
        let err = load_detections(&path).unwrap_err();
        assert!(!matches!(err, DataError::Io { .. }), "{what}: {err}");
        assert!(!err.to_string().contains('\n'), "{what}: multi-line message");
    }
}

#[test]
fn sweep_output_is_a_readable_frame_directory_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let s = moving_shapes(&SceneSpec {
        width: 32,
        height: 24,
        frames: 2,
        shapes: 1,
        fps: 30.0,
        seed: 9,
    });
    let mut cfg = ExperimentConfig::new(
        SequenceSource::image_dir(dir.path().join("unused")),
        dir.path().join("gt.json"),
        dir.path().join("out"),
    );
    cfg.qp_list_proposed = vec![32, 40];
    cfg.qp_list_anchor = vec![35];
    let first = rd_sweep(&s.sequence, &cfg, &SweepOptions::default()).unwrap();

    let run = cfg.output_dir.join("anchor").join("qp35");
    let names: Vec<String> = {
        let mut v: Vec<String> = fs::read_dir(&run)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        v.sort();
        v
    };
    assert_eq!(names, vec![frame_file_name(0), frame_file_name(1)]);
    assert_eq!(names[0], "000000.png");
    let frames = read_image_dir(&run, 30.0).unwrap();
    assert_eq!((frames.len(), frames.width(), frames.height()), (2, 32, 24));

    let second = rd_sweep(&s.sequence, &cfg, &SweepOptions::default()).unwrap();
    let csv = |r: &vcm_core::pipeline::SweepResult| rd_csv_string(&[r.proposed.clone(), r.anchor.clone()]).unwrap();
    assert_eq!(csv(&first), csv(&second));
}
