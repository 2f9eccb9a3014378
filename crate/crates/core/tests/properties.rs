//! Cross-module invariants checked on generated inputs.

use proptest::prelude::*;
use vcm_core::codec::{decode_builtin, encode_builtin, Bitstream, BitstreamHeader};
use vcm_core::corpus::{noise_frame, seeded_rng, texture_frame};
use vcm_core::dataio::{read_yuv420, write_yuv420};
use vcm_core::detmetrics::{average_precision, bd_rate_points, iou, match_detections, BoundingBox, Detection};
use vcm_core::imagecore::{contrast_reduce, psnr, rgb_to_yuv420, shannon_entropy, ColorFormat, Frame};
use vcm_core::{ContrastParams, VideoSequence};

mod common;

fn sequence(seed: u64, w: usize, h: usize, frames: usize, format: ColorFormat) -> VideoSequence {
    let mut rng = seeded_rng(seed);
    let frames = (0..frames)
        .map(|i| {
            let f = if i % 2 == 0 {
                texture_frame(w, h, &mut rng)
            } else {
                noise_frame(w, h, &mut rng)
            };
            match format {
                ColorFormat::Yuv420 => rgb_to_yuv420(&f).unwrap(),
                ColorFormat::Gray => Frame::gray(f.planes()[1].clone()),
                _ => f,
            }
        })
        .collect();
    VideoSequence::new(frames, 24.0).unwrap()
}

fn format_strategy() -> impl Strategy<Value = ColorFormat> {
    prop_oneof![Just(ColorFormat::Yuv420), Just(ColorFormat::Gray)]
}

fn bbox() -> impl Strategy<Value = BoundingBox> {
    (0.0..50.0, 0.0..50.0, 0.5..30.0, 0.5..30.0).prop_map(|(x, y, w, h)| BoundingBox::new(x, y, w, h).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn codec_round_trip_keeps_shape_and_is_deterministic(
        seed in any::<u64>(),
        half_w in 1usize..12,
        half_h in 1usize..12,
        frames in 1usize..3,
        format in format_strategy(),
        qp in 0u8..=63,
    ) {
        let seq = sequence(seed, half_w * 2, half_h * 2, frames, format);
        let a = encode_builtin(&seq, qp).unwrap();
        let b = encode_builtin(&seq, qp).unwrap();
        prop_assert_eq!(a.bytes(), b.bytes());
        let header = a.header().unwrap();
        prop_assert!(a.len() >= header.encoded_len());
        prop_assert_eq!(BitstreamHeader::parse(&header.to_bytes()).unwrap(), header);

        let out = decode_builtin(&a, seq.fps()).unwrap();
        prop_assert_eq!(out.len(), seq.len());
        prop_assert_eq!(out.format(), seq.format());
        for (x, y) in out.frames().iter().zip(seq.frames()) {
            prop_assert!(x.same_geometry(y));
        }
    }

    #[test]
    fn full_resolution_color_is_refused(seed in any::<u64>()) {
        let seq = sequence(seed, 8, 8, 1, ColorFormat::Rgb444);
        prop_assert!(encode_builtin(&seq, 30).is_err());
    }

    #[test]
    fn every_prefix_of_a_stream_is_rejected(seed in any::<u64>(), qp in 0u8..40) {
        let seq = sequence(seed, 16, 16, 2, ColorFormat::Yuv420);
        let bytes = encode_builtin(&seq, qp).unwrap().into_bytes();
        for cut in 0..bytes.len() {
            let short = Bitstream::from_bytes(bytes[..cut].to_vec());
            prop_assert!(decode_builtin(&short, 24.0).is_err(), "prefix of {} bytes accepted", cut);
        }
    }

    #[test]
    fn contrast_never_raises_entropy(seed in any::<u64>(), alpha in 0.0f64..=1.0) {
        let f = texture_frame(24, 18, &mut seeded_rng(seed));
        let out = contrast_reduce(&f, ContrastParams::new(alpha).unwrap()).unwrap();
        prop_assert!(shannon_entropy(&out) <= shannon_entropy(&f));
    }

    #[test]
    fn psnr_is_symmetric(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let a = noise_frame(10, 6, &mut rng);
        let b = noise_frame(10, 6, &mut rng);
        prop_assert_eq!(psnr(&a, &b).unwrap().to_bits(), psnr(&b, &a).unwrap().to_bits());
        prop_assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn iou_is_symmetric_and_bounded(a in bbox(), b in bbox()) {
        let ab = iou(&a, &b);
        prop_assert_eq!(ab.to_bits(), iou(&b, &a).to_bits());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn ap_only_sees_score_order(seed in any::<u64>(), gain in 0.05f64..1.0, power in 0.2f64..5.0) {
        let mut rng = seeded_rng(seed);
        let (dets, gts) = common::random_instance(&mut rng);
        let rescaled: Vec<Detection> = dets
            .iter()
            .map(|d| Detection { score: gain * d.score.powf(power), ..*d })
            .collect();
        let ap = |d: &[Detection]| {
            let m = match_detections(d, &gts, 0.5);
            average_precision(&m.tp_flags(), m.n_gt)
        };
        let before = ap(&dets);
        prop_assert!((0.0..=1.0).contains(&before));
        prop_assert_eq!(before.to_bits(), ap(&rescaled).to_bits());
    }

    #[test]
    fn bd_rate_flips_sign_on_shifted_curves(
        base in prop::collection::vec(1.0f64..4.0, 4..8),
        shift in -0.8f64..0.8,
    ) {
        // strictly increasing quality, rate proportional to 10^quality
        let pts: Vec<(f64, f64)> = base
            .iter()
            .scan(0.0, |q, &step| { *q += step; Some(*q) })
            .map(|q| (10f64.powf(1.0 + q / 10.0), q))
            .collect();
        let moved: Vec<(f64, f64)> = pts.iter().map(|&(r, q)| (r * 10f64.powf(shift), q)).collect();
        let fwd = bd_rate_points(&pts, &moved).unwrap();
        let back = bd_rate_points(&moved, &pts).unwrap();
        let expected = (10f64.powf(shift) - 1.0) * 100.0;
        prop_assert!((fwd - expected).abs() < 1e-6 * expected.abs().max(1.0), "{} vs {}", fwd, expected);
        // swapping anchor and test inverts the log-rate shift
        prop_assert!(((1.0 + fwd / 100.0) * (1.0 + back / 100.0) - 1.0).abs() < 1e-6);
        prop_assert_eq!(bd_rate_points(&pts, &pts).unwrap(), 0.0);
    }

    #[test]
    fn yuv_files_round_trip(seed in any::<u64>(), frames in 1usize..4) {
        let seq = sequence(seed, 10, 6, frames, ColorFormat::Yuv420);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clip.yuv");
        write_yuv420(&seq, &path).unwrap();
        prop_assert_eq!(read_yuv420(&path, 10, 6, 24.0, None).unwrap(), seq);
    }
}
