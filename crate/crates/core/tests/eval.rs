mod common;

use std::path::Path;

use common::*;
use frame_extrapolation::frame_io::{load_frame, save_frame, FrameRole, SequenceManifest};
use frame_extrapolation::metrics::{evaluate_sequence, PSNR_CAP};
use frame_extrapolation::pipeline::synthesize;
use frame_extrapolation::scene::preset;
use frame_extrapolation::Error;

/// Writes the ground-truth frames of `seq` as an extrapolated sequence, with
/// timestamps shifted by `dt`.
fn copy_as_prediction(seq: &Path, out: &Path, dt: f64) {
    let mut m = SequenceManifest::load(seq).unwrap();
    std::fs::create_dir_all(out).unwrap();
    let gts: Vec<_> = m
        .frames_with_role(FrameRole::Groundtruth)
        .cloned()
        .collect();
    m.frames = gts
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let mut f = load_frame(seq, e).unwrap();
            f.timestamp += dt;
            save_frame(out, &format!("p{k:04}"), &f, FrameRole::Extrapolated).unwrap()
        })
        .collect();
    m.save(out).unwrap();
}

#[test]
fn identical_prediction_scores_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq");
    synthesize(
        &preset("occluder-pan", 0).unwrap(),
        &small_spec(4, 96, 54),
        &seq,
        None,
    )
    .unwrap();
    copy_as_prediction(&seq, &dir.path().join("pred"), 0.0);
    let report = evaluate_sequence(dir.path().join("pred"), &seq).unwrap();
    assert_eq!(report.frames.len(), 3);
    for f in &report.frames {
        assert_eq!(f.psnr, PSNR_CAP);
        assert_eq!(f.ssim, 1.0);
        assert_eq!(f.smape, 0.0);
    }
    assert_eq!(report.aggregate.psnr, PSNR_CAP);
    assert_eq!(report.aggregate.ssim, 1.0);
}

#[test]
fn unmatched_timestamps_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq");
    synthesize(
        &preset("static-cam-static", 0).unwrap(),
        &small_spec(3, 64, 36),
        &seq,
        None,
    )
    .unwrap();
    copy_as_prediction(&seq, &dir.path().join("pred"), 1e-3);
    match evaluate_sequence(dir.path().join("pred"), &seq) {
        Err(Error::Pairing { offenders }) => assert_eq!(offenders.len(), 2),
        other => panic!("expected a pairing error, got {other:?}"),
    }
}
