//! Focus mask on the moving-shadow scene: where GAE keeps a stale shadow.
//!
//! cargo run --release --example focus_mask -- [out_dir]

use std::path::PathBuf;

use frame_extrapolation::frame_io::export_mask_png;
use frame_extrapolation::pipeline::{simulate, PipelineConfig};
use frame_extrapolation::scene::{preset, SequenceSpec};
use frame_extrapolation::shading::{focus_mask, DEFAULT_FOCUS_THRESHOLD};

fn main() -> frame_extrapolation::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("fx-focus"));
    std::fs::create_dir_all(&out).map_err(|e| frame_extrapolation::Error::Io {
        path: out.clone(),
        source: e,
    })?;
    let spec = SequenceSpec {
        fps_in: 30,
        fps_out: 60,
        frame_count: 6,
        width: 640,
        height: 360,
    };
    for (k, f) in simulate(
        &preset("moving-shadow", 0).unwrap(),
        &spec,
        &PipelineConfig::default(),
    )?
    .iter()
    .enumerate()
    {
        let e = &f.extrapolated;
        let m = focus_mask(
            &e.gae,
            &f.reference.color,
            &e.dyn_warped,
            DEFAULT_FOCUS_THRESHOLD,
        )?;
        let n = m.data().iter().filter(|&&v| v != 0.0).count();
        println!(
            "t={:.4}: {n} focus pixels ({:.2}% of the frame)",
            e.timestamp,
            100.0 * n as f64 / m.pixel_count() as f64
        );
        export_mask_png(&m, out.join(format!("focus_{k:02}.png")))?;
    }
    println!("masks in {}", out.display());
    Ok(())
}
