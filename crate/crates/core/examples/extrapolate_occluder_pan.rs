//! Full pipeline on the sliding-slab scene, scored against the renderer.
//!
//! cargo run --release --example extrapolate_occluder_pan -- [out_dir]

use std::path::PathBuf;

use frame_extrapolation::frame_io::{export_mask_png, export_png};
use frame_extrapolation::metrics::{psnr, ssim, DISPLAY_GAMMA};
use frame_extrapolation::pipeline::{simulate, PipelineConfig};
use frame_extrapolation::scene::{preset, SequenceSpec};

fn main() -> frame_extrapolation::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("fx-occluder"));
    std::fs::create_dir_all(&out).map_err(|e| frame_extrapolation::Error::Io {
        path: out.clone(),
        source: e,
    })?;
    let spec = SequenceSpec {
        fps_in: 30,
        fps_out: 60,
        frame_count: 12,
        width: 640,
        height: 360,
    };
    let frames = simulate(
        &preset("occluder-pan", 0).unwrap(),
        &spec,
        &PipelineConfig::default(),
    )?;
    println!("     t     PSNR    SSIM   holes  dynamic  ms");
    for (k, f) in frames.iter().enumerate() {
        let e = &f.extrapolated;
        let holes = e.input_mask.data().iter().filter(|&&v| v == 0.0).count();
        let dynamic = e.dyn_warped.data().iter().filter(|&&v| v != 0.0).count();
        println!(
            "{:.4}  {:6.2}  {:.4}  {holes:6}  {dynamic:7}  {:.1}",
            e.timestamp,
            psnr(&e.color, &f.reference.color, None)?,
            ssim(&e.color, &f.reference.color)?,
            e.timings.extrapolation_ms()
        );
        export_png(
            &e.color,
            out.join(format!("pred_{k:02}.png")),
            DISPLAY_GAMMA,
        )?;
        export_png(
            &f.reference.color,
            out.join(format!("ref_{k:02}.png")),
            DISPLAY_GAMMA,
        )?;
        export_mask_png(&e.input_mask, out.join(format!("input_mask_{k:02}.png")))?;
    }
    println!("PNGs in {}", out.display());
    Ok(())
}
