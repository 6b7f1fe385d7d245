//! Renders a preset through adaptive windows and writes it to disk.
//!
//! cargo run --release --example synthesize_sequence -- [scene] [out_dir]

use std::path::PathBuf;

use frame_extrapolation::frame_io::FrameRole;
use frame_extrapolation::pipeline::{synthesize, PipelineConfig};
use frame_extrapolation::scene::{SceneScript, SequenceSpec};

fn main() -> frame_extrapolation::Result<()> {
    let mut args = std::env::args().skip(1);
    let scene = args.next().unwrap_or_else(|| "pan-right".into());
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("fx-synth"));
    let spec = SequenceSpec {
        fps_in: 30,
        fps_out: 60,
        frame_count: 6,
        width: 320,
        height: 180,
    };
    let manifest = synthesize(
        &SceneScript::resolve(&scene, 0)?,
        &spec,
        &out,
        Some(&PipelineConfig::default()),
    )?;
    for f in &manifest.frames {
        let w = &f.window;
        println!(
            "{:>11?} t={:.4}  window [{:+.3}, {:+.3}] x [{:+.3}, {:+.3}]  {}x{}",
            f.role, f.timestamp, w.u0, w.u1, w.v0, w.v1, w.width_px, w.height_px
        );
    }
    let rendered = manifest.frames_with_role(FrameRole::Rendered).count();
    println!(
        "{rendered} rendered, {} ground truth -> {}",
        manifest.frames.len() - rendered,
        out.display()
    );
    Ok(())
}
