//! The module ablations over the preset suite, one report per variant.
//!
//! cargo run --release --example ablation_matrix -- [out_dir]

use std::path::PathBuf;

use frame_extrapolation::metrics::{aggregate, frame_metrics, MetricReport};
use frame_extrapolation::pipeline::{simulate, PipelineConfig};
use frame_extrapolation::scene::{preset, SequenceSpec};
use frame_extrapolation::shading::{focus_mask, DEFAULT_FOCUS_THRESHOLD};

fn main() -> frame_extrapolation::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("fx-ablation"));
    let spec = SequenceSpec {
        fps_in: 30,
        fps_out: 60,
        frame_count: 12,
        width: 640,
        height: 360,
    };
    let base = PipelineConfig::default();
    let variants = [
        base.clone(),
        PipelineConfig {
            me: false,
            ..base.clone()
        },
        PipelineConfig {
            bgc: false,
            ..base.clone()
        },
        PipelineConfig {
            aw: false,
            ..base.clone()
        },
        PipelineConfig {
            scn: false,
            ..base.clone()
        },
    ];
    println!(
        "{:<8} {:>8} {:>8} {:>14}",
        "variant", "PSNR", "SSIM", "disocc. PSNR"
    );
    for cfg in &variants {
        let mut frames = Vec::new();
        for scene in [
            "pan-right",
            "strafe-reveal",
            "occluder-pan",
            "moving-shadow",
        ] {
            for f in simulate(&preset(scene, 0).unwrap(), &spec, cfg)? {
                let e = &f.extrapolated;
                let holes = e.input_mask.map(|v| if v == 0.0 { 1.0 } else { 0.0 });
                let focus = focus_mask(
                    &e.color,
                    &f.reference.color,
                    &e.dyn_warped,
                    DEFAULT_FOCUS_THRESHOLD,
                )?;
                frames.push(frame_metrics(
                    e.timestamp,
                    &e.color,
                    &f.reference.color,
                    Some(&f.reference.dyn_gt),
                    Some(&holes),
                    Some(&focus),
                )?);
            }
        }
        let report = MetricReport {
            label: cfg.label(),
            aggregate: aggregate(&frames),
            frames,
            config_echo: cfg.echo(),
        };
        let a = &report.aggregate;
        let disocc = a.regions.get("disocclusion").and_then(|r| r.pooled_psnr);
        println!(
            "{:<8} {:8.3} {:8.4} {:>14}",
            report.label,
            a.psnr,
            a.ssim,
            disocc.map_or("-".into(), |p| format!("{p:.3}"))
        );
        report.save(out.join(format!("{}.json", report.label)))?;
    }
    println!("reports in {}", out.display());
    Ok(())
}
