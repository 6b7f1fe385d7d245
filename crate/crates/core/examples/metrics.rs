//! PSNR and SSIM on small synthetic images, then a sequence evaluated from disk.
//!
//! cargo run --release --example metrics

use frame_extrapolation::metrics::{evaluate_sequence, psnr, ssim};
use frame_extrapolation::pipeline::{extrapolate_sequence, synthesize, PipelineConfig};
use frame_extrapolation::scene::{preset, SequenceSpec};
use frame_extrapolation::Buffer;

fn main() -> frame_extrapolation::Result<()> {
    let gray = Buffer::filled(64, 64, 3, 0.5);
    let brighter = gray.map(|v| v + 0.05);
    println!(
        "flat +0.05: PSNR {:.2} dB, SSIM {:.4}",
        psnr(&brighter, &gray, None)?,
        ssim(&brighter, &gray)?
    );
    let noisy = Buffer::from_vec(
        64,
        64,
        3,
        (0..64 * 64 * 3)
            .map(|i| 0.5 + 0.02 * ((i * 7919 % 13) as f32 / 6.0 - 1.0))
            .collect(),
    )?;
    println!(
        "structured noise: PSNR {:.2} dB, SSIM {:.4}",
        psnr(&noisy, &gray, None)?,
        ssim(&noisy, &gray)?
    );

    let dir = std::env::temp_dir().join("fx-metrics");
    let spec = SequenceSpec {
        fps_in: 30,
        fps_out: 60,
        frame_count: 6,
        width: 320,
        height: 180,
    };
    let config = PipelineConfig::default();
    synthesize(
        &preset("strafe-reveal", 0).unwrap(),
        &spec,
        dir.join("seq"),
        Some(&config),
    )?;
    extrapolate_sequence(dir.join("seq"), dir.join("pred"), &config, false)?;
    let report = evaluate_sequence(dir.join("pred"), dir.join("seq"))?;
    print!("{}", report.to_text());
    Ok(())
}
