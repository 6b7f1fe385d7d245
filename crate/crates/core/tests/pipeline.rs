mod common;

use common::*;
use frame_extrapolation::geometry::{pixel_center, PixelCamera, RenderWindow};
use frame_extrapolation::pipeline::simulate;
use frame_extrapolation::pipeline::PipelineConfig;
use frame_extrapolation::scene::preset;
use glam::DVec2;

#[test]
fn generated_depth_and_motion_agree() {
    let display = RenderWindow::display(W, H);
    for scene in ["pan-right", "strafe-reveal", "occluder-pan"] {
        let mut checked = 0;
        for f in run(scene, 5, &config()) {
            let e = &f.extrapolated;
            let here = PixelCamera::new(&e.pose, &display);
            let back = PixelCamera::new(&f.source.pose, &display);
            for i in 0..e.depth.pixel_count() {
                if e.input_mask.data()[i] != 0.5 || e.valid.data()[i] == 0.0 {
                    continue;
                }
                let x = pixel_center(i % W as usize, i / W as usize);
                let p = here.unproject(x, e.depth.data()[i] as f64);
                let m = e.motion.at(i);
                let target = x + DVec2::new(m[0] as f64, m[1] as f64);
                let err = back.project(p).pixel.distance(target);
                assert!(err <= 1.0, "{scene} t={} pixel {i}: {err}", e.timestamp);
                checked += 1;
            }
        }
        assert!(checked > 10_000, "{scene}: {checked}");
    }
}

#[test]
fn two_generated_frames_per_rendered_frame() {
    let cfg = PipelineConfig { n: 2, ..config() };
    let spec = frame_extrapolation::scene::SequenceSpec {
        fps_out: 90,
        ..small_spec(4, 160, 90)
    };
    let frames = simulate(&preset("pan-right", 0).unwrap(), &spec, &cfg).unwrap();
    let alphas: Vec<f64> = frames.iter().map(|f| f.extrapolated.alpha).collect();
    assert_eq!(alphas.len(), 4);
    for pair in alphas.chunks(2) {
        assert!((pair[0] - 1.0 / 3.0).abs() < 1e-12 && (pair[1] - 2.0 / 3.0).abs() < 1e-12);
    }
    for f in &frames {
        assert!((f.extrapolated.timestamp - f.reference.timestamp).abs() < 1e-9);
    }
}
