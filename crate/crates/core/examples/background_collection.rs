//! Pyramid statistics while the camera strafes past a column.
//!
//! cargo run --release --example background_collection

use frame_extrapolation::geometry::RenderWindow;
use frame_extrapolation::pipeline::{Extrapolator, PipelineConfig};
use frame_extrapolation::scene::{preset, render};

fn main() -> frame_extrapolation::Result<()> {
    let scene = preset("strafe-reveal", 0).unwrap();
    let (w, h) = (640, 360);
    let dt = 1.0 / 30.0;
    let config = PipelineConfig {
        aw: false,
        levels: 3,
        ..PipelineConfig::default()
    };
    let mut ex = Extrapolator::new(config, w, h)?;
    println!("frame  seeded  skipped  case1          case2          dropped  valid per level");
    for k in 0..8 {
        let t = k as f64 * dt;
        let pose = scene.camera.pose_at(t, w as f64 / h as f64)?;
        ex.run_rendered_step(render(
            &scene,
            t,
            t - dt,
            &pose,
            &RenderWindow::display(w, h),
        )?)?;
        let pyr = ex.pyramid().unwrap();
        let s = &pyr.stats;
        let valid: Vec<usize> = pyr.levels.iter().map(|l| l.valid_count()).collect();
        println!(
            "{k:5}  {:6}  {:7}  {:<13}  {:<13}  {:7}  {valid:?}",
            s.seeded,
            s.skipped_dynamic,
            format!("{:?}", s.case1),
            format!("{:?}", s.case2),
            s.dropped
        );
        if ex.ready() {
            let e = ex.run_extrapolation_step(0.5, None)?;
            let holes = e.input_mask.data().iter().filter(|&&v| v == 0.0).count();
            let left = e.valid.data().iter().filter(|&&v| v == 0.0).count();
            println!("       extrapolated: {holes} holes after warping, {left} after background projection");
        }
    }
    Ok(())
}
