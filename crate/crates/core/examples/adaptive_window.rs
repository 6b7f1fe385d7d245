//! Window planning along the panning camera, in both pixel modes.
//!
//! cargo run --release --example adaptive_window

use frame_extrapolation::scene::preset;
use frame_extrapolation::scene::render;
use frame_extrapolation::window::{crop_to_display, CropFilter, PixelMode, WindowSettings};

fn main() -> frame_extrapolation::Result<()> {
    let scene = preset("pan-right", 0).unwrap();
    let (w, h) = (640, 360);
    let dt = 1.0 / 30.0;
    for mode in [PixelMode::Density, PixelMode::Budget] {
        let settings = WindowSettings {
            base_w: w,
            base_h: h,
            mode,
            plane_d: None,
            max_extent: 1.5,
            alpha: 0.5,
        };
        println!("{mode}:");
        for k in 1..4 {
            let t = k as f64 * dt;
            let cur = scene.camera.pose_at(t, w as f64 / h as f64)?;
            let prev = scene.camera.pose_at(t - dt, w as f64 / h as f64)?;
            let (plan, window) = settings.plan(&cur, &prev)?;
            let frame = render(&scene, t, t - dt, &cur, &window)?;
            let crop = crop_to_display(&frame.color, &window, w, h, CropFilter::Auto)?;
            println!(
                "  t={t:.4} rect u [{:+.4}, {:+.4}] v [{:+.4}, {:+.4}] d={:.1} clamped={}  buffer {}x{}  crop {}x{}",
                plan.rect.u0,
                plan.rect.u1,
                plan.rect.v0,
                plan.rect.v1,
                plan.plane_distance,
                plan.clamped,
                window.width_px,
                window.height_px,
                crop.width(),
                crop.height()
            );
        }
    }
    Ok(())
}
