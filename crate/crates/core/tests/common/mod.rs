#![allow(dead_code)]

use frame_extrapolation::buffer::Buffer;
use frame_extrapolation::frame::FrameRecord;
use frame_extrapolation::geometry::RenderWindow;
use frame_extrapolation::pipeline::{simulate, PipelineConfig, SimulatedFrame};
use frame_extrapolation::scene::{
    preset, render, Albedo, CameraPath, CameraRig, PointLight, SceneObject, SceneScript,
    SequenceSpec, Shape, Trajectory,
};
use glam::DVec3;

pub const W: u32 = 640;
pub const H: u32 = 360;
/// Rendered frame interval at 30 fps.
pub const DT: f64 = 1.0 / 30.0;

pub fn spec(frames: usize) -> SequenceSpec {
    SequenceSpec {
        fps_in: 30,
        fps_out: 60,
        frame_count: frames,
        width: W,
        height: H,
    }
}

pub fn small_spec(frames: usize, width: u32, height: u32) -> SequenceSpec {
    SequenceSpec {
        width,
        height,
        ..spec(frames)
    }
}

pub fn run(scene: &str, frames: usize, cfg: &PipelineConfig) -> Vec<SimulatedFrame> {
    simulate(&preset(scene, 0).unwrap(), &spec(frames), cfg).unwrap()
}

pub fn config() -> PipelineConfig {
    PipelineConfig::default()
}

/// Mean pixel position of non-zero mask entries.
pub fn centroid(mask: &Buffer) -> Option<(f64, f64)> {
    let (w, _) = mask.dims();
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for (i, &v) in mask.data().iter().enumerate() {
        if v != 0.0 {
            sx += (i % w) as f64 + 0.5;
            sy += (i / w) as f64 + 0.5;
            n += 1;
        }
    }
    (n > 0).then(|| (sx / n as f64, sy / n as f64))
}

pub fn mask_from(w: usize, h: usize, f: impl Fn(usize) -> bool) -> Buffer {
    Buffer::from_vec(
        w,
        h,
        1,
        (0..w * h).map(|i| if f(i) { 1.0 } else { 0.0 }).collect(),
    )
    .unwrap()
}

pub fn count(mask: &Buffer) -> usize {
    mask.data().iter().filter(|&&v| v != 0.0).count()
}

/// Renders `scene` at `t` through the display window, motion against `t - DT`.
pub fn frame_at(scene: &SceneScript, t: f64, w: u32, h: u32) -> FrameRecord {
    let pose = scene.camera.pose_at(t, w as f64 / h as f64).unwrap();
    render(scene, t, t - DT, &pose, &RenderWindow::display(w, h)).unwrap()
}

/// Fixed camera at the origin looking down -Z at a plain wall at depth 10,
/// with one moving object in front and the light at the eye.
pub fn wall_and(object: Shape, trajectory: Trajectory) -> SceneScript {
    SceneScript {
        name: "custom".into(),
        objects: vec![
            SceneObject {
                name: "wall".into(),
                shape: Shape::Box {
                    half_extents: DVec3::new(50.0, 50.0, 0.5),
                },
                albedo: Albedo::Checker {
                    a: DVec3::splat(0.8),
                    b: DVec3::new(0.3, 0.35, 0.4),
                    size: 0.5,
                },
                trajectory: Trajectory::Static {
                    position: DVec3::new(0.0, 0.0, -10.5),
                },
            },
            SceneObject {
                name: "mover".into(),
                shape: object,
                albedo: Albedo::Solid {
                    color: DVec3::new(0.9, 0.3, 0.2),
                },
                trajectory,
            },
        ],
        light: PointLight {
            trajectory: Trajectory::Static {
                position: DVec3::ZERO,
            },
        },
        camera: CameraRig {
            path: CameraPath::Static {
                pos: DVec3::ZERO,
                dir: DVec3::NEG_Z,
                up: DVec3::Y,
            },
            vfov: 2.0 * 0.5f64.atan(),
            near: 0.5,
        },
        sky: DVec3::new(0.3, 0.4, 0.6),
        seed: 0,
    }
}
