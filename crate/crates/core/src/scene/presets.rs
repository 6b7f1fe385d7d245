//! Built-in scenes, one per disocclusion or shading challenge.
//!
//! All presets use `tan(vfov / 2) = 0.5` and are tuned for 16:9 output at
//! 30 rendered frames per second. With that field of view a surface at view
//! depth `z` moves `H / z` pixels per scene unit for an `H`-pixel-tall display,
//! which is how the speeds below are chosen: screen-space motion of the key
//! surfaces is a whole number of pixels per half frame at 360p and its
//! multiples.

use glam::DVec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    Albedo, CameraPath, CameraRig, PointLight, SceneObject, SceneScript, Shape, Trajectory,
};

pub const PRESET_NAMES: [&str; 5] = [
    "static-cam-static",
    "pan-right",
    "strafe-reveal",
    "occluder-pan",
    "moving-shadow",
];

const FPS: f64 = 30.0;

fn rig(path: CameraPath) -> CameraRig {
    CameraRig {
        path,
        vfov: 2.0 * 0.5f64.atan(),
        near: 0.5,
    }
}

fn fixed_camera() -> CameraPath {
    CameraPath::Static {
        pos: DVec3::ZERO,
        dir: DVec3::NEG_Z,
        up: DVec3::Y,
    }
}

fn fixed(position: DVec3) -> Trajectory {
    Trajectory::Static { position }
}

fn solid(r: f64, g: f64, b: f64) -> Albedo {
    Albedo::Solid {
        color: DVec3::new(r, g, b),
    }
}

fn checker(a: DVec3, b: DVec3, size: f64) -> Albedo {
    Albedo::Checker { a, b, size }
}

/// Large checkered wall whose front face sits at `z = front_z`.
fn back_wall(front_z: f64) -> SceneObject {
    SceneObject {
        name: "back-wall".into(),
        shape: Shape::Box {
            half_extents: DVec3::new(80.0, 80.0, 0.5),
        },
        albedo: checker(DVec3::new(0.75, 0.7, 0.6), DVec3::new(0.4, 0.45, 0.55), 1.0),
        trajectory: fixed(DVec3::new(0.0, 0.0, front_z - 0.5)),
    }
}

fn ground(y: f64, albedo: Albedo) -> SceneObject {
    SceneObject {
        name: "ground".into(),
        shape: Shape::GroundPlane,
        albedo,
        trajectory: fixed(DVec3::new(0.0, y, 0.0)),
    }
}

fn ground_checker() -> Albedo {
    checker(DVec3::new(0.7, 0.7, 0.7), DVec3::new(0.35, 0.3, 0.25), 1.0)
}

fn static_cam_static() -> SceneScript {
    SceneScript {
        name: "static-cam-static".into(),
        objects: vec![
            back_wall(-12.0),
            ground(-2.0, ground_checker()),
            SceneObject {
                name: "ball".into(),
                shape: Shape::Sphere { radius: 1.0 },
                albedo: solid(0.8, 0.25, 0.2),
                trajectory: fixed(DVec3::new(-1.5, -1.0, -7.0)),
            },
            SceneObject {
                name: "crate".into(),
                shape: Shape::Box {
                    half_extents: DVec3::splat(0.75),
                },
                albedo: solid(0.2, 0.35, 0.8),
                trajectory: fixed(DVec3::new(2.0, -1.25, -6.0)),
            },
        ],
        light: PointLight {
            trajectory: fixed(DVec3::new(4.0, 5.0, 0.0)),
        },
        camera: rig(fixed_camera()),
        sky: DVec3::new(0.3, 0.4, 0.6),
        seed: 0,
    }
}

/// Camera translating right in front of a frontal wall at depth 10:
/// 16 px per rendered frame at 360p.
fn pan_right() -> SceneScript {
    let per_frame = 16.0 / 36.0;
    SceneScript {
        name: "pan-right".into(),
        objects: vec![back_wall(-10.0)],
        light: PointLight {
            trajectory: fixed(DVec3::new(0.0, 3.0, 2.0)),
        },
        camera: rig(CameraPath::Linear {
            pos: DVec3::ZERO,
            velocity: DVec3::new(per_frame * FPS, 0.0, 0.0),
            dir: DVec3::NEG_Z,
            up: DVec3::Y,
        }),
        sky: DVec3::new(0.3, 0.4, 0.6),
        seed: 0,
    }
}

/// Camera strafing past thin pillars: the background they sweep over is
/// seen a few frames before it is covered, then revealed again behind them.
fn strafe_reveal() -> SceneScript {
    let pillar = |name: &str, x: f64, color: Albedo| SceneObject {
        name: name.into(),
        shape: Shape::Box {
            half_extents: DVec3::new(0.12, 3.0, 0.12),
        },
        albedo: color,
        trajectory: fixed(DVec3::new(x, 0.5, -4.0)),
    };
    SceneScript {
        name: "strafe-reveal".into(),
        objects: vec![
            back_wall(-10.0),
            ground(-2.0, ground_checker()),
            pillar("pillar-a", -2.0, solid(0.8, 0.3, 0.2)),
            pillar("pillar-b", 0.0, solid(0.2, 0.7, 0.3)),
            pillar("pillar-c", 2.0, solid(0.25, 0.3, 0.85)),
        ],
        light: PointLight {
            trajectory: fixed(DVec3::new(2.0, 6.0, 0.0)),
        },
        camera: rig(CameraPath::Linear {
            pos: DVec3::new(-0.5, 0.0, 0.0),
            velocity: DVec3::new(0.15 * FPS, 0.0, 0.0),
            dir: DVec3::NEG_Z,
            up: DVec3::Y,
        }),
        sky: DVec3::new(0.3, 0.4, 0.6),
        seed: 0,
    }
}

/// Static camera, thin slab sliding right at depth 6 (16 px per rendered
/// frame at 360p). It starts just off the left edge so every background pixel
/// it later covers has been seen at least once. The light sits at the eye, so
/// the slab's shadow coincides with the region it occludes.
fn occluder_pan() -> SceneScript {
    let per_frame = 16.0 / 60.0;
    SceneScript {
        name: "occluder-pan".into(),
        objects: vec![
            back_wall(-10.0),
            ground(-2.0, ground_checker()),
            SceneObject {
                name: "occluder".into(),
                shape: Shape::Box {
                    half_extents: DVec3::new(0.5, 1.0, 0.05),
                },
                albedo: solid(0.85, 0.55, 0.15),
                trajectory: Trajectory::ConstantVelocity {
                    origin: DVec3::new(-5.95, 0.0, -6.05),
                    velocity: DVec3::new(per_frame * FPS, 0.0, 0.0),
                },
            },
        ],
        light: PointLight {
            trajectory: fixed(DVec3::ZERO),
        },
        camera: rig(fixed_camera()),
        sky: DVec3::new(0.3, 0.4, 0.6),
        seed: 0,
    }
}

/// Static geometry under a light sweeping sideways: a floating canopy casts
/// a detached shadow that slides across a plain floor.
fn moving_shadow() -> SceneScript {
    SceneScript {
        name: "moving-shadow".into(),
        objects: vec![
            back_wall(-30.0),
            ground(-2.0, solid(0.7, 0.7, 0.65)),
            SceneObject {
                name: "canopy".into(),
                shape: Shape::Box {
                    half_extents: DVec3::new(1.2, 0.05, 1.0),
                },
                albedo: solid(0.6, 0.3, 0.3),
                trajectory: fixed(DVec3::new(0.0, -0.5, -7.0)),
            },
        ],
        light: PointLight {
            trajectory: Trajectory::ConstantVelocity {
                origin: DVec3::new(-6.0, 4.0, -7.0),
                velocity: DVec3::new(3.0 * FPS, 0.0, 0.0),
            },
        },
        camera: rig(CameraPath::Static {
            pos: DVec3::new(0.0, 1.5, 0.0),
            dir: DVec3::new(0.0, -3.0, -8.0),
            up: DVec3::Y,
        }),
        sky: DVec3::new(0.3, 0.4, 0.6),
        seed: 0,
    }
}

/// Looks up a preset; `seed` scales each object's albedo by a deterministic
/// factor in `[0.95, 1.05]`.
pub fn preset(name: &str, seed: u64) -> Option<SceneScript> {
    let mut scene = match name {
        "static-cam-static" => static_cam_static(),
        "pan-right" => pan_right(),
        "strafe-reveal" => strafe_reveal(),
        "occluder-pan" => occluder_pan(),
        "moving-shadow" => moving_shadow(),
        _ => return None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for obj in &mut scene.objects {
        obj.albedo = obj.albedo.scaled(rng.random_range(0.95..=1.05));
    }
    scene.seed = seed;
    Some(scene)
}
