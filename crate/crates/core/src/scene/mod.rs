//! Analytic scenes and the ray-cast renderer used as ground truth.

mod presets;
mod render;
mod sequence;

use std::path::Path;

use glam::{DQuat, DVec3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CameraPose;

pub use presets::{preset, PRESET_NAMES};
pub use render::{render, render_shading_probe, AMBIENT};
pub use sequence::{generate_sequence, DisplayWindow, SequenceSpec, WindowProvider};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Shape {
    Sphere {
        radius: f64,
    },
    /// Axis-aligned box centered on the trajectory position.
    Box {
        half_extents: DVec3,
    },
    /// Horizontal plane `y = position.y`.
    GroundPlane,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Albedo {
    Solid {
        color: DVec3,
    },
    /// Procedural checkerboard in object-local coordinates.
    Checker {
        a: DVec3,
        b: DVec3,
        size: f64,
    },
}

impl Albedo {
    fn scaled(&self, k: f64) -> Albedo {
        match self {
            Albedo::Solid { color } => Albedo::Solid { color: *color * k },
            Albedo::Checker { a, b, size } => Albedo::Checker {
                a: *a * k,
                b: *b * k,
                size: *size,
            },
        }
    }
}

/// Time-parameterized rigid translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Trajectory {
    Static {
        position: DVec3,
    },
    ConstantVelocity {
        origin: DVec3,
        velocity: DVec3,
    },
    ConstantAcceleration {
        origin: DVec3,
        velocity: DVec3,
        acceleration: DVec3,
    },
    /// Circle in the horizontal plane through `center`.
    Circular {
        center: DVec3,
        radius: f64,
        angular_speed: f64,
        phase: f64,
    },
}

impl Trajectory {
    pub fn position(&self, t: f64) -> DVec3 {
        match *self {
            Trajectory::Static { position } => position,
            Trajectory::ConstantVelocity { origin, velocity } => origin + velocity * t,
            Trajectory::ConstantAcceleration {
                origin,
                velocity,
                acceleration,
            } => origin + velocity * t + acceleration * (0.5 * t * t),
            Trajectory::Circular {
                center,
                radius,
                angular_speed,
                phase,
            } => {
                let a = phase + angular_speed * t;
                center + DVec3::new(a.cos(), 0.0, a.sin()) * radius
            }
        }
    }

    pub fn is_static(&self) -> bool {
        matches!(self, Trajectory::Static { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub name: String,
    pub shape: Shape,
    pub albedo: Albedo,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointLight {
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CameraPath {
    Static {
        pos: DVec3,
        dir: DVec3,
        up: DVec3,
    },
    Linear {
        pos: DVec3,
        velocity: DVec3,
        dir: DVec3,
        up: DVec3,
    },
    /// Fixed position, view direction rotating about `up` at `rate` rad/s.
    Yaw {
        pos: DVec3,
        dir: DVec3,
        up: DVec3,
        rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraRig {
    pub path: CameraPath,
    pub vfov: f64,
    pub near: f64,
}

impl CameraRig {
    pub fn pose_at(&self, t: f64, aspect: f64) -> Result<CameraPose> {
        let (pos, dir, up) = match self.path {
            CameraPath::Static { pos, dir, up } => (pos, dir, up),
            CameraPath::Linear {
                pos,
                velocity,
                dir,
                up,
            } => (pos + velocity * t, dir, up),
            CameraPath::Yaw { pos, dir, up, rate } => {
                let q = DQuat::from_axis_angle(up.normalize(), rate * t);
                (pos, q * dir, up)
            }
        };
        CameraPose::new(pos, dir, up, self.vfov, aspect, self.near)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneScript {
    pub name: String,
    pub objects: Vec<SceneObject>,
    pub light: PointLight,
    pub camera: CameraRig,
    /// Radiance returned for rays that hit nothing.
    pub sky: DVec3,
    pub seed: u64,
}

impl SceneScript {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Json {
            path: "<scene>".into(),
            source: e,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }

    /// Resolves a preset name, falling back to a scene file path.
    pub fn resolve(name_or_path: &str, seed: u64) -> Result<Self> {
        match preset(name_or_path, seed) {
            Some(s) => Ok(s),
            None if Path::new(name_or_path).is_file() => Self::load(name_or_path),
            None => Err(Error::invalid(format!(
                "unknown scene `{name_or_path}` (presets: {})",
                PRESET_NAMES.join(", ")
            ))),
        }
    }

    pub fn object(&self, name: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectories_evaluate() {
        let cv = Trajectory::ConstantVelocity {
            origin: DVec3::X,
            velocity: DVec3::new(0.0, 2.0, 0.0),
        };
        assert_eq!(cv.position(0.5), DVec3::new(1.0, 1.0, 0.0));
        let ca = Trajectory::ConstantAcceleration {
            origin: DVec3::ZERO,
            velocity: DVec3::X,
            acceleration: DVec3::new(2.0, 0.0, 0.0),
        };
        assert_eq!(ca.position(2.0), DVec3::new(6.0, 0.0, 0.0));
        let c = Trajectory::Circular {
            center: DVec3::ZERO,
            radius: 2.0,
            angular_speed: std::f64::consts::FRAC_PI_2,
            phase: 0.0,
        };
        assert!((c.position(1.0) - DVec3::new(0.0, 0.0, 2.0)).length() < 1e-12);
        assert!(!c.is_static());
    }

    #[test]
    fn script_json_round_trip() {
        for name in PRESET_NAMES {
            let s = preset(name, 3).unwrap();
            let back = SceneScript::from_json(&s.to_json()).unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn yaw_path_rotates_about_up() {
        let rig = CameraRig {
            path: CameraPath::Yaw {
                pos: DVec3::ZERO,
                dir: DVec3::NEG_Z,
                up: DVec3::Y,
                rate: std::f64::consts::FRAC_PI_2,
            },
            vfov: 1.0,
            near: 0.1,
        };
        let p = rig.pose_at(1.0, 1.0).unwrap();
        assert!((p.dir - DVec3::NEG_X).length() < 1e-12);
    }

    #[test]
    fn unknown_scene_is_an_error() {
        assert!(SceneScript::resolve("no-such-preset", 0).is_err());
    }
}
