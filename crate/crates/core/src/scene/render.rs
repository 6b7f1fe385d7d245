use glam::DVec3;
use rayon::prelude::*;

use super::{Albedo, SceneObject, SceneScript, Shape};
use crate::buffer::Buffer;
use crate::error::Result;
use crate::frame::FrameRecord;
use crate::geometry::{pixel_center, CameraPose, PixelCamera, RenderWindow};

pub const AMBIENT: f64 = 0.1;
const SHADOW_BIAS: f64 = 1e-6;

struct Hit {
    /// Ray parameter, equal to view depth for camera rays.
    s: f64,
    normal: DVec3,
    /// Hit point relative to the object's position at the render time.
    local: DVec3,
}

fn intersect(
    shape: &Shape,
    center: DVec3,
    origin: DVec3,
    d: DVec3,
    s_min: f64,
    s_max: f64,
) -> Option<Hit> {
    let o = origin - center;
    match *shape {
        Shape::Sphere { radius } => {
            let a = d.dot(d);
            let b = o.dot(d);
            let c = o.dot(o) - radius * radius;
            let disc = b * b - a * c;
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            let s = [(-b - sq) / a, (-b + sq) / a]
                .into_iter()
                .find(|&s| s > s_min && s < s_max)?;
            let local = o + d * s;
            Some(Hit {
                s,
                normal: local / radius,
                local,
            })
        }
        Shape::Box { half_extents } => {
            let mut t_near = f64::NEG_INFINITY;
            let mut t_far = f64::INFINITY;
            let mut axis_near = 0;
            let mut axis_far = 0;
            for k in 0..3 {
                let inv = 1.0 / d[k];
                let mut t0 = (-half_extents[k] - o[k]) * inv;
                let mut t1 = (half_extents[k] - o[k]) * inv;
                if t0 > t1 {
                    std::mem::swap(&mut t0, &mut t1);
                }
                if t0 > t_near {
                    t_near = t0;
                    axis_near = k;
                }
                if t1 < t_far {
                    t_far = t1;
                    axis_far = k;
                }
            }
            if !(t_near <= t_far) {
                return None;
            }
            let (s, axis) = if t_near > s_min && t_near < s_max {
                (t_near, axis_near)
            } else if t_far > s_min && t_far < s_max {
                (t_far, axis_far)
            } else {
                return None;
            };
            let local = o + d * s;
            let mut normal = DVec3::ZERO;
            normal[axis] = local[axis].signum();
            Some(Hit { s, normal, local })
        }
        Shape::GroundPlane => {
            if d.y == 0.0 {
                return None;
            }
            let s = -o.y / d.y;
            if !(s > s_min && s < s_max) {
                return None;
            }
            let mut local = o + d * s;
            local.y = 0.0;
            let normal = if o.y >= 0.0 { DVec3::Y } else { DVec3::NEG_Y };
            Some(Hit { s, normal, local })
        }
    }
}

fn albedo_at(albedo: &Albedo, hit: &Hit) -> DVec3 {
    match *albedo {
        Albedo::Solid { color } => color,
        Albedo::Checker { a, b, size } => {
            // use the two coordinates tangent to the surface so faces never sit on a cell boundary
            let n = hit.normal.abs();
            let (u, v) = if n.x >= n.y && n.x >= n.z {
                (hit.local.y, hit.local.z)
            } else if n.y >= n.z {
                (hit.local.x, hit.local.z)
            } else {
                (hit.local.x, hit.local.y)
            };
            let parity = ((u / size).floor() + (v / size).floor()).rem_euclid(2.0);
            if parity < 0.5 {
                a
            } else {
                b
            }
        }
    }
}

struct SceneAt<'a> {
    objects: &'a [SceneObject],
    centers: Vec<DVec3>,
    light: DVec3,
}

impl<'a> SceneAt<'a> {
    fn new(scene: &'a SceneScript, t: f64) -> Self {
        SceneAt {
            objects: &scene.objects,
            centers: scene
                .objects
                .iter()
                .map(|o| o.trajectory.position(t))
                .collect(),
            light: scene.light.trajectory.position(t),
        }
    }

    fn nearest(&self, origin: DVec3, d: DVec3, s_min: f64) -> Option<(usize, Hit)> {
        let mut best: Option<(usize, Hit)> = None;
        for (i, obj) in self.objects.iter().enumerate() {
            let s_max = best.as_ref().map_or(f64::INFINITY, |(_, h)| h.s);
            if let Some(h) = intersect(&obj.shape, self.centers[i], origin, d, s_min, s_max) {
                best = Some((i, h));
            }
        }
        best
    }

    fn occluded(&self, p: DVec3) -> bool {
        let to_light = self.light - p;
        self.objects
            .iter()
            .zip(&self.centers)
            .any(|(obj, &c)| intersect(&obj.shape, c, p, to_light, SHADOW_BIAS, 1.0).is_some())
    }

    /// Returns `(n·l clamped at zero, in_shadow)` at a surface point.
    fn lighting(&self, p: DVec3, normal: DVec3) -> (f64, bool) {
        let ndl = normal.dot((self.light - p).normalize()).max(0.0);
        let shadowed = ndl > 0.0 && self.occluded(p + normal * SHADOW_BIAS);
        (ndl, shadowed)
    }
}

/// Ray-casts one frame at time `t` with motion vectors back to `prev_t`.
pub fn render(
    scene: &SceneScript,
    t: f64,
    prev_t: f64,
    pose: &CameraPose,
    window: &RenderWindow,
) -> Result<FrameRecord> {
    window.validate()?;
    let now = SceneAt::new(scene, t);
    let prev_centers: Vec<DVec3> = scene
        .objects
        .iter()
        .map(|o| o.trajectory.position(prev_t))
        .collect();
    let prev_pose = scene.camera.pose_at(prev_t, pose.aspect)?;
    let prev_cam = PixelCamera::new(&prev_pose, window);
    let camera_still = prev_pose == *pose;
    let (w, h) = window.size();

    struct Px {
        color: [f32; 3],
        depth: f32,
        motion: [f32; 2],
        dynamic: f32,
    }
    let pixels: Vec<Px> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let center = pixel_center(idx % w, idx / w);
            let d = pose.ray_through_ndc(window.pixel_to_ndc(center));
            match now.nearest(pose.pos, d, pose.near) {
                None => Px {
                    color: scene.sky.as_vec3().to_array(),
                    depth: f32::INFINITY,
                    motion: [0.0; 2],
                    dynamic: 0.0,
                },
                Some((i, hit)) => {
                    let obj = &scene.objects[i];
                    let p = pose.pos + d * hit.s;
                    let (ndl, shadowed) = now.lighting(p, hit.normal);
                    let lit = if shadowed { 0.0 } else { ndl };
                    let color = albedo_at(&obj.albedo, &hit) * (AMBIENT + (1.0 - AMBIENT) * lit);
                    let motion = if obj.trajectory.is_static() && camera_still {
                        [0.0; 2]
                    } else {
                        let prev_p = if obj.trajectory.is_static() {
                            p
                        } else {
                            hit.local + prev_centers[i]
                        };
                        (prev_cam.project(prev_p).pixel - center)
                            .as_vec2()
                            .to_array()
                    };
                    Px {
                        color: color.as_vec3().to_array(),
                        depth: hit.s as f32,
                        motion,
                        dynamic: if obj.trajectory.is_static() { 0.0 } else { 1.0 },
                    }
                }
            }
        })
        .collect();

    let mut color = Vec::with_capacity(w * h * 3);
    let mut depth = Vec::with_capacity(w * h);
    let mut motion = Vec::with_capacity(w * h * 2);
    let mut dyn_gt = Vec::with_capacity(w * h);
    for px in pixels {
        color.extend_from_slice(&px.color);
        depth.push(px.depth);
        motion.extend_from_slice(&px.motion);
        dyn_gt.push(px.dynamic);
    }
    Ok(FrameRecord {
        color: Buffer::from_vec(w, h, 3, color)?,
        depth: Buffer::from_vec(w, h, 1, depth)?,
        motion: Buffer::from_vec(w, h, 2, motion)?,
        dyn_gt: Buffer::from_vec(w, h, 1, dyn_gt)?,
        pose: *pose,
        window: *window,
        timestamp: t,
    })
}

/// Oracle lighting probe: channel 0 is 1 where the visible surface faces the
/// light but is shadowed, channel 1 is the unshadowed `n·l` term.
pub fn render_shading_probe(
    scene: &SceneScript,
    t: f64,
    pose: &CameraPose,
    window: &RenderWindow,
) -> Buffer {
    let now = SceneAt::new(scene, t);
    let (w, h) = window.size();
    let values: Vec<[f32; 2]> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let center = pixel_center(idx % w, idx / w);
            let d = pose.ray_through_ndc(window.pixel_to_ndc(center));
            match now.nearest(pose.pos, d, pose.near) {
                None => [0.0, 0.0],
                Some((_, hit)) => {
                    let (ndl, shadowed) = now.lighting(pose.pos + d * hit.s, hit.normal);
                    [if shadowed { 1.0 } else { 0.0 }, ndl as f32]
                }
            }
        })
        .collect();
    Buffer::from_vec(w, h, 2, values.into_iter().flatten().collect()).expect("probe dims")
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use crate::geometry::unproject;
    use glam::DVec2;

    fn simple_scene(box_velocity: DVec3, cam: CameraPath) -> SceneScript {
        SceneScript {
            name: "test".into(),
            objects: vec![
                SceneObject {
                    name: "wall".into(),
                    shape: Shape::Box {
                        half_extents: DVec3::new(50.0, 50.0, 0.5),
                    },
                    albedo: Albedo::Checker {
                        a: DVec3::splat(0.8),
                        b: DVec3::splat(0.3),
                        size: 1.0,
                    },
                    trajectory: Trajectory::Static {
                        position: DVec3::new(0.0, 0.0, -10.5),
                    },
                },
                SceneObject {
                    name: "ball".into(),
                    shape: Shape::Sphere { radius: 1.0 },
                    albedo: Albedo::Solid {
                        color: DVec3::new(0.9, 0.2, 0.2),
                    },
                    trajectory: Trajectory::ConstantVelocity {
                        origin: DVec3::new(0.0, 0.0, -6.0),
                        velocity: box_velocity,
                    },
                },
            ],
            light: PointLight {
                trajectory: Trajectory::Static {
                    position: DVec3::new(0.0, 0.0, 0.0),
                },
            },
            camera: CameraRig {
                path: cam,
                vfov: 2.0 * 0.5f64.atan(),
                near: 0.5,
            },
            sky: DVec3::ZERO,
            seed: 0,
        }
    }

    fn static_cam() -> CameraPath {
        CameraPath::Static {
            pos: DVec3::ZERO,
            dir: DVec3::NEG_Z,
            up: DVec3::Y,
        }
    }

    #[test]
    fn static_scene_has_zero_motion() {
        let s = simple_scene(DVec3::ZERO, static_cam());
        let mut s = s;
        s.objects[1].trajectory = Trajectory::Static {
            position: DVec3::new(0.0, 0.0, -6.0),
        };
        let pose = s.camera.pose_at(0.0, 16.0 / 9.0).unwrap();
        let f = render(&s, 1.0, 0.9, &pose, &RenderWindow::display(64, 36)).unwrap();
        assert!(f.motion.data().iter().all(|&v| v == 0.0));
        assert!(f.dyn_gt.data().iter().all(|&v| v == 0.0));
        assert!(f.depth.data().iter().all(|&d| d > 0.0 && d.is_finite()));
        assert!(f.color.data().iter().all(|&c| c > 0.0));
    }

    #[test]
    fn translating_camera_over_frontal_plane() {
        // wall front face at depth 10; tan(vfov/2) = 0.5 gives H/10 px per unit at that depth
        let speed = 0.25; // units per second
        let cam = CameraPath::Linear {
            pos: DVec3::ZERO,
            velocity: DVec3::new(speed, 0.0, 0.0),
            dir: DVec3::NEG_Z,
            up: DVec3::Y,
        };
        let mut s = simple_scene(DVec3::ZERO, cam);
        s.objects.truncate(1);
        let (w, h) = (160usize, 90usize);
        let pose = s.camera.pose_at(1.0, w as f64 / h as f64).unwrap();
        let f = render(
            &s,
            1.0,
            0.0,
            &pose,
            &RenderWindow::display(w as u32, h as u32),
        )
        .unwrap();
        let expected = speed * h as f64 / 10.0;
        for v in f.motion.data().chunks(2) {
            assert!((v[0] as f64 - expected).abs() < 1e-4, "{v:?}");
            assert!(v[1].abs() < 1e-4);
        }
    }

    #[test]
    fn shadowed_pixels_are_ambient_only() {
        // light behind the sphere as seen from the wall: the wall patch behind it is in shadow
        let mut s = simple_scene(DVec3::ZERO, static_cam());
        s.objects[1].trajectory = Trajectory::Static {
            position: DVec3::new(0.0, 0.0, -6.0),
        };
        s.light.trajectory = Trajectory::Static {
            position: DVec3::new(0.0, 0.0, -3.0),
        };
        s.objects[0].albedo = Albedo::Solid {
            color: DVec3::splat(0.6),
        };
        let pose = s.camera.pose_at(0.0, 1.0).unwrap();
        let win = RenderWindow::display(41, 41);
        let f = render(&s, 0.0, -0.1, &pose, &win).unwrap();
        let probe = render_shading_probe(&s, 0.0, &pose, &win);
        let mut shadowed = 0;
        for idx in 0..41 * 41 {
            if probe.at(idx)[0] == 1.0 {
                shadowed += 1;
                for &c in f.color.at(idx) {
                    assert!((c - 0.06).abs() < 1e-6);
                }
            }
        }
        assert!(shadowed > 0);
    }

    #[test]
    fn motion_vectors_match_rigid_motion_oracle() {
        let cam = CameraPath::Linear {
            pos: DVec3::ZERO,
            velocity: DVec3::new(0.3, 0.1, 0.0),
            dir: DVec3::new(0.1, 0.0, -1.0),
            up: DVec3::Y,
        };
        let s = simple_scene(DVec3::new(1.5, -0.5, 0.2), cam);
        let (t, pt) = (1.0, 0.9);
        let win = RenderWindow::new(-1.1, -1.0, 1.2, 1.05, 115, 82).unwrap();
        let pose = s.camera.pose_at(t, 1.6).unwrap();
        let prev_pose = s.camera.pose_at(pt, 1.6).unwrap();
        let f = render(&s, t, pt, &pose, &win).unwrap();
        let mut checked = 0;
        for j in 0..82 {
            for i in 0..115 {
                let depth = f.depth.get(i, j, 0) as f64;
                let p = unproject(pixel_center(i, j), depth, &pose, &win).unwrap();
                let delta = if f.dyn_gt.get(i, j, 0) == 1.0 {
                    s.objects[1].trajectory.position(pt) - s.objects[1].trajectory.position(t)
                } else {
                    DVec3::ZERO
                };
                let back = crate::geometry::project(p + delta, &prev_pose, &win).pixel;
                let v = f.motion.pixel(i, j);
                let x_prime = pixel_center(i, j) + DVec2::new(v[0] as f64, v[1] as f64);
                assert!(
                    (back - x_prime).length() < 1e-3,
                    "{i},{j}: {back:?} vs {x_prime:?}"
                );
                checked += 1;
            }
        }
        assert_eq!(checked, 115 * 82);
        assert!(f.dyn_gt.data().iter().any(|&v| v == 1.0));
    }
}
