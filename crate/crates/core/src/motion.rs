//! History tracking, next-position estimation, and forward warping.

use glam::{DVec2, DVec3};
use rayon::prelude::*;

use crate::buffer::Buffer;
use crate::error::{Error, Result};
use crate::frame::FrameRecord;
use crate::geometry::{pixel_center, CameraPose, PixelCamera, RenderWindow};
use crate::scatter::DepthScatter;

pub const DEFAULT_HISTORY_LEN: usize = 2;
/// Static-test threshold in pixels.
pub const DEFAULT_EPS_STATIC: f64 = 0.5;

/// Per-pixel world-space trajectories aligned to one rendered frame.
///
/// `P_0` is the most recent position. Pixels without geometry carry no
/// trajectory and are never dynamic.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryState {
    k: usize,
    traj: Vec<DVec3>,
    geometry: Vec<bool>,
    dynamic: Buffer,
    moving: Buffer,
    pose: CameraPose,
    window: RenderWindow,
    timestamp: f64,
}

impl HistoryState {
    /// Cold start: every pixel static with its trajectory filled by the
    /// current position.
    pub fn seed(frame: &FrameRecord, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid(format!(
                "history length must be at least 2, got {k}"
            )));
        }
        frame.validate()?;
        let cam = PixelCamera::new(&frame.pose, &frame.window);
        let (w, h) = frame.dims();
        let points: Vec<Option<DVec3>> = (0..w * h)
            .into_par_iter()
            .map(|idx| {
                let d = frame.depth.data()[idx];
                (d.is_finite() && d > 0.0)
                    .then(|| cam.unproject(pixel_center(idx % w, idx / w), d as f64))
            })
            .collect();
        let mut traj = Vec::with_capacity(w * h * k);
        let mut geometry = Vec::with_capacity(w * h);
        for p in points {
            traj.extend(std::iter::repeat_n(p.unwrap_or(DVec3::ZERO), k));
            geometry.push(p.is_some());
        }
        Ok(HistoryState {
            k,
            traj,
            geometry,
            dynamic: Buffer::new(w, h, 1),
            moving: Buffer::new(w, h, 1),
            pose: frame.pose,
            window: frame.window,
            timestamp: frame.timestamp,
        })
    }

    pub fn history_len(&self) -> usize {
        self.k
    }

    pub fn pose(&self) -> &CameraPose {
        &self.pose
    }

    pub fn window(&self) -> &RenderWindow {
        &self.window
    }

    pub fn timestamp(&self) -> f64 {
        self.timestamp
    }

    /// Dynamic mask, 1 where the static test failed.
    pub fn dynamic_mask(&self) -> &Buffer {
        &self.dynamic
    }

    /// 1 wherever the static test failed, including pixels whose trajectory
    /// fell back to static because `x'` left the previous frame. A superset of
    /// the dynamic mask; background collection skips these pixels.
    pub fn moving_mask(&self) -> &Buffer {
        &self.moving
    }

    pub fn is_dynamic(&self, idx: usize) -> bool {
        self.dynamic.data()[idx] != 0.0
    }

    pub fn has_geometry(&self, idx: usize) -> bool {
        self.geometry[idx]
    }

    /// `P_0 .. P_{k-1}` for a pixel, or `None` where nothing was hit.
    pub fn trajectory(&self, idx: usize) -> Option<&[DVec3]> {
        self.geometry[idx].then(|| &self.traj[idx * self.k..(idx + 1) * self.k])
    }

    /// Same state with every trajectory collapsed onto `P_0` and the dynamic
    /// mask cleared; fragments then move only with the camera.
    pub fn as_static(&self) -> HistoryState {
        let mut out = self.clone();
        for chunk in out.traj.chunks_mut(self.k) {
            let p0 = chunk[0];
            chunk.fill(p0);
        }
        out.dynamic.data_mut().fill(0.0);
        out.moving.data_mut().fill(0.0);
        out
    }
}

/// Advances the history by one rendered frame using the static test.
///
/// A pixel whose reprojection under the previous camera disagrees with its
/// motion vector by more than `eps_static` pixels is dynamic and inherits the
/// previous trajectory found at `x + V[x]` (nearest pixel). Otherwise, or when
/// that lookup leaves the previous frame or lands on empty sky, the pixel is
/// static and its trajectory is reset to the current position.
pub fn update_history(
    prev: &HistoryState,
    frame: &FrameRecord,
    eps_static: f64,
) -> Result<HistoryState> {
    frame.validate()?;
    if !(frame.timestamp > prev.timestamp) {
        return Err(Error::State(format!(
            "history is aligned to t={} but frame has t={}",
            prev.timestamp, frame.timestamp
        )));
    }
    prev.window
        .validate()
        .map_err(|e| Error::State(format!("previous window: {e}")))?;
    if prev.traj.len() != prev.window.pixel_count() * prev.k {
        return Err(Error::State(
            "history buffers do not match its window".into(),
        ));
    }
    let k = prev.k;
    let (w, h) = frame.dims();
    let cam = PixelCamera::new(&frame.pose, &frame.window);
    // previous camera, measured in the current window's grid (the motion-vector convention)
    let prev_cam = PixelCamera::new(&prev.pose, &frame.window);

    struct Px {
        traj: Vec<DVec3>,
        geometry: bool,
        dynamic: bool,
        moving: bool,
    }
    let pixels: Vec<Px> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let depth = frame.depth.data()[idx];
            if !(depth.is_finite() && depth > 0.0) {
                return Px {
                    traj: vec![DVec3::ZERO; k],
                    geometry: false,
                    dynamic: false,
                    moving: false,
                };
            }
            let x = pixel_center(idx % w, idx / w);
            let p = cam.unproject(x, depth as f64);
            let x_hat = prev_cam.project(p).pixel;
            let v = frame.motion.at(idx);
            let x_prime = x + DVec2::new(v[0] as f64, v[1] as f64);
            let moving = x_hat.distance(x_prime) > eps_static;
            if moving {
                let in_prev = frame.window.pixel_to(x_prime, &prev.window);
                if let Some(src) = prev.window.pixel_index(in_prev) {
                    let src_idx = src.1 * prev.window.width_px as usize + src.0;
                    if let Some(old) = prev.trajectory(src_idx) {
                        let mut traj = Vec::with_capacity(k);
                        traj.push(p);
                        traj.extend_from_slice(&old[..k - 1]);
                        return Px {
                            traj,
                            geometry: true,
                            dynamic: true,
                            moving,
                        };
                    }
                }
            }
            Px {
                traj: vec![p; k],
                geometry: true,
                dynamic: false,
                moving,
            }
        })
        .collect();

    let mut traj = Vec::with_capacity(w * h * k);
    let mut geometry = Vec::with_capacity(w * h);
    let mut dynamic = Vec::with_capacity(w * h);
    let mut moving = Vec::with_capacity(w * h);
    for px in pixels {
        traj.extend_from_slice(&px.traj);
        geometry.push(px.geometry);
        dynamic.push(if px.dynamic { 1.0 } else { 0.0 });
        moving.push(if px.moving { 1.0 } else { 0.0 });
    }
    Ok(HistoryState {
        k,
        traj,
        geometry,
        dynamic: Buffer::from_vec(w, h, 1, dynamic)?,
        moving: Buffer::from_vec(w, h, 1, moving)?,
        pose: frame.pose,
        window: frame.window,
        timestamp: frame.timestamp,
    })
}

/// Linear extrapolation of the last two trajectory points:
/// `NP = P_0 + alpha * (P_0 - P_1)`. Pixels without geometry yield `None`.
pub fn estimate_positions(hist: &HistoryState, alpha: f64) -> Result<Vec<Option<DVec3>>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "extrapolation factor must lie in [0, 1], got {alpha}"
        )));
    }
    if hist.k < 2 {
        return Err(Error::invalid(
            "position estimation needs at least two history entries",
        ));
    }
    Ok((0..hist.geometry.len())
        .into_par_iter()
        .map(|idx| hist.trajectory(idx).map(|t| alpha * (t[0] - t[1]) + t[0]))
        .collect())
}

/// Initial extrapolated frame produced by splatting fragments forward.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpOutput {
    pub color: Buffer,
    /// View depth in the target camera, `+inf` where nothing landed.
    pub depth: Buffer,
    /// Destination-indexed offsets in target-window pixels: `x + motion_back[x]`
    /// is the source pixel center the fragment came from.
    pub motion_back: Buffer,
    pub valid: Buffer,
    pub dyn_warped: Buffer,
    pub window: RenderWindow,
}

impl WarpOutput {
    pub fn empty(window: &RenderWindow) -> Self {
        let (w, h) = window.size();
        WarpOutput {
            color: Buffer::new(w, h, 3),
            depth: Buffer::filled(w, h, 1, f32::INFINITY),
            motion_back: Buffer::new(w, h, 2),
            valid: Buffer::new(w, h, 1),
            dyn_warped: Buffer::new(w, h, 1),
            window: *window,
        }
    }

    pub fn is_valid(&self, idx: usize) -> bool {
        self.valid.data()[idx] != 0.0
    }

    pub fn invalid_count(&self) -> usize {
        self.valid.data().iter().filter(|&&v| v == 0.0).count()
    }
}

/// Projects each fragment's estimated position into the target view and keeps
/// the nearest fragment per destination pixel (ties go to the smaller source
/// index). Fragments outside the target window or in front of its near plane
/// are dropped.
pub fn forward_warp(
    frame: &FrameRecord,
    hist: &HistoryState,
    next_positions: &[Option<DVec3>],
    target_pose: &CameraPose,
    target_window: &RenderWindow,
) -> Result<WarpOutput> {
    let (w, h) = frame.dims();
    if next_positions.len() != w * h || hist.geometry.len() != w * h {
        return Err(Error::invalid(
            "next positions are not aligned with the frame",
        ));
    }
    let cam = PixelCamera::new(target_pose, target_window);
    let (tw, th) = target_window.size();
    let scatter = DepthScatter::new(tw * th);
    next_positions.par_iter().enumerate().for_each(|(src, np)| {
        let Some(p) = np else { return };
        let pr = cam.project(*p);
        if !pr.in_frustum {
            return;
        }
        let dest = pr.pixel.y as usize * tw + pr.pixel.x as usize;
        scatter.offer(dest, pr.depth as f32, src as u32);
    });
    let winners = scatter.into_winners();

    let mut out = WarpOutput::empty(target_window);
    let same_grid = frame.window == *target_window;
    let src_window = frame.window;
    out.color
        .data_mut()
        .par_chunks_mut(3)
        .zip(out.depth.data_mut().par_iter_mut())
        .zip(out.motion_back.data_mut().par_chunks_mut(2))
        .zip(out.valid.data_mut().par_iter_mut())
        .zip(out.dyn_warped.data_mut().par_iter_mut())
        .enumerate()
        .for_each(|(dest, ((((color, depth), mv), valid), dynamic))| {
            let Some((z, src)) = winners[dest] else {
                return;
            };
            let src = src as usize;
            color.copy_from_slice(frame.color.at(src));
            *depth = z;
            *valid = 1.0;
            *dynamic = hist.dynamic.data()[src];
            let src_center = pixel_center(src % w, src / w);
            let src_in_target = if same_grid {
                src_center
            } else {
                src_window.pixel_to(src_center, target_window)
            };
            let d = src_in_target - pixel_center(dest % tw, dest / tw);
            mv[0] = d.x as f32;
            mv[1] = d.y as f32;
        });
    Ok(out)
}
