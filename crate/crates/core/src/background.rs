//! Hierarchical static-background store.
//!
//! Level 0 mirrors the latest rendered frame's static pixels. Each deeper
//! level keeps previously seen fragments that have since been covered by
//! nearer geometry at the level above, at half the resolution per axis.

use glam::DVec3;
use rayon::prelude::*;

use crate::buffer::Buffer;
use crate::error::{Error, Result};
use crate::frame::FrameRecord;
use crate::geometry::{pixel_center, CameraPose, PixelCamera, RenderWindow};
use crate::motion::WarpOutput;
use crate::scatter::DepthScatter;

pub const DEFAULT_LEVELS: usize = 2;
pub const MAX_LEVELS: usize = 4;
pub const DEFAULT_REL_EPS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundLevel {
    pub color: Buffer,
    /// View depth under the pyramid's pose, `+inf` where empty.
    pub depth: Buffer,
    pub valid: Buffer,
    pub window: RenderWindow,
}

impl BackgroundLevel {
    fn empty(window: RenderWindow) -> Self {
        let (w, h) = window.size();
        BackgroundLevel {
            color: Buffer::new(w, h, 3),
            depth: Buffer::filled(w, h, 1, f32::INFINITY),
            valid: Buffer::new(w, h, 1),
            window,
        }
    }

    pub fn is_valid(&self, idx: usize) -> bool {
        self.valid.data()[idx] != 0.0
    }

    pub fn valid_count(&self) -> usize {
        self.valid.data().iter().filter(|&&v| v != 0.0).count()
    }

    fn write(&mut self, idx: usize, color: &[f32], depth: f32) {
        self.color.data_mut()[idx * 3..idx * 3 + 3].copy_from_slice(color);
        self.depth.data_mut()[idx] = depth;
        self.valid.data_mut()[idx] = 1.0;
    }
}

/// Same NDC rectangle at `1 / 2^level` resolution.
pub fn level_window(window: &RenderWindow, level: usize) -> RenderWindow {
    RenderWindow {
        width_px: (window.width_px >> level).max(1),
        height_px: (window.height_px >> level).max(1),
        ..*window
    }
}

/// Insertion counts from the last update, per level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdateStats {
    /// Static pixels of the current frame written into level 0.
    pub seeded: usize,
    /// Dynamic-classified pixels offered for seeding (always skipped).
    pub skipped_dynamic: usize,
    /// Fragments carried into an empty texel of the same level.
    pub case1: Vec<usize>,
    /// Fragments pushed one level deeper behind a nearer occupant.
    pub case2: Vec<usize>,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundPyramid {
    pub levels: Vec<BackgroundLevel>,
    pub pose: CameraPose,
    pub window: RenderWindow,
    pub stats: UpdateStats,
}

impl BackgroundPyramid {
    /// Cold start: level 0 holds the frame's static pixels, deeper levels are empty.
    pub fn seed(frame: &FrameRecord, dyn_mask: &Buffer, levels: usize) -> Result<Self> {
        build(None, frame, dyn_mask, DEFAULT_REL_EPS, levels)
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }
}

/// Re-aligns the pyramid to `frame`: seeds level 0 from its static pixels and
/// reprojects every stored fragment of `prev` into the new camera, keeping it
/// at its level when that texel is free (Case 1) or pushing it one level down
/// when it lies behind the occupant by more than `rel_eps` (Case 2).
///
/// Occupancy is judged against the texel contents before fragments from the
/// same level of `prev` arrive, so results do not depend on processing order.
/// Among colliding candidates the nearest wins; the rest are dropped, as is
/// Case 2 overflow from the deepest level.
pub fn update_background(
    prev: &BackgroundPyramid,
    frame: &FrameRecord,
    dyn_mask: &Buffer,
    rel_eps: f64,
) -> Result<BackgroundPyramid> {
    build(Some(prev), frame, dyn_mask, rel_eps, prev.levels.len())
}

fn build(
    prev: Option<&BackgroundPyramid>,
    frame: &FrameRecord,
    dyn_mask: &Buffer,
    rel_eps: f64,
    levels: usize,
) -> Result<BackgroundPyramid> {
    if !(1..=MAX_LEVELS).contains(&levels) {
        return Err(Error::invalid(format!(
            "pyramid levels must be in 1..={MAX_LEVELS}, got {levels}"
        )));
    }
    let (w, h) = frame.dims();
    if dyn_mask.width() != w || dyn_mask.height() != h || dyn_mask.channels() != 1 {
        return Err(Error::State(format!(
            "dynamic mask is {}x{}x{}, frame is {w}x{h}",
            dyn_mask.width(),
            dyn_mask.height(),
            dyn_mask.channels()
        )));
    }
    if let Some(p) = prev {
        if p.levels
            .first()
            .is_none_or(|l| l.window.pixel_count() != p.window.pixel_count())
        {
            return Err(Error::State("previous pyramid is malformed".into()));
        }
    }

    let mut out: Vec<BackgroundLevel> = (0..levels)
        .map(|l| BackgroundLevel::empty(level_window(&frame.window, l)))
        .collect();
    let mut stats = UpdateStats {
        case1: vec![0; levels],
        case2: vec![0; levels],
        ..UpdateStats::default()
    };

    // (a) level 0 from the current frame's static pixels
    for idx in 0..w * h {
        let d = frame.depth.data()[idx];
        if !(d.is_finite() && d > 0.0) {
            continue;
        }
        if dyn_mask.data()[idx] != 0.0 {
            stats.skipped_dynamic += 1;
            continue;
        }
        out[0].write(idx, frame.color.at(idx), d);
        stats.seeded += 1;
    }

    let Some(prev) = prev else {
        return Ok(BackgroundPyramid {
            levels: out,
            pose: frame.pose,
            window: frame.window,
            stats,
        });
    };

    // (b) carry previous fragments level by level, finest first
    for l in 0..levels.min(prev.levels.len()) {
        let src = &prev.levels[l];
        let src_cam = PixelCamera::new(&prev.pose, &src.window);
        let cam_here = PixelCamera::new(&frame.pose, &out[l].window);
        let deeper = (l + 1 < levels).then(|| PixelCamera::new(&frame.pose, &out[l + 1].window));
        let (sw, _) = src.window.size();
        let here = &out[l];
        let same = DepthScatter::new(here.window.pixel_count());
        let down = deeper.map(|c| DepthScatter::new(c.window().pixel_count()));
        let dropped: usize = (0..src.window.pixel_count())
            .into_par_iter()
            .filter(|&i| src.is_valid(i))
            .map(|i| {
                let p = src_cam.unproject(pixel_center(i % sw, i / sw), src.depth.data()[i] as f64);
                let pr = cam_here.project(p);
                if !pr.in_frustum {
                    return 1;
                }
                let (hw, _) = here.window.size();
                let dest = pr.pixel.y as usize * hw + pr.pixel.x as usize;
                let z = pr.depth as f32;
                if !here.is_valid(dest) {
                    same.offer(dest, z, i as u32);
                    return 0;
                }
                let occupant = here.depth.data()[dest] as f64;
                if pr.depth > occupant * (1.0 + rel_eps) {
                    if let (Some(cam), Some(down)) = (&deeper, &down) {
                        let q = cam.project(p);
                        if q.in_frustum {
                            let (dw, _) = cam.window().size();
                            down.offer(
                                q.pixel.y as usize * dw + q.pixel.x as usize,
                                q.depth as f32,
                                i as u32,
                            );
                            return 0;
                        }
                    }
                }
                1
            })
            .sum();
        stats.dropped += dropped;

        let same = same.into_winners();
        let offered = same.iter().flatten().count();
        for (dest, win) in same.into_iter().enumerate() {
            if let Some((z, i)) = win {
                out[l].write(dest, src.color.at(i as usize), z);
            }
        }
        stats.case1[l] = offered;
        if let Some(down) = down {
            // the deeper level only holds Case 2 winners at this point
            for (dest, win) in down.into_winners().into_iter().enumerate() {
                if let Some((z, i)) = win {
                    out[l + 1].write(dest, src.color.at(i as usize), z);
                    stats.case2[l + 1] += 1;
                }
            }
        }
    }

    Ok(BackgroundPyramid {
        levels: out,
        pose: frame.pose,
        window: frame.window,
        stats,
    })
}

/// Fills still-invalid pixels of `warp` from the pyramid. Level `l` texels
/// cover a `2^l × 2^l` footprint around their projection; finer levels go
/// first and nothing that is already valid is touched. Returns the number of
/// pixels filled.
pub fn project_background(
    pyr: &BackgroundPyramid,
    warp: &mut WarpOutput,
    target_pose: &CameraPose,
    target_window: &RenderWindow,
) -> Result<usize> {
    if warp.window != *target_window {
        return Err(Error::invalid(
            "warp output does not match the target window",
        ));
    }
    let cam = PixelCamera::new(target_pose, target_window);
    let (tw, th) = target_window.size();
    let mut filled = 0;
    for (l, level) in pyr.levels.iter().enumerate() {
        let size = 1i64 << l;
        let src_cam = PixelCamera::new(&pyr.pose, &level.window);
        let (sw, _) = level.window.size();
        let scatter = DepthScatter::new(tw * th);
        let valid_in = &warp.valid;
        (0..level.window.pixel_count())
            .into_par_iter()
            .filter(|&i| level.is_valid(i))
            .for_each(|i| {
                let p =
                    src_cam.unproject(pixel_center(i % sw, i / sw), level.depth.data()[i] as f64);
                let pr = cam.project(p);
                if !(pr.depth > target_pose.near && pr.pixel.is_finite()) {
                    return;
                }
                let x0 = (pr.pixel.x - 0.5 * (size - 1) as f64).floor() as i64;
                let y0 = (pr.pixel.y - 0.5 * (size - 1) as f64).floor() as i64;
                for y in y0.max(0)..(y0 + size).min(th as i64) {
                    for x in x0.max(0)..(x0 + size).min(tw as i64) {
                        let dest = y as usize * tw + x as usize;
                        if valid_in.data()[dest] == 0.0 {
                            scatter.offer(dest, pr.depth as f32, i as u32);
                        }
                    }
                }
            });
        for (dest, win) in scatter.into_winners().into_iter().enumerate() {
            let Some((z, i)) = win else { continue };
            let i = i as usize;
            warp.color.data_mut()[dest * 3..dest * 3 + 3].copy_from_slice(level.color.at(i));
            warp.depth.data_mut()[dest] = z;
            warp.valid.data_mut()[dest] = 1.0;
            warp.dyn_warped.data_mut()[dest] = 0.0;
            // where the fragment sits in the pyramid's (current) frame, in target pixels
            let src = level
                .window
                .pixel_to(pixel_center(i % sw, i / sw), target_window);
            let d = src - pixel_center(dest % tw, dest / tw);
            warp.motion_back.data_mut()[dest * 2] = d.x as f32;
            warp.motion_back.data_mut()[dest * 2 + 1] = d.y as f32;
            filled += 1;
        }
    }
    Ok(filled)
}

/// World position of a stored texel, mainly for diagnostics.
pub fn texel_world_position(pyr: &BackgroundPyramid, level: usize, idx: usize) -> Option<DVec3> {
    let lv = pyr.levels.get(level)?;
    if !lv.is_valid(idx) {
        return None;
    }
    let (w, _) = lv.window.size();
    Some(
        PixelCamera::new(&pyr.pose, &lv.window)
            .unproject(pixel_center(idx % w, idx / w), lv.depth.data()[idx] as f64),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use glam::DVec3;

    fn pose_at(x: f64) -> CameraPose {
        CameraPose::new(
            DVec3::new(x, 0.0, 0.0),
            DVec3::NEG_Z,
            DVec3::Y,
            2.0 * 0.5f64.atan(),
            1.0,
            0.1,
        )
        .unwrap()
    }

    /// Near strip over a far plane; the strip covers columns `[a, b)`.
    fn strip_frame(w: usize, a: usize, b: usize, x: f64, t: f64) -> FrameRecord {
        let mut depth = vec![8.0f32; w * w];
        let mut color = vec![0.0f32; w * w * 3];
        for j in 0..w {
            for i in 0..w {
                let idx = j * w + i;
                if (a..b).contains(&i) {
                    depth[idx] = 2.0;
                    color[idx * 3..idx * 3 + 3].copy_from_slice(&[0.9, 0.1, 0.1]);
                } else {
                    let v = ((i + j) % 2) as f32 * 0.5 + 0.2;
                    color[idx * 3..idx * 3 + 3].copy_from_slice(&[v, v, v]);
                }
            }
        }
        FrameRecord {
            color: Buffer::from_vec(w, w, 3, color).unwrap(),
            depth: Buffer::from_vec(w, w, 1, depth).unwrap(),
            motion: Buffer::new(w, w, 2),
            dyn_gt: Buffer::new(w, w, 1),
            pose: pose_at(x),
            window: RenderWindow::display(w as u32, w as u32),
            timestamp: t,
        }
    }

    #[test]
    fn seeding_skips_dynamic_pixels() {
        let f = strip_frame(16, 4, 8, 0.0, 0.0);
        let mut dyn_mask = Buffer::new(16, 16, 1);
        for j in 0..16 {
            for i in 4..8 {
                dyn_mask.set(i, j, 0, 1.0);
            }
        }
        let p = BackgroundPyramid::seed(&f, &dyn_mask, 2).unwrap();
        assert_eq!(p.stats.seeded, 16 * 12);
        assert_eq!(p.stats.skipped_dynamic, 16 * 4);
        assert_eq!(p.levels[1].valid_count(), 0);
        assert_eq!(
            (p.levels[1].window.width_px, p.levels[1].window.height_px),
            (8, 8)
        );
        for j in 0..16 {
            for i in 0..16 {
                assert_eq!(p.levels[0].is_valid(j * 16 + i), !(4..8).contains(&i));
            }
        }
    }

    #[test]
    fn identical_update_keeps_level_zero() {
        let f = strip_frame(24, 6, 10, 0.0, 0.0);
        let mut dyn_mask = Buffer::new(24, 24, 1);
        dyn_mask.set(7, 7, 0, 1.0);
        let p0 = BackgroundPyramid::seed(&f, &dyn_mask, 2).unwrap();
        let p1 = update_background(&p0, &f, &dyn_mask, DEFAULT_REL_EPS).unwrap();
        let p2 = update_background(&p1, &f, &dyn_mask, DEFAULT_REL_EPS).unwrap();
        assert_eq!(p1.levels[0], p2.levels[0]);
        assert_eq!(p2.stats.case2[1], 0);
    }

    #[test]
    fn covered_fragments_move_down_a_level() {
        // the strip slides over background that was visible a frame earlier
        let f0 = strip_frame(32, 4, 8, 0.0, 0.0);
        let f1 = strip_frame(32, 10, 14, 0.0, 1.0);
        let zero = Buffer::new(32, 32, 1);
        let p0 = BackgroundPyramid::seed(&f0, &zero, 2).unwrap();
        let p1 = update_background(&p0, &f1, &zero, DEFAULT_REL_EPS).unwrap();
        assert!(p1.stats.case2[1] > 0);
        for (i, &d) in p1.levels[1].depth.data().iter().enumerate() {
            if p1.levels[1].is_valid(i) {
                // promoted fragments are the far plane, behind the strip
                assert!(d > 2.0 * (1.0 + DEFAULT_REL_EPS as f32));
            }
        }
        // the vacated columns now show the far plane of the current frame
        for j in 0..32 {
            for i in 4..8 {
                assert_eq!(p1.levels[0].depth.data()[j * 32 + i], 8.0);
            }
        }
    }

    #[test]
    fn dynamic_pixels_are_backed_by_earlier_background() {
        let f0 = strip_frame(32, 4, 8, 0.0, 0.0);
        let f1 = strip_frame(32, 10, 14, 0.0, 1.0);
        let zero = Buffer::new(32, 32, 1);
        let mut dyn1 = Buffer::new(32, 32, 1);
        for j in 0..32 {
            for i in 10..14 {
                dyn1.set(i, j, 0, 1.0);
            }
        }
        let p0 = BackgroundPyramid::seed(&f0, &zero, 2).unwrap();
        let p1 = update_background(&p0, &f1, &dyn1, DEFAULT_REL_EPS).unwrap();
        assert_eq!(p1.stats.case1[0], 32 * 4);
        for j in 0..32 {
            for i in 10..14 {
                let idx = j * 32 + i;
                assert!((p1.levels[0].depth.data()[idx] - 8.0).abs() < 1e-5);
                assert_eq!(p1.levels[0].color.at(idx), f0.color.at(idx));
            }
        }
    }

    #[test]
    fn valid_iff_finite_depth() {
        let f0 = strip_frame(32, 4, 8, 0.0, 0.0);
        let f1 = strip_frame(32, 10, 14, 0.3, 1.0);
        let zero = Buffer::new(32, 32, 1);
        let p = update_background(
            &BackgroundPyramid::seed(&f0, &zero, 3).unwrap(),
            &f1,
            &zero,
            DEFAULT_REL_EPS,
        )
        .unwrap();
        for lv in &p.levels {
            for (i, &d) in lv.depth.data().iter().enumerate() {
                assert_eq!(lv.is_valid(i), d.is_finite());
            }
        }
    }

    #[test]
    fn projection_only_fills_holes() {
        let f = strip_frame(16, 4, 8, 0.0, 0.0);
        let zero = Buffer::new(16, 16, 1);
        let pyr = BackgroundPyramid::seed(&f, &zero, 2).unwrap();
        let mut warp = WarpOutput::empty(&f.window);
        for idx in (0..256).step_by(3) {
            warp.color.data_mut()[idx * 3] = 0.25;
            warp.depth.data_mut()[idx] = 1.0;
            warp.valid.data_mut()[idx] = 1.0;
        }
        let before = warp.clone();
        let filled = project_background(&pyr, &mut warp, &f.pose, &f.window).unwrap();
        assert_eq!(filled, before.invalid_count());
        for idx in 0..256 {
            if before.is_valid(idx) {
                assert_eq!(warp.color.at(idx), before.color.at(idx));
                assert_eq!(warp.depth.data()[idx], 1.0);
            } else {
                assert_eq!(warp.color.at(idx), f.color.at(idx));
                assert_eq!(warp.motion_back.at(idx), &[0.0, 0.0]);
            }
        }
        let mut full = warp.clone();
        assert_eq!(
            project_background(&pyr, &mut full, &f.pose, &f.window).unwrap(),
            0
        );
        assert_eq!(full, warp);
    }

    #[test]
    fn coarse_level_footprint_respects_valid_pixels() {
        let f = strip_frame(16, 4, 8, 0.0, 0.0);
        let mut pyr = BackgroundPyramid::seed(&f, &Buffer::new(16, 16, 1), 2).unwrap();
        pyr.levels[0] = BackgroundLevel::empty(pyr.levels[0].window);
        // one level-1 texel at (1, 1) covers full-res pixels 2..4 x 2..4
        pyr.levels[1].write(8 + 1, &[0.5, 0.5, 0.5], 8.0);
        let mut warp = WarpOutput::empty(&f.window);
        warp.valid.set(3, 3, 0, 1.0);
        warp.depth.set(3, 3, 0, 1.0);
        let n = project_background(&pyr, &mut warp, &f.pose, &f.window).unwrap();
        assert_eq!(n, 3);
        for (x, y) in [(2, 2), (3, 2), (2, 3)] {
            assert_eq!(warp.color.pixel(x, y), &[0.5, 0.5, 0.5]);
        }
        assert_eq!(warp.color.pixel(3, 3), &[0.0, 0.0, 0.0]);
    }
}
