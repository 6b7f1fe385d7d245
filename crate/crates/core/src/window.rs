//! Camera pose prediction and the enlarged asymmetric render window.

use glam::{DVec2, DVec3};
use serde::{Deserialize, Serialize};

use crate::buffer::Buffer;
use crate::error::{Error, Result};
use crate::geometry::{pixel_center, CameraPose, RenderWindow};
use crate::scene::WindowProvider;

/// Default window extent clamp in NDC units.
pub const DEFAULT_MAX_EXTENT: f64 = 1.5;
/// Plane distance as a multiple of the near plane when none is given.
pub const DEFAULT_PLANE_NEAR_MULTIPLE: f64 = 10.0;
const DEGENERATE_NORM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosePrediction {
    pub pose: CameraPose,
    /// Set when an extrapolated basis vector collapsed and `cur`'s was kept.
    pub degenerate: bool,
}

/// Extrapolates position, view direction and up vector independently:
/// `C_t + alpha * (C_t - C_{t-1})`, then re-normalizes and re-orthogonalizes.
pub fn predict_pose(cur: &CameraPose, prev: &CameraPose, alpha: f64) -> Result<PosePrediction> {
    cur.validate()?;
    prev.validate()?;
    let step = |c: DVec3, p: DVec3| c + alpha * (c - p);
    let pos = step(cur.pos, prev.pos);
    let mut degenerate = false;
    let mut dir = step(cur.dir, prev.dir);
    if dir.length() < DEGENERATE_NORM {
        dir = cur.dir;
        degenerate = true;
    }
    let dir = dir.normalize();
    let mut up = step(cur.up, prev.up);
    up -= dir * up.dot(dir);
    if up.length() < DEGENERATE_NORM {
        up = cur.up - dir * cur.up.dot(dir);
        if up.length() < DEGENERATE_NORM {
            up = cur.right().cross(dir);
        }
        degenerate = true;
    }
    let pose = CameraPose::new(pos, dir, up, cur.vfov, cur.aspect, cur.near)?;
    Ok(PosePrediction { pose, degenerate })
}

/// Window rectangle in NDC units of the base frustum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowRect {
    pub u0: f64,
    pub v0: f64,
    pub u1: f64,
    pub v1: f64,
}

impl WindowRect {
    pub const DISPLAY: WindowRect = WindowRect {
        u0: -1.0,
        v0: -1.0,
        u1: 1.0,
        v1: 1.0,
    };

    pub fn with_pixels(&self, width_px: u32, height_px: u32) -> Result<RenderWindow> {
        let w = RenderWindow::new(self.u0, self.v0, self.u1, self.v1, width_px, height_px)?;
        w.validate()?;
        Ok(w)
    }

    pub fn of(window: &RenderWindow) -> Self {
        WindowRect {
            u0: window.u0,
            v0: window.v0,
            u1: window.u1,
            v1: window.v1,
        }
    }
}

/// Axis-aligned box `(x_min, y_min, x_max, y_max)` on the virtual plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPlan {
    pub predicted_pose: CameraPose,
    pub rect: WindowRect,
    pub plane_distance: f64,
    pub aabb_cur: PlaneBox,
    pub aabb_pred: PlaneBox,
    /// Some extent hit the clamp, or a predicted corner ray missed the plane.
    pub clamped: bool,
    pub degenerate_pose: bool,
}

/// Intersects the four corner rays of both frusta with a plane perpendicular
/// to `cur.dir` at distance `d` and widens the display rectangle to cover the
/// predicted footprint. Corner rays that never reach the plane push their
/// sides to `max_extent`.
pub fn compute_window(
    cur: &CameraPose,
    predicted: &CameraPose,
    d: f64,
    max_extent: f64,
) -> Result<WindowPlan> {
    if !(d.is_finite() && d > cur.near) {
        return Err(Error::invalid(format!(
            "plane distance {d} must exceed the near plane {}",
            cur.near
        )));
    }
    if !(max_extent >= 1.0) {
        return Err(Error::invalid(format!(
            "max window extent must be at least 1, got {max_extent}"
        )));
    }
    let n = cur.dir;
    let (right, up) = (cur.right(), cur.up);
    let center = cur.pos + n * d;
    let hit = |origin: DVec3, ray: DVec3| -> Option<DVec2> {
        let denom = ray.dot(n);
        if denom <= 1e-9 {
            return None;
        }
        let s = (center - origin).dot(n) / denom;
        if s <= 0.0 {
            return None;
        }
        let q = origin + ray * s - center;
        Some(DVec2::new(q.dot(right), q.dot(up)))
    };
    let corners = [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)];
    // the current footprint goes through the same intersection code so that
    // identical poses give ratios of exactly one
    let mut aabb_cur = PlaneBox {
        x_min: f64::INFINITY,
        y_min: f64::INFINITY,
        x_max: f64::NEG_INFINITY,
        y_max: f64::NEG_INFINITY,
    };
    for (sx, sy) in corners {
        let p = hit(cur.pos, cur.ray_through_ndc(DVec2::new(sx, sy)))
            .expect("current corners face the plane");
        aabb_cur.x_min = aabb_cur.x_min.min(p.x);
        aabb_cur.x_max = aabb_cur.x_max.max(p.x);
        aabb_cur.y_min = aabb_cur.y_min.min(p.y);
        aabb_cur.y_max = aabb_cur.y_max.max(p.y);
    }

    let mut aabb_pred = PlaneBox {
        x_min: f64::INFINITY,
        y_min: f64::INFINITY,
        x_max: f64::NEG_INFINITY,
        y_max: f64::NEG_INFINITY,
    };
    let (mut force_left, mut force_right, mut force_down, mut force_up) =
        (false, false, false, false);
    for (sx, sy) in corners {
        match hit(predicted.pos, predicted.ray_through_ndc(DVec2::new(sx, sy))) {
            Some(p) => {
                aabb_pred.x_min = aabb_pred.x_min.min(p.x);
                aabb_pred.x_max = aabb_pred.x_max.max(p.x);
                aabb_pred.y_min = aabb_pred.y_min.min(p.y);
                aabb_pred.y_max = aabb_pred.y_max.max(p.y);
            }
            None => {
                if sx < 0.0 {
                    force_left = true
                } else {
                    force_right = true
                }
                if sy < 0.0 {
                    force_down = true
                } else {
                    force_up = true
                }
            }
        }
    }
    let any_missed = force_left || force_right || force_down || force_up;
    let ratio = |bar: f64, cur: f64| if bar.is_finite() { bar / cur } else { 1.0 };
    let mut u0 = (-ratio(aabb_pred.x_min, aabb_cur.x_min)).min(-1.0);
    let mut v0 = (-ratio(aabb_pred.y_min, aabb_cur.y_min)).min(-1.0);
    let mut u1 = ratio(aabb_pred.x_max, aabb_cur.x_max).max(1.0);
    let mut v1 = ratio(aabb_pred.y_max, aabb_cur.y_max).max(1.0);
    if force_left {
        u0 = -max_extent;
    }
    if force_right {
        u1 = max_extent;
    }
    if force_down {
        v0 = -max_extent;
    }
    if force_up {
        v1 = max_extent;
    }
    let clamped =
        any_missed || u0 < -max_extent || v0 < -max_extent || u1 > max_extent || v1 > max_extent;
    let rect = WindowRect {
        u0: u0.max(-max_extent),
        v0: v0.max(-max_extent),
        u1: u1.min(max_extent),
        v1: v1.min(max_extent),
    };
    Ok(WindowPlan {
        predicted_pose: *predicted,
        rect,
        plane_distance: d,
        aabb_cur,
        aabb_pred,
        clamped,
        degenerate_pose: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PixelMode {
    /// Same pixel pitch as the display; the window grows in pixels.
    #[default]
    Density,
    /// Same pixel count as the display; pixels stretch with the window.
    Budget,
}

impl std::str::FromStr for PixelMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density" | "density-preserving" => Ok(PixelMode::Density),
            "budget" | "fixed-budget" => Ok(PixelMode::Budget),
            _ => Err(Error::invalid(format!(
                "unknown window mode `{s}` (density | budget)"
            ))),
        }
    }
}

impl std::fmt::Display for PixelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PixelMode::Density => "density",
            PixelMode::Budget => "budget",
        })
    }
}

/// Pixel dimensions of a window for a `base_w × base_h` display.
pub fn window_pixels(
    rect: &WindowRect,
    base_w: u32,
    base_h: u32,
    mode: PixelMode,
) -> Result<(u32, u32)> {
    if base_w == 0 || base_h == 0 {
        return Err(Error::invalid("base dimensions must be at least 1"));
    }
    match mode {
        PixelMode::Budget => Ok((base_w, base_h)),
        PixelMode::Density => {
            let w = (base_w as f64 * (rect.u1 - rect.u0) / 2.0).round().max(1.0);
            let h = (base_h as f64 * (rect.v1 - rect.v0) / 2.0).round().max(1.0);
            Ok((w as u32, h as u32))
        }
    }
}

/// Widens a rectangle so every edge falls on a whole display pixel.
pub fn snap_to_display_grid(rect: &WindowRect, base_w: u32, base_h: u32) -> WindowRect {
    let (sx, sy) = (2.0 / base_w as f64, 2.0 / base_h as f64);
    // tolerate round-off when an edge already sits on the grid
    let out = |extra: f64, step: f64| ((extra / step) - 1e-9).ceil().max(0.0) * step;
    WindowRect {
        u0: -1.0 - out(-1.0 - rect.u0, sx),
        v0: -1.0 - out(-1.0 - rect.v0, sy),
        u1: 1.0 + out(rect.u1 - 1.0, sx),
        v1: 1.0 + out(rect.v1 - 1.0, sy),
    }
}

/// Render window for `rect`: snapped and sized per `mode`.
pub fn render_window(
    rect: &WindowRect,
    base_w: u32,
    base_h: u32,
    mode: PixelMode,
) -> Result<RenderWindow> {
    let rect = match mode {
        PixelMode::Density => snap_to_display_grid(rect, base_w, base_h),
        PixelMode::Budget => *rect,
    };
    let (w, h) = window_pixels(&rect, base_w, base_h, mode)?;
    rect.with_pixels(w, h)
}

/// Integer offset of the display rectangle when `window` shares the display's
/// pixel grid.
fn aligned_offset(window: &RenderWindow, base_w: u32, base_h: u32) -> Option<(usize, usize)> {
    let ratio = window.density_ratio(base_w, base_h);
    let o = window.display_origin();
    let near_int = |v: f64| (v - v.round()).abs() < 1e-6;
    let fits = o.x.round() >= 0.0
        && o.y.round() >= 0.0
        && o.x.round() as usize + base_w as usize <= window.width_px as usize
        && o.y.round() as usize + base_h as usize <= window.height_px as usize;
    ((ratio.x - 1.0).abs() < 1e-9
        && (ratio.y - 1.0).abs() < 1e-9
        && near_int(o.x)
        && near_int(o.y)
        && fits)
        .then(|| (o.x.round() as usize, o.y.round() as usize))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CropFilter {
    /// Exact copy when grids align, bilinear otherwise.
    Auto,
    /// Exact copy when grids align, nearest sample otherwise (masks, depth).
    Nearest,
}

/// Cuts the display rectangle out of a buffer rendered with `window`,
/// resampling to `base_w × base_h` when the grids differ.
pub fn crop_to_display(
    buffer: &Buffer,
    window: &RenderWindow,
    base_w: u32,
    base_h: u32,
    filter: CropFilter,
) -> Result<Buffer> {
    window.validate()?;
    if buffer.dims() != window.size() {
        return Err(Error::invalid(format!(
            "buffer is {}x{}, window is {}x{}",
            buffer.width(),
            buffer.height(),
            window.width_px,
            window.height_px
        )));
    }
    if let Some((x0, y0)) = aligned_offset(window, base_w, base_h) {
        return buffer.sub_image(x0, y0, base_w as usize, base_h as usize);
    }
    let display = RenderWindow::display(base_w, base_h);
    let (bw, bh) = (base_w as usize, base_h as usize);
    let ch = buffer.channels();
    let mut out = Buffer::new(bw, bh, ch);
    for j in 0..bh {
        for i in 0..bw {
            let p = display.pixel_to(pixel_center(i, j), window);
            let dst = out.pixel_mut(i, j);
            match filter {
                CropFilter::Auto => buffer.sample_bilinear(p, dst),
                CropFilter::Nearest => {
                    let q = DVec2::new(
                        p.x.clamp(0.0, window.width_px as f64 - 0.5),
                        p.y.clamp(0.0, window.height_px as f64 - 0.5),
                    );
                    dst.copy_from_slice(buffer.sample_nearest(q).expect("clamped into bounds"));
                }
            }
        }
    }
    Ok(out)
}

/// Crops a 2-channel motion field and rescales it from window pixels to
/// display pixels.
pub fn crop_motion_to_display(
    motion: &Buffer,
    window: &RenderWindow,
    base_w: u32,
    base_h: u32,
) -> Result<Buffer> {
    let mut out = crop_to_display(motion, window, base_w, base_h, CropFilter::Nearest)?;
    let ratio = window.density_ratio(base_w, base_h);
    if ratio != DVec2::ONE {
        for v in out.data_mut().chunks_mut(2) {
            v[0] = (v[0] as f64 / ratio.x) as f32;
            v[1] = (v[1] as f64 / ratio.y) as f32;
        }
    }
    Ok(out)
}

/// Settings shared by the pipeline and the closed-loop renderer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSettings {
    pub base_w: u32,
    pub base_h: u32,
    pub mode: PixelMode,
    /// `None` means `10 × near`.
    pub plane_d: Option<f64>,
    pub max_extent: f64,
    /// Largest extrapolation factor the window must cover.
    pub alpha: f64,
}

impl WindowSettings {
    pub fn plane_distance(&self, pose: &CameraPose) -> f64 {
        self.plane_d
            .unwrap_or(DEFAULT_PLANE_NEAR_MULTIPLE * pose.near)
    }

    /// Full plan for the frame rendered at `cur`, given the previous pose.
    pub fn plan(&self, cur: &CameraPose, prev: &CameraPose) -> Result<(WindowPlan, RenderWindow)> {
        let pred = predict_pose(cur, prev, self.alpha)?;
        let mut plan = compute_window(cur, &pred.pose, self.plane_distance(cur), self.max_extent)?;
        plan.degenerate_pose = pred.degenerate;
        let window = render_window(&plan.rect, self.base_w, self.base_h, self.mode)?;
        Ok((plan, window))
    }
}

/// Renders each frame through the window its predecessor pose implies.
#[derive(Debug, Clone)]
pub struct AdaptiveWindowProvider {
    pub settings: WindowSettings,
    pub plans: Vec<Option<WindowPlan>>,
}

impl AdaptiveWindowProvider {
    pub fn new(settings: WindowSettings) -> Self {
        AdaptiveWindowProvider {
            settings,
            plans: Vec::new(),
        }
    }
}

impl WindowProvider for AdaptiveWindowProvider {
    fn window_for(
        &mut self,
        _index: usize,
        pose: &CameraPose,
        prev_pose: Option<&CameraPose>,
    ) -> Result<RenderWindow> {
        match prev_pose {
            None => {
                self.plans.push(None);
                Ok(RenderWindow::display(
                    self.settings.base_w,
                    self.settings.base_h,
                ))
            }
            Some(prev) => {
                let (plan, window) = self.settings.plan(pose, prev)?;
                self.plans.push(Some(plan));
                Ok(window)
            }
        }
    }

    fn label(&self) -> String {
        format!("adaptive-{}", self.settings.mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use glam::DQuat;

    const TAN_HALF: f64 = 0.5;

    fn pose(pos: DVec3, dir: DVec3) -> CameraPose {
        CameraPose::new(pos, dir, DVec3::Y, 2.0 * TAN_HALF.atan(), 16.0 / 9.0, 0.5).unwrap()
    }

    fn yawed(deg: f64) -> CameraPose {
        let q = DQuat::from_axis_angle(DVec3::Y, -deg.to_radians());
        pose(DVec3::ZERO, q * DVec3::NEG_Z)
    }

    #[test]
    fn identical_poses_predict_themselves() {
        let c = pose(DVec3::new(1.0, 2.0, 3.0), DVec3::new(0.3, -0.2, -1.0));
        let p = predict_pose(&c, &c, 0.5).unwrap();
        assert!(!p.degenerate);
        assert!((p.pose.pos - c.pos).length() < 1e-15);
        assert!((p.pose.dir - c.dir).length() < 1e-12);
        assert!((p.pose.up - c.up).length() < 1e-12);
    }

    #[test]
    fn position_extrapolates_linearly() {
        let prev = pose(DVec3::ZERO, DVec3::NEG_Z);
        let cur = pose(DVec3::X, DVec3::NEG_Z);
        let p = predict_pose(&cur, &prev, 0.5).unwrap();
        assert_eq!(p.pose.pos, DVec3::new(1.5, 0.0, 0.0));
    }

    #[test]
    fn orbit_direction_within_two_degrees() {
        for alpha in [0.25, 0.5, 0.75] {
            let p = predict_pose(&yawed(1.0), &yawed(0.0), alpha).unwrap();
            let truth = yawed(1.0 + alpha).dir;
            assert!(p.pose.dir.angle_between(truth).to_degrees() < 2.0);
        }
    }

    #[test]
    fn reversed_direction_falls_back() {
        let prev = pose(DVec3::ZERO, DVec3::Z);
        let cur = pose(DVec3::ZERO, DVec3::NEG_Z);
        // cur + 0.5 (cur - prev) = 2 * cur, fine; alpha = -0.5 would collapse
        assert!(!predict_pose(&cur, &prev, 0.5).unwrap().degenerate);
        let p = predict_pose(&cur, &prev, -0.5).unwrap();
        assert!(p.degenerate);
        assert_eq!(p.pose.dir, cur.dir);
    }

    #[test]
    fn no_motion_gives_display_rect() {
        let c = pose(DVec3::new(0.0, 1.0, 0.0), DVec3::new(0.0, -0.3, -1.0));
        let plan = compute_window(&c, &c, 5.0, DEFAULT_MAX_EXTENT).unwrap();
        assert_eq!(plan.rect, WindowRect::DISPLAY);
        assert!(!plan.clamped);
        assert!((plan.aabb_cur.x_min + plan.aabb_cur.x_max).abs() < 1e-12);
        assert!((plan.aabb_cur.y_min + plan.aabb_cur.y_max).abs() < 1e-12);
        assert!((plan.aabb_cur.y_max - 5.0 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn rightward_shift_widens_right_edge() {
        // predicted camera translated so the right footprint edge moves by 20%
        let cur = pose(DVec3::ZERO, DVec3::NEG_Z);
        let d = 5.0;
        let shift = 0.2 * d * TAN_HALF * cur.aspect;
        let pred = pose(DVec3::new(shift, 0.0, 0.0), DVec3::NEG_Z);
        let plan = compute_window(&cur, &pred, d, DEFAULT_MAX_EXTENT).unwrap();
        assert!((plan.rect.u1 - 1.2).abs() < 1e-12);
        assert_eq!(
            (plan.rect.u0, plan.rect.v0, plan.rect.v1),
            (-1.0, -1.0, 1.0)
        );
    }

    #[test]
    fn rotation_window_ignores_plane_distance() {
        let cur = yawed(0.0);
        let pred = yawed(3.0);
        let plans: Vec<_> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&d| {
                compute_window(&cur, &pred, d, DEFAULT_MAX_EXTENT)
                    .unwrap()
                    .rect
            })
            .collect();
        assert!(plans[0].u1 > 1.0);
        for p in &plans[1..] {
            assert!((p.u0 - plans[0].u0).abs() < 1e-6);
            assert!((p.u1 - plans[0].u1).abs() < 1e-6);
            assert!((p.v0 - plans[0].v0).abs() < 1e-6);
            assert!((p.v1 - plans[0].v1).abs() < 1e-6);
        }
    }

    #[test]
    fn looking_away_clamps_and_flags() {
        let cur = pose(DVec3::ZERO, DVec3::NEG_Z);
        let pred = pose(DVec3::ZERO, DVec3::X);
        let plan = compute_window(&cur, &pred, 5.0, DEFAULT_MAX_EXTENT).unwrap();
        assert!(plan.clamped);
        assert_eq!(plan.rect.u1, DEFAULT_MAX_EXTENT);
        assert!(plan.rect.u0 >= -DEFAULT_MAX_EXTENT && plan.rect.v1 <= DEFAULT_MAX_EXTENT);
        assert!(compute_window(&cur, &pred, 0.4, DEFAULT_MAX_EXTENT).is_err());
    }

    #[test]
    fn pixel_modes() {
        let disp = WindowRect::DISPLAY;
        assert_eq!(
            window_pixels(&disp, 640, 360, PixelMode::Density).unwrap(),
            (640, 360)
        );
        assert_eq!(
            window_pixels(&disp, 640, 360, PixelMode::Budget).unwrap(),
            (640, 360)
        );
        let wide = WindowRect { u1: 1.5, ..disp };
        assert_eq!(
            window_pixels(&wide, 640, 360, PixelMode::Density).unwrap(),
            (800, 360)
        );
        let (w, h) = window_pixels(&wide, 640, 360, PixelMode::Budget).unwrap();
        assert_eq!(w * h, 230_400);
    }

    #[test]
    fn snapping_is_outward_and_on_grid() {
        let r = WindowRect {
            u0: -1.013,
            v0: -1.0,
            u1: 1.2001,
            v1: 1.0 + 1e-13,
        };
        let s = snap_to_display_grid(&r, 100, 50);
        assert!(s.u0 <= r.u0 && s.u1 >= r.u1 && s.v1 >= 1.0);
        assert!(((s.u1 - 1.0) * 50.0 - ((s.u1 - 1.0) * 50.0).round()).abs() < 1e-9);
        assert_eq!(s.v1, 1.0);
        let win = render_window(&r, 100, 50, PixelMode::Density).unwrap();
        assert_eq!(aligned_offset(&win, 100, 50), Some((1, 0)));
    }

    #[test]
    fn display_crop_is_identity() {
        let b = Buffer::from_vec(4, 3, 1, (0..12).map(|v| v as f32).collect()).unwrap();
        let c = crop_to_display(&b, &RenderWindow::display(4, 3), 4, 3, CropFilter::Auto).unwrap();
        assert_eq!(c, b);
    }

    #[test]
    fn aligned_crop_is_subarray() {
        let r = WindowRect {
            u0: -1.25,
            v0: -1.5,
            u1: 1.0,
            v1: 1.0,
        };
        let win = render_window(&r, 8, 4, PixelMode::Density).unwrap();
        assert_eq!((win.width_px, win.height_px), (9, 5));
        let b = Buffer::from_vec(9, 5, 1, (0..45).map(|v| v as f32).collect()).unwrap();
        let c = crop_to_display(&b, &win, 8, 4, CropFilter::Auto).unwrap();
        assert_eq!(c, b.sub_image(1, 0, 8, 4).unwrap());
    }

    #[test]
    fn crop_rejects_window_missing_display() {
        let win = RenderWindow::new(-0.5, -1.0, 1.0, 1.0, 4, 4).unwrap();
        let b = Buffer::new(4, 4, 1);
        assert!(matches!(
            crop_to_display(&b, &win, 4, 4, CropFilter::Auto),
            Err(Error::WindowInvariant(_))
        ));
    }

    #[test]
    fn budget_motion_is_rescaled() {
        let win = render_window(
            &WindowRect {
                u1: 1.5,
                ..WindowRect::DISPLAY
            },
            8,
            4,
            PixelMode::Budget,
        )
        .unwrap();
        let mut m = Buffer::new(8, 4, 2);
        for v in m.data_mut().chunks_mut(2) {
            v[0] = 0.8;
            v[1] = 1.0;
        }
        let c = crop_motion_to_display(&m, &win, 8, 4).unwrap();
        // 8 window px span 2.5 NDC, i.e. 0.8 window px per display px
        assert!((c.get(2, 2, 0) - 1.0).abs() < 1e-6);
        assert!((c.get(2, 2, 1) - 1.0).abs() < 1e-6);
    }
}
