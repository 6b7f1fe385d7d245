//! Camera model and coordinate conventions.
//!
//! World space is right-handed. A camera looks along `dir`; its right vector is
//! `dir × up`. NDC has y pointing up, the display window is the rectangle
//! `(-1, -1, 1, 1)`, and pixel space has its origin at the top-left corner with
//! y pointing down and pixel centers at half-integers.
//!
//! Depth is always positive linear view depth measured along `dir`, never the
//! length of the view ray and never a post-projective value.

use glam::{DMat4, DVec2, DVec3, DVec4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Far plane used by [`make_projection`], as a multiple of the near plane.
pub const FAR_OVER_NEAR: f64 = 1.0e4;

const UNIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub pos: DVec3,
    pub dir: DVec3,
    pub up: DVec3,
    /// Vertical field of view in radians.
    pub vfov: f64,
    /// Width over height of the display window.
    pub aspect: f64,
    pub near: f64,
}

impl CameraPose {
    /// Builds a pose, normalizing `dir` and re-orthogonalizing `up` against it.
    pub fn new(
        pos: DVec3,
        dir: DVec3,
        up: DVec3,
        vfov: f64,
        aspect: f64,
        near: f64,
    ) -> Result<Self> {
        if !(pos.is_finite() && dir.is_finite() && up.is_finite()) {
            return Err(Error::invalid("camera vectors must be finite"));
        }
        let dir_len = dir.length();
        if dir_len < 1e-12 {
            return Err(Error::invalid("camera direction has zero length"));
        }
        let dir = dir / dir_len;
        let up = up - dir * up.dot(dir);
        let up_len = up.length();
        if up_len < 1e-9 {
            return Err(Error::invalid(
                "camera up vector is parallel to the view direction",
            ));
        }
        let pose = CameraPose {
            pos,
            dir,
            up: up / up_len,
            vfov,
            aspect,
            near,
        };
        pose.validate()?;
        Ok(pose)
    }

    pub fn look_at(
        pos: DVec3,
        target: DVec3,
        up: DVec3,
        vfov: f64,
        aspect: f64,
        near: f64,
    ) -> Result<Self> {
        Self::new(pos, target - pos, up, vfov, aspect, near)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.near > 0.0 && self.near.is_finite()) {
            return Err(Error::invalid(format!(
                "near plane must be positive, got {}",
                self.near
            )));
        }
        if !(self.vfov > 0.0 && self.vfov < std::f64::consts::PI) {
            return Err(Error::invalid(format!(
                "vfov must lie in (0, pi), got {}",
                self.vfov
            )));
        }
        if !(self.aspect > 0.0 && self.aspect.is_finite()) {
            return Err(Error::invalid(format!(
                "aspect must be positive, got {}",
                self.aspect
            )));
        }
        if (self.dir.length() - 1.0).abs() > UNIT_TOL
            || (self.up.length() - 1.0).abs() > UNIT_TOL
            || self.dir.dot(self.up).abs() > UNIT_TOL
        {
            return Err(Error::invalid("dir and up must be orthonormal"));
        }
        Ok(())
    }

    pub fn right(&self) -> DVec3 {
        self.dir.cross(self.up)
    }

    pub fn tan_half_vfov(&self) -> f64 {
        (0.5 * self.vfov).tan()
    }

    /// Unnormalized ray direction through an NDC point; its component along
    /// `dir` is exactly one, so a ray parameter equals view depth.
    pub fn ray_through_ndc(&self, ndc: DVec2) -> DVec3 {
        let ty = self.tan_half_vfov();
        let tx = ty * self.aspect;
        self.dir + self.right() * (ndc.x * tx) + self.up * (ndc.y * ty)
    }

    pub fn view_matrix(&self) -> DMat4 {
        DMat4::look_to_rh(self.pos, self.dir, self.up)
    }
}

/// NDC rectangle rendered into a `width_px × height_px` buffer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderWindow {
    pub u0: f64,
    pub v0: f64,
    pub u1: f64,
    pub v1: f64,
    pub width_px: u32,
    pub height_px: u32,
}

impl RenderWindow {
    pub fn display(width_px: u32, height_px: u32) -> Self {
        RenderWindow {
            u0: -1.0,
            v0: -1.0,
            u1: 1.0,
            v1: 1.0,
            width_px,
            height_px,
        }
    }

    pub fn new(u0: f64, v0: f64, u1: f64, v1: f64, width_px: u32, height_px: u32) -> Result<Self> {
        let w = RenderWindow {
            u0,
            v0,
            u1,
            v1,
            width_px,
            height_px,
        };
        w.check_nondegenerate()?;
        Ok(w)
    }

    fn check_nondegenerate(&self) -> Result<()> {
        let finite = [self.u0, self.v0, self.u1, self.v1]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.u1 <= self.u0 || self.v1 <= self.v0 {
            return Err(Error::invalid(format!(
                "degenerate window ({}, {}, {}, {})",
                self.u0, self.v0, self.u1, self.v1
            )));
        }
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::invalid("window pixel dimensions must be at least 1"));
        }
        Ok(())
    }

    /// Full invariant: non-degenerate and containing the display rectangle.
    pub fn validate(&self) -> Result<()> {
        self.check_nondegenerate()?;
        if !self.contains_display() {
            return Err(Error::WindowInvariant(format!(
                "({}, {}, {}, {})",
                self.u0, self.v0, self.u1, self.v1
            )));
        }
        Ok(())
    }

    pub fn contains_display(&self) -> bool {
        self.u0 <= -1.0 && self.v0 <= -1.0 && self.u1 >= 1.0 && self.v1 >= 1.0
    }

    pub fn is_display(&self) -> bool {
        self.u0 == -1.0 && self.v0 == -1.0 && self.u1 == 1.0 && self.v1 == 1.0
    }

    pub fn same_rect(&self, other: &RenderWindow) -> bool {
        self.u0 == other.u0 && self.v0 == other.v0 && self.u1 == other.u1 && self.v1 == other.v1
    }

    pub fn size(&self) -> (usize, usize) {
        (self.width_px as usize, self.height_px as usize)
    }

    pub fn pixel_count(&self) -> usize {
        self.width_px as usize * self.height_px as usize
    }

    pub fn ndc_to_pixel(&self, ndc: DVec2) -> DVec2 {
        DVec2::new(
            (ndc.x - self.u0) / (self.u1 - self.u0) * self.width_px as f64,
            (self.v1 - ndc.y) / (self.v1 - self.v0) * self.height_px as f64,
        )
    }

    pub fn pixel_to_ndc(&self, px: DVec2) -> DVec2 {
        DVec2::new(
            self.u0 + px.x / self.width_px as f64 * (self.u1 - self.u0),
            self.v1 - px.y / self.height_px as f64 * (self.v1 - self.v0),
        )
    }

    /// Maps a continuous pixel position of `self` to the same NDC point in `other`.
    pub fn pixel_to(&self, px: DVec2, other: &RenderWindow) -> DVec2 {
        if self == other {
            return px;
        }
        other.ndc_to_pixel(self.pixel_to_ndc(px))
    }

    pub fn contains_pixel(&self, px: DVec2) -> bool {
        px.x >= 0.0 && px.y >= 0.0 && px.x < self.width_px as f64 && px.y < self.height_px as f64
    }

    /// Integer pixel containing a continuous position, if in bounds.
    pub fn pixel_index(&self, px: DVec2) -> Option<(usize, usize)> {
        if self.contains_pixel(px) {
            Some((px.x as usize, px.y as usize))
        } else {
            None
        }
    }

    /// Pixel-space scale factors (window pixels per display pixel) for a display
    /// of `base_w × base_h`.
    pub fn density_ratio(&self, base_w: u32, base_h: u32) -> DVec2 {
        DVec2::new(
            self.width_px as f64 / (0.5 * (self.u1 - self.u0) * base_w as f64),
            self.height_px as f64 / (0.5 * (self.v1 - self.v0) * base_h as f64),
        )
    }

    /// Continuous position of the display rectangle's top-left corner in this
    /// window's pixel space.
    pub fn display_origin(&self) -> DVec2 {
        self.ndc_to_pixel(DVec2::new(-1.0, 1.0))
    }
}

pub fn pixel_center(i: usize, j: usize) -> DVec2 {
    DVec2::new(i as f64 + 0.5, j as f64 + 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub pixel: DVec2,
    pub depth: f64,
    pub in_frustum: bool,
}

/// A pose/window pair with its basis precomputed for per-pixel loops.
#[derive(Debug, Clone, Copy)]
pub struct PixelCamera {
    pos: DVec3,
    dir: DVec3,
    right: DVec3,
    up: DVec3,
    tan_x: f64,
    tan_y: f64,
    near: f64,
    window: RenderWindow,
}

impl PixelCamera {
    pub fn new(pose: &CameraPose, window: &RenderWindow) -> Self {
        let tan_y = pose.tan_half_vfov();
        PixelCamera {
            pos: pose.pos,
            dir: pose.dir,
            right: pose.right(),
            up: pose.up,
            tan_x: tan_y * pose.aspect,
            tan_y,
            near: pose.near,
            window: *window,
        }
    }

    pub fn window(&self) -> &RenderWindow {
        &self.window
    }

    pub fn project(&self, p: DVec3) -> Projection {
        let rel = p - self.pos;
        let depth = rel.dot(self.dir);
        let ndc = DVec2::new(
            rel.dot(self.right) / (depth * self.tan_x),
            rel.dot(self.up) / (depth * self.tan_y),
        );
        let pixel = self.window.ndc_to_pixel(ndc);
        let in_frustum =
            depth > self.near && pixel.is_finite() && self.window.contains_pixel(pixel);
        Projection {
            pixel,
            depth,
            in_frustum,
        }
    }

    /// Unchecked inverse of [`PixelCamera::project`].
    pub fn unproject(&self, px: DVec2, depth: f64) -> DVec3 {
        let ndc = self.window.pixel_to_ndc(px);
        self.pos
            + (self.dir + self.right * (ndc.x * self.tan_x) + self.up * (ndc.y * self.tan_y))
                * depth
    }
}

/// World-space point seen through pixel position `px` at view depth `depth`.
pub fn unproject(px: DVec2, depth: f64, pose: &CameraPose, window: &RenderWindow) -> Result<DVec3> {
    if !depth.is_finite() || depth <= 0.0 {
        return Err(Error::invalid(format!(
            "depth must be finite and positive, got {depth}"
        )));
    }
    let (w, h) = (window.width_px as f64, window.height_px as f64);
    if !px.is_finite() || px.x < 0.0 || px.y < 0.0 || px.x > w || px.y > h {
        return Err(Error::invalid(format!(
            "pixel ({}, {}) outside {}x{} window",
            px.x, px.y, window.width_px, window.height_px
        )));
    }
    Ok(PixelCamera::new(pose, window).unproject(px, depth))
}

pub fn project(p: DVec3, pose: &CameraPose, window: &RenderWindow) -> Projection {
    PixelCamera::new(pose, window).project(p)
}

/// Off-axis view-projection transform whose clip-space x and y in `[-1, 1]`
/// cover the window rectangle of the base symmetric frustum.
pub fn make_projection(pose: &CameraPose, window: &RenderWindow) -> Result<DMat4> {
    if !(window.u1 > window.u0 && window.v1 > window.v0) {
        return Err(Error::invalid(format!(
            "degenerate window ({}, {}, {}, {})",
            window.u0, window.v0, window.u1, window.v1
        )));
    }
    let n = pose.near;
    let f = n * FAR_OVER_NEAR;
    let ty = n * pose.tan_half_vfov();
    let tx = ty * pose.aspect;
    let (l, r) = (window.u0 * tx, window.u1 * tx);
    let (b, t) = (window.v0 * ty, window.v1 * ty);
    let proj = DMat4::from_cols(
        DVec4::new(2.0 * n / (r - l), 0.0, 0.0, 0.0),
        DVec4::new(0.0, 2.0 * n / (t - b), 0.0, 0.0),
        DVec4::new(
            (r + l) / (r - l),
            (t + b) / (t - b),
            -(f + n) / (f - n),
            -1.0,
        ),
        DVec4::new(0.0, 0.0, -2.0 * f * n / (f - n), 0.0),
    );
    Ok(proj * pose.view_matrix())
}

/// Extrapolation factor for the `j`-th of `n` generated frames between two
/// rendered frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtrapolationSchedule {
    pub n: u32,
    pub j: u32,
}

impl ExtrapolationSchedule {
    pub fn new(n: u32, j: u32) -> Result<Self> {
        if n == 0 || j == 0 || j > n {
            return Err(Error::invalid(format!(
                "schedule requires 1 <= j <= n, got n={n} j={j}"
            )));
        }
        Ok(ExtrapolationSchedule { n, j })
    }

    pub fn alpha(&self) -> f64 {
        self.j as f64 / (self.n + 1) as f64
    }

    /// All factors for one rendered frame, in display order.
    pub fn alphas(n: u32) -> Vec<f64> {
        (1..=n)
            .map(|j| ExtrapolationSchedule { n, j }.alpha())
            .collect()
    }
}
