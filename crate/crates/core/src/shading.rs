//! Inputs and blending for shading correction: input mask, focus mask,
//! ghost-free warped previous frame, hole fill, and the corrector blend.

use glam::DVec2;
use rayon::prelude::*;

use crate::buffer::Buffer;
use crate::error::{Error, Result};
use crate::frame::FrameRecord;
use crate::geometry::{pixel_center, PixelCamera};
use crate::motion::WarpOutput;

pub const SMAPE_EPS: f64 = 1e-3;
pub const DEFAULT_FOCUS_THRESHOLD: f64 = 0.5;
pub const DEFAULT_DEPTH_TOL: f64 = 0.02;
pub const DEFAULT_FILL_LEVELS: usize = 5;

pub const MASK_DYNAMIC: f32 = 1.0;
pub const MASK_DISOCCLUDED: f32 = 0.0;
pub const MASK_OTHER: f32 = 0.5;

/// Per-pixel symmetric absolute percentage error over three channels.
pub fn smape(a: &[f32], b: &[f32]) -> f64 {
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for c in 0..3 {
        let (x, y) = (a[c] as f64, b[c] as f64);
        num += (x - y).abs();
        den += x + y;
    }
    num / (den + SMAPE_EPS)
}

fn check_dims(what: &str, a: &Buffer, b: &Buffer) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::invalid(format!(
            "{what}: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Static pixels whose color is far from every ground-truth pixel in their
/// 3×3 neighborhood (clipped at borders).
pub fn focus_mask(
    gae: &Buffer,
    gt: &Buffer,
    dyn_warped: &Buffer,
    threshold: f64,
) -> Result<Buffer> {
    check_dims("focus mask inputs", gae, gt)?;
    check_dims("focus mask inputs", gae, dyn_warped)?;
    let (w, h) = gae.dims();
    let data: Vec<f32> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            if dyn_warped.data()[idx] != 0.0 {
                return 0.0;
            }
            let (x, y) = (idx % w, idx / w);
            let a = gae.at(idx);
            let mut best = f64::INFINITY;
            for ny in y.saturating_sub(1)..(y + 2).min(h) {
                for nx in x.saturating_sub(1)..(x + 2).min(w) {
                    best = best.min(smape(a, gt.pixel(nx, ny)));
                }
            }
            if best > threshold {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Buffer::from_vec(w, h, 1, data)
}

/// Ternary mask from the warp before background projection: dynamic 1.0,
/// holes 0.0, everything else 0.5.
pub fn build_input_mask(warp: &WarpOutput) -> Buffer {
    let (w, h) = warp.valid.dims();
    let data = warp
        .valid
        .data()
        .iter()
        .zip(warp.dyn_warped.data())
        .map(|(&v, &d)| {
            if v == 0.0 {
                MASK_DISOCCLUDED
            } else if d != 0.0 {
                MASK_DYNAMIC
            } else {
                MASK_OTHER
            }
        })
        .collect();
    Buffer::from_vec(w, h, 1, data).expect("mask matches warp")
}

/// Previous rendered frame carried to the extrapolated view by chaining the
/// generated motion with the current frame's motion vectors. Ghost pixels
/// (no warp data, chain leaves a frame, or depths disagree by more than
/// `depth_tol` relative) take the GAE color instead.
///
/// The depth check compares the previous frame's depth at the chain end with
/// the depth the current surface point would have under the previous camera
/// if it had not moved.
pub fn warp_prev(
    prev: &FrameRecord,
    cur: &FrameRecord,
    warp: &WarpOutput,
    gae: &Buffer,
    depth_tol: f64,
) -> Result<Buffer> {
    if warp.window != cur.window {
        return Err(Error::invalid(
            "warp output must share the current frame's window",
        ));
    }
    check_dims("warped-prev inputs", gae, &warp.color)?;
    prev.validate()?;
    cur.validate()?;
    let (w, _) = warp.window.size();
    let cur_cam = PixelCamera::new(&cur.pose, &cur.window);
    let prev_cam = PixelCamera::new(&prev.pose, &prev.window);
    let mut out = gae.clone();
    out.data_mut()
        .par_chunks_mut(3)
        .enumerate()
        .for_each(|(idx, px)| {
            if !warp.is_valid(idx) {
                return;
            }
            let mv = warp.motion_back.at(idx);
            let x = pixel_center(idx % w, idx / w);
            let x_t = x + DVec2::new(mv[0] as f64, mv[1] as f64);
            if !cur.window.contains_pixel(x_t) {
                return;
            }
            let mut v = [0.0f32; 2];
            cur.motion.sample_bilinear(x_t, &mut v);
            let x_prev_cur_grid = x_t + DVec2::new(v[0] as f64, v[1] as f64);
            let x_prev = cur.window.pixel_to(x_prev_cur_grid, &prev.window);
            if !prev.window.contains_pixel(x_prev) {
                return;
            }
            let z_t = cur.depth.sample_nearest(x_t).expect("in bounds")[0] as f64;
            let z_prev = prev.depth.sample_nearest(x_prev).expect("in bounds")[0] as f64;
            let consistent = match (z_t.is_finite(), z_prev.is_finite()) {
                (true, true) => {
                    let expect = prev_cam.project(cur_cam.unproject(x_t, z_t)).depth;
                    (z_prev - expect).abs() <= depth_tol * expect.abs()
                }
                (false, false) => true,
                _ => false,
            };
            if consistent {
                prev.color.sample_bilinear(x_prev, px);
            }
        });
    Ok(out)
}

/// Pull-push hole fill: validity-weighted averages over `levels` halvings,
/// then coarse values pushed down into invalid pixels only.
pub fn fill_invalid(color: &Buffer, valid: &Buffer, levels: usize) -> Result<Buffer> {
    check_dims("fill inputs", color, valid)?;
    let ch = color.channels();
    let any_valid = valid.data().iter().any(|&v| v != 0.0);
    if !any_valid {
        return Err(Error::invalid("cannot fill an image with no valid pixels"));
    }
    if valid.data().iter().all(|&v| v != 0.0) {
        return Ok(color.clone());
    }

    // pull: premultiplied sums and weights
    struct Level {
        w: usize,
        h: usize,
        sum: Vec<f64>,
        weight: Vec<f64>,
    }
    let (w0, h0) = color.dims();
    let mut pyr = vec![Level {
        w: w0,
        h: h0,
        sum: color
            .data()
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if valid.data()[i / ch] != 0.0 {
                    c as f64
                } else {
                    0.0
                }
            })
            .collect(),
        weight: valid
            .data()
            .iter()
            .map(|&v| if v != 0.0 { 1.0 } else { 0.0 })
            .collect(),
    }];
    for _ in 0..levels {
        let prev = pyr.last().unwrap();
        if prev.w == 1 && prev.h == 1 {
            break;
        }
        let (w, h) = (prev.w.div_ceil(2), prev.h.div_ceil(2));
        let mut sum = vec![0.0; w * h * ch];
        let mut weight = vec![0.0; w * h];
        for y in 0..prev.h {
            for x in 0..prev.w {
                let (s, d) = (y * prev.w + x, (y / 2) * w + x / 2);
                weight[d] += prev.weight[s];
                for c in 0..ch {
                    sum[d * ch + c] += prev.sum[s * ch + c];
                }
            }
        }
        pyr.push(Level { w, h, sum, weight });
    }

    // normalized colors, coarsest first; empty coarsest texels take the global mean
    let coarsest = pyr.last().unwrap();
    let total_w: f64 = coarsest.weight.iter().sum();
    let mean: Vec<f64> = (0..ch)
        .map(|c| {
            (0..coarsest.w * coarsest.h)
                .map(|i| coarsest.sum[i * ch + c])
                .sum::<f64>()
                / total_w
        })
        .collect();
    let mut cur = vec![0.0; coarsest.w * coarsest.h * ch];
    for i in 0..coarsest.w * coarsest.h {
        let wt = coarsest.weight[i];
        for c in 0..ch {
            cur[i * ch + c] = if wt > 0.0 {
                coarsest.sum[i * ch + c] / wt
            } else {
                mean[c]
            };
        }
    }
    for l in (0..pyr.len() - 1).rev() {
        let (fine, coarse_w) = (&pyr[l], pyr[l + 1].w);
        let mut next = vec![0.0; fine.w * fine.h * ch];
        for y in 0..fine.h {
            for x in 0..fine.w {
                let i = y * fine.w + x;
                let wt = fine.weight[i];
                for c in 0..ch {
                    next[i * ch + c] = if wt > 0.0 {
                        fine.sum[i * ch + c] / wt
                    } else {
                        cur[((y / 2) * coarse_w + x / 2) * ch + c]
                    };
                }
            }
        }
        cur = next;
    }

    let mut out = color.clone();
    for (i, px) in out.data_mut().chunks_mut(ch).enumerate() {
        if valid.data()[i] == 0.0 {
            for c in 0..ch {
                px[c] = cur[i * ch + c] as f32;
            }
        }
    }
    Ok(out)
}

pub struct CorrectorInput<'a> {
    pub gae: &'a Buffer,
    pub depth: &'a Buffer,
    pub warped_prev: &'a Buffer,
    pub input_mask: &'a Buffer,
}

pub struct CorrectorOutput {
    pub color: Buffer,
    /// Predicted focus mask; clamped to `[0, 1]` before blending.
    pub focus: Buffer,
}

/// Refines the GAE color where shading changed. Implementations may hold
/// learned weights; the pipeline only relies on the output shapes.
pub trait Corrector: Send + Sync {
    fn name(&self) -> &str;
    fn correct(&self, input: &CorrectorInput<'_>) -> Result<CorrectorOutput>;
}

/// Returns the GAE color with an all-zero mask.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityCorrector;

impl Corrector for IdentityCorrector {
    fn name(&self) -> &str {
        "identity"
    }

    fn correct(&self, input: &CorrectorInput<'_>) -> Result<CorrectorOutput> {
        let (w, h) = input.gae.dims();
        Ok(CorrectorOutput {
            color: input.gae.clone(),
            focus: Buffer::new(w, h, 1),
        })
    }
}

pub const CORRECTOR_NAMES: [&str; 1] = ["identity"];

pub fn corrector_by_name(name: &str) -> Result<Box<dyn Corrector>> {
    match name {
        "identity" => Ok(Box::new(IdentityCorrector)),
        _ => Err(Error::invalid(format!(
            "unknown corrector `{name}` (available: {})",
            CORRECTOR_NAMES.join(", ")
        ))),
    }
}

/// `gae * (1 - m) + refined * m` per pixel and channel.
pub fn blend(gae: &Buffer, refined: &Buffer, mask: &Buffer) -> Result<Buffer> {
    check_dims("blend inputs", gae, refined)?;
    check_dims("blend inputs", gae, mask)?;
    let mut out = gae.clone();
    let ch = gae.channels();
    out.data_mut()
        .par_chunks_mut(ch)
        .zip(refined.data().par_chunks(ch))
        .zip(mask.data().par_iter())
        .for_each(|((o, r), &m)| {
            let m = if m.is_nan() { 0.0 } else { m.clamp(0.0, 1.0) };
            if m == 1.0 {
                o.copy_from_slice(r);
            } else if m > 0.0 {
                for c in 0..ch {
                    o[c] = o[c] * (1.0 - m) + r[c] * m;
                }
            }
        });
    Ok(out)
}

pub fn apply_corrector(
    corrector: &dyn Corrector,
    gae: &Buffer,
    depth: &Buffer,
    warped_prev: &Buffer,
    input_mask: &Buffer,
) -> Result<Buffer> {
    check_dims("corrector inputs", gae, depth)?;
    check_dims("corrector inputs", gae, warped_prev)?;
    check_dims("corrector inputs", gae, input_mask)?;
    let out = corrector.correct(&CorrectorInput {
        gae,
        depth,
        warped_prev,
        input_mask,
    })?;
    if !out.color.same_shape(gae) || out.focus.dims() != gae.dims() || out.focus.channels() != 1 {
        return Err(Error::Contract(format!(
            "corrector `{}` returned color {}x{}x{} and mask {}x{}x{} for a {}x{} input",
            corrector.name(),
            out.color.width(),
            out.color.height(),
            out.color.channels(),
            out.focus.width(),
            out.focus.height(),
            out.focus.channels(),
            gae.width(),
            gae.height()
        )));
    }
    blend(gae, &out.color, &out.focus)
}
