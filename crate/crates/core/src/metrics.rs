//! PSNR, SSIM and sequence-level reports.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::buffer::Buffer;
use crate::error::{Error, Result};
use crate::frame_io::{gamma_encode, load_frame, read_buffer, FrameRole, SequenceManifest};
use crate::shading::{focus_mask, smape, DEFAULT_FOCUS_THRESHOLD, MASK_DISOCCLUDED};

pub const DISPLAY_GAMMA: f32 = 2.2;
/// Reported PSNR for identical images.
pub const PSNR_CAP: f64 = 99.0;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;
/// Timestamp tolerance when pairing predicted and reference frames.
pub const PAIRING_TOL: f64 = 1e-9;

fn display_value(v: f32) -> f64 {
    gamma_encode(v, DISPLAY_GAMMA) as f64
}

fn check_same(pred: &Buffer, reference: &Buffer) -> Result<()> {
    if !pred.same_shape(reference) {
        return Err(Error::invalid(format!(
            "shape mismatch: {}x{}x{} vs {}x{}x{}",
            pred.width(),
            pred.height(),
            pred.channels(),
            reference.width(),
            reference.height(),
            reference.channels()
        )));
    }
    Ok(())
}

/// Sum of squared display-space errors and the number of values summed.
pub fn squared_error(
    pred: &Buffer,
    reference: &Buffer,
    mask: Option<&Buffer>,
) -> Result<(f64, usize)> {
    check_same(pred, reference)?;
    if let Some(m) = mask {
        if m.dims() != pred.dims() {
            return Err(Error::invalid("mask does not match image dimensions"));
        }
    }
    let ch = pred.channels();
    let (sum, count) = pred
        .data()
        .par_chunks(ch)
        .zip(reference.data().par_chunks(ch))
        .enumerate()
        .filter(|(i, _)| mask.is_none_or(|m| m.data()[*i] != 0.0))
        .map(|(_, (a, b))| {
            let s: f64 = a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (display_value(x) - display_value(y)).powi(2))
                .sum();
            (s, ch)
        })
        .reduce(|| (0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok((sum, count))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        PSNR_CAP
    } else {
        (10.0 * (1.0 / mse).log10()).min(PSNR_CAP)
    }
}

/// PSNR in dB over gamma-encoded values clamped to `[0, 1]`, optionally
/// restricted to pixels where `mask` is non-zero.
pub fn psnr(pred: &Buffer, reference: &Buffer, mask: Option<&Buffer>) -> Result<f64> {
    let (sum, count) = squared_error(pred, reference, mask)?;
    if count == 0 {
        return Err(Error::invalid("PSNR over an empty mask"));
    }
    Ok(psnr_from_mse(sum / count as f64))
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let r = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - r;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

fn luminance(img: &Buffer) -> Vec<f64> {
    let ch = img.channels();
    img.data()
        .chunks(ch)
        .map(|p| p.iter().map(|&v| display_value(v)).sum::<f64>() / ch as f64)
        .collect()
}

/// Separable "valid" filtering: output has `(w - 10) × (h - 10)` samples.
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let (ow, oh) = (w + 1 - SSIM_WINDOW, h + 1 - SSIM_WINDOW);
    let mut rows = vec![0.0; ow * h];
    rows.par_chunks_mut(ow).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            *out = (0..SSIM_WINDOW).map(|i| k[i] * src[y * w + x + i]).sum();
        }
    });
    let mut out = vec![0.0; ow * oh];
    out.par_chunks_mut(ow).enumerate().for_each(|(y, row)| {
        for (x, o) in row.iter_mut().enumerate() {
            *o = (0..SSIM_WINDOW)
                .map(|i| k[i] * rows[(y + i) * ow + x])
                .sum();
        }
    });
    out
}

/// Local SSIM at every full window position; entry `(x, y)` belongs to the
/// window centered on pixel `(x + 5, y + 5)`.
pub fn ssim_map(pred: &Buffer, reference: &Buffer) -> Result<Buffer> {
    check_same(pred, reference)?;
    let (w, h) = pred.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::invalid(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {w}x{h}"
        )));
    }
    let k = gaussian_kernel();
    let a = luminance(pred);
    let b = luminance(reference);
    let aa: Vec<f64> = a.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    let [mu_a, mu_b, e_aa, e_bb, e_ab] = [&a, &b, &aa, &bb, &ab].map(|s| filter_valid(s, w, h, &k));
    let data: Vec<f32> = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = (e_aa[i] - ma * ma).max(0.0);
            let vb = (e_bb[i] - mb * mb).max(0.0);
            let cov = e_ab[i] - ma * mb;
            let s = ((2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2));
            s as f32
        })
        .collect();
    Buffer::from_vec(w + 1 - SSIM_WINDOW, h + 1 - SSIM_WINDOW, 1, data)
}

/// Mean local SSIM (11×11 Gaussian window, sigma 1.5) on the channel-mean
/// luminance of gamma-encoded values.
pub fn ssim(pred: &Buffer, reference: &Buffer) -> Result<f64> {
    let map = ssim_map(pred, reference)?;
    Ok(map.data().iter().map(|&v| v as f64).sum::<f64>() / map.pixel_count() as f64)
}

/// Mean of the SSIM map over windows whose center pixel lies in `mask`.
fn masked_ssim(map: &Buffer, mask: &Buffer) -> Option<f64> {
    let r = SSIM_WINDOW / 2;
    let (mw, mh) = map.dims();
    let mut sum = 0.0;
    let mut n = 0usize;
    for y in 0..mh {
        for x in 0..mw {
            if mask.get(x + r, y + r, 0) != 0.0 {
                sum += map.get(x, y, 0) as f64;
                n += 1;
            }
        }
    }
    (n > 0).then(|| sum / n as f64)
}

fn mean_smape(pred: &Buffer, reference: &Buffer, mask: Option<&Buffer>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for i in 0..pred.pixel_count() {
        if mask.is_none_or(|m| m.data()[i] != 0.0) {
            sum += smape(pred.at(i), reference.at(i));
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMetrics {
    pub pixels: usize,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub smape: Option<f64>,
    /// Sum of squared display errors, kept so regions can be pooled exactly.
    pub sse: f64,
}

pub const REGIONS: [&str; 4] = ["all", "dynamic", "disocclusion", "focus"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMetrics {
    pub timestamp: f64,
    pub psnr: f64,
    pub ssim: f64,
    pub smape: f64,
    pub regions: BTreeMap<String, RegionMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub frames: usize,
    pub psnr: f64,
    pub ssim: f64,
    pub smape: f64,
    /// Per region: mean PSNR, SSIM and SMAPE over frames where the region is non-empty.
    pub regions: BTreeMap<String, RegionAggregate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionAggregate {
    pub frames: usize,
    pub pixels: usize,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub smape: Option<f64>,
    /// PSNR of all region pixels pooled across frames.
    pub pooled_psnr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub label: String,
    pub frames: Vec<FrameMetrics>,
    pub aggregate: AggregateMetrics,
    pub config_echo: serde_json::Value,
}

fn region(
    pred: &Buffer,
    reference: &Buffer,
    mask: Option<&Buffer>,
    ssim_map: &Buffer,
) -> Result<RegionMetrics> {
    let (sse, count) = squared_error(pred, reference, mask)?;
    let pixels = count / pred.channels();
    Ok(RegionMetrics {
        pixels,
        psnr: (count > 0).then(|| psnr_from_mse(sse / count as f64)),
        ssim: match mask {
            None => Some(
                ssim_map.data().iter().map(|&v| v as f64).sum::<f64>()
                    / ssim_map.pixel_count() as f64,
            ),
            Some(m) => masked_ssim(ssim_map, m),
        },
        smape: mean_smape(pred, reference, mask),
        sse,
    })
}

/// Metrics for one predicted/reference pair with optional region masks.
pub fn frame_metrics(
    timestamp: f64,
    pred: &Buffer,
    reference: &Buffer,
    dynamic: Option<&Buffer>,
    disocclusion: Option<&Buffer>,
    focus: Option<&Buffer>,
) -> Result<FrameMetrics> {
    let map = ssim_map(pred, reference)?;
    let mut regions = BTreeMap::new();
    let all = region(pred, reference, None, &map)?;
    for (name, mask) in [
        ("dynamic", dynamic),
        ("disocclusion", disocclusion),
        ("focus", focus),
    ] {
        if let Some(m) = mask {
            regions.insert(name.to_string(), region(pred, reference, Some(m), &map)?);
        }
    }
    let out = FrameMetrics {
        timestamp,
        psnr: all.psnr.expect("non-empty image"),
        ssim: all.ssim.expect("non-empty image"),
        smape: all.smape.expect("non-empty image"),
        regions: {
            regions.insert("all".into(), all);
            regions
        },
    };
    Ok(out)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

pub fn aggregate(frames: &[FrameMetrics]) -> AggregateMetrics {
    let mut regions = BTreeMap::new();
    for name in REGIONS {
        let present: Vec<&RegionMetrics> = frames
            .iter()
            .filter_map(|f| f.regions.get(name))
            .filter(|r| r.pixels > 0)
            .collect();
        if present.is_empty() {
            continue;
        }
        let pixels: usize = present.iter().map(|r| r.pixels).sum();
        let sse: f64 = present.iter().map(|r| r.sse).sum();
        let channels_per_pixel = 3.0;
        regions.insert(
            name.to_string(),
            RegionAggregate {
                frames: present.len(),
                pixels,
                psnr: mean(present.iter().filter_map(|r| r.psnr)),
                ssim: mean(present.iter().filter_map(|r| r.ssim)),
                smape: mean(present.iter().filter_map(|r| r.smape)),
                pooled_psnr: Some(psnr_from_mse(sse / (pixels as f64 * channels_per_pixel))),
            },
        );
    }
    AggregateMetrics {
        frames: frames.len(),
        psnr: mean(frames.iter().map(|f| f.psnr)).unwrap_or(f64::NAN),
        ssim: mean(frames.iter().map(|f| f.ssim)).unwrap_or(f64::NAN),
        smape: mean(frames.iter().map(|f| f.smape)).unwrap_or(f64::NAN),
        regions,
    }
}

/// Pairs every extrapolated frame of `pred_dir` with the ground-truth frame
/// of `ref_dir` at the same timestamp and evaluates them. Region masks come
/// from the reference (dynamic) and from the prediction's dumps
/// (disocclusion = holes before background projection, focus = focus mask of
/// the prediction against the reference).
pub fn evaluate_sequence(
    pred_dir: impl AsRef<Path>,
    ref_dir: impl AsRef<Path>,
) -> Result<MetricReport> {
    let (pred_dir, ref_dir) = (pred_dir.as_ref(), ref_dir.as_ref());
    let pred_m = SequenceManifest::load(pred_dir)?;
    let ref_m = SequenceManifest::load(ref_dir)?;
    let refs: Vec<_> = ref_m.frames_with_role(FrameRole::Groundtruth).collect();
    let preds: Vec<_> = pred_m.frames_with_role(FrameRole::Extrapolated).collect();
    if preds.is_empty() {
        return Err(Error::invalid(format!(
            "{} holds no extrapolated frames",
            pred_dir.display()
        )));
    }
    let mut pairs = Vec::with_capacity(preds.len());
    let mut offenders = Vec::new();
    for p in &preds {
        match refs
            .iter()
            .find(|r| (r.timestamp - p.timestamp).abs() <= PAIRING_TOL)
        {
            Some(r) => pairs.push((*p, *r)),
            None => offenders.push(p.timestamp),
        }
    }
    if !offenders.is_empty() {
        return Err(Error::Pairing { offenders });
    }
    let frames: Vec<FrameMetrics> = pairs
        .par_iter()
        .map(|(p, r)| -> Result<FrameMetrics> {
            let pred = load_frame(pred_dir, p)?;
            let reference = load_frame(ref_dir, r)?;
            let dyn_pred = &pred.dyn_gt;
            let disocc = match &p.input_mask {
                Some(rel) => {
                    let m = read_buffer(pred_dir.join(rel))?;
                    Some(m.map(|v| if v == MASK_DISOCCLUDED { 1.0 } else { 0.0 }))
                }
                None => None,
            };
            let focus = focus_mask(
                &pred.color,
                &reference.color,
                dyn_pred,
                DEFAULT_FOCUS_THRESHOLD,
            )?;
            frame_metrics(
                p.timestamp,
                &pred.color,
                &reference.color,
                Some(&reference.dyn_gt),
                disocc.as_ref(),
                Some(&focus),
            )
        })
        .collect::<Result<_>>()?;
    let mut config_echo = serde_json::Map::new();
    config_echo.insert("scene".into(), pred_m.scene.clone().into());
    config_echo.insert("window_mode".into(), pred_m.window_mode.clone().into());
    if let Some(c) = &pred_m.config {
        config_echo.insert("pipeline".into(), c.clone());
    }
    if let Some(t) = &pred_m.timings {
        config_echo.insert("timings".into(), t.clone());
    }
    let label = pred_m
        .config
        .as_ref()
        .and_then(|c| c.get("label"))
        .and_then(|l| l.as_str())
        .unwrap_or("unlabeled")
        .to_string();
    Ok(MetricReport {
        label,
        aggregate: aggregate(&frames),
        frames,
        config_echo: serde_json::Value::Object(config_echo),
    })
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Json {
            path: "<report>".into(),
            source: e,
        })
    }

    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |v| format!("{v:.p$}"));
        let mut s = format!("report: {}\n", self.label);
        s += &format!(
            "aggregate over {} frames: PSNR {:.3} dB  SSIM {:.4}  SMAPE {:.4}\n",
            self.aggregate.frames, self.aggregate.psnr, self.aggregate.ssim, self.aggregate.smape
        );
        for (name, r) in &self.aggregate.regions {
            s += &format!(
                "  {name:<13} frames {:>3}  pixels {:>9}  PSNR {:>8}  SSIM {:>7}  SMAPE {:>7}\n",
                r.frames,
                r.pixels,
                opt(r.psnr, 3),
                opt(r.ssim, 4),
                opt(r.smape, 4)
            );
        }
        s += "per frame:\n";
        for f in &self.frames {
            s += &format!(
                "  t={:.6}  PSNR {:.3}  SSIM {:.4}  SMAPE {:.4}\n",
                f.timestamp, f.psnr, f.ssim, f.smape
            );
        }
        s
    }

    /// Writes the JSON report to `path` and the text report next to it.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))?;
        let txt = path.with_extension("txt");
        std::fs::write(&txt, self.to_text()).map_err(|e| Error::io(&txt, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solid(w: usize, h: usize, v: f32) -> Buffer {
        Buffer::filled(w, h, 3, v)
    }

    /// Linear value whose gamma-2.2 encoding is `d`.
    fn lin(d: f64) -> f32 {
        d.powf(2.2) as f32
    }

    #[test]
    fn psnr_values() {
        let a = solid(8, 8, 0.3);
        assert_eq!(psnr(&a, &a, None).unwrap(), PSNR_CAP);
        // display-space difference 0.1 -> MSE 0.01 -> 20 dB
        let p = psnr(&solid(8, 8, lin(0.5)), &solid(8, 8, lin(0.6)), None).unwrap();
        assert!((p - 20.0).abs() < 1e-4, "{p}");
        let p = psnr(&solid(8, 8, lin(0.5)), &solid(8, 8, lin(0.51)), None).unwrap();
        assert!((p - 40.0).abs() < 1e-3, "{p}");
        assert!(psnr(&a, &a, Some(&Buffer::new(8, 8, 1))).is_err());
        assert!(psnr(&a, &solid(8, 7, 0.3), None).is_err());
    }

    #[test]
    fn psnr_clamps_before_comparing() {
        assert_eq!(
            psnr(&solid(4, 4, 1.0), &solid(4, 4, 7.5), None).unwrap(),
            PSNR_CAP
        );
    }

    #[test]
    fn ssim_identity_and_anticorrelation() {
        let mut img = Buffer::new(24, 24, 3);
        for (i, v) in img.data_mut().chunks_mut(3).enumerate() {
            let on = ((i % 24) / 3 + (i / 24) / 3) % 2 == 0;
            v.fill(if on { 1.0 } else { 0.0 });
        }
        assert!((ssim(&img, &img).unwrap() - 1.0).abs() < 1e-6);
        let inv = img.map(|v| 1.0 - v);
        assert!(ssim(&img, &inv).unwrap() < 0.0);
        assert!(ssim(&solid(10, 20, 0.1), &solid(10, 20, 0.1)).is_err());
    }

    #[test]
    fn ssim_constant_images_closed_form() {
        let (c1, c2) = (0.3f64, 0.7f64);
        let s = ssim(&solid(16, 16, lin(c1)), &solid(16, 16, lin(c2))).unwrap();
        let expect = (2.0 * c1 * c2 + SSIM_C1) / (c1 * c1 + c2 * c2 + SSIM_C1);
        assert!((s - expect).abs() < 1e-6, "{s} vs {expect}");
    }

    #[test]
    fn pooled_regions_match_masked_psnr() {
        let a = Buffer::from_vec(
            16,
            16,
            3,
            (0..768).map(|i| (i % 13) as f32 / 13.0).collect(),
        )
        .unwrap();
        let b =
            Buffer::from_vec(16, 16, 3, (0..768).map(|i| (i % 7) as f32 / 7.0).collect()).unwrap();
        let mut m1 = Buffer::new(16, 16, 1);
        for i in 0..100 {
            m1.data_mut()[i] = 1.0;
        }
        let m2 = m1.map(|v| 1.0 - v);
        let (s1, n1) = squared_error(&a, &b, Some(&m1)).unwrap();
        let (s2, n2) = squared_error(&a, &b, Some(&m2)).unwrap();
        let union = psnr(&a, &b, None).unwrap();
        let pooled = psnr_from_mse((s1 + s2) / (n1 + n2) as f64);
        assert!((union - pooled).abs() < 1e-9);
    }

    #[test]
    fn aggregates_are_means() {
        let a = solid(12, 12, 0.2);
        let b = solid(12, 12, 0.25);
        let f1 = frame_metrics(0.0, &a, &a, None, None, None).unwrap();
        let f2 = frame_metrics(1.0, &a, &b, None, None, None).unwrap();
        let agg = aggregate(&[f1.clone(), f2.clone()]);
        assert!((agg.psnr - 0.5 * (f1.psnr + f2.psnr)).abs() < 1e-12);
        assert!((agg.ssim - 0.5 * (f1.ssim + f2.ssim)).abs() < 1e-12);
        assert_eq!(agg.regions["all"].frames, 2);
    }
}
