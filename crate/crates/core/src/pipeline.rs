//! The extrapolation loop: rendered frames update history, background and
//! window state; extrapolation steps turn that state into display frames.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::background::{
    project_background, update_background, BackgroundPyramid, DEFAULT_LEVELS, DEFAULT_REL_EPS,
};
use crate::buffer::Buffer;
use crate::error::{Error, Result};
use crate::frame::FrameRecord;
use crate::frame_io::{
    export_mask_png, load_frame, write_buffer, FrameEntry, FrameRole, SequenceManifest,
};
use crate::geometry::{CameraPose, ExtrapolationSchedule, RenderWindow};
use crate::metrics::PAIRING_TOL;
use crate::motion::{
    estimate_positions, forward_warp, update_history, HistoryState, DEFAULT_EPS_STATIC,
    DEFAULT_HISTORY_LEN,
};
use crate::scene::{
    generate_sequence, render, DisplayWindow, SceneScript, SequenceSpec, WindowProvider,
};
use crate::shading::{
    apply_corrector, build_input_mask, corrector_by_name, fill_invalid, warp_prev, Corrector,
    DEFAULT_DEPTH_TOL, DEFAULT_FILL_LEVELS,
};
use crate::window::{
    crop_motion_to_display, crop_to_display, predict_pose, AdaptiveWindowProvider, CropFilter,
    PixelMode, WindowPlan, WindowSettings, DEFAULT_MAX_EXTENT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PoseMode {
    #[default]
    Predicted,
    Oracle,
}

impl std::str::FromStr for PoseMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "predicted" => Ok(PoseMode::Predicted),
            "oracle" => Ok(PoseMode::Oracle),
            _ => Err(Error::invalid(format!(
                "unknown pose mode `{s}` (predicted | oracle)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Generated frames per rendered frame.
    pub n: u32,
    pub k: usize,
    pub levels: usize,
    pub eps_static: f64,
    pub rel_eps: f64,
    /// Virtual plane distance; `None` is `10 × near`.
    pub plane_d: Option<f64>,
    pub window_mode: PixelMode,
    pub max_extent: f64,
    pub pose_mode: PoseMode,
    pub me: bool,
    pub bgc: bool,
    pub aw: bool,
    pub scn: bool,
    pub corrector: String,
    pub depth_tol: f64,
    pub fill_levels: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n: 1,
            k: DEFAULT_HISTORY_LEN,
            levels: DEFAULT_LEVELS,
            eps_static: DEFAULT_EPS_STATIC,
            rel_eps: DEFAULT_REL_EPS,
            plane_d: None,
            window_mode: PixelMode::Density,
            max_extent: DEFAULT_MAX_EXTENT,
            pose_mode: PoseMode::Predicted,
            me: true,
            bgc: true,
            aw: true,
            scn: true,
            corrector: "identity".into(),
            depth_tol: DEFAULT_DEPTH_TOL,
            fill_levels: DEFAULT_FILL_LEVELS,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    /// `full`, or the disabled modules joined, e.g. `no-me+no-bgc`.
    pub fn label(&self) -> String {
        let off: Vec<&str> = [
            (self.me, "no-me"),
            (self.bgc, "no-bgc"),
            (self.aw, "no-aw"),
            (self.scn, "no-scn"),
        ]
        .iter()
        .filter(|(on, _)| !on)
        .map(|(_, l)| *l)
        .collect();
        if off.is_empty() {
            "full".into()
        } else {
            off.join("+")
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if self.k < 2 {
            return Err(Error::invalid("history length k must be at least 2"));
        }
        if !(1..=crate::background::MAX_LEVELS).contains(&self.levels) {
            return Err(Error::invalid(format!(
                "levels must be in 1..={}",
                crate::background::MAX_LEVELS
            )));
        }
        if !(self.eps_static >= 0.0 && self.rel_eps >= 0.0 && self.depth_tol >= 0.0) {
            return Err(Error::invalid("tolerances must be non-negative"));
        }
        corrector_by_name(&self.corrector)?;
        Ok(())
    }

    pub fn window_settings(&self, base_w: u32, base_h: u32) -> WindowSettings {
        WindowSettings {
            base_w,
            base_h,
            mode: self.window_mode,
            plane_d: self.plane_d,
            max_extent: self.max_extent,
            alpha: ExtrapolationSchedule::alphas(self.n)
                .last()
                .copied()
                .unwrap_or(0.5),
        }
    }

    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v["label"] = self.label().into();
        v
    }
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    #[serde(rename = "BG Collection")]
    pub bg_collection: f64,
    #[serde(rename = "History Track")]
    pub history_track: f64,
    #[serde(rename = "BG Projection")]
    pub bg_projection: f64,
    #[serde(rename = "Position Pred.")]
    pub position_pred: f64,
    #[serde(rename = "Warp")]
    pub warp: f64,
    #[serde(rename = "Misc")]
    pub misc: f64,
}

impl StageTimings {
    /// Cost of one extrapolation step excluding the per-rendered-frame stages.
    pub fn extrapolation_ms(&self) -> f64 {
        self.bg_projection + self.position_pred + self.warp + self.misc
    }

    pub fn total_ms(&self) -> f64 {
        self.bg_collection + self.history_track + self.extrapolation_ms()
    }

    pub fn mean(all: &[StageTimings]) -> StageTimings {
        let n = all.len().max(1) as f64;
        let mut m = StageTimings::default();
        for t in all {
            m.bg_collection += t.bg_collection / n;
            m.history_track += t.history_track / n;
            m.bg_projection += t.bg_projection / n;
            m.position_pred += t.position_pred / n;
            m.warp += t.warp / n;
            m.misc += t.misc / n;
        }
        m
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// One generated frame, cropped to the display.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolatedFrame {
    pub timestamp: f64,
    pub alpha: f64,
    /// Camera the frame was generated for.
    pub pose: CameraPose,
    pub color: Buffer,
    /// View depth under `pose`.
    pub depth: Buffer,
    /// `x + motion[x]` is the pixel's source position in the last rendered frame (display pixels).
    pub motion: Buffer,
    pub dyn_warped: Buffer,
    /// 1 dynamic, 0 hole before background projection, 0.5 elsewhere.
    pub input_mask: Buffer,
    /// Valid after background projection, before hole filling.
    pub valid: Buffer,
    /// Color before the corrector blend (already hole-filled).
    pub gae: Buffer,
    pub timings: StageTimings,
}

impl ExtrapolatedFrame {
    pub fn as_record(&self) -> FrameRecord {
        FrameRecord {
            color: self.color.clone(),
            depth: self.depth.clone(),
            motion: self.motion.clone(),
            dyn_gt: self.dyn_warped.clone(),
            pose: self.pose,
            window: RenderWindow::display(self.color.width() as u32, self.color.height() as u32),
            timestamp: self.timestamp,
        }
    }
}

/// Summary of a rendered step.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedStep {
    /// Plan the frame's own window is expected to follow (`None` without AW
    /// or on the first frame).
    pub plan: Option<WindowPlan>,
    pub dynamic_pixels: usize,
    pub timings: StageTimings,
}

struct Rendered {
    frame: FrameRecord,
    history: HistoryState,
    pyramid: Option<BackgroundPyramid>,
}

/// Pipeline state. It only ever holds frames that have already been rendered.
pub struct Extrapolator {
    config: PipelineConfig,
    corrector: Box<dyn Corrector>,
    base_w: u32,
    base_h: u32,
    cur: Option<Rendered>,
    prev: Option<FrameRecord>,
    last_timings: StageTimings,
}

impl Extrapolator {
    pub fn new(config: PipelineConfig, base_w: u32, base_h: u32) -> Result<Self> {
        config.validate()?;
        if base_w == 0 || base_h == 0 {
            return Err(Error::invalid("display dimensions must be at least 1"));
        }
        let corrector = corrector_by_name(&config.corrector)?;
        Ok(Self::with_corrector(config, base_w, base_h, corrector))
    }

    pub fn with_corrector(
        config: PipelineConfig,
        base_w: u32,
        base_h: u32,
        corrector: Box<dyn Corrector>,
    ) -> Self {
        Extrapolator {
            config,
            corrector,
            base_w,
            base_h,
            cur: None,
            prev: None,
            last_timings: StageTimings::default(),
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn history(&self) -> Option<&HistoryState> {
        self.cur.as_ref().map(|c| &c.history)
    }

    pub fn pyramid(&self) -> Option<&BackgroundPyramid> {
        self.cur.as_ref().and_then(|c| c.pyramid.as_ref())
    }

    pub fn current_frame(&self) -> Option<&FrameRecord> {
        self.cur.as_ref().map(|c| &c.frame)
    }

    /// Two rendered frames seen, so extrapolation can run.
    pub fn ready(&self) -> bool {
        self.cur.is_some() && self.prev.is_some()
    }

    fn window_settings(&self) -> WindowSettings {
        self.config.window_settings(self.base_w, self.base_h)
    }

    /// Window the renderer should use for a frame at `next_pose`, from the
    /// latest rendered camera and that pose.
    pub fn plan_window(&self, next_pose: &CameraPose) -> Result<RenderWindow> {
        match (&self.cur, self.config.aw) {
            (Some(cur), true) => Ok(self.window_settings().plan(next_pose, &cur.frame.pose)?.1),
            _ => Ok(RenderWindow::display(self.base_w, self.base_h)),
        }
    }

    /// Rendered frame in, state updated: history, then background, then the
    /// window plan for this frame's pose.
    pub fn run_rendered_step(&mut self, frame: FrameRecord) -> Result<RenderedStep> {
        frame.validate()?;
        if let Some(cur) = &self.cur {
            if !(frame.timestamp > cur.frame.timestamp) {
                return Err(Error::Sequencing(format!(
                    "rendered frame at t={} arrived after t={}",
                    frame.timestamp, cur.frame.timestamp
                )));
            }
        }
        let frame = if self.config.aw {
            frame
        } else {
            display_frame(&frame, self.base_w, self.base_h)?
        };
        let mut timings = StageTimings::default();

        let t0 = Instant::now();
        let history = match &self.cur {
            None => HistoryState::seed(&frame, self.config.k)?,
            Some(cur) => update_history(&cur.history, &frame, self.config.eps_static)?,
        };
        timings.history_track = ms_since(t0);

        let t0 = Instant::now();
        let pyramid = if self.config.bgc {
            Some(match self.cur.as_ref().and_then(|c| c.pyramid.as_ref()) {
                None => BackgroundPyramid::seed(&frame, history.moving_mask(), self.config.levels)?,
                Some(p) => {
                    update_background(p, &frame, history.moving_mask(), self.config.rel_eps)?
                }
            })
        } else {
            None
        };
        timings.bg_collection = ms_since(t0);

        let plan = match (&self.cur, self.config.aw) {
            (Some(cur), true) => Some(self.window_settings().plan(&frame.pose, &cur.frame.pose)?.0),
            _ => None,
        };
        let dynamic_pixels = history
            .dynamic_mask()
            .data()
            .iter()
            .filter(|&&v| v != 0.0)
            .count();
        let old = self.cur.replace(Rendered {
            frame,
            history,
            pyramid,
        });
        self.prev = old.map(|r| r.frame);
        self.last_timings = timings;
        Ok(RenderedStep {
            plan,
            dynamic_pixels,
            timings,
        })
    }

    /// Generates the frame at `t + alpha * (t - t_prev)`. `oracle_pose`
    /// replaces the predicted camera and is required in oracle mode.
    pub fn run_extrapolation_step(
        &self,
        alpha: f64,
        oracle_pose: Option<&CameraPose>,
    ) -> Result<ExtrapolatedFrame> {
        let (Some(cur), Some(prev)) = (&self.cur, &self.prev) else {
            return Err(Error::Sequencing(
                "extrapolation needs two rendered frames".into(),
            ));
        };
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        let frame = &cur.frame;
        let mut timings = self.last_timings;

        let t0 = Instant::now();
        let target_pose = match (self.config.pose_mode, oracle_pose) {
            (PoseMode::Oracle, None) => {
                return Err(Error::invalid(
                    "oracle pose mode needs the ground-truth camera",
                ));
            }
            (PoseMode::Oracle, Some(p)) => *p,
            (PoseMode::Predicted, _) => predict_pose(&frame.pose, &prev.pose, alpha)?.pose,
        };
        let static_hist;
        let hist = if self.config.me {
            &cur.history
        } else {
            static_hist = cur.history.as_static();
            &static_hist
        };
        let np = estimate_positions(hist, alpha)?;
        timings.position_pred = ms_since(t0);

        let t0 = Instant::now();
        let target_window = frame.window;
        let mut warp = forward_warp(frame, hist, &np, &target_pose, &target_window)?;
        timings.warp = ms_since(t0);

        let t0 = Instant::now();
        let input_mask = build_input_mask(&warp);
        let mut misc = ms_since(t0);

        let t0 = Instant::now();
        if let Some(pyr) = &cur.pyramid {
            project_background(pyr, &mut warp, &target_pose, &target_window)?;
        }
        timings.bg_projection = ms_since(t0);

        let t0 = Instant::now();
        let gae = if warp.valid.data().iter().any(|&v| v != 0.0) {
            fill_invalid(&warp.color, &warp.valid, self.config.fill_levels)?
        } else {
            warp.color.clone()
        };
        let color = if self.config.scn {
            let warped_prev = warp_prev(prev, frame, &warp, &gae, self.config.depth_tol)?;
            apply_corrector(
                self.corrector.as_ref(),
                &gae,
                &warp.depth,
                &warped_prev,
                &input_mask,
            )?
        } else {
            gae.clone()
        };
        let (bw, bh) = (self.base_w, self.base_h);
        let out = ExtrapolatedFrame {
            timestamp: frame.timestamp + alpha * (frame.timestamp - prev.timestamp),
            alpha,
            pose: target_pose,
            color: crop_to_display(&color, &target_window, bw, bh, CropFilter::Auto)?,
            gae: crop_to_display(&gae, &target_window, bw, bh, CropFilter::Auto)?,
            depth: crop_to_display(&warp.depth, &target_window, bw, bh, CropFilter::Nearest)?,
            motion: crop_motion_to_display(&warp.motion_back, &target_window, bw, bh)?,
            dyn_warped: crop_to_display(
                &warp.dyn_warped,
                &target_window,
                bw,
                bh,
                CropFilter::Nearest,
            )?,
            input_mask: crop_to_display(&input_mask, &target_window, bw, bh, CropFilter::Nearest)?,
            valid: crop_to_display(&warp.valid, &target_window, bw, bh, CropFilter::Nearest)?,
            timings,
        };
        misc += ms_since(t0);
        Ok(ExtrapolatedFrame {
            timings: StageTimings {
                misc,
                ..out.timings
            },
            ..out
        })
    }
}

/// Crops a frame rendered through an enlarged window back to the display.
pub fn display_frame(frame: &FrameRecord, base_w: u32, base_h: u32) -> Result<FrameRecord> {
    if frame.window.is_display() && frame.window.size() == (base_w as usize, base_h as usize) {
        return Ok(frame.clone());
    }
    let w = &frame.window;
    Ok(FrameRecord {
        color: crop_to_display(&frame.color, w, base_w, base_h, CropFilter::Auto)?,
        depth: crop_to_display(&frame.depth, w, base_w, base_h, CropFilter::Nearest)?,
        motion: crop_motion_to_display(&frame.motion, w, base_w, base_h)?,
        dyn_gt: crop_to_display(&frame.dyn_gt, w, base_w, base_h, CropFilter::Nearest)?,
        pose: frame.pose,
        window: RenderWindow::display(base_w, base_h),
        timestamp: frame.timestamp,
    })
}

/// In-memory run: the extrapolated frame next to the renderer's own frame at
/// the same instant.
#[derive(Debug, Clone)]
pub struct SimulatedFrame {
    pub extrapolated: ExtrapolatedFrame,
    pub reference: FrameRecord,
    /// Display crop of the rendered frame the extrapolation started from.
    pub source: FrameRecord,
}

/// Renders `spec.frame_count` frames of `scene` (through adaptive windows when
/// AW is on) and extrapolates between each consecutive pair.
pub fn simulate(
    scene: &SceneScript,
    spec: &SequenceSpec,
    config: &PipelineConfig,
) -> Result<Vec<SimulatedFrame>> {
    let mut config = config.clone();
    config.n = spec.n()?;
    let mut ex = Extrapolator::new(config.clone(), spec.width, spec.height)?;
    let mut provider: Box<dyn WindowProvider> = if config.aw {
        Box::new(AdaptiveWindowProvider::new(
            config.window_settings(spec.width, spec.height),
        ))
    } else {
        Box::new(DisplayWindow {
            width: spec.width,
            height: spec.height,
        })
    };
    let aspect = spec.aspect();
    let dt = 1.0 / spec.fps_in as f64;
    let display = spec.display_window();
    let mut out = Vec::new();
    let mut prev_pose = None;
    for k in 0..spec.frame_count {
        let t = spec.rendered_time(k);
        let pose = scene.camera.pose_at(t, aspect)?;
        let window = provider.window_for(k, &pose, prev_pose.as_ref())?;
        let frame = render(scene, t, t - dt, &pose, &window)?;
        let source = display_frame(&frame, spec.width, spec.height)?;
        ex.run_rendered_step(frame)?;
        prev_pose = Some(pose);
        if k == 0 || k + 1 == spec.frame_count {
            continue;
        }
        for (j, tg) in spec.between_times(k)?.into_iter().enumerate() {
            let alpha = ExtrapolationSchedule::new(config.n, j as u32 + 1)?.alpha();
            let gpose = scene.camera.pose_at(tg, aspect)?;
            let extrapolated = ex.run_extrapolation_step(alpha, Some(&gpose))?;
            let reference = render(scene, tg, tg - dt, &gpose, &display)?;
            out.push(SimulatedFrame {
                extrapolated,
                reference,
                source: source.clone(),
            });
        }
    }
    Ok(out)
}

/// Renders a sequence to disk through the windows the pipeline would ask for.
pub fn synthesize(
    scene: &SceneScript,
    spec: &SequenceSpec,
    out_dir: impl AsRef<Path>,
    adaptive: Option<&PipelineConfig>,
) -> Result<SequenceManifest> {
    match adaptive {
        Some(cfg) => {
            let mut p = AdaptiveWindowProvider::new(WindowSettings {
                alpha: ExtrapolationSchedule::alphas(spec.n()?)
                    .last()
                    .copied()
                    .unwrap_or(0.5),
                ..cfg.window_settings(spec.width, spec.height)
            });
            generate_sequence(scene, spec, out_dir, &mut p)
        }
        None => generate_sequence(
            scene,
            spec,
            out_dir,
            &mut DisplayWindow {
                width: spec.width,
                height: spec.height,
            },
        ),
    }
}

/// Runs the pipeline over a synthesized sequence directory and writes the
/// extrapolated frames with their masks and a manifest into `out_dir`.
///
/// Extrapolation starts at the second rendered frame and stops before the
/// last one, so every output has a ground-truth frame in the input.
pub fn extrapolate_sequence(
    in_dir: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
    config: &PipelineConfig,
    dump_masks: bool,
) -> Result<SequenceManifest> {
    let (in_dir, out_dir) = (in_dir.as_ref(), out_dir.as_ref());
    let input = SequenceManifest::load(in_dir)?;
    if config.n != input.n {
        return Err(Error::invalid(format!(
            "config asks for n = {} but the sequence was rendered with n = {}",
            config.n, input.n
        )));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut ex = Extrapolator::new(config.clone(), input.width, input.height)?;
    let rendered: Vec<&FrameEntry> = input.frames_with_role(FrameRole::Rendered).collect();
    let truth: Vec<&FrameEntry> = input.frames_with_role(FrameRole::Groundtruth).collect();
    let mut frames = Vec::new();
    let mut all_timings = Vec::new();
    for (k, entry) in rendered.iter().enumerate() {
        ex.run_rendered_step(load_frame(in_dir, entry)?)?;
        if k == 0 || k + 1 == rendered.len() {
            continue;
        }
        let dt = entry.timestamp - rendered[k - 1].timestamp;
        for alpha in ExtrapolationSchedule::alphas(config.n) {
            let ts = entry.timestamp + alpha * dt;
            let gt = truth
                .iter()
                .find(|g| (g.timestamp - ts).abs() <= PAIRING_TOL);
            let oracle = match (config.pose_mode, gt) {
                (PoseMode::Oracle, None) => {
                    return Err(Error::Pairing {
                        offenders: vec![ts],
                    });
                }
                (_, g) => g.map(|g| g.pose),
            };
            let mut e = ex.run_extrapolation_step(alpha, oracle.as_ref())?;
            if let Some(g) = gt {
                // report the reference's timestamp so pairing is exact
                e.timestamp = g.timestamp;
            }
            let stem = format!("e{k:04}_{}", frames.len() % config.n as usize + 1);
            let mut fe = crate::frame_io::save_frame(
                out_dir,
                &stem,
                &e.as_record(),
                FrameRole::Extrapolated,
            )?;
            let input_rel = format!("{stem}_input.buf");
            let valid_rel = format!("{stem}_valid.buf");
            write_buffer(&e.input_mask, out_dir.join(&input_rel))?;
            write_buffer(&e.valid, out_dir.join(&valid_rel))?;
            if dump_masks {
                export_mask_png(&e.input_mask, out_dir.join(format!("{stem}_input.png")))?;
                export_mask_png(&e.valid, out_dir.join(format!("{stem}_valid.png")))?;
            }
            fe.input_mask = Some(input_rel);
            fe.valid_mask = Some(valid_rel);
            fe.alpha = Some(alpha);
            frames.push(fe);
            all_timings.push(e.timings);
        }
    }
    let manifest = SequenceManifest {
        scene: input.scene.clone(),
        seed: input.seed,
        fps_in: input.fps_in,
        fps_out: input.fps_out,
        n: input.n,
        width: input.width,
        height: input.height,
        window_mode: input.window_mode.clone(),
        frames,
        config: Some(config.echo()),
        timings: Some(
            serde_json::to_value(StageTimings::mean(&all_timings)).expect("timings serialize"),
        ),
    };
    manifest.save(out_dir)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::preset;

    fn spec(frames: usize) -> SequenceSpec {
        SequenceSpec {
            fps_in: 30,
            fps_out: 60,
            frame_count: frames,
            width: 64,
            height: 36,
        }
    }

    #[test]
    fn labels() {
        let mut c = PipelineConfig::default();
        assert_eq!(c.label(), "full");
        c.bgc = false;
        c.aw = false;
        assert_eq!(c.label(), "no-bgc+no-aw");
    }

    #[test]
    fn sequencing_rules() {
        let scene = preset("static-cam-static", 0).unwrap();
        let s = spec(3);
        let pose = scene.camera.pose_at(0.0, s.aspect()).unwrap();
        let mut ex = Extrapolator::new(PipelineConfig::default(), 64, 36).unwrap();
        assert!(matches!(
            ex.run_extrapolation_step(0.5, None),
            Err(Error::Sequencing(_))
        ));
        let f0 = render(&scene, 0.0, -1.0 / 30.0, &pose, &s.display_window()).unwrap();
        let step = ex.run_rendered_step(f0.clone()).unwrap();
        assert!(step.plan.is_none());
        assert_eq!(ex.plan_window(&pose).unwrap(), s.display_window());
        assert!(matches!(
            ex.run_extrapolation_step(0.5, None),
            Err(Error::Sequencing(_))
        ));
        assert!(matches!(
            ex.run_rendered_step(f0),
            Err(Error::Sequencing(_))
        ));
    }

    #[test]
    fn identical_frames_reach_fixed_point() {
        let scene = preset("occluder-pan", 0).unwrap();
        let s = spec(2);
        let pose = scene.camera.pose_at(0.0, s.aspect()).unwrap();
        let f = render(&scene, 0.1, 0.1, &pose, &s.display_window()).unwrap();
        let mut ex = Extrapolator::new(PipelineConfig::default(), 64, 36).unwrap();
        ex.run_rendered_step(f.clone()).unwrap();
        let h1 = ex.history().unwrap().clone();
        let p1 = ex.pyramid().unwrap().levels[0].clone();
        let mut g = f.clone();
        g.timestamp += 1.0;
        let step = ex.run_rendered_step(g).unwrap();
        assert_eq!(step.dynamic_pixels, 0);
        let h2 = ex.history().unwrap();
        for i in 0..64 * 36 {
            assert_eq!(h1.trajectory(i), h2.trajectory(i));
        }
        assert_eq!(ex.pyramid().unwrap().levels[0], p1);
    }

    #[test]
    fn no_aw_keeps_display_windows() {
        let scene = preset("pan-right", 0).unwrap();
        let cfg = PipelineConfig {
            aw: false,
            ..PipelineConfig::default()
        };
        let frames = simulate(&scene, &spec(4), &cfg).unwrap();
        assert_eq!(frames.len(), 2);
        let mut ex = Extrapolator::new(cfg, 64, 36).unwrap();
        let s = spec(2);
        for k in 0..2 {
            let t = s.rendered_time(k);
            let pose = scene.camera.pose_at(t, s.aspect()).unwrap();
            assert!(ex.plan_window(&pose).unwrap().is_display());
            ex.run_rendered_step(
                render(&scene, t, t - 1.0 / 30.0, &pose, &s.display_window()).unwrap(),
            )
            .unwrap();
        }
    }

    #[test]
    fn schedule_n_one_gives_half() {
        let scene = preset("static-cam-static", 0).unwrap();
        let frames = simulate(&scene, &spec(4), &PipelineConfig::default()).unwrap();
        assert_eq!(frames.len(), 2);
        assert!(frames.iter().all(|f| f.extrapolated.alpha == 0.5));
        for f in &frames {
            assert!((f.extrapolated.timestamp - f.reference.timestamp).abs() < 1e-12);
            assert_eq!(f.extrapolated.color, f.source.color);
        }
    }
}
