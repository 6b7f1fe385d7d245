use std::fs;
use std::path::Path;

use super::{render, SceneScript};
use crate::error::{Error, Result};
use crate::frame_io::{save_frame, FrameRole, SequenceManifest};
use crate::geometry::{CameraPose, RenderWindow};

/// Cadence and display resolution of a synthesized sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceSpec {
    pub fps_in: u32,
    pub fps_out: u32,
    pub frame_count: usize,
    pub width: u32,
    pub height: u32,
}

impl SequenceSpec {
    /// Generated frames per rendered frame.
    pub fn n(&self) -> Result<u32> {
        if self.fps_in == 0 || self.fps_out <= self.fps_in || self.fps_out % self.fps_in != 0 {
            return Err(Error::invalid(format!(
                "fps_out ({}) must be an integer multiple (>= 2) of fps_in ({})",
                self.fps_out, self.fps_in
            )));
        }
        Ok(self.fps_out / self.fps_in - 1)
    }

    pub fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }

    pub fn rendered_time(&self, k: usize) -> f64 {
        k as f64 / self.fps_in as f64
    }

    /// Ground-truth timestamps strictly between rendered frames `k` and `k + 1`.
    pub fn between_times(&self, k: usize) -> Result<Vec<f64>> {
        let n = self.n()?;
        let t = self.rendered_time(k);
        Ok((1..=n)
            .map(|j| t + j as f64 / self.fps_out as f64)
            .collect())
    }

    pub fn display_window(&self) -> RenderWindow {
        RenderWindow::display(self.width, self.height)
    }
}

/// Chooses the render window for each rendered frame; lets a frame
/// extrapolator close the loop with the renderer.
pub trait WindowProvider {
    fn window_for(
        &mut self,
        index: usize,
        pose: &CameraPose,
        prev_pose: Option<&CameraPose>,
    ) -> Result<RenderWindow>;

    /// Short name recorded in manifests.
    fn label(&self) -> String;
}

/// Always renders the display rectangle at display resolution.
#[derive(Debug, Clone, Copy)]
pub struct DisplayWindow {
    pub width: u32,
    pub height: u32,
}

impl WindowProvider for DisplayWindow {
    fn window_for(
        &mut self,
        _: usize,
        _: &CameraPose,
        _: Option<&CameraPose>,
    ) -> Result<RenderWindow> {
        Ok(RenderWindow::display(self.width, self.height))
    }

    fn label(&self) -> String {
        "display".into()
    }
}

/// Renders `frame_count` frames at `fps_in` plus the in-between ground truth
/// at `fps_out`, writing buffers and `manifest.json` into `out_dir`.
pub fn generate_sequence(
    scene: &SceneScript,
    spec: &SequenceSpec,
    out_dir: impl AsRef<Path>,
    window_provider: &mut dyn WindowProvider,
) -> Result<SequenceManifest> {
    let out_dir = out_dir.as_ref();
    let n = spec.n()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let aspect = spec.aspect();
    let frame_dt = 1.0 / spec.fps_in as f64;
    let display = spec.display_window();
    let mut frames = Vec::new();
    let mut prev_pose: Option<CameraPose> = None;
    for k in 0..spec.frame_count {
        let t = spec.rendered_time(k);
        let pose = scene.camera.pose_at(t, aspect)?;
        let window = window_provider.window_for(k, &pose, prev_pose.as_ref())?;
        let frame = render(scene, t, t - frame_dt, &pose, &window)?;
        frames.push(save_frame(
            out_dir,
            &format!("r{k:04}"),
            &frame,
            FrameRole::Rendered,
        )?);
        if k + 1 < spec.frame_count {
            for (j, tg) in spec.between_times(k)?.into_iter().enumerate() {
                let gpose = scene.camera.pose_at(tg, aspect)?;
                let gt = render(scene, tg, tg - frame_dt, &gpose, &display)?;
                frames.push(save_frame(
                    out_dir,
                    &format!("g{k:04}_{}", j + 1),
                    &gt,
                    FrameRole::Groundtruth,
                )?);
            }
        }
        prev_pose = Some(pose);
    }
    let manifest = SequenceManifest {
        scene: scene.name.clone(),
        seed: scene.seed,
        fps_in: spec.fps_in,
        fps_out: spec.fps_out,
        n,
        width: spec.width,
        height: spec.height,
        window_mode: window_provider.label(),
        frames,
        config: None,
        timings: None,
    };
    manifest.save(out_dir)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::preset;

    #[test]
    fn cadence_counts() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SequenceSpec {
            fps_in: 30,
            fps_out: 60,
            frame_count: 10,
            width: 32,
            height: 18,
        };
        let scene = preset("static-cam-static", 1).unwrap();
        let m = generate_sequence(
            &scene,
            &spec,
            dir.path(),
            &mut DisplayWindow {
                width: 32,
                height: 18,
            },
        )
        .unwrap();
        assert_eq!(m.frames_with_role(FrameRole::Rendered).count(), 10);
        assert_eq!(m.frames_with_role(FrameRole::Groundtruth).count(), 9);
        m.validate(dir.path()).unwrap();
        let reloaded = SequenceManifest::load(dir.path()).unwrap();
        assert_eq!(reloaded, m);
    }

    #[test]
    fn bad_rates_rejected() {
        let spec = SequenceSpec {
            fps_in: 30,
            fps_out: 45,
            frame_count: 2,
            width: 8,
            height: 8,
        };
        assert!(spec.n().is_err());
    }
}
