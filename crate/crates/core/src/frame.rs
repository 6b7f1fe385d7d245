use crate::buffer::Buffer;
use crate::error::{Error, Result};
use crate::geometry::{CameraPose, RenderWindow};

/// One rendered frame with its geometry side channels.
///
/// `motion` holds pixel offsets in this frame's window pixel space:
/// `x + motion[x]` is where the same surface point sat at the previous frame
/// time, seen through the previous camera but measured in this window's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub color: Buffer,
    pub depth: Buffer,
    pub motion: Buffer,
    pub dyn_gt: Buffer,
    pub pose: CameraPose,
    pub window: RenderWindow,
    pub timestamp: f64,
}

impl FrameRecord {
    pub fn validate(&self) -> Result<()> {
        let (w, h) = self.window.size();
        let checks = [
            ("color", &self.color, 3),
            ("depth", &self.depth, 1),
            ("motion", &self.motion, 2),
            ("dyn_gt", &self.dyn_gt, 1),
        ];
        for (name, buf, ch) in checks {
            if buf.width() != w || buf.height() != h || buf.channels() != ch {
                return Err(Error::invalid(format!(
                    "{name} buffer is {}x{}x{}, expected {w}x{h}x{ch}",
                    buf.width(),
                    buf.height(),
                    buf.channels()
                )));
            }
        }
        self.pose.validate()?;
        self.window.validate()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.window.size()
    }
}
