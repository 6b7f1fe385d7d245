pub mod background;
pub mod buffer;
pub mod error;
pub mod frame;
pub mod frame_io;
pub mod geometry;
pub mod metrics;
pub mod motion;
pub mod pipeline;
pub mod scatter;
pub mod scene;
pub mod shading;
pub mod window;

pub use buffer::Buffer;
pub use error::{Error, Result};
pub use frame::FrameRecord;
