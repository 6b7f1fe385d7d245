use glam::DVec2;

use crate::error::{Error, Result};

/// Row-major, top-left origin, channel-interleaved `f32` image.
#[derive(Debug, Clone, PartialEq)]
pub struct Buffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Buffer {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self::filled(width, height, channels, 0.0)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Self {
        Buffer {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height * channels {
            return Err(Error::invalid(format!(
                "buffer data has {} values, expected {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Buffer {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    pub fn same_shape(&self, other: &Buffer) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub fn same_dims(&self, other: &Buffer) -> bool {
        self.width == other.width && self.height == other.height
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let o = (y * self.width + x) * self.channels;
        &self.data[o..o + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [f32] {
        let o = (y * self.width + x) * self.channels;
        &mut self.data[o..o + self.channels]
    }

    #[inline]
    pub fn at(&self, idx: usize) -> &[f32] {
        &self.data[idx * self.channels..(idx + 1) * self.channels]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// Per-pixel rows of `channels` values, for parallel writers.
    pub fn rows_mut(&mut self) -> std::slice::ChunksMut<'_, f32> {
        self.data.chunks_mut(self.width * self.channels)
    }

    /// Nearest-pixel sample at a continuous position, `None` when outside.
    pub fn sample_nearest(&self, p: DVec2) -> Option<&[f32]> {
        if p.x < 0.0 || p.y < 0.0 || !p.is_finite() {
            return None;
        }
        let (x, y) = (p.x as usize, p.y as usize);
        (x < self.width && y < self.height).then(|| self.pixel(x, y))
    }

    /// Bilinear sample with pixel centers at half-integers and edge clamping.
    pub fn sample_bilinear(&self, p: DVec2, out: &mut [f32]) {
        let fx = (p.x - 0.5).clamp(0.0, (self.width - 1) as f64);
        let fy = (p.y - 0.5).clamp(0.0, (self.height - 1) as f64);
        let x0 = fx.floor() as usize;
        let y0 = fy.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let tx = (fx - x0 as f64) as f32;
        let ty = (fy - y0 as f64) as f32;
        for c in 0..self.channels {
            let mut v = self.get(x0, y0, c);
            // skip zero-weight taps so exact-center samples are bit-exact
            if tx > 0.0 {
                v = v * (1.0 - tx) + self.get(x1, y0, c) * tx;
            }
            if ty > 0.0 {
                let mut below = self.get(x0, y1, c);
                if tx > 0.0 {
                    below = below * (1.0 - tx) + self.get(x1, y1, c) * tx;
                }
                v = v * (1.0 - ty) + below * ty;
            }
            out[c] = v;
        }
    }

    /// Copies a `w × h` sub-rectangle starting at `(x0, y0)`.
    pub fn sub_image(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Buffer> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(Error::invalid("sub-image exceeds buffer bounds"));
        }
        let mut out = Buffer::new(w, h, self.channels);
        let row = w * self.channels;
        for y in 0..h {
            let src = ((y0 + y) * self.width + x0) * self.channels;
            out.data[y * row..(y + 1) * row].copy_from_slice(&self.data[src..src + row]);
        }
        Ok(out)
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Buffer {
        Buffer {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_at_center_is_exact() {
        let b = Buffer::from_vec(2, 2, 1, vec![0.1, 0.7, 0.3, f32::INFINITY]).unwrap();
        let mut out = [0.0];
        b.sample_bilinear(DVec2::new(0.5, 0.5), &mut out);
        assert_eq!(out[0], 0.1);
        b.sample_bilinear(DVec2::new(1.0, 0.5), &mut out);
        assert!((out[0] - 0.4).abs() < 1e-6);
    }

    #[test]
    fn sub_image_copies_rows() {
        let b = Buffer::from_vec(3, 2, 1, (0..6).map(|v| v as f32).collect()).unwrap();
        let s = b.sub_image(1, 0, 2, 2).unwrap();
        assert_eq!(s.data(), &[1.0, 2.0, 4.0, 5.0]);
        assert!(b.sub_image(2, 0, 2, 1).is_err());
    }
}
