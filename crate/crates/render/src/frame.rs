use std::io::Write;
use std::path::Path;

use atlas_core::{Error, Result};

/// RGBA image with `f32` channels in `[0, 1]`, row-major from the top-left pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBuffer {
    width: u32,
    height: u32,
    data: Vec<f32>,
}

impl FrameBuffer {
    pub fn filled(width: u32, height: u32, rgba: [f32; 4]) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize * 4);
        for _ in 0..width as usize * height as usize {
            data.extend_from_slice(&rgba);
        }
        FrameBuffer { width, height, data }
    }

    pub(crate) fn from_raw(width: u32, height: u32, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width as usize * height as usize * 4);
        FrameBuffer { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Channel data, four floats per pixel.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [f32; 4] {
        let i = (y as usize * self.width as usize + x as usize) * 4;
        [self.data[i], self.data[i + 1], self.data[i + 2], self.data[i + 3]]
    }

    /// Largest per-channel absolute difference; infinite when the sizes differ.
    pub fn max_abs_diff(&self, other: &FrameBuffer) -> f32 {
        if self.width != other.width || self.height != other.height {
            return f32::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max)
    }

    /// 8-bit RGBA with round-to-nearest quantization.
    pub fn to_rgba8(&self) -> Vec<u8> {
        self.data.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect()
    }

    pub fn write_png<W: Write>(&self, sink: W) -> Result<()> {
        let mut encoder = png::Encoder::new(sink, self.width, self.height);
        encoder.set_color(png::ColorType::Rgba);
        encoder.set_depth(png::BitDepth::Eight);
        let png_err = |e: png::EncodingError| match e {
            png::EncodingError::IoError(io) => Error::Io(io),
            other => Error::Io(std::io::Error::other(other)),
        };
        let mut writer = encoder.write_header().map_err(png_err)?;
        writer.write_image_data(&self.to_rgba8()).map_err(png_err)?;
        writer.finish().map_err(png_err)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_png(std::io::BufWriter::new(file))
    }
}
