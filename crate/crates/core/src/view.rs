use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maps data space to a pixel grid: `sx = (x − cx)·zoom + w/2`, `sy = h/2 − (y − cy)·zoom`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub center: [f64; 2],
    /// Pixels per data unit.
    pub zoom: f64,
    pub width: u32,
    pub height: u32,
}

impl Viewport {
    pub fn new(center: [f64; 2], zoom: f64, width: u32, height: u32) -> Result<Self> {
        let v = Viewport {
            center,
            zoom,
            width,
            height,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zoom > 0.0 && self.zoom.is_finite()) || self.width == 0 || self.height == 0 {
            return Err(Error::Param(format!("invalid viewport {self:?}")));
        }
        if !(self.center[0].is_finite() && self.center[1].is_finite()) {
            return Err(Error::Param("viewport centre must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn to_screen(&self, x: f64, y: f64) -> [f64; 2] {
        [
            (x - self.center[0]) * self.zoom + self.width as f64 / 2.0,
            self.height as f64 / 2.0 - (y - self.center[1]) * self.zoom,
        ]
    }

    #[inline]
    pub fn to_data(&self, sx: f64, sy: f64) -> [f64; 2] {
        [
            self.center[0] + (sx - self.width as f64 / 2.0) / self.zoom,
            self.center[1] - (sy - self.height as f64 / 2.0) / self.zoom,
        ]
    }
}
