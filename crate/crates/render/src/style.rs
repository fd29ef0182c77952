use atlas_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Ten-colour categorical palette.
pub const TABLEAU10: [[f32; 3]; 10] = [
    [0.122, 0.467, 0.706],
    [1.000, 0.498, 0.055],
    [0.173, 0.627, 0.173],
    [0.839, 0.153, 0.157],
    [0.580, 0.404, 0.741],
    [0.549, 0.337, 0.294],
    [0.890, 0.467, 0.761],
    [0.498, 0.498, 0.498],
    [0.737, 0.741, 0.133],
    [0.090, 0.745, 0.812],
];

pub const DEFAULT_POINT_RADIUS: f32 = 2.0;
pub const DEFAULT_POINT_ALPHA: f32 = 0.5;
pub const WHITE: [f32; 4] = [1.0, 1.0, 1.0, 1.0];

/// Point appearance. The radius is in screen pixels and does not scale with zoom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStyle {
    pub radius: f32,
    pub alpha: f32,
    /// Colour per category code; codes past the end use `default_color`.
    pub palette: Vec<[f32; 3]>,
    pub default_color: [f32; 3],
    pub background: [f32; 4],
}

impl Default for PointStyle {
    fn default() -> Self {
        PointStyle {
            radius: DEFAULT_POINT_RADIUS,
            alpha: DEFAULT_POINT_ALPHA,
            palette: TABLEAU10.to_vec(),
            default_color: [0.3, 0.3, 0.3],
            background: WHITE,
        }
    }
}

pub(crate) fn check_color(c: &[f32], what: &str) -> Result<()> {
    if c.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)) {
        Ok(())
    } else {
        Err(Error::Param(format!("{what} components must lie in [0, 1], got {c:?}")))
    }
}

impl PointStyle {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Param(format!("point radius must be positive, got {}", self.radius)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Param(format!("point alpha must lie in (0, 1], got {}", self.alpha)));
        }
        for c in &self.palette {
            check_color(c, "palette colour")?;
        }
        check_color(&self.default_color, "default colour")?;
        check_color(&self.background, "background")
    }

    #[inline]
    pub fn color_of(&self, code: Option<u32>) -> [f32; 3] {
        code.and_then(|c| self.palette.get(c as usize).copied())
            .unwrap_or(self.default_color)
    }
}
