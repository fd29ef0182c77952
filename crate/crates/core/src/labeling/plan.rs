use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::view::Viewport;

/// Zoom grid steps per doubling.
pub const ZOOM_STEPS_PER_OCTAVE: u32 = 8;
pub const LABEL_HEIGHT_PX: f64 = 16.0;

/// Pixel width estimate for a label: 7 px per character plus 8 px padding.
pub fn estimated_width(text: &str) -> f64 {
    7.0 * text.chars().count() as f64 + 8.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelCandidate {
    pub anchor: [f64; 2],
    pub text: String,
    pub priority: f64,
    /// Box size in screen pixels, independent of zoom.
    pub width: f64,
    pub height: f64,
}

impl LabelCandidate {
    pub fn new(anchor: [f64; 2], text: impl Into<String>, priority: f64) -> Self {
        let text = text.into();
        LabelCandidate {
            anchor,
            width: estimated_width(&text),
            height: LABEL_HEIGHT_PX,
            text,
            priority,
        }
    }
}

/// Whether the boxes of two labels overlap at `zoom` pixels per data unit.
/// Boxes that only touch do not overlap.
#[inline]
pub fn overlaps_at(a: &LabelCandidate, b: &LabelCandidate, zoom: f64) -> bool {
    (a.anchor[0] - b.anchor[0]).abs() * zoom < (a.width + b.width) / 2.0
        && (a.anchor[1] - b.anchor[1]).abs() * zoom < (a.height + b.height) / 2.0
}

/// `z_lo · 2^(m/8)` for every `m` with the value at most `z_hi`.
pub fn zoom_grid(z_lo: f64, z_hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for m in 0.. {
        let z = z_lo * 2f64.powf(m as f64 / ZOOM_STEPS_PER_OCTAVE as f64);
        if z > z_hi * (1.0 + 1e-12) {
            break;
        }
        out.push(z);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedLabel {
    #[serde(flatten)]
    pub candidate: LabelCandidate,
    /// Smallest zoom at which the label shows; `None` means never.
    pub min_zoom: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelPlan {
    pub z_lo: f64,
    pub z_hi: f64,
    /// In planning order: priority descending, then anchor, then text.
    pub labels: Vec<PlannedLabel>,
}

fn planning_order(a: &LabelCandidate, b: &LabelCandidate) -> Ordering {
    b.priority
        .total_cmp(&a.priority)
        .then(a.anchor[0].total_cmp(&b.anchor[0]))
        .then(a.anchor[1].total_cmp(&b.anchor[1]))
        .then(a.text.cmp(&b.text))
}

/// Assigns each candidate the smallest grid zoom from which it never collides
/// with a higher-priority label that is visible at the same zoom.
pub fn plan(candidates: &[LabelCandidate], z_lo: f64, z_hi: f64) -> Result<LabelPlan> {
    if !(z_lo > 0.0 && z_lo <= z_hi && z_hi.is_finite()) {
        return Err(Error::Param(format!("invalid zoom range [{z_lo}, {z_hi}]")));
    }
    for c in candidates {
        if !(c.width > 0.0 && c.height > 0.0 && c.priority.is_finite()) {
            return Err(Error::Param(format!("invalid label candidate {:?}", c.text)));
        }
    }
    let grid = zoom_grid(z_lo, z_hi);
    let mut ordered: Vec<LabelCandidate> = candidates.to_vec();
    ordered.sort_by(planning_order);

    // grid index of each planned label's min zoom, `grid.len()` for never
    let mut first_visible: Vec<usize> = Vec::with_capacity(ordered.len());
    for (i, c) in ordered.iter().enumerate() {
        let mut start = 0;
        for (j, other) in ordered[..i].iter().enumerate() {
            let a = first_visible[j];
            if a == grid.len() {
                continue;
            }
            // overlap only shrinks as zoom grows: find the first separated grid step
            let b = grid.partition_point(|z| overlaps_at(c, other, *z));
            if b > a {
                start = start.max(b);
            }
        }
        first_visible.push(start);
    }
    Ok(LabelPlan {
        z_lo,
        z_hi,
        labels: ordered
            .into_iter()
            .zip(first_visible)
            .map(|(candidate, m)| PlannedLabel {
                candidate,
                min_zoom: grid.get(m).copied(),
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleLabel {
    /// Index into `LabelPlan::labels`.
    pub index: usize,
    pub text: String,
    /// Screen-space box centre, y down.
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl LabelPlan {
    pub fn clamp_zoom(&self, zoom: f64) -> f64 {
        zoom.clamp(self.z_lo, self.z_hi)
    }

    /// Indices of the labels shown at `zoom`, regardless of position.
    pub fn shown_at(&self, zoom: f64) -> impl Iterator<Item = usize> + '_ {
        let z = self.clamp_zoom(zoom);
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, l)| l.min_zoom.is_some_and(|m| m <= z))
            .map(|(i, _)| i)
    }
}

/// Labels shown at the viewport's zoom whose anchor lies inside the viewport
/// grown by the label's own box on every side.
pub fn visible(plan: &LabelPlan, viewport: &Viewport) -> Vec<VisibleLabel> {
    let z = plan.clamp_zoom(viewport.zoom);
    plan.shown_at(z)
        .filter_map(|i| {
            let c = &plan.labels[i].candidate;
            let [x, y] = Viewport { zoom: z, ..*viewport }.to_screen(c.anchor[0], c.anchor[1]);
            let (w, h) = (viewport.width as f64, viewport.height as f64);
            let inside = x >= -c.width && x <= w + c.width && y >= -c.height && y <= h + c.height;
            inside.then(|| VisibleLabel {
                index: i,
                text: c.text.clone(),
                x,
                y,
                width: c.width,
                height: c.height,
            })
        })
        .collect()
}
