//! Zoom-consistent label placement: each label is shown on `[min_zoom, ∞)`.

mod layers;
mod plan;

pub use layers::{candidates_for, LabelLayers};
pub use plan::{
    estimated_width, overlaps_at, plan, visible, zoom_grid, LabelCandidate, LabelPlan, PlannedLabel,
    VisibleLabel, LABEL_HEIGHT_PX, ZOOM_STEPS_PER_OCTAVE,
};
