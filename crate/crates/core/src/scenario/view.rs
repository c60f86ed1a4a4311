use super::{Poi, ViewportPose};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViewGeometry {
    pub width: f64,
    pub height: f64,
    /// Pixels per meter at scale 1.
    pub base_ppm: f64,
}

/// Axis-aligned box in viewport pixels; origin at the viewport center,
/// `y` pointing up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScreenRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl ScreenRect {
    /// Closed intersection; touching boxes intersect.
    pub fn intersects(&self, o: &ScreenRect) -> bool {
        self.x0 <= o.x1 && o.x0 <= self.x1 && self.y0 <= o.y1 && o.y0 <= self.y1
    }
}

/// Screen box of `poi`, unclipped.
pub fn label_box(pose: &ViewportPose, poi: &Poi, view: &ViewGeometry) -> ScreenRect {
    let ppm = view.base_ppm * pose.zoom;
    let dx = poi.x - pose.center[0];
    let dy = poi.y - pose.center[1];
    let (sin, cos) = pose.angle.sin_cos();
    let x = ppm * (dx * cos - dy * sin);
    let y = ppm * (dx * sin + dy * cos);
    ScreenRect { x0: x - poi.w_px / 2.0, y0: y, x1: x + poi.w_px / 2.0, y1: y + poi.h_px }
}

/// The label box of `poi` if it meets the viewport, boundary included.
pub fn label_box_in_view(pose: &ViewportPose, poi: &Poi, view: &ViewGeometry) -> Option<ScreenRect> {
    let b = label_box(pose, poi, view);
    let screen = ScreenRect { x0: -view.width / 2.0, y0: -view.height / 2.0, x1: view.width / 2.0, y1: view.height / 2.0 };
    b.intersects(&screen).then_some(b)
}
