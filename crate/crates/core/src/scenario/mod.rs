//! Navigation scenarios: a route driven at per-edge speed limits, a map
//! viewport that follows, rotates with and zooms along the route, and
//! point features whose screen-aligned label boxes enter, leave and overlap
//! each other over time.

mod extract;
mod synth;
mod trajectory;
mod view;

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use extract::{extract_instance, extract_with, refine_edge, Extraction};
pub use synth::{demo_scenario, random_scenario, SynthConfig};
pub use trajectory::{heading, smooth_route, Piece, Ramp, TimedPiece, Trajectory, ViewportPose, ZoomPlan};
pub use view::{label_box, label_box_in_view, ScreenRect, ViewGeometry};

/// A point of the map plane in meters; `y` points north.
pub type Point = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poi {
    pub x: f64,
    pub y: f64,
    pub w_px: f64,
    pub h_px: f64,
    #[serde(default = "one")]
    pub weight: f64,
    #[serde(default)]
    pub name: String,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoomLevel {
    pub speed_mps: f64,
    pub z: f64,
}

/// What to do when the smoothing radius does not fit a corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusPolicy {
    /// Use the largest radius that fits.
    Clamp,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub viewport_w: f64,
    pub viewport_h: f64,
    /// Explicit speed to scale table; derived from the edge speeds when empty.
    pub zoom_levels: Vec<ZoomLevel>,
    pub smoothing_radius: f64,
    pub radius_policy: RadiusPolicy,
    pub zoom_ramp_s: f64,
    pub min_zoom_gap_s: f64,
    /// Minimum time a fixed point needs to cross the viewport vertically.
    pub traversal_s: f64,
    pub sample_step_s: f64,
    pub tolerance_s: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            viewport_w: 800.0,
            viewport_h: 600.0,
            zoom_levels: Vec::new(),
            smoothing_radius: 25.0,
            radius_policy: RadiusPolicy::Clamp,
            zoom_ramp_s: 2.0,
            min_zoom_gap_s: 5.0,
            traversal_s: 60.0,
            sample_step_s: 0.05,
            tolerance_s: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub route: Vec<Point>,
    /// One speed limit per route edge, in m/s.
    pub speed_mps: Vec<f64>,
    pub pois: Vec<Poi>,
    #[serde(default)]
    pub settings: Settings,
}

impl Scenario {
    pub fn load<R: Read>(source: R) -> Result<Self> {
        let s: Scenario = serde_json::from_reader(source)?;
        s.check()?;
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::load(text.as_bytes())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn check(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Scenario(m.to_string()));
        if self.route.len() < 2 {
            return fail("route needs at least two points");
        }
        if self.speed_mps.len() != self.route.len() - 1 {
            return fail("need one speed per route edge");
        }
        if self.speed_mps.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return fail("speeds must be positive");
        }
        if self.route.iter().flatten().any(|c| !c.is_finite()) {
            return fail("route coordinates must be finite");
        }
        if self.route.windows(2).any(|w| w[0] == w[1]) {
            return fail("consecutive route points coincide");
        }
        let s = &self.settings;
        if !(s.viewport_w > 0.0 && s.viewport_h > 0.0 && s.traversal_s > 0.0) {
            return fail("viewport size and traversal time must be positive");
        }
        if !(s.sample_step_s > 0.0 && s.tolerance_s > 0.0 && s.tolerance_s < s.sample_step_s) {
            return fail("need 0 < tolerance < sample step");
        }
        if !(s.smoothing_radius >= 0.0 && s.zoom_ramp_s >= 0.0 && s.min_zoom_gap_s >= 0.0) {
            return fail("radius, ramp and gap must be non-negative");
        }
        for (i, a) in s.zoom_levels.iter().enumerate() {
            if !(a.z > 0.0 && a.z <= 1.0 && a.speed_mps > 0.0) {
                return fail("zoom scales must lie in (0, 1]");
            }
            if s.zoom_levels[..i].iter().any(|b| b.z == a.z || b.speed_mps == a.speed_mps) {
                return fail("zoom levels must be distinct");
            }
        }
        for p in &self.pois {
            if !(p.w_px > 0.0 && p.h_px > 0.0 && p.weight > 0.0 && p.x.is_finite() && p.y.is_finite()) {
                return fail("label boxes and weights must be positive");
            }
        }
        Ok(())
    }

    /// Scale for an edge speed: the explicit table, or `v_min / v`.
    pub fn zoom_for_speed(&self, v: f64) -> Result<f64> {
        if self.settings.zoom_levels.is_empty() {
            let v_min = self.speed_mps.iter().copied().fold(f64::INFINITY, f64::min);
            return Ok(v_min / v);
        }
        self.settings
            .zoom_levels
            .iter()
            .find(|l| l.speed_mps == v)
            .map(|l| l.z)
            .ok_or_else(|| Error::Scenario(format!("no zoom level for speed {v}")))
    }

    /// Pixels per meter at `z = 1`, the largest value for which every zoom
    /// level keeps a fixed point visible for at least `traversal_s`.
    pub fn base_ppm(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for &v in &self.speed_mps {
            let z = self.zoom_for_speed(v)?;
            best = best.min(self.settings.viewport_h / (self.settings.traversal_s * v * z));
        }
        Ok(best)
    }

    pub fn view_geometry(&self) -> Result<ViewGeometry> {
        Ok(ViewGeometry { width: self.settings.viewport_w, height: self.settings.viewport_h, base_ppm: self.base_ppm()? })
    }

    pub fn trajectory(&self) -> Result<Trajectory> {
        self.check()?;
        smooth_route(self)
    }
}
