use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Poi, Point, Scenario, Settings};

/// Parameters of the seeded scenario generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub edges: usize,
    pub edge_len_m: (f64, f64),
    /// Largest heading change at a route point, radians.
    pub max_turn: f64,
    pub speeds_mps: Vec<f64>,
    /// Chance that an edge keeps the previous speed limit.
    pub keep_speed: f64,
    pub pois: usize,
    /// Largest lateral distance of a point feature from the route.
    pub max_offset_m: f64,
    pub name_len: (usize, usize),
    pub glyph_px: f64,
    pub line_px: f64,
    pub settings: Settings,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            edges: 6,
            edge_len_m: (150.0, 500.0),
            max_turn: 1.4,
            speeds_mps: vec![8.3, 13.9],
            keep_speed: 0.6,
            pois: 40,
            max_offset_m: 250.0,
            name_len: (4, 14),
            glyph_px: 8.0,
            line_px: 18.0,
            settings: Settings::default(),
        }
    }
}

const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

/// Random route with point features scattered around it; equal seeds give
/// equal scenarios.
pub fn random_scenario(config: &SynthConfig, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut route: Vec<Point> = vec![[0.0, 0.0]];
    let mut speeds = Vec::new();
    let mut heading: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    for i in 0..config.edges.max(1) {
        if i > 0 {
            heading += rng.gen_range(-config.max_turn..=config.max_turn);
        }
        let len = rng.gen_range(config.edge_len_m.0..=config.edge_len_m.1);
        let last = *route.last().unwrap();
        route.push([last[0] + len * heading.sin(), last[1] + len * heading.cos()]);
        let speed = match speeds.last() {
            Some(&v) if rng.gen_bool(config.keep_speed) => v,
            _ => *config.speeds_mps.choose(&mut rng).expect("at least one speed"),
        };
        speeds.push(speed);
    }
    let lens: Vec<f64> = route.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).collect();
    let total: f64 = lens.iter().sum();
    let mut pois = Vec::with_capacity(config.pois);
    for i in 0..config.pois {
        let mut s = rng.gen_range(0.0..total);
        let mut e = 0;
        while e + 1 < lens.len() && s > lens[e] {
            s -= lens[e];
            e += 1;
        }
        let (a, b) = (route[e], route[e + 1]);
        let dir = [(b[0] - a[0]) / lens[e], (b[1] - a[1]) / lens[e]];
        let off = rng.gen_range(-config.max_offset_m..=config.max_offset_m);
        let x = a[0] + s * dir[0] + off * dir[1];
        let y = a[1] + s * dir[1] - off * dir[0];
        let n = rng.gen_range(config.name_len.0..=config.name_len.1);
        let mut name: String = (0..n).map(|_| *LETTERS.choose(&mut rng).unwrap() as char).collect();
        name.push_str(&format!("{i}"));
        let w_px = config.glyph_px * name.len() as f64;
        pois.push(Poi { x, y, w_px, h_px: config.line_px, weight: 1.0, name });
    }
    Scenario { route, speed_mps: speeds, pois, settings: config.settings.clone() }
}

/// The scenario shipped with the crate for demos and smoke tests.
pub fn demo_scenario() -> Scenario {
    random_scenario(&SynthConfig::default(), 2024)
}
