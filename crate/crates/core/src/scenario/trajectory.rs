use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Point, RadiusPolicy, Scenario};
use crate::error::{Error, Result};

/// One geometric piece of a smoothed route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    Line { from: Point, dir: Point, length: f64 },
    /// Counter-clockwise for positive `sweep`; angles in standard math
    /// orientation around `center`.
    Arc { center: Point, radius: f64, start_angle: f64, sweep: f64 },
}

impl Piece {
    pub fn length(&self) -> f64 {
        match *self {
            Piece::Line { length, .. } => length,
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn is_line(&self) -> bool {
        matches!(self, Piece::Line { .. })
    }

    pub fn point_at(&self, s: f64) -> Point {
        match *self {
            Piece::Line { from, dir, .. } => [from[0] + s * dir[0], from[1] + s * dir[1]],
            Piece::Arc { center, radius, start_angle, sweep } => {
                let phi = start_angle + sweep.signum() * s / radius;
                [center[0] + radius * phi.cos(), center[1] + radius * phi.sin()]
            }
        }
    }

    /// Unit tangent at arc length `s`.
    pub fn tangent_at(&self, s: f64) -> Point {
        match *self {
            Piece::Line { dir, .. } => dir,
            Piece::Arc { radius, start_angle, sweep, .. } => {
                let phi = start_angle + sweep.signum() * s / radius;
                let sign = sweep.signum();
                [-sign * phi.sin(), sign * phi.cos()]
            }
        }
    }
}

/// Heading in radians, clockwise from north (+y).
pub fn heading(dir: Point) -> f64 {
    dir[0].atan2(dir[1])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimedPiece {
    pub piece: Piece,
    pub t0: f64,
    pub t1: f64,
    pub speed: f64,
    /// Route edge this piece belongs to; arcs belong to their incoming edge.
    pub edge: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub start: f64,
    pub end: f64,
    pub from: f64,
    pub to: f64,
}

/// Piecewise-linear zoom: constant except during ramps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoomPlan {
    pub initial: f64,
    pub ramps: Vec<Ramp>,
}

impl ZoomPlan {
    pub fn z_at(&self, t: f64) -> f64 {
        let i = self.ramps.partition_point(|r| r.start <= t);
        if i == 0 {
            return self.initial;
        }
        let r = &self.ramps[i - 1];
        if t >= r.end || r.end <= r.start {
            r.to
        } else {
            r.from + (r.to - r.from) * (t - r.start) / (r.end - r.start)
        }
    }

    pub fn min_z(&self) -> f64 {
        self.ramps.iter().map(|r| r.to).fold(self.initial, f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViewportPose {
    pub center: Point,
    /// Radians, clockwise from north.
    pub angle: f64,
    pub zoom: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pieces: Vec<TimedPiece>,
    zoom: ZoomPlan,
    duration: f64,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn pieces(&self) -> &[TimedPiece] {
        &self.pieces
    }

    pub fn zoom_plan(&self) -> &ZoomPlan {
        &self.zoom
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(|p| p.piece.length()).sum()
    }

    /// Times at which one piece hands over to the next.
    pub fn joints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.t0).collect()
    }

    fn locate(&self, t: f64) -> Result<(&TimedPiece, f64)> {
        if !(t >= 0.0 && t <= self.duration) {
            return Err(Error::TimeOutOfRange(t));
        }
        let i = self.pieces.partition_point(|p| p.t0 <= t).max(1) - 1;
        let p = &self.pieces[i];
        let s = ((t - p.t0) * p.speed).clamp(0.0, p.piece.length());
        Ok((p, s))
    }

    pub fn position(&self, t: f64) -> Result<Point> {
        let (p, s) = self.locate(t)?;
        Ok(p.piece.point_at(s))
    }

    pub fn pose_at(&self, t: f64) -> Result<ViewportPose> {
        let (p, s) = self.locate(t)?;
        Ok(ViewportPose { center: p.piece.point_at(s), angle: heading(p.piece.tangent_at(s)), zoom: self.zoom.z_at(t) })
    }
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

fn offset(p: Point, dir: Point, d: f64) -> Point {
    [p[0] + d * dir[0], p[1] + d * dir[1]]
}

/// Rounds every route corner with a circular arc tangent to both edges and
/// assigns times from the edge speeds. Zoom changes are placed as linear
/// ramps on straight pieces, at least `min_zoom_gap_s` apart.
pub fn smooth_route(scenario: &Scenario) -> Result<Trajectory> {
    let settings = &scenario.settings;
    let pts = &scenario.route;
    let n = pts.len();
    let dirs: Vec<Point> = pts
        .windows(2)
        .map(|w| {
            let d = sub(w[1], w[0]);
            let l = norm(d);
            [d[0] / l, d[1] / l]
        })
        .collect();
    let lens: Vec<f64> = pts.windows(2).map(|w| norm(sub(w[1], w[0]))).collect();

    // tangent length and arc at each interior vertex
    let mut cut = vec![0.0; n];
    let mut arcs: Vec<Option<Piece>> = vec![None; n];
    for j in 1..n - 1 {
        let (u, v) = (dirs[j - 1], dirs[j]);
        let cross = u[0] * v[1] - u[1] * v[0];
        let dot = u[0] * v[0] + u[1] * v[1];
        let theta = cross.atan2(dot);
        if theta.abs() < 1e-12 {
            continue;
        }
        if PI - theta.abs() < 1e-9 {
            return Err(Error::Scenario(format!("route reverses direction at point {j}")));
        }
        let half_tan = (theta.abs() / 2.0).tan();
        let mut r = settings.smoothing_radius;
        let fit = lens[j - 1].min(lens[j]) / 2.0;
        if r * half_tan > fit {
            match settings.radius_policy {
                RadiusPolicy::Clamp => r = fit / half_tan,
                RadiusPolicy::Reject => {
                    return Err(Error::Scenario(format!("smoothing radius does not fit the corner at point {j}")));
                }
            }
        }
        if r <= 0.0 {
            continue;
        }
        let d = r * half_tan;
        cut[j] = d;
        let a = offset(pts[j], u, -d);
        let normal = if theta > 0.0 { [-u[1], u[0]] } else { [u[1], -u[0]] };
        let center = offset(a, normal, r);
        let start_angle = (a[1] - center[1]).atan2(a[0] - center[0]);
        arcs[j] = Some(Piece::Arc { center, radius: r, start_angle, sweep: theta });
    }

    let mut pieces: Vec<TimedPiece> = Vec::new();
    let mut t = 0.0;
    let mut push = |piece: Piece, speed: f64, edge: usize, pieces: &mut Vec<TimedPiece>| {
        let dt = piece.length() / speed;
        if let (Piece::Line { dir, length, .. }, Some(last)) = (piece, pieces.last_mut()) {
            // merge collinear continuation at equal speed
            if let Piece::Line { dir: d0, length: l0, from } = last.piece {
                if d0 == dir && last.speed == speed {
                    last.piece = Piece::Line { from, dir, length: l0 + length };
                    last.t1 += dt;
                    t += dt;
                    return;
                }
            }
        }
        pieces.push(TimedPiece { piece, t0: t, t1: t + dt, speed, edge });
        t += dt;
    };
    for i in 0..n - 1 {
        let len = lens[i] - cut[i] - cut[i + 1];
        if len > 1e-12 {
            let from = offset(pts[i], dirs[i], cut[i]);
            push(Piece::Line { from, dir: dirs[i], length: len }, scenario.speed_mps[i], i, &mut pieces);
        }
        if let Some(arc) = arcs[i + 1] {
            push(arc, scenario.speed_mps[i], i, &mut pieces);
        }
    }
    let duration = pieces.last().map_or(0.0, |p| p.t1);

    let mut current = scenario.zoom_for_speed(scenario.speed_mps[0])?;
    let mut zoom = ZoomPlan { initial: current, ramps: Vec::new() };
    let mut last_end = f64::NEG_INFINITY;
    for p in pieces.iter().filter(|p| p.piece.is_line()) {
        let target = scenario.zoom_for_speed(scenario.speed_mps[p.edge])?;
        if target == current {
            continue;
        }
        let start = p.t0.max(last_end + settings.min_zoom_gap_s);
        let end = start + settings.zoom_ramp_s;
        if end <= p.t1 {
            zoom.ramps.push(Ramp { start, end, from: current, to: target });
            current = target;
            last_end = end;
        }
    }
    Ok(Trajectory { pieces, zoom, duration })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Settings;

    fn scenario(route: Vec<Point>, speeds: Vec<f64>, radius: f64) -> Scenario {
        let settings = Settings { smoothing_radius: radius, ..Settings::default() };
        Scenario { route, speed_mps: speeds, pois: Vec::new(), settings }
    }

    #[test]
    fn straight_route() {
        let t = smooth_route(&scenario(vec![[0.0, 0.0], [0.0, 1000.0]], vec![10.0], 20.0)).unwrap();
        assert_eq!(t.pieces().len(), 1);
        assert!((t.duration() - 100.0).abs() < 1e-9);
        assert_eq!(t.pose_at(0.0).unwrap().angle, 0.0);
    }

    #[test]
    fn right_angle_corner_shortens_path() {
        let r = 30.0;
        let t = smooth_route(&scenario(vec![[0.0, 0.0], [0.0, 500.0], [500.0, 500.0]], vec![10.0, 10.0], r)).unwrap();
        assert_eq!(t.pieces().len(), 3);
        let arc = t.pieces()[1].piece;
        assert!((arc.length() - PI / 2.0 * r).abs() < 1e-9);
        let shortening = 1000.0 - t.length();
        assert!((shortening - (2.0 * r - PI / 2.0 * r)).abs() < 1e-9);
    }

    #[test]
    fn collinear_points_merge() {
        let t = smooth_route(&scenario(vec![[0.0, 0.0], [0.0, 100.0], [0.0, 300.0]], vec![10.0, 10.0], 20.0)).unwrap();
        assert_eq!(t.pieces().len(), 1);
    }

    #[test]
    fn radius_clamped_or_rejected() {
        let mut s = scenario(vec![[0.0, 0.0], [0.0, 20.0], [20.0, 20.0]], vec![5.0, 5.0], 50.0);
        let t = smooth_route(&s).unwrap();
        match t.pieces()[1].piece {
            Piece::Arc { radius, .. } => assert!((radius - 10.0).abs() < 1e-9),
            other => panic!("expected an arc, got {other:?}"),
        }
        s.settings.radius_policy = RadiusPolicy::Reject;
        assert!(smooth_route(&s).is_err());
    }

    #[test]
    fn u_turn_is_degenerate() {
        assert!(smooth_route(&scenario(vec![[0.0, 0.0], [0.0, 100.0], [0.0, 50.0]], vec![5.0, 5.0], 10.0)).is_err());
    }

    #[test]
    fn zoom_ramp_is_linear() {
        let plan = ZoomPlan { initial: 0.5, ramps: vec![Ramp { start: 10.0, end: 12.0, from: 0.5, to: 1.0 }] };
        assert_eq!(plan.z_at(11.0), 0.75);
        assert_eq!(plan.z_at(5.0), 0.5);
        assert_eq!(plan.z_at(20.0), 1.0);
    }

    #[test]
    fn heading_is_clockwise_from_north() {
        assert!((heading([1.0, 0.0]) - PI / 2.0).abs() < 1e-12);
        assert!((heading([0.0, -1.0]).abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_time() {
        let t = smooth_route(&scenario(vec![[0.0, 0.0], [0.0, 100.0]], vec![10.0], 0.0)).unwrap();
        assert!(matches!(t.pose_at(10.5), Err(Error::TimeOutOfRange(_))));
        assert!(t.pose_at(-0.1).is_err());
    }
}
