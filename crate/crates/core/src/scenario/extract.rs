use rayon::prelude::*;

use super::view::{label_box, label_box_in_view, ViewGeometry};
use super::{Poi, Scenario, Trajectory, ViewportPose};
use crate::error::Result;
use crate::instance::{Conflict, Instance, Label, LabelId, TimeInterval};

/// An extracted instance with the trajectory it was sampled from.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub instance: Instance,
    pub trajectory: Trajectory,
    pub samples: usize,
    /// Label pairs close enough to be tested for overlap.
    pub pairs_tested: usize,
}

/// Locates a state change of `f` inside `[a, b]` by bisection until the
/// bracket is shorter than `tol`, and returns the bracket midpoint.
pub fn refine_edge(f: impl Fn(f64) -> bool, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let fa = f(a);
    while b - a >= tol {
        let m = 0.5 * (a + b);
        if f(m) == fa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

struct Sampler<'a> {
    trajectory: &'a Trajectory,
    view: ViewGeometry,
    times: Vec<f64>,
    poses: Vec<ViewportPose>,
    tol: f64,
}

impl Sampler<'_> {
    fn pose(&self, t: f64) -> ViewportPose {
        self.trajectory.pose_at(t.clamp(0.0, self.trajectory.duration())).expect("time clamped to the span")
    }

    /// Maximal runs of `state` turned into refined intervals.
    fn runs(&self, state: &[bool], f: impl Fn(f64) -> bool) -> Vec<TimeInterval> {
        let mut out = Vec::new();
        let mut open: Option<f64> = None;
        for i in 0..state.len() {
            let prev = i > 0 && state[i - 1];
            if state[i] && !prev {
                open = Some(if i == 0 { self.times[0] } else { refine_edge(&f, self.times[i - 1], self.times[i], self.tol) });
            }
            if !state[i] && prev {
                let end = refine_edge(&f, self.times[i - 1], self.times[i], self.tol);
                out.push(TimeInterval::new(open.take().unwrap(), end));
            }
        }
        if let Some(start) = open {
            out.push(TimeInterval::new(start, *self.times.last().unwrap()));
        }
        out.retain(|iv| iv.len() >= 2.0 * self.tol);
        out
    }

    fn present(&self, poi: &Poi, pose: &ViewportPose) -> bool {
        label_box_in_view(pose, poi, &self.view).is_some()
    }

    fn overlapping(&self, a: &Poi, b: &Poi, pose: &ViewportPose) -> bool {
        self.present(a, pose) && self.present(b, pose) && label_box(pose, a, &self.view).intersects(&label_box(pose, b, &self.view))
    }
}

fn diagonal(p: &Poi) -> f64 {
    p.w_px.hypot(p.h_px)
}

/// Presence and conflict intervals of `scenario` on the default sampling
/// grid.
pub fn extract_instance(scenario: &Scenario) -> Result<Instance> {
    let s = &scenario.settings;
    extract_with(scenario, s.sample_step_s, s.tolerance_s).map(|e| e.instance)
}

/// Samples every `step` seconds and refines each state change to `tol`.
pub fn extract_with(scenario: &Scenario, step: f64, tol: f64) -> Result<Extraction> {
    let trajectory = scenario.trajectory()?;
    let view = scenario.view_geometry()?;
    let duration = trajectory.duration();
    let n = (duration / step).floor() as usize;
    let mut times: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    if *times.last().unwrap() < duration {
        times.push(duration);
    }
    let poses: Vec<ViewportPose> = times.iter().map(|&t| trajectory.pose_at(t)).collect::<Result<_>>()?;
    let sampler = Sampler { trajectory: &trajectory, view, times, poses, tol };
    let pois = &scenario.pois;

    let states: Vec<Vec<bool>> =
        pois.par_iter().map(|poi| sampler.poses.iter().map(|pose| sampler.present(poi, pose)).collect()).collect();
    let presences: Vec<Vec<TimeInterval>> = pois
        .par_iter()
        .zip(&states)
        .map(|(poi, state)| sampler.runs(state, |t| sampler.present(poi, &sampler.pose(t))))
        .collect();

    let ppm_min = view.base_ppm * trajectory.zoom_plan().min_z();
    let mut pairs = Vec::new();
    for a in 0..pois.len() {
        for b in a + 1..pois.len() {
            let reach = (diagonal(&pois[a]) + diagonal(&pois[b])) / ppm_min;
            let dist = (pois[a].x - pois[b].x).hypot(pois[a].y - pois[b].y);
            let share_time = presences[a].iter().any(|p| presences[b].iter().any(|q| p.intersects(q)));
            if dist <= reach && share_time {
                pairs.push((a, b));
            }
        }
    }
    let conflicts: Vec<Vec<Conflict>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (pa, pb) = (&pois[a], &pois[b]);
            let state: Vec<bool> = (0..sampler.times.len())
                .map(|i| states[a][i] && states[b][i] && sampler.overlapping(pa, pb, &sampler.poses[i]))
                .collect();
            let raw = sampler.runs(&state, |t| sampler.overlapping(pa, pb, &sampler.pose(t)));
            let mut out = Vec::new();
            for c in raw {
                for p in &presences[a] {
                    for q in &presences[b] {
                        let lo = c.start.max(p.start).max(q.start);
                        let hi = c.end.min(p.end).min(q.end);
                        if hi - lo >= 2.0 * tol {
                            out.push(Conflict::new(a as u32 + 1, b as u32 + 1, lo, hi));
                        }
                    }
                }
            }
            out
        })
        .collect();

    let labels: Vec<Label> = pois.iter().enumerate().map(|(i, p)| Label::new(i as u32 + 1, p.weight, p.name.clone())).collect();
    let presence_list: Vec<(LabelId, TimeInterval)> = presences
        .iter()
        .enumerate()
        .flat_map(|(i, list)| list.iter().map(move |iv| (LabelId(i as u32 + 1), *iv)))
        .collect();
    let instance = Instance::new(duration, labels, presence_list, conflicts.into_iter().flatten().collect())?;
    Ok(Extraction { instance, samples: sampler.times.len(), pairs_tested: pairs.len(), trajectory })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Settings;

    fn poi(x: f64, y: f64) -> Poi {
        Poi { x, y, w_px: 80.0, h_px: 20.0, weight: 1.0, name: "p".into() }
    }

    fn straight(pois: Vec<Poi>) -> Scenario {
        Scenario { route: vec![[0.0, 0.0], [0.0, 3000.0]], speed_mps: vec![10.0], pois, settings: Settings::default() }
    }

    #[test]
    fn refine_finds_threshold() {
        let t = refine_edge(|t| t >= 0.3337, 0.3, 0.35, 1e-4);
        assert!((t - 0.3337).abs() < 1e-4);
    }

    #[test]
    fn no_pois_gives_empty_instance() {
        let inst = extract_instance(&straight(Vec::new())).unwrap();
        assert_eq!(inst.labels().len(), 0);
        assert_eq!(inst.complexity(), 0);
    }

    #[test]
    fn passed_poi_is_present_at_least_traversal_time() {
        let inst = extract_instance(&straight(vec![poi(0.0, 1500.0)])).unwrap();
        assert_eq!(inst.presences(0).len(), 1);
        assert!(inst.presences(0)[0].len() >= 60.0);
    }

    #[test]
    fn colocated_pois_conflict_over_shared_presence() {
        let inst = extract_instance(&straight(vec![poi(20.0, 1500.0), poi(20.0, 1500.0)])).unwrap();
        assert_eq!(inst.conflicts().len(), 1);
        let p = inst.presences(0)[0];
        let q = inst.presences(1)[0];
        let c = inst.conflicts()[0].interval;
        assert!((c.start - p.start.max(q.start)).abs() < 1e-9);
        assert!((c.end - p.end.min(q.end)).abs() < 1e-9);
    }
}
