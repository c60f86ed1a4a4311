//! Shared helpers: seeded random instances and a brute-force reference
//! solver that enumerates activity sets directly, without conflict graphs.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use temporal_labeling::{check_model, ActivitySet, AmMode, Conflict, Instance, Label, LabelId, TimeInterval};

pub struct Shape {
    pub horizon_steps: u32,
    pub max_labels: usize,
    pub max_presences: usize,
    pub max_conflicts: usize,
    pub max_weight: u32,
}

pub const SMALL: Shape = Shape { horizon_steps: 40, max_labels: 5, max_presences: 10, max_conflicts: 15, max_weight: 3 };
pub const MEDIUM: Shape = Shape { horizon_steps: 120, max_labels: 16, max_presences: 40, max_conflicts: 60, max_weight: 4 };

/// Random instance with endpoints on a 0.5 grid and integer weights, so
/// objectives are exact in floating point.
pub fn random_instance(seed: u64, shape: &Shape) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = |s: u32| s as f64 * 0.5;
    let n_labels = rng.gen_range(2.min(shape.max_labels)..=shape.max_labels);
    let mut labels = Vec::new();
    let mut presences: Vec<(LabelId, TimeInterval)> = Vec::new();
    let budget = rng.gen_range(shape.max_presences / 2..=shape.max_presences);
    for id in 1..=n_labels as u32 {
        labels.push(Label::new(id, rng.gen_range(1..=shape.max_weight) as f64, format!("l{id}")));
    }
    for _ in 0..budget {
        let label = LabelId(rng.gen_range(1..=n_labels as u32));
        let len = rng.gen_range(2..=shape.horizon_steps / 2);
        let start = rng.gen_range(0..=shape.horizon_steps - len);
        let iv = TimeInterval::new(grid(start), grid(start + len));
        let clash = presences.iter().any(|(l, p)| *l == label && p.intersects(&iv));
        if !clash {
            presences.push((label, iv));
        }
    }
    let mut conflicts: Vec<Conflict> = Vec::new();
    let n_conflicts = rng.gen_range(shape.max_conflicts / 3..=shape.max_conflicts);
    for _ in 0..n_conflicts * 8 {
        if conflicts.len() >= n_conflicts || presences.len() < 2 {
            break;
        }
        let (la, pa) = presences[rng.gen_range(0..presences.len())];
        let (lb, pb) = presences[rng.gen_range(0..presences.len())];
        if la == lb {
            continue;
        }
        let Some(ov) = pa.open_overlap(&pb) else { continue };
        let lo = (ov.start * 2.0) as u32;
        let hi = (ov.end * 2.0) as u32;
        let s = rng.gen_range(lo..hi);
        let e = rng.gen_range(s + 1..=hi);
        let iv = TimeInterval::new(grid(s), grid(e));
        let (a, b) = (la.0.min(lb.0), la.0.max(lb.0));
        let clash = conflicts.iter().any(|c| c.a.0 == a && c.b.0 == b && c.interval.intersects(&iv));
        if !clash {
            conflicts.push(Conflict::new(a, b, iv.start, iv.end));
        }
    }
    Instance::new(grid(shape.horizon_steps), labels, presences, conflicts).expect("generated instance is consistent")
}

struct Slot {
    label: usize,
    weight: f64,
    options: Vec<TimeInterval>,
}

struct Oracle<'a> {
    instance: &'a Instance,
    mode: AmMode,
    k: Option<usize>,
    slots: Vec<Slot>,
    /// Heaviest option of each slot and of all later ones.
    tail: Vec<f64>,
    chosen: Vec<(usize, TimeInterval)>,
    best: f64,
    best_set: Option<ActivitySet>,
}

impl Oracle<'_> {
    fn compatible(&self, label: usize, iv: &TimeInterval) -> bool {
        for &(other, a) in &self.chosen {
            let lo = iv.start.max(a.start);
            let hi = iv.end.min(a.end);
            if lo >= hi {
                continue;
            }
            if other != label && self.instance.conflicts_between(label, other).iter().any(|c| c.start < hi && c.end > lo) {
                return false;
            }
        }
        if let Some(k) = self.k {
            let mut points: Vec<f64> = vec![iv.start, iv.end];
            for (_, a) in &self.chosen {
                points.extend([a.start, a.end]);
            }
            points.sort_by(f64::total_cmp);
            for w in points.windows(2) {
                let mid = (w[0] + w[1]) / 2.0;
                if mid <= iv.start || mid >= iv.end {
                    continue;
                }
                let load = self.chosen.iter().filter(|(_, a)| a.start < mid && mid < a.end).count();
                if load + 1 > k {
                    return false;
                }
            }
        }
        true
    }

    fn leaf(&mut self, value: f64) {
        if value <= self.best {
            return;
        }
        let mut phi = ActivitySet::new();
        for &(label, iv) in &self.chosen {
            phi.insert(self.instance.labels()[label].id, iv);
        }
        let report = check_model(self.instance, &phi, self.mode, self.k, None).expect("labels exist");
        if report.valid {
            self.best = value;
            self.best_set = Some(phi);
        }
    }

    fn dfs(&mut self, i: usize, value: f64) {
        if i == self.slots.len() {
            self.leaf(value);
            return;
        }
        if value + self.tail[i] <= self.best {
            return;
        }
        for o in 0..self.slots[i].options.len() {
            let iv = self.slots[i].options[o];
            let label = self.slots[i].label;
            if self.compatible(label, &iv) {
                self.chosen.push((label, iv));
                self.dfs(i + 1, value + iv.len() * self.slots[i].weight);
                self.chosen.pop();
            }
        }
        self.dfs(i + 1, value);
    }
}

/// Exhaustive maximum over all activity sets whose endpoints are presence
/// endpoints or conflict endpoints, filtered by `check_model`.
pub fn brute_force(instance: &Instance, mode: AmMode, k: Option<usize>) -> (f64, ActivitySet) {
    let mut slots = Vec::new();
    for label in 0..instance.labels().len() {
        for p in instance.presences(label) {
            let mut starts = vec![p.start];
            let mut ends = vec![p.end];
            for c in instance.conflicts() {
                if instance.label_index(c.a) != Some(label) && instance.label_index(c.b) != Some(label) {
                    continue;
                }
                for x in [c.interval.start, c.interval.end] {
                    if x > p.start && x < p.end {
                        starts.push(x);
                        ends.push(x);
                    }
                }
            }
            starts.sort_by(f64::total_cmp);
            starts.dedup();
            ends.sort_by(f64::total_cmp);
            ends.dedup();
            let mut options = Vec::new();
            for &s in &starts {
                for &t in &ends {
                    let shape_ok = match mode {
                        AmMode::Am1 => s == p.start && t == p.end,
                        AmMode::Am2 => s == p.start,
                        AmMode::Am3 => true,
                    };
                    if s < t && shape_ok {
                        options.push(TimeInterval::new(s, t));
                    }
                }
            }
            options.sort_by(|a, b| b.len().total_cmp(&a.len()));
            slots.push(Slot { label, weight: instance.weight(label), options });
        }
    }
    slots.sort_by(|a, b| a.options[0].start.total_cmp(&b.options[0].start));
    let mut tail = vec![0.0; slots.len() + 1];
    for i in (0..slots.len()).rev() {
        let max = slots[i].options.iter().map(|o| o.len()).fold(0.0, f64::max) * slots[i].weight;
        tail[i] = tail[i + 1] + max;
    }
    if let Some(k) = k {
        let mut points: Vec<f64> = slots.iter().flat_map(|s| s.options.iter().flat_map(|o| [o.start, o.end])).collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        for i in 0..slots.len() {
            let mut capped = 0.0;
            for w in points.windows(2) {
                let mid = (w[0] + w[1]) / 2.0;
                let mut rates: Vec<f64> = slots[i..]
                    .iter()
                    .filter(|s| s.options.iter().any(|o| o.start < mid && mid < o.end))
                    .map(|s| s.weight)
                    .collect();
                rates.sort_by(|a, b| b.total_cmp(a));
                capped += (w[1] - w[0]) * rates.iter().take(k).sum::<f64>();
            }
            tail[i] = tail[i].min(capped);
        }
    }
    let mut oracle = Oracle { instance, mode, k, slots, tail, chosen: Vec::new(), best: -1.0, best_set: None };
    oracle.dfs(0, 0.0);
    (oracle.best, oracle.best_set.expect("the empty set is valid"))
}
