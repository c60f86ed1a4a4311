//! Exact dynamic program over elementary time segments.
//!
//! The breakpoints of a group of presences (presence endpoints, admissible
//! activity endpoints and conflict endpoints) cut time into segments. A
//! state records which presences are active on the current segment, when
//! young activities started (for the minimum duration) and, under AM3,
//! which presences already ended their activity and could otherwise start
//! again. Every transition checks conflicts, the k bound and endpoint
//! justification, so the best final state is an optimal valid activity set.
//! The state space is exponential in the number of simultaneously present
//! labels; callers fall back to branch and bound when the caps are hit.

use std::collections::HashMap;
use std::time::Instant;

use crate::graph::{endpoint_sets, ConflictGraph};
use crate::instance::Instance;
use crate::validation::AmMode;

pub(crate) struct SweepLimits {
    /// Largest number of states on one segment.
    pub layer_states: usize,
    /// Largest number of key words kept for reconstruction.
    pub stored_words: usize,
    /// Largest number of presences deciding at one breakpoint.
    pub movers: usize,
}

impl Default for SweepLimits {
    fn default() -> Self {
        Self { layer_states: 500_000, stored_words: 20_000_000, movers: 16 }
    }
}

pub(crate) enum SweepOutcome {
    /// Candidate ids of an optimal selection for the group.
    Solved(Vec<usize>),
    /// No selection beats the given floor.
    NoBetter,
    TooLarge,
    TimedOut,
}

const MATURE: u32 = u32::MAX;
const DONE: u32 = u32::MAX - 1;

fn entry(item: usize, tag: u32) -> u64 {
    ((item as u64) << 32) | tag as u64
}

fn split(e: u64) -> (usize, u32) {
    ((e >> 32) as usize, e as u32)
}

struct Item {
    cluster: usize,
    weight: f64,
    enter: usize,
    leave: usize,
    /// Breakpoint indices where an activity may start or end.
    starts: Vec<usize>,
    ends: Vec<usize>,
}

struct Layer {
    data: Vec<u64>,
    offsets: Vec<usize>,
    parents: Vec<u32>,
    values: Vec<f64>,
}

impl Layer {
    fn new() -> Self {
        Self { data: Vec::new(), offsets: vec![0], parents: Vec::new(), values: Vec::new() }
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    fn key(&self, i: usize) -> &[u64] {
        &self.data[self.offsets[i]..self.offsets[i + 1]]
    }
}

struct Model<'a> {
    graph: &'a ConflictGraph,
    mode: AmMode,
    k: Option<usize>,
    min_duration: f64,
    times: Vec<f64>,
    items: Vec<Item>,
    entering: Vec<Vec<usize>>,
    /// Presences already present that may start at a breakpoint (AM3).
    inner_starts: Vec<Vec<usize>>,
    seg_pairs: Vec<Vec<(usize, usize)>>,
    point_pairs: Vec<Vec<(usize, usize)>>,
    end_witness: HashMap<(usize, usize), Vec<usize>>,
    start_witness: HashMap<(usize, usize), Vec<usize>>,
}

impl<'a> Model<'a> {
    fn new(instance: &Instance, graph: &'a ConflictGraph, part: &[usize], k: Option<usize>, min_duration: f64) -> Self {
        let mode = graph.mode();
        let mut clusters: Vec<usize> = part.iter().map(|&v| graph.cluster_of(v)).collect();
        clusters.sort_unstable();
        clusters.dedup();
        let mut item_of: HashMap<(usize, usize), usize> = HashMap::new();
        let mut raw = Vec::with_capacity(clusters.len());
        let mut times = Vec::new();
        for (i, &ci) in clusters.iter().enumerate() {
            let cl = &graph.clusters()[ci];
            let p = instance.presences(cl.label)[cl.presence];
            let (starts, ends) = endpoint_sets(instance, cl.label, &p);
            let starts = if mode == AmMode::Am3 { starts } else { vec![p.start] };
            let ends = if mode == AmMode::Am1 { vec![p.end] } else { ends };
            times.extend(starts.iter().chain(&ends).copied());
            times.extend([p.start, p.end]);
            item_of.insert((cl.label, cl.presence), i);
            raw.push((ci, cl.label, p, starts, ends));
        }
        let mut pairs = Vec::new();
        for c in instance.conflicts() {
            let a = instance.label_index(c.a).expect("canonical conflict");
            let b = instance.label_index(c.b).expect("canonical conflict");
            let ia = instance.presence_containing(a, &c.interval).and_then(|p| item_of.get(&(a, p)).copied());
            let ib = instance.presence_containing(b, &c.interval).and_then(|p| item_of.get(&(b, p)).copied());
            if let (Some(ia), Some(ib)) = (ia, ib) {
                times.extend([c.interval.start, c.interval.end]);
                pairs.push((ia, ib, c.interval));
            }
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        let at = |t: f64| times.binary_search_by(|x| x.total_cmp(&t)).expect("breakpoint");
        let n = times.len();

        let mut items = Vec::with_capacity(raw.len());
        let mut entering = vec![Vec::new(); n];
        let mut inner_starts = vec![Vec::new(); n];
        for (i, (ci, label, p, starts, ends)) in raw.iter().enumerate() {
            let item = Item {
                cluster: *ci,
                weight: instance.weight(*label),
                enter: at(p.start),
                leave: at(p.end),
                starts: starts.iter().map(|&t| at(t)).collect(),
                ends: ends.iter().map(|&t| at(t)).collect(),
            };
            entering[item.enter].push(i);
            for &s in &item.starts {
                if s > item.enter {
                    inner_starts[s].push(i);
                }
            }
            items.push(item);
        }

        let mut seg_pairs = vec![Vec::new(); n.saturating_sub(1)];
        let mut point_pairs = vec![Vec::new(); n];
        let mut end_witness: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        let mut start_witness: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for &(ia, ib, iv) in &pairs {
            let (s, e) = (at(iv.start), at(iv.end));
            if s == e {
                point_pairs[s].push((ia, ib));
            }
            for seg in &mut seg_pairs[s..e] {
                seg.push((ia, ib));
            }
            for (x, o) in [(ia, ib), (ib, ia)] {
                end_witness.entry((x, s)).or_default().push(o);
                start_witness.entry((x, e)).or_default().push(o);
            }
        }
        Self {
            graph,
            mode,
            k,
            min_duration,
            times,
            items,
            entering,
            inner_starts,
            seg_pairs,
            point_pairs,
            end_witness,
            start_witness,
        }
    }

    /// Best weight rate on each segment ignoring justification and the
    /// minimum duration, summed from each segment to the end.
    fn suffix_bounds(&self) -> Vec<f64> {
        let n = self.times.len();
        let mut out = vec![0.0; n + 1];
        for j in (0..n.saturating_sub(1)).rev() {
            let present: Vec<usize> = (0..self.items.len()).filter(|&x| self.items[x].enter <= j && j < self.items[x].leave).collect();
            let rate = if present.len() > 64 {
                let mut w: Vec<f64> = present.iter().map(|&x| self.items[x].weight).collect();
                w.sort_by(|a, b| b.total_cmp(a));
                w.iter().take(self.k.unwrap_or(usize::MAX)).sum()
            } else {
                let local = |x: usize| present.iter().position(|&y| y == x);
                let mut adj = vec![0u64; present.len()];
                for &(a, b) in &self.seg_pairs[j] {
                    if let (Some(a), Some(b)) = (local(a), local(b)) {
                        adj[a] |= 1 << b;
                        adj[b] |= 1 << a;
                    }
                }
                let w: Vec<f64> = present.iter().map(|&x| self.items[x].weight).collect();
                let open = if present.is_empty() { 0 } else { !0u64 >> (64 - present.len()) };
                let mut best = 0.0;
                mwis(&w, &adj, 0, open, 0.0, self.k.unwrap_or(usize::MAX), &mut best);
                best
            };
            out[j] = out[j + 1] + rate * (self.times[j + 1] - self.times[j]);
        }
        out
    }

    fn can_end(&self, x: usize, j: usize) -> bool {
        self.items[x].ends.binary_search(&j).is_ok()
    }

    fn long_enough(&self, start: u32, j: usize) -> bool {
        start == MATURE || self.times[j] - self.times[start as usize] >= self.min_duration
    }

    fn has_later_start(&self, x: usize, j: usize) -> bool {
        self.items[x].starts.last().is_some_and(|&s| s > j)
    }

    /// Whether some witness of `x` at breakpoint `j` is active there.
    fn witnessed(&self, table: &HashMap<(usize, usize), Vec<usize>>, x: usize, j: usize, old: &[u64], new: &[usize]) -> bool {
        let Some(list) = table.get(&(x, j)) else { return false };
        list.iter().any(|&o| {
            new.contains(&o)
                || old.iter().any(|&e| {
                    let (y, tag) = split(e);
                    y == o && tag != DONE
                })
        })
    }
}

/// Maximum weight of at most `k` pairwise non-adjacent vertices among `open`.
fn mwis(w: &[f64], adj: &[u64], from: usize, open: u64, acc: f64, k: usize, best: &mut f64) {
    if acc > *best {
        *best = acc;
    }
    if k == 0 {
        return;
    }
    let rest: f64 = (from..w.len()).filter(|&i| open & (1 << i) != 0).map(|i| w[i]).sum();
    if acc + rest <= *best {
        return;
    }
    let Some(i) = (from..w.len()).find(|&i| open & (1 << i) != 0) else { return };
    mwis(w, adj, i + 1, open & !adj[i], acc + w[i], k - 1, best);
    mwis(w, adj, i + 1, open, acc, k, best);
}

/// Runs the sweep on the presences of `part`. Candidates outside `part`
/// are ignored. States that cannot exceed `floor` are dropped.
#[allow(clippy::too_many_arguments)]
pub(crate) fn sweep(
    instance: &Instance,
    graph: &ConflictGraph,
    part: &[usize],
    k: Option<usize>,
    min_duration: f64,
    floor: f64,
    deadline: Instant,
    limits: &SweepLimits,
) -> SweepOutcome {
    let m = Model::new(instance, graph, part, k, min_duration);
    let n = m.times.len();
    if n == 0 {
        return SweepOutcome::Solved(Vec::new());
    }
    let suffix = m.suffix_bounds();
    let slack = 1e-9 * (1.0 + floor.abs());
    let mut layers: Vec<Layer> = Vec::with_capacity(n);
    let mut stored = 0usize;
    let mut prev = Layer::new();
    prev.offsets.push(0);
    prev.parents.push(u32::MAX);
    prev.values.push(0.0);

    let mut old_active: Vec<(usize, u32)> = Vec::new();
    let mut keep: Vec<(usize, u32)> = Vec::new();
    let mut movers: Vec<(usize, bool)> = Vec::new();
    let mut new_active: Vec<usize> = Vec::new();
    let mut key: Vec<u64> = Vec::new();
    let mut work = 0u64;

    for j in 0..n {
        let t = m.times[j];
        let seg_len = if j + 1 < n { m.times[j + 1] - t } else { 0.0 };
        let mut next = Layer::new();
        let mut index: HashMap<Vec<u64>, u32> = HashMap::new();
        for si in 0..prev.len() {
            work += 1;
            if work.is_multiple_of(4096) && Instant::now() >= deadline {
                return SweepOutcome::TimedOut;
            }
            let old = prev.key(si);
            old_active.clear();
            keep.clear();
            movers.clear();
            let mut done: Vec<usize> = Vec::new();
            let mut dead = false;
            for &e in old {
                let (x, tag) = split(e);
                if tag == DONE {
                    if m.items[x].leave != j && m.has_later_start(x, j) {
                        done.push(x);
                    }
                    continue;
                }
                old_active.push((x, tag));
                if m.items[x].leave == j {
                    if !m.long_enough(tag, j) {
                        dead = true;
                    }
                } else if m.can_end(x, j) && m.long_enough(tag, j) {
                    movers.push((x, false));
                } else {
                    keep.push((x, tag));
                }
            }
            if dead {
                continue;
            }
            for &x in &m.entering[j] {
                movers.push((x, true));
            }
            if m.mode == AmMode::Am3 {
                for &x in &m.inner_starts[j] {
                    let busy = old_active.iter().any(|&(y, _)| y == x) || old.contains(&entry(x, DONE));
                    if !busy {
                        movers.push((x, true));
                    }
                }
            }
            if movers.len() > limits.movers {
                return SweepOutcome::TooLarge;
            }
            'mask: for mask in 0u32..(1u32 << movers.len()) {
                // Bit set: a starter starts, an active presence stops.
                new_active.clear();
                new_active.extend(keep.iter().map(|&(x, _)| x));
                for (b, &(x, starter)) in movers.iter().enumerate() {
                    let flip = mask & (1 << b) != 0;
                    if starter == flip {
                        new_active.push(x);
                    }
                }
                if m.k.is_some_and(|k| new_active.len() > k) {
                    continue;
                }
                if j + 1 < n {
                    for &(a, b) in &m.seg_pairs[j] {
                        if new_active.contains(&a) && new_active.contains(&b) {
                            continue 'mask;
                        }
                    }
                }
                for &(a, b) in &m.point_pairs[j] {
                    let through = |x: usize| new_active.contains(&x) && old_active.iter().any(|&(y, _)| y == x);
                    if through(a) && through(b) {
                        continue 'mask;
                    }
                }
                for (b, &(x, starter)) in movers.iter().enumerate() {
                    if mask & (1 << b) == 0 {
                        continue;
                    }
                    let ok = if starter {
                        j == m.items[x].enter || m.witnessed(&m.start_witness, x, j, old, &new_active)
                    } else {
                        m.witnessed(&m.end_witness, x, j, old, &new_active)
                    };
                    if !ok {
                        continue 'mask;
                    }
                }
                if j + 1 == n && !new_active.is_empty() {
                    continue;
                }
                key.clear();
                for &(x, tag) in &keep {
                    let tag = if tag != MATURE && m.long_enough(tag, j) { MATURE } else { tag };
                    key.push(entry(x, tag));
                }
                for (b, &(x, starter)) in movers.iter().enumerate() {
                    let flip = mask & (1 << b) != 0;
                    if starter && flip {
                        let tag = if m.min_duration > 0.0 { j as u32 } else { MATURE };
                        key.push(entry(x, tag));
                    } else if !starter && !flip {
                        let tag = old_active.iter().find(|&&(y, _)| y == x).map_or(MATURE, |&(_, t)| t);
                        let tag = if tag != MATURE && m.long_enough(tag, j) { MATURE } else { tag };
                        key.push(entry(x, tag));
                    } else if !starter && flip && m.mode == AmMode::Am3 && m.has_later_start(x, j) {
                        key.push(entry(x, DONE));
                    }
                }
                key.extend(done.iter().map(|&x| entry(x, DONE)));
                key.sort_unstable();
                let value = prev.values[si] + new_active.iter().map(|&x| m.items[x].weight).sum::<f64>() * seg_len;
                if value + suffix[j + 1] < floor - slack {
                    continue;
                }
                match index.get(&key) {
                    Some(&at) => {
                        if value > next.values[at as usize] {
                            next.values[at as usize] = value;
                            next.parents[at as usize] = si as u32;
                        }
                    }
                    None => {
                        if next.len() >= limits.layer_states {
                            return SweepOutcome::TooLarge;
                        }
                        index.insert(key.clone(), next.len() as u32);
                        next.data.extend_from_slice(&key);
                        next.offsets.push(next.data.len());
                        next.parents.push(si as u32);
                        next.values.push(value);
                    }
                }
            }
        }
        stored += next.data.len() + next.len();
        if stored > limits.stored_words {
            return SweepOutcome::TooLarge;
        }
        layers.push(std::mem::replace(&mut prev, next));
    }
    layers.push(prev);

    // layers[0] is the empty start; layers[j + 1] holds segment j.
    let last = &layers[n];
    let Some(best) = (0..last.len()).max_by(|&a, &b| last.values[a].total_cmp(&last.values[b]).then(b.cmp(&a))) else {
        return SweepOutcome::NoBetter;
    };
    if last.values[best] <= floor {
        return SweepOutcome::NoBetter;
    }
    let mut runs: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut at = best;
    for j in (0..n).rev() {
        for &e in layers[j + 1].key(at) {
            let (x, tag) = split(e);
            if tag != DONE {
                let r = runs.entry(x).or_insert((j, j));
                r.0 = r.0.min(j);
            }
        }
        at = layers[j + 1].parents[at] as usize;
    }
    let mut selection = Vec::with_capacity(runs.len());
    for (x, (first, last)) in runs {
        let (s, e) = (m.times[first], m.times[last + 1]);
        let cl = &m.graph.clusters()[m.items[x].cluster];
        let found = cl.members.iter().copied().find(|&v| {
            let iv = m.graph.candidate(v).interval;
            iv.start == s && iv.end == e
        });
        match found {
            Some(v) => selection.push(v),
            None => return SweepOutcome::TooLarge,
        }
    }
    selection.sort_unstable();
    SweepOutcome::Solved(selection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::instance::fixtures::i1;
    use std::time::Duration;

    fn run(mode: AmMode, k: Option<usize>, floor: f64) -> (SweepOutcome, ConflictGraph) {
        let inst = i1();
        let g = build_graph(&inst, mode).unwrap();
        let part: Vec<usize> = (0..g.len()).collect();
        let deadline = Instant::now() + Duration::from_secs(10);
        (sweep(&inst, &g, &part, k, 0.0, floor, deadline, &SweepLimits::default()), g)
    }

    #[test]
    fn finds_the_optimum_and_respects_the_floor() {
        for mode in AmMode::ALL {
            let (out, g) = run(mode, None, 0.0);
            let SweepOutcome::Solved(set) = out else { panic!("{mode}: not solved") };
            assert!(g.is_independent(&set));
            let best = g.selection_weight(&set);
            assert!(matches!(run(mode, None, best).0, SweepOutcome::NoBetter));
            assert!(matches!(run(mode, None, best - 0.5).0, SweepOutcome::Solved(_)));
        }
        let (SweepOutcome::Solved(set), g) = run(AmMode::Am1, None, 0.0) else { panic!() };
        assert_eq!(g.selection_weight(&set), 16.0);
    }

    #[test]
    fn k_bound_lowers_the_optimum() {
        let (SweepOutcome::Solved(free), g) = run(AmMode::Am2, None, 0.0) else { panic!() };
        let (SweepOutcome::Solved(one), _) = run(AmMode::Am2, Some(1), 0.0) else { panic!() };
        assert!(g.selection_weight(&one) <= g.selection_weight(&free));
    }
}
