//! Weighted conflict graphs over activity candidates.
//!
//! Every presence interval contributes a cluster of candidate activity
//! intervals `[s, t]`. Starts come from the presence start and the ends of
//! the label's conflicts inside the presence; ends come from the presence
//! end and the starts of those conflicts. The activity model restricts the
//! admissible combinations:
//!
//! * AM1: only the full presence interval,
//! * AM2: start fixed at the presence start,
//! * AM3: every `s < t` combination.
//!
//! Candidates of one cluster form a clique. Candidates of different
//! clusters are adjacent iff their labels conflict somewhere inside the
//! open intersection of the two candidates.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instance::{ActivitySet, Instance, LabelId, TimeInterval};
use crate::validation::AmMode;

pub const DEFAULT_SIZE_CAP: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub id: usize,
    /// Label index into [`Instance::labels`].
    pub label: usize,
    pub label_id: LabelId,
    pub presence: usize,
    pub interval: TimeInterval,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct GraphOptions {
    /// Abort when either the vertex or the edge count exceeds this.
    pub size_cap: usize,
    /// Candidates shorter than this are not generated.
    pub min_duration: f64,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self { size_cap: DEFAULT_SIZE_CAP, min_duration: 0.0 }
    }
}

#[derive(Clone, Debug)]
pub struct ConflictGraph {
    mode: AmMode,
    candidates: Vec<Candidate>,
    clusters: Vec<Cluster>,
    cluster_of: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

/// All candidates of one presence interval.
#[derive(Clone, Debug)]
pub struct Cluster {
    pub label: usize,
    pub presence: usize,
    pub members: Vec<usize>,
}

/// Admissible starts and ends of a presence interval, deduplicated.
pub(crate) fn endpoint_sets(instance: &Instance, label: usize, presence: &TimeInterval) -> (Vec<f64>, Vec<f64>) {
    let mut starts = vec![presence.start];
    let mut ends = vec![presence.end];
    for c in instance.label_conflicts(label) {
        if !presence.contains(&c.interval) {
            continue;
        }
        if c.interval.end > presence.start && c.interval.end < presence.end {
            starts.push(c.interval.end);
        }
        if c.interval.start > presence.start && c.interval.start < presence.end {
            ends.push(c.interval.start);
        }
    }
    for v in [&mut starts, &mut ends] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    (starts, ends)
}

fn enumerate_candidates(instance: &Instance, mode: AmMode, min_duration: f64) -> (Vec<Candidate>, Vec<Cluster>) {
    let mut candidates = Vec::new();
    let mut clusters = Vec::new();
    for label in 0..instance.labels().len() {
        let w = instance.weight(label);
        let label_id = instance.labels()[label].id;
        for (pi, p) in instance.presences(label).iter().enumerate() {
            let (starts, ends) = endpoint_sets(instance, label, p);
            let mut intervals = Vec::new();
            match mode {
                AmMode::Am1 => intervals.push(*p),
                AmMode::Am2 => intervals.extend(ends.iter().map(|&t| TimeInterval::new(p.start, t))),
                AmMode::Am3 => {
                    for &s in &starts {
                        intervals.extend(ends.iter().filter(|&&t| s < t).map(|&t| TimeInterval::new(s, t)));
                    }
                }
            }
            let members: Vec<usize> = intervals
                .into_iter()
                .filter(|iv| iv.start < iv.end && iv.len() >= min_duration)
                .map(|interval| {
                    let id = candidates.len();
                    candidates.push(Candidate { id, label, label_id, presence: pi, interval, weight: interval.len() * w });
                    id
                })
                .collect();
            if !members.is_empty() {
                clusters.push(Cluster { label, presence: pi, members });
            }
        }
    }
    (candidates, clusters)
}

/// True iff the labels of the two candidates conflict inside the open
/// intersection of the candidates.
pub fn candidate_conflict(instance: &Instance, c1: &Candidate, c2: &Candidate) -> bool {
    if c1.label == c2.label {
        return false;
    }
    let lo = c1.interval.start.max(c2.interval.start);
    let hi = c1.interval.end.min(c2.interval.end);
    if lo >= hi {
        return false;
    }
    instance.conflicts_between(c1.label, c2.label).iter().any(|c| c.meets_open(lo, hi))
}

/// Pairs of clusters whose labels share a conflict lying inside both
/// presence intervals.
fn linked_cluster_pairs(instance: &Instance, clusters: &[Cluster]) -> Vec<(usize, usize)> {
    let mut by_presence = std::collections::HashMap::new();
    for (ci, c) in clusters.iter().enumerate() {
        by_presence.insert((c.label, c.presence), ci);
    }
    let mut pairs = Vec::new();
    for conflict in instance.conflicts() {
        let a = instance.label_index(conflict.a).expect("canonical conflict");
        let b = instance.label_index(conflict.b).expect("canonical conflict");
        let pa = instance.presence_containing(a, &conflict.interval);
        let pb = instance.presence_containing(b, &conflict.interval);
        if let (Some(pa), Some(pb)) = (pa, pb) {
            if let (Some(&ca), Some(&cb)) = (by_presence.get(&(a, pa)), by_presence.get(&(b, pb))) {
                pairs.push((ca.min(cb), ca.max(cb)));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

pub fn build_graph(instance: &Instance, mode: AmMode) -> Result<ConflictGraph> {
    build_graph_with(instance, mode, &GraphOptions::default())
}

pub fn build_graph_with(instance: &Instance, mode: AmMode, opts: &GraphOptions) -> Result<ConflictGraph> {
    let (candidates, clusters) = enumerate_candidates(instance, mode, opts.min_duration);
    let n = candidates.len();
    let mut cluster_of = vec![0; n];
    for (ci, c) in clusters.iter().enumerate() {
        for &m in &c.members {
            cluster_of[m] = ci;
        }
    }
    let linked = linked_cluster_pairs(instance, &clusters);

    // Count first so oversized graphs abort before allocating adjacency.
    let mut edges: usize = clusters.iter().map(|c| c.members.len() * (c.members.len() - 1) / 2).sum();
    let guard = |v: usize, e: usize| -> Result<()> {
        if v > opts.size_cap || e > opts.size_cap {
            Err(Error::SizeGuard { vertices: v, edges: e, cap: opts.size_cap })
        } else {
            Ok(())
        }
    };
    guard(n, edges)?;
    for &(ca, cb) in &linked {
        for &u in &clusters[ca].members {
            for &v in &clusters[cb].members {
                if candidate_conflict(instance, &candidates[u], &candidates[v]) {
                    edges += 1;
                }
            }
        }
        guard(n, edges)?;
    }

    let mut adjacency = vec![Vec::new(); n];
    for c in &clusters {
        for (k, &u) in c.members.iter().enumerate() {
            for &v in &c.members[k + 1..] {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
    }
    for &(ca, cb) in &linked {
        for &u in &clusters[ca].members {
            for &v in &clusters[cb].members {
                if candidate_conflict(instance, &candidates[u], &candidates[v]) {
                    adjacency[u].push(v);
                    adjacency[v].push(u);
                }
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
    Ok(ConflictGraph { mode, candidates, clusters, cluster_of, adjacency, edge_count })
}

impl ConflictGraph {
    pub fn mode(&self) -> AmMode {
        self.mode
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn candidate(&self, id: usize) -> &Candidate {
        &self.candidates[id]
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster_of(&self, id: usize) -> usize {
        self.cluster_of[id]
    }

    pub fn neighbors(&self, id: usize) -> &[usize] {
        &self.adjacency[id]
    }

    pub fn degree(&self, id: usize) -> usize {
        self.adjacency[id].len()
    }

    pub fn weight(&self, id: usize) -> f64 {
        self.candidates[id].weight
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn selection_weight(&self, selection: &[usize]) -> f64 {
        selection.iter().map(|&v| self.candidates[v].weight).sum()
    }

    /// First adjacent pair inside `selection`, if any.
    pub fn find_adjacent_pair(&self, selection: &[usize]) -> Option<(usize, usize)> {
        let mut mark = vec![false; self.len()];
        for &v in selection {
            mark[v] = true;
        }
        for &v in selection {
            if let Some(&u) = self.adjacency[v].iter().find(|&&u| mark[u]) {
                return Some((v.min(u), v.max(u)));
            }
        }
        None
    }

    pub fn is_independent(&self, selection: &[usize]) -> bool {
        self.find_adjacent_pair(selection).is_none()
    }

    /// Interprets a set of candidates as an activity set.
    pub fn activity(&self, selection: &[usize]) -> ActivitySet {
        let mut phi = ActivitySet::new();
        for &v in selection {
            let c = &self.candidates[v];
            phi.insert(c.label_id, c.interval);
        }
        phi
    }

    /// Connected components over graph edges plus conflict links between
    /// clusters. Justification witnesses never cross component borders.
    pub fn components(&self, instance: &Instance) -> Vec<Vec<usize>> {
        let linked = linked_cluster_pairs(instance, &self.clusters);
        let mut parent: Vec<usize> = (0..self.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut union = |a: usize, b: usize| {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        };
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                union(u, v);
            }
        }
        for (ca, cb) in linked {
            union(self.clusters[ca].members[0], self.clusters[cb].members[0]);
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for v in 0..self.len() {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }

    /// DIMACS-like text dump: `v <id> <weight>` and `e <id1> <id2>` lines.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "c temporal labeling conflict graph mode {}", self.mode);
        let _ = writeln!(out, "c vertices {} edges {}", self.len(), self.edge_count);
        for c in &self.candidates {
            let _ = writeln!(out, "v {} {}", c.id, c.weight);
        }
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list.iter().filter(|&&v| v > u) {
                let _ = writeln!(out, "e {u} {v}");
            }
        }
        out
    }
}
