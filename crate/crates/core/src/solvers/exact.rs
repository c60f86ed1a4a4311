use std::time::{Duration, Instant};

use super::coverage::Coverage;
use super::mwis::{clear, first_set, has, Bits, Mwis};
use super::pls::pls_search;
use super::greedy::greedy_selection;
use super::intgraph::solve_intgraph;
use super::sweep::{sweep, SweepLimits, SweepOutcome};
use super::{graph_or_abort, PlsParams, Problem, SolveRequest, SolveResult, Status};
use crate::graph::{build_graph_with, ConflictGraph};
use crate::instance::{ActivitySet, Instance, LabelId};
use crate::validation::{enforce_justification, justified_endpoints, saturate_and_repair, selection_justified, AmMode};

/// Search statistics next to the result.
#[derive(Clone, Debug)]
pub struct ExactOutcome {
    pub result: SolveResult,
    pub nodes: u64,
    /// Independent subproblems searched.
    pub groups: usize,
    /// Subproblems solved by the segment sweep instead of branch and bound.
    pub swept: usize,
    pub vertices: usize,
    pub edges: usize,
}

struct Group<'a> {
    instance: &'a Instance,
    graph: &'a ConflictGraph,
    /// Global ids by decreasing weight.
    verts: Vec<usize>,
    weight: Vec<f64>,
    adj: Bits,
    local_neighbors: Vec<Vec<usize>>,
    blocked: Vec<u32>,
    coverage: Option<Coverage>,
    chosen: Vec<usize>,
    current: f64,
    best: f64,
    best_set: Vec<usize>,
    nodes: u64,
    deadline: Instant,
    timed_out: bool,
    justify: bool,
    // scratch for the k bound
    spans: Vec<Option<(usize, usize, f64)>>,
    per_slot: Vec<Vec<f64>>,
}

impl<'a> Group<'a> {
    fn new(instance: &'a Instance, graph: &'a ConflictGraph, mut verts: Vec<usize>, coverage: Option<Coverage>, deadline: Instant) -> Self {
        verts.sort_by(|&a, &b| graph.weight(b).total_cmp(&graph.weight(a)).then(a.cmp(&b)));
        let m = verts.len();
        let mut local = vec![usize::MAX; graph.len()];
        for (i, &v) in verts.iter().enumerate() {
            local[v] = i;
        }
        let mut adj = Bits::rows(m, m);
        let mut local_neighbors = vec![Vec::new(); m];
        for (i, &v) in verts.iter().enumerate() {
            for &u in graph.neighbors(v) {
                let j = local[u];
                if j != usize::MAX {
                    adj.set(i, j);
                    local_neighbors[i].push(j);
                }
            }
        }
        let slots = coverage.as_ref().map_or(0, |c| c.lengths().len());
        Self {
            instance,
            graph,
            weight: verts.iter().map(|&v| graph.weight(v)).collect(),
            verts,
            adj,
            local_neighbors,
            blocked: vec![0; m],
            coverage,
            chosen: Vec::new(),
            current: 0.0,
            best: f64::NEG_INFINITY,
            best_set: Vec::new(),
            nodes: 0,
            deadline,
            timed_out: false,
            justify: graph.mode() != AmMode::Am1,
            spans: vec![None; graph.clusters().len()],
            per_slot: vec![Vec::new(); slots],
        }
    }

    fn offer(&mut self, set: &[usize]) {
        let w = self.graph.selection_weight(set);
        if w > self.best {
            self.best = w;
            self.best_set = set.to_vec();
        }
    }

    fn available(&self, v: usize) -> bool {
        self.blocked[v] == 0 && self.coverage.as_ref().is_none_or(|c| c.fits(self.verts[v]))
    }

    /// Clique-cover bound on the available vertices from `from` on.
    fn cover_bound(&self, from: usize, limit: f64) -> f64 {
        let m = self.verts.len();
        let mut rem = vec![0u64; self.adj.words];
        for v in from..m {
            if self.available(v) {
                rem[v / 64] |= 1 << (v % 64);
            }
        }
        let mut bound = 0.0;
        let mut cand = vec![0u64; self.adj.words];
        while let Some(u) = first_set(&rem) {
            bound += self.weight[u];
            if bound > limit {
                return bound;
            }
            clear(&mut rem, u);
            for (c, (r, a)) in cand.iter_mut().zip(rem.iter().zip(self.adj.row(u))) {
                *c = r & a;
            }
            while let Some(x) = first_set(&cand) {
                clear(&mut rem, x);
                for (c, a) in cand.iter_mut().zip(self.adj.row(x)) {
                    *c &= a;
                }
                clear(&mut cand, x);
            }
        }
        bound
    }

    /// Per elementary interval, the heaviest `k - used` clusters that can
    /// still cover it.
    fn k_bound(&mut self, from: usize) -> f64 {
        let Some(cov) = self.coverage.as_ref() else { return f64::INFINITY };
        let mut touched = Vec::new();
        for v in from..self.verts.len() {
            if !self.available(v) {
                continue;
            }
            let g = self.verts[v];
            let cl = self.graph.cluster_of(g);
            let (lo, hi) = cov.range(g);
            let rate = self.instance.weight(self.graph.candidate(g).label);
            match &mut self.spans[cl] {
                Some((a, b, _)) => {
                    *a = (*a).min(lo);
                    *b = (*b).max(hi);
                }
                slot @ None => {
                    *slot = Some((lo, hi, rate));
                    touched.push(cl);
                }
            }
        }
        let mut slots = Vec::new();
        for cl in touched {
            let (lo, hi, rate) = self.spans[cl].take().unwrap();
            for e in lo..hi {
                if self.per_slot[e].is_empty() {
                    slots.push(e);
                }
                self.per_slot[e].push(rate);
            }
        }
        let mut bound = 0.0;
        for e in slots {
            let free = (cov.k() - cov.count(e)) as usize;
            let list = &mut self.per_slot[e];
            list.sort_by(|a, b| b.total_cmp(a));
            bound += cov.lengths()[e] * list.iter().take(free).sum::<f64>();
            list.clear();
        }
        bound
    }

    fn leaf(&mut self) {
        if self.current <= self.best {
            return;
        }
        let set: Vec<usize> = self.chosen.iter().map(|&v| self.verts[v]).collect();
        if self.justify && !selection_justified(self.instance, self.graph, &set) {
            return;
        }
        self.best = self.current;
        self.best_set = set;
    }

    fn search(&mut self, mut i: usize) {
        let m = self.verts.len();
        loop {
            self.nodes += 1;
            if self.nodes.is_multiple_of(1024) && Instant::now() >= self.deadline {
                self.timed_out = true;
            }
            if self.timed_out {
                return;
            }
            while i < m && !self.available(i) {
                i += 1;
            }
            if i == m {
                self.leaf();
                return;
            }
            let slack = self.best - self.current;
            let mut bound = self.cover_bound(i, slack);
            if bound <= slack {
                return;
            }
            if self.coverage.is_some() {
                bound = bound.min(self.k_bound(i));
                if bound <= slack {
                    return;
                }
            }
            self.include(i);
            self.search(i + 1);
            self.exclude(i);
            i += 1;
        }
    }

    fn include(&mut self, v: usize) {
        self.chosen.push(v);
        self.current += self.weight[v];
        for &u in &self.local_neighbors[v] {
            self.blocked[u] += 1;
        }
        if let Some(c) = self.coverage.as_mut() {
            c.add(self.verts[v]);
        }
    }

    fn exclude(&mut self, v: usize) {
        self.chosen.pop();
        self.current -= self.weight[v];
        for &u in &self.local_neighbors[v] {
            self.blocked[u] -= 1;
        }
        if let Some(c) = self.coverage.as_mut() {
            c.remove(self.verts[v]);
        }
    }
}

/// Exact search for one conflict component without a k bound. The
/// justification rules are dropped first; if the relaxed optimum has an
/// unjustified endpoint the search branches on dropping that candidate or
/// keeping it together with one of its possible witnesses.
struct Unbounded<'a> {
    instance: &'a Instance,
    graph: &'a ConflictGraph,
    verts: Vec<usize>,
    mwis: Mwis,
    best: f64,
    best_set: Vec<usize>,
    root_bound: f64,
}

impl<'a> Unbounded<'a> {
    fn new(instance: &'a Instance, graph: &'a ConflictGraph, mut verts: Vec<usize>, deadline: Instant) -> Self {
        verts.sort_by(|&a, &b| graph.weight(b).total_cmp(&graph.weight(a)).then(a.cmp(&b)));
        let mut local = std::collections::HashMap::with_capacity(verts.len());
        for (i, &v) in verts.iter().enumerate() {
            local.insert(v, i);
        }
        let mut adj = Bits::rows(verts.len(), verts.len());
        for (i, &v) in verts.iter().enumerate() {
            for u in graph.neighbors(v) {
                if let Some(&j) = local.get(u) {
                    adj.set(i, j);
                }
            }
        }
        let weight = verts.iter().map(|&v| graph.weight(v)).collect();
        let mwis = Mwis::new(weight, adj, deadline);
        Self { instance, graph, verts, mwis, best: f64::NEG_INFINITY, best_set: Vec::new(), root_bound: f64::INFINITY }
    }

    fn global(&self, local: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = local.iter().map(|&v| self.verts[v]).collect();
        out.sort_unstable();
        out
    }

    fn offer(&mut self, set: Vec<usize>) {
        let w = self.graph.selection_weight(&set);
        if w > self.best {
            self.best = w;
            self.best_set = set;
        }
    }

    /// First selected candidate with an unjustified endpoint, and the local
    /// vertices that could justify it.
    fn unjustified(&self, local: &[usize]) -> Option<(usize, Vec<usize>)> {
        let mut acts = vec![Vec::new(); self.instance.labels().len()];
        for &v in local {
            let c = self.graph.candidate(self.verts[v]);
            acts[c.label].push(c.interval);
        }
        let check_start = self.graph.mode() == AmMode::Am3;
        for &v in local {
            let c = self.graph.candidate(self.verts[v]);
            let p = self.instance.presences(c.label)[c.presence];
            let (s_ok, e_ok) = justified_endpoints(self.instance, &acts, c.label, &p, &c.interval);
            let point = if check_start && !s_ok {
                Some((c.interval.start, true))
            } else if !e_ok {
                Some((c.interval.end, false))
            } else {
                None
            };
            let Some((t, at_start)) = point else { continue };
            let others: Vec<usize> = self
                .instance
                .label_conflicts(c.label)
                .iter()
                .filter(|lc| if at_start { lc.interval.end == t } else { lc.interval.start == t })
                .map(|lc| lc.other)
                .collect();
            let witnesses = (0..self.verts.len())
                .filter(|&u| {
                    let cu = self.graph.candidate(self.verts[u]);
                    others.contains(&cu.label) && cu.interval.contains_time(t)
                })
                .collect();
            return Some((v, witnesses));
        }
        None
    }

    fn node(&mut self, forced: &mut Vec<usize>, avail: Vec<u64>, forced_weight: f64) {
        if self.mwis.timed_out {
            return;
        }
        let (val, set) = self.mwis.solve(&avail);
        if self.mwis.timed_out {
            return;
        }
        let bound = forced_weight + val;
        if self.root_bound.is_infinite() {
            self.root_bound = bound;
        }
        if bound <= self.best {
            return;
        }
        let mut local = forced.clone();
        local.extend(set);
        let Some((v, witnesses)) = (if self.graph.mode() == AmMode::Am1 { None } else { self.unjustified(&local) }) else {
            let g = self.global(&local);
            self.offer(g);
            return;
        };
        let repaired = enforce_justification(self.instance, self.graph, &self.global(&local));
        self.offer(repaired);
        let v_forced = forced.contains(&v);
        if !v_forced {
            let mut without = avail.clone();
            clear(&mut without, v);
            self.node(forced, without, forced_weight);
        }
        let mut base = avail;
        if !v_forced {
            self.mwis.remove_closed(&mut base, v);
        }
        let base_weight = forced_weight + if v_forced { 0.0 } else { self.mwis.weight[v] };
        for w in witnesses {
            if !has(&base, w) {
                continue;
            }
            let mut child = base.clone();
            self.mwis.remove_closed(&mut child, w);
            let mark = forced.len();
            if !v_forced {
                forced.push(v);
            }
            forced.push(w);
            self.node(forced, child, base_weight + self.mwis.weight[w]);
            forced.truncate(mark);
            clear(&mut base, w);
        }
    }

    fn run(&mut self, seed: Vec<usize>) {
        self.offer(seed);
        let full = self.mwis.full();
        self.node(&mut Vec::new(), full.clone(), 0.0);
        if self.root_bound.is_infinite() {
            self.root_bound = self.mwis.cover_bound(&full, f64::INFINITY);
        }
    }
}

/// Vertex groups that can be searched independently: graph components, and
/// under a k bound, components merged while their time spans overlap.
fn groups(instance: &Instance, graph: &ConflictGraph, bounded: bool) -> Vec<Vec<usize>> {
    let comps = graph.components(instance);
    if !bounded {
        return comps;
    }
    let mut spans: Vec<(f64, f64, Vec<usize>)> = comps
        .into_iter()
        .map(|c| {
            let lo = c.iter().map(|&v| graph.candidate(v).interval.start).fold(f64::INFINITY, f64::min);
            let hi = c.iter().map(|&v| graph.candidate(v).interval.end).fold(f64::NEG_INFINITY, f64::max);
            (lo, hi, c)
        })
        .collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for (lo, hi, c) in spans {
        match out.last_mut() {
            Some((end, members)) if lo < *end => {
                *end = end.max(hi);
                members.extend(c);
            }
            _ => out.push((hi, c)),
        }
    }
    out.into_iter().map(|(_, c)| c).collect()
}

/// Starting solution: the better of repaired greedy and local search without
/// a k bound, otherwise the best of the k-bounded greedy and IntGraph.
fn incumbent(instance: &Instance, graph: &ConflictGraph, req: &SolveRequest) -> Vec<usize> {
    match req.problem.k() {
        None => {
            let greedy = saturate_and_repair(instance, graph, &greedy_selection(graph, None)).unwrap_or_default();
            let params = PlsParams {
                budget: req.time_limit.mul_f64(0.05).min(Duration::from_millis(50)),
                max_iterations: Some(2000),
                ..PlsParams::default()
            };
            let local = pls_search(graph, &params, req.seed);
            let local = saturate_and_repair(instance, graph, &local).unwrap_or_default();
            if graph.selection_weight(&local) > graph.selection_weight(&greedy) {
                local
            } else {
                greedy
            }
        }
        Some(k) => {
            let mut best = bounded_greedy(instance, graph, req, k);
            for relaxed in [false, true] {
                let r = solve_intgraph(instance, &req.clone().with_intgraph_relaxed(relaxed));
                if let Some(set) = as_candidates(graph, &r.phi) {
                    if graph.selection_weight(&set) > graph.selection_weight(&best) {
                        best = set;
                    }
                }
            }
            best
        }
    }
}

/// Candidate ids of an activity set, if every activity is a candidate.
fn as_candidates(graph: &ConflictGraph, phi: &ActivitySet) -> Option<Vec<usize>> {
    let index: std::collections::HashMap<(LabelId, u64, u64), usize> =
        graph.candidates().iter().map(|c| ((c.label_id, c.interval.start.to_bits(), c.interval.end.to_bits()), c.id)).collect();
    phi.iter().map(|(l, iv)| index.get(&(l, iv.start.to_bits(), iv.end.to_bits())).copied()).collect()
}

/// k-bounded greedy on full presence intervals, valid in every model.
fn bounded_greedy(instance: &Instance, graph: &ConflictGraph, req: &SolveRequest, k: usize) -> Vec<usize> {
    if graph.mode() == AmMode::Am1 {
        return greedy_selection(graph, Some(k));
    }
    let Ok(am1) = build_graph_with(instance, AmMode::Am1, &req.graph_options()) else { return Vec::new() };
    let full: std::collections::HashMap<(usize, usize), usize> = graph
        .candidates()
        .iter()
        .filter(|c| c.interval == instance.presences(c.label)[c.presence])
        .map(|c| ((c.label, c.presence), c.id))
        .collect();
    greedy_selection(&am1, Some(k))
        .into_iter()
        .filter_map(|v| {
            let c = am1.candidate(v);
            full.get(&(c.label, c.presence)).copied()
        })
        .collect()
}

/// Exact search with full statistics: the segment sweep per independent
/// part, branch and bound on parts too wide for it.
pub fn exact_search(instance: &Instance, req: &SolveRequest) -> ExactOutcome {
    let started = Instant::now();
    let graph = match graph_or_abort(instance, req.mode, req) {
        Ok(g) => g,
        Err(status) => {
            return ExactOutcome { result: SolveResult::empty(status, started), nodes: 0, groups: 0, swept: 0, vertices: 0, edges: 0 };
        }
    };
    let deadline = started + req.time_limit.saturating_sub(Duration::from_millis(20));
    let start_set = incumbent(instance, &graph, req);
    let mut in_start = vec![false; graph.len()];
    for &v in &start_set {
        in_start[v] = true;
    }
    let parts = groups(instance, &graph, req.problem != Problem::Gmt);
    let mut selection = Vec::new();
    let mut upper = 0.0;
    let mut nodes = 0;
    let mut timed_out = false;
    let mut swept = 0;
    // Sweep every part first so one hard part cannot starve the others.
    let limits = SweepLimits::default();
    let mut hard = Vec::new();
    for part in &parts {
        if timed_out {
            hard.push(part);
            continue;
        }
        let seed: Vec<usize> = part.iter().copied().filter(|&v| in_start[v]).collect();
        let floor = graph.selection_weight(&seed);
        match sweep(instance, &graph, part, req.problem.k(), req.min_duration, floor, deadline, &limits) {
            SweepOutcome::NoBetter => {
                swept += 1;
                upper += floor;
                selection.extend(seed);
            }
            SweepOutcome::Solved(set) => {
                swept += 1;
                upper += graph.selection_weight(&set);
                selection.extend(set);
            }
            SweepOutcome::TimedOut => {
                timed_out = true;
                hard.push(part);
            }
            SweepOutcome::TooLarge => hard.push(part),
        }
    }
    for part in hard {
        let seed: Vec<usize> = part.iter().copied().filter(|&v| in_start[v]).collect();
        if req.problem == Problem::Gmt {
            let mut search = Unbounded::new(instance, &graph, part.clone(), deadline);
            if !timed_out {
                search.run(seed);
            } else {
                search.offer(seed);
                search.root_bound = search.mwis.cover_bound(&search.mwis.full(), f64::INFINITY);
            }
            let out = search.mwis.timed_out || timed_out;
            timed_out |= out;
            nodes += search.mwis.nodes;
            upper += if out { search.root_bound.max(search.best) } else { search.best };
            selection.extend(search.best_set);
            continue;
        }
        let coverage = req.problem.k().map(|k| Coverage::new(&graph, k));
        let mut group = Group::new(instance, &graph, part.clone(), coverage, deadline);
        group.offer(&seed);
        let root = {
            let cover = group.cover_bound(0, f64::INFINITY);
            if group.coverage.is_some() {
                cover.min(group.k_bound(0))
            } else {
                cover
            }
        };
        if !timed_out && root > group.best {
            group.search(0);
        }
        let out = group.timed_out || timed_out && root > group.best;
        timed_out |= group.timed_out;
        nodes += group.nodes;
        upper += if out { root.max(group.best) } else { group.best };
        selection.extend(group.best_set);
    }
    selection.sort_unstable();
    let status = if timed_out { Status::Timeout } else { Status::Optimal };
    let phi = graph.activity(&selection);
    let mut result = SolveResult::finish(instance, phi, status, None, started);
    result.upper_bound = Some(if timed_out { upper.max(result.objective) } else { result.objective });
    ExactOutcome { result, nodes, groups: parts.len(), swept, vertices: graph.len(), edges: graph.edge_count() }
}

/// Maximum-weight valid activity set, or the best one found before the
/// time limit together with an upper bound.
pub fn solve_exact(instance: &Instance, req: &SolveRequest) -> SolveResult {
    exact_search(instance, req).result
}
