use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{graph_or_abort, PhaseSchedule, PlsParams, Problem, SolveRequest, SolveResult, Status};
use crate::graph::ConflictGraph;
use crate::instance::Instance;
use crate::validation::saturate_and_repair;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    Random,
    Penalty,
    Greedy,
}

/// Vertex subset with O(1) insert, remove and membership.
struct Bag {
    items: Vec<usize>,
    pos: Vec<usize>,
}

impl Bag {
    fn new(n: usize) -> Self {
        Self { items: Vec::new(), pos: vec![usize::MAX; n] }
    }

    fn insert(&mut self, v: usize) {
        if self.pos[v] == usize::MAX {
            self.pos[v] = self.items.len();
            self.items.push(v);
        }
    }

    fn remove(&mut self, v: usize) {
        let p = self.pos[v];
        if p == usize::MAX {
            return;
        }
        let last = *self.items.last().unwrap();
        self.items.swap_remove(p);
        if last != v {
            self.pos[last] = p;
        }
        self.pos[v] = usize::MAX;
    }
}

struct Search<'g> {
    graph: &'g ConflictGraph,
    in_set: Vec<bool>,
    /// Number of neighbors inside the current set.
    hits: Vec<u32>,
    c0: Bag,
    c1: Bag,
    weight: f64,
    penalty: Vec<u32>,
    forced: Vec<u64>,
    iteration: u64,
}

impl<'g> Search<'g> {
    fn new(graph: &'g ConflictGraph) -> Self {
        let n = graph.len();
        let mut c0 = Bag::new(n);
        (0..n).for_each(|v| c0.insert(v));
        Self {
            graph,
            in_set: vec![false; n],
            hits: vec![0; n],
            c0,
            c1: Bag::new(n),
            weight: 0.0,
            penalty: vec![0; n],
            forced: vec![u64::MAX; n],
            iteration: 0,
        }
    }

    fn classify(&mut self, v: usize) {
        self.c0.remove(v);
        self.c1.remove(v);
        if !self.in_set[v] {
            match self.hits[v] {
                0 => self.c0.insert(v),
                1 => self.c1.insert(v),
                _ => {}
            }
        }
    }

    fn add(&mut self, v: usize) {
        self.in_set[v] = true;
        self.weight += self.graph.weight(v);
        self.classify(v);
        for &u in self.graph.neighbors(v) {
            self.hits[u] += 1;
            self.classify(u);
        }
    }

    fn remove(&mut self, v: usize) {
        self.in_set[v] = false;
        self.weight -= self.graph.weight(v);
        self.classify(v);
        for &u in self.graph.neighbors(v) {
            self.hits[u] -= 1;
            self.classify(u);
        }
    }

    fn set_neighbor(&self, v: usize) -> usize {
        *self.graph.neighbors(v).iter().find(|&&u| self.in_set[u]).expect("vertex has a neighbor in the set")
    }

    fn pick(&self, pool: &[usize], rule: Rule, rng: &mut ChaCha8Rng) -> Option<usize> {
        if pool.is_empty() {
            return None;
        }
        if rule == Rule::Random {
            return pool.choose(rng).copied();
        }
        let key = |v: usize| match rule {
            Rule::Penalty => self.penalty[v] as usize,
            _ => self.graph.degree(v),
        };
        let mut best_key = usize::MAX;
        let mut best_w = f64::NEG_INFINITY;
        let mut ties: Vec<usize> = Vec::new();
        for &v in pool {
            let (k, w) = (key(v), self.graph.weight(v));
            if k < best_key || (k == best_key && w > best_w) {
                best_key = k;
                best_w = w;
                ties.clear();
            }
            if k == best_key && w == best_w {
                ties.push(v);
            }
        }
        ties.choose(rng).copied()
    }

    /// Improvements until maximal, then weight-neutral or better plateau
    /// swaps; a vertex forced in is not reselected in the same iteration.
    fn iterate(&mut self, rule: Rule, rng: &mut ChaCha8Rng) {
        let it = self.iteration;
        loop {
            let pool = self.c0.items.clone();
            if let Some(v) = self.pick(&pool, rule, rng) {
                self.add(v);
                continue;
            }
            let swaps: Vec<usize> = self
                .c1
                .items
                .iter()
                .copied()
                .filter(|&v| {
                    if self.forced[v] == it {
                        return false;
                    }
                    let u = self.set_neighbor(v);
                    self.forced[u] != it && self.graph.weight(v) >= self.graph.weight(u)
                })
                .collect();
            let Some(v) = self.pick(&swaps, rule, rng) else { break };
            let u = self.set_neighbor(v);
            self.remove(u);
            self.add(v);
            self.forced[v] = it;
        }
    }

    fn perturb(&mut self, rng: &mut ChaCha8Rng) {
        let n = self.graph.len();
        let v = rng.gen_range(0..n);
        if self.in_set[v] {
            return;
        }
        let blockers: Vec<usize> = self.graph.neighbors(v).iter().copied().filter(|&u| self.in_set[u]).collect();
        for u in blockers {
            self.remove(u);
        }
        self.add(v);
    }

    fn selection(&self) -> Vec<usize> {
        (0..self.graph.len()).filter(|&v| self.in_set[v]).collect()
    }
}

fn phases(params: &PlsParams) -> Vec<(Rule, u32)> {
    match params.schedule {
        PhaseSchedule::Paper => vec![
            (Rule::Greedy, params.greedy_iterations),
            (Rule::Penalty, params.penalty_iterations),
            (Rule::Greedy, params.greedy_iterations),
        ],
        PhaseSchedule::Pullan => vec![
            (Rule::Random, params.random_iterations),
            (Rule::Penalty, params.penalty_iterations),
            (Rule::Greedy, params.greedy_iterations),
        ],
    }
}

/// Phased local search for a heavy independent set of `graph`. Stops at the
/// wall-clock budget, the iteration cap, or when the best set reaches the
/// sum of cluster maxima.
pub fn pls_search(graph: &ConflictGraph, params: &PlsParams, seed: u64) -> Vec<usize> {
    let started = Instant::now();
    if graph.is_empty() {
        return Vec::new();
    }
    let bound: f64 = graph
        .clusters()
        .iter()
        .map(|c| c.members.iter().map(|&v| graph.weight(v)).fold(0.0, f64::max))
        .sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut search = Search::new(graph);
    let mut best = Vec::new();
    let mut best_weight = f64::NEG_INFINITY;
    let mut delay = params.penalty_delay.max(1) as u64;
    let mut since_decrease = 0u64;
    let schedule: Vec<(Rule, u32)> = phases(params).into_iter().filter(|&(_, n)| n > 0).collect();
    if schedule.is_empty() {
        return best;
    }
    'outer: loop {
        for &(rule, count) in &schedule {
            for _ in 0..count {
                search.iterate(rule, &mut rng);
                search.iteration += 1;
                if search.weight > best_weight {
                    best_weight = search.weight;
                    best = search.selection();
                }
                let done = best_weight >= bound
                    || params.max_iterations.is_some_and(|m| search.iteration >= m)
                    || started.elapsed() >= params.budget;
                if done {
                    break 'outer;
                }
                for v in 0..graph.len() {
                    if search.in_set[v] {
                        search.penalty[v] += 1;
                    }
                }
                since_decrease += 1;
                if since_decrease >= delay {
                    since_decrease = 0;
                    let mut penalized = 0usize;
                    for p in search.penalty.iter_mut() {
                        *p = p.saturating_sub(1);
                        penalized += (*p > 0) as usize;
                    }
                    if penalized * 4 > graph.len() * 3 {
                        delay += 1;
                    } else {
                        delay = delay.saturating_sub(1).max(1);
                    }
                }
                search.perturb(&mut rng);
            }
        }
    }
    best
}

pub fn solve_pls(instance: &Instance, req: &SolveRequest) -> SolveResult {
    let started = Instant::now();
    if req.problem != Problem::Gmt {
        return SolveResult::empty(Status::Unsupported, started);
    }
    let graph = match graph_or_abort(instance, req.mode, req) {
        Ok(g) => g,
        Err(status) => return SolveResult::empty(status, started),
    };
    let found = pls_search(&graph, &req.pls, req.seed);
    let selection = saturate_and_repair(instance, &graph, &found).expect("local search keeps the set independent");
    SolveResult::finish(instance, graph.activity(&selection), Status::Feasible, None, started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::instance::fixtures::i1;
    use crate::instance::{Conflict, Label, LabelId, TimeInterval};
    use crate::solvers::Algorithm;
    use crate::validation::AmMode;

    #[test]
    fn i1_reaches_optimum() {
        for seed in 0..5 {
            let am1 = SolveRequest::new(Problem::Gmt, AmMode::Am1, Algorithm::Pls).with_seed(seed);
            assert_eq!(solve_pls(&i1(), &am1).objective, 16.0);
            let am2 = SolveRequest::new(Problem::Gmt, AmMode::Am2, Algorithm::Pls).with_seed(seed);
            assert_eq!(solve_pls(&i1(), &am2).objective, 20.0);
        }
    }

    #[test]
    fn isolated_vertices_take_everything() {
        let labels = vec![Label::new(1, 1.0, "a"), Label::new(2, 2.0, "b")];
        let presences = vec![(LabelId(1), TimeInterval::new(0.0, 3.0)), (LabelId(2), TimeInterval::new(0.0, 4.0))];
        let inst = Instance::new(10.0, labels, presences, Vec::<Conflict>::new()).unwrap();
        let g = build_graph(&inst, AmMode::Am1).unwrap();
        let params = PlsParams { max_iterations: Some(1), ..PlsParams::default() };
        assert_eq!(g.selection_weight(&pls_search(&g, &params, 7)), 11.0);
    }

    #[test]
    fn krmt_is_unsupported() {
        let req = SolveRequest::new(Problem::Krmt(1), AmMode::Am1, Algorithm::Pls);
        assert_eq!(solve_pls(&i1(), &req).status, Status::Unsupported);
    }

    #[test]
    fn same_seed_same_result() {
        let g = build_graph(&i1(), AmMode::Am3).unwrap();
        let params = PlsParams { max_iterations: Some(500), budget: std::time::Duration::from_secs(60), ..PlsParams::default() };
        assert_eq!(pls_search(&g, &params, 3), pls_search(&g, &params, 3));
    }
}
