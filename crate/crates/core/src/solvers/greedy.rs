use std::time::Instant;

use super::coverage::Coverage;
use super::{graph_or_abort, Problem, SolveRequest, SolveResult, Status};
use crate::graph::ConflictGraph;
use crate::instance::Instance;
use crate::validation::{saturate_and_repair, AmMode};

/// Takes candidates by decreasing weight (ties: smaller id), skipping any
/// candidate adjacent to a taken one or, with `k`, any candidate that would
/// make more than `k` taken candidates overlap.
pub fn greedy_selection(graph: &ConflictGraph, k: Option<usize>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..graph.len()).collect();
    order.sort_by(|&a, &b| graph.weight(b).total_cmp(&graph.weight(a)).then(a.cmp(&b)));
    let mut blocked = vec![false; graph.len()];
    let mut coverage = k.map(|k| Coverage::new(graph, k));
    let mut taken = Vec::new();
    for v in order {
        if blocked[v] || coverage.as_ref().is_some_and(|c| !c.fits(v)) {
            continue;
        }
        taken.push(v);
        for &u in graph.neighbors(v) {
            blocked[u] = true;
        }
        if let Some(c) = coverage.as_mut() {
            c.add(v);
        }
    }
    taken.sort_unstable();
    taken
}

pub fn solve_greedy(instance: &Instance, req: &SolveRequest) -> SolveResult {
    let started = Instant::now();
    // Under a k bound only the AM1 graph keeps witnesses intact; its
    // solutions satisfy AM2 and AM3 as well.
    let mode = match req.problem {
        Problem::Gmt => req.mode,
        Problem::Krmt(_) => AmMode::Am1,
    };
    let graph = match graph_or_abort(instance, mode, req) {
        Ok(g) => g,
        Err(status) => return SolveResult::empty(status, started),
    };
    let mut selection = greedy_selection(&graph, req.problem.k());
    if req.problem == Problem::Gmt && mode != AmMode::Am1 {
        selection = saturate_and_repair(instance, &graph, &selection).expect("greedy selection is independent");
    }
    SolveResult::finish(instance, graph.activity(&selection), Status::Feasible, None, started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::i1;
    use crate::instance::{ActivitySet, LabelId, TimeInterval};
    use crate::solvers::Algorithm;

    #[test]
    fn gmt_am1_trace() {
        let r = solve_greedy(&i1(), &SolveRequest::new(Problem::Gmt, AmMode::Am1, Algorithm::Greedy));
        assert_eq!(r.objective, 16.0);
        assert_eq!(r.phi, ActivitySet::from_pairs([(1, 0.0, 10.0), (3, 2.0, 8.0)]));
    }

    #[test]
    fn gmt_am2_trace() {
        let r = solve_greedy(&i1(), &SolveRequest::new(Problem::Gmt, AmMode::Am2, Algorithm::Greedy));
        assert_eq!(r.objective, 20.0);
        assert!(r.phi.contains(LabelId(2), &TimeInterval::new(0.0, 4.0)));
    }

    #[test]
    fn krmt_k1_trace() {
        for mode in AmMode::ALL {
            let r = solve_greedy(&i1(), &SolveRequest::new(Problem::Krmt(1), mode, Algorithm::Greedy));
            assert_eq!(r.objective, 10.0);
            assert_eq!(r.phi, ActivitySet::from_pairs([(1, 0.0, 10.0)]));
        }
    }
}
