use std::cmp::Ordering;
use std::rc::Rc;
use std::time::Instant;

use super::{SolveRequest, SolveResult, Status};
use crate::instance::{Instance, TimeInterval};
use crate::validation::AmMode;

struct Node {
    id: usize,
    next: Option<Rc<Node>>,
}

fn ids(mut list: &Option<Rc<Node>>) -> Vec<usize> {
    let mut out = Vec::new();
    while let Some(node) = list {
        out.push(node.id);
        list = &node.next;
    }
    out.sort_unstable();
    out
}

/// Maximum-weight subset of pairwise disjoint closed intervals. Intervals
/// that share only an endpoint intersect. Among optimal subsets the one
/// with the lexicographically smallest sorted index list is returned.
pub fn mwis_intervals(items: &[(TimeInterval, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&items[a].0, &items[b].0);
        x.end.total_cmp(&y.end).then(x.start.total_cmp(&y.start)).then(a.cmp(&b))
    });
    let ends: Vec<f64> = order.iter().map(|&i| items[i].0.end).collect();
    // best[j]: optimum over the first j intervals in end order.
    let mut best: Vec<(f64, Option<Rc<Node>>)> = vec![(0.0, None)];
    for (j, &i) in order.iter().enumerate() {
        let (iv, w) = items[i];
        let p = ends[..j].partition_point(|&e| e < iv.start);
        let with = best[p].0 + w;
        let skip = &best[j];
        let take = match with.total_cmp(&skip.0) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => {
                let mut cand = ids(&best[p].1);
                cand.push(i);
                cand.sort_unstable();
                cand < ids(&skip.1)
            }
        };
        let next = if take {
            (with, Some(Rc::new(Node { id: i, next: best[p].1.clone() })))
        } else {
            skip.clone()
        };
        best.push(next);
    }
    ids(&best.last().unwrap().1)
}

fn conflict_free(instance: &Instance, acts: &[Vec<TimeInterval>], label: usize, iv: &TimeInterval) -> bool {
    instance.label_conflicts(label).iter().all(|c| {
        acts[c.other]
            .iter()
            .filter_map(|a| iv.open_overlap(a))
            .all(|ov| !c.interval.meets_open(ov.start, ov.end))
    })
}

fn witnessed(acts: &[TimeInterval], t: f64) -> bool {
    acts.iter().any(|a| a.contains_time(t))
}

/// Longest sub-interval of `iv` with justified endpoints that avoids every
/// conflict with `acts`. Ties go to the earliest. The start stays fixed
/// unless `free_start`.
fn shorten(
    instance: &Instance,
    acts: &[Vec<TimeInterval>],
    label: usize,
    iv: &TimeInterval,
    free_start: bool,
    min_len: f64,
) -> Option<TimeInterval> {
    let mut starts = vec![iv.start];
    let mut ends = vec![iv.end];
    for c in instance.label_conflicts(label) {
        let (s, e) = (c.interval.start, c.interval.end);
        if free_start && e > iv.start && e < iv.end && witnessed(&acts[c.other], e) {
            starts.push(e);
        }
        if s > iv.start && s < iv.end && witnessed(&acts[c.other], s) {
            ends.push(s);
        }
    }
    starts.sort_by(f64::total_cmp);
    starts.dedup();
    ends.sort_by(|a, b| b.total_cmp(a));
    ends.dedup();
    let mut best: Option<TimeInterval> = None;
    for &s in &starts {
        for &t in &ends {
            let cand = TimeInterval::new(s, t);
            if cand.is_empty() || cand.len() < min_len || best.is_some_and(|b| b.len() >= cand.len()) {
                continue;
            }
            if conflict_free(instance, acts, label, &cand) {
                best = Some(cand);
                // ends run longest first
                break;
            }
        }
    }
    best
}

/// Repeatedly takes a maximum-weight set of time-disjoint presence
/// intervals and trims or drops the remaining ones so they stay compatible
/// with everything taken so far. Under a k bound it stops after `k` rounds.
pub fn solve_intgraph(instance: &Instance, req: &SolveRequest) -> SolveResult {
    let started = Instant::now();
    let mut entries: Vec<(usize, TimeInterval)> = Vec::new();
    for label in 0..instance.labels().len() {
        for p in instance.presences(label) {
            if p.len() >= req.min_duration && !p.is_empty() {
                entries.push((label, *p));
            }
        }
    }
    let mut alive: Vec<Option<TimeInterval>> = entries.iter().map(|e| Some(e.1)).collect();
    let mut acts: Vec<Vec<TimeInterval>> = vec![Vec::new(); instance.labels().len()];
    let mut rounds = 0usize;
    loop {
        if req.problem.k().is_some_and(|k| rounds >= k) {
            break;
        }
        let open: Vec<usize> = (0..entries.len()).filter(|&i| alive[i].is_some()).collect();
        if open.is_empty() {
            break;
        }
        let items: Vec<(TimeInterval, f64)> = open
            .iter()
            .map(|&i| {
                let iv = alive[i].unwrap();
                (iv, iv.len() * instance.weight(entries[i].0))
            })
            .collect();
        let chosen: Vec<usize> = mwis_intervals(&items).into_iter().map(|j| open[j]).collect();
        for &i in &chosen {
            acts[entries[i].0].push(alive[i].take().unwrap());
        }
        rounds += 1;
        for i in 0..entries.len() {
            let Some(iv) = alive[i] else { continue };
            let label = entries[i].0;
            alive[i] = match req.mode {
                AmMode::Am1 => {
                    let neighbor = chosen.iter().any(|&c| entries[c].1.intersects(&iv));
                    let keep = if req.intgraph_relaxed { conflict_free(instance, &acts, label, &iv) } else { !neighbor };
                    keep.then_some(iv)
                }
                AmMode::Am2 => shorten(instance, &acts, label, &iv, false, req.min_duration),
                AmMode::Am3 => shorten(instance, &acts, label, &iv, true, req.min_duration),
            };
        }
    }
    let phi = instance.activity_from_index(&acts);
    SolveResult::finish(instance, phi, Status::Feasible, None, started)
}
