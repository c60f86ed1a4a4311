//! Validity of activity sets (R1-R3), justification of activity endpoints,
//! activity models AM1/AM2/AM3, the k-activity bound, minimum activity
//! duration, and the saturation repair on conflict graphs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ConflictGraph;
use crate::instance::{ActivitySet, Instance, LabelId, TimeInterval};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AmMode {
    #[serde(rename = "AM1")]
    Am1,
    #[serde(rename = "AM2")]
    Am2,
    #[serde(rename = "AM3")]
    Am3,
}

impl AmMode {
    pub const ALL: [AmMode; 3] = [AmMode::Am1, AmMode::Am2, AmMode::Am3];

    pub fn number(self) -> u8 {
        match self {
            AmMode::Am1 => 1,
            AmMode::Am2 => 2,
            AmMode::Am3 => 3,
        }
    }
}

impl fmt::Display for AmMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AM{}", self.number())
    }
}

impl FromStr for AmMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().trim_start_matches("AM") {
            "1" => Ok(AmMode::Am1),
            "2" => Ok(AmMode::Am2),
            "3" => Ok(AmMode::Am3),
            _ => Err(Error::Request(format!("unknown activity model '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    #[serde(rename = "AM-start")]
    AmStart,
    #[serde(rename = "AM-end")]
    AmEnd,
    #[serde(rename = "K-BOUND")]
    KBound,
    #[serde(rename = "MIN-DUR")]
    MinDur,
}

/// One broken rule. `start == end` marks a single witnessing time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub labels: Vec<LabelId>,
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn push(&mut self, rule: Rule, labels: Vec<LabelId>, iv: TimeInterval) {
        self.violations.push(Violation { rule, labels, start: iv.start, end: iv.end });
        self.valid = false;
    }

    pub fn count(&self, rule: Rule) -> usize {
        self.violations.iter().filter(|v| v.rule == rule).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn active_at(acts: &[TimeInterval], t: f64) -> bool {
    acts.iter().any(|a| a.contains_time(t))
}

/// Justification of both endpoints of `iv` (an activity of `label` inside
/// `presence`), given activities by label index. A witness whose activity
/// merely touches the endpoint counts as active there.
pub(crate) fn justified_endpoints(
    instance: &Instance,
    acts: &[Vec<TimeInterval>],
    label: usize,
    presence: &TimeInterval,
    iv: &TimeInterval,
) -> (bool, bool) {
    let mut start_ok = iv.start == presence.start;
    let mut end_ok = iv.end == presence.end;
    for c in instance.label_conflicts(label) {
        if start_ok && end_ok {
            break;
        }
        if !start_ok && c.interval.end == iv.start && active_at(&acts[c.other], iv.start) {
            start_ok = true;
        }
        if !end_ok && c.interval.start == iv.end && active_at(&acts[c.other], iv.end) {
            end_ok = true;
        }
    }
    (start_ok, end_ok)
}

/// Checks R1 (containment in a presence), R2 (at most one activity per
/// presence) and R3 (no conflict inside the open overlap of two activities).
pub fn check_valid(instance: &Instance, phi: &ActivitySet) -> Result<ValidationReport> {
    let acts = instance.activity_by_index(phi)?;
    let mut report = ValidationReport { valid: true, violations: Vec::new() };
    for (label, list) in acts.iter().enumerate() {
        let id = instance.labels()[label].id;
        let presences = instance.presences(label);
        let mut used = vec![false; presences.len()];
        for iv in list {
            match presences.iter().position(|p| p.contains(iv)) {
                None => report.push(Rule::R1, vec![id], *iv),
                Some(pi) if used[pi] => report.push(Rule::R2, vec![id], presences[pi]),
                Some(pi) => used[pi] = true,
            }
        }
    }
    for c in instance.conflicts() {
        let a = instance.label_index(c.a).expect("canonical conflict");
        let b = instance.label_index(c.b).expect("canonical conflict");
        for x in &acts[a] {
            for y in &acts[b] {
                if let Some(ov) = x.open_overlap(y) {
                    if c.interval.meets_open(ov.start, ov.end) {
                        let lo = ov.start.max(c.interval.start);
                        let hi = ov.end.min(c.interval.end);
                        report.push(Rule::R3, vec![c.a, c.b], TimeInterval::new(lo, hi));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Whether the start and end of an activity interval are justified.
pub fn is_justified(instance: &Instance, phi: &ActivitySet, label: LabelId, iv: &TimeInterval) -> Result<(bool, bool)> {
    let li = instance.label_index(label).ok_or(Error::UnknownLabel(label))?;
    if !phi.contains(label, iv) {
        return Err(Error::NotAnActivity { label, start: iv.start, end: iv.end });
    }
    let acts = instance.activity_by_index(phi)?;
    Ok(match instance.presence_containing(li, iv) {
        Some(pi) => justified_endpoints(instance, &acts, li, &instance.presences(li)[pi], iv),
        None => (false, false),
    })
}

/// Times where more than `k` activities are simultaneously open, one entry
/// per maximal overloaded run: (witness time, active labels).
pub(crate) fn k_overloads(acts: &[Vec<TimeInterval>], k: usize) -> Vec<(f64, Vec<usize>)> {
    let mut points: Vec<f64> = acts.iter().flatten().flat_map(|iv| [iv.start, iv.end]).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    if points.len() < 2 {
        return Vec::new();
    }
    let mut diff = vec![0i64; points.len()];
    for iv in acts.iter().flatten().filter(|iv| iv.start < iv.end) {
        let lo = points.partition_point(|&p| p < iv.start);
        let hi = points.partition_point(|&p| p < iv.end);
        diff[lo] += 1;
        diff[hi] -= 1;
    }
    let mut out = Vec::new();
    let mut running = 0i64;
    let mut in_run = false;
    for e in 0..points.len() - 1 {
        running += diff[e];
        if running > k as i64 {
            if !in_run {
                let t = 0.5 * (points[e] + points[e + 1]);
                let active = (0..acts.len())
                    .filter(|&l| acts[l].iter().any(|iv| iv.start < t && t < iv.end))
                    .collect();
                out.push((t, active));
            }
            in_run = true;
        } else {
            in_run = false;
        }
    }
    out
}

/// [`check_valid`] plus activity-model conformance, an optional bound `k`
/// on simultaneously active labels and an optional minimum duration.
pub fn check_model(
    instance: &Instance,
    phi: &ActivitySet,
    mode: AmMode,
    k: Option<usize>,
    min_duration: Option<f64>,
) -> Result<ValidationReport> {
    let mut report = check_valid(instance, phi)?;
    let acts = instance.activity_by_index(phi)?;
    for (label, list) in acts.iter().enumerate() {
        let id = instance.labels()[label].id;
        for iv in list {
            if let Some(md) = min_duration {
                if iv.len() < md {
                    report.push(Rule::MinDur, vec![id], *iv);
                }
            }
            let Some(pi) = instance.presence_containing(label, iv) else { continue };
            let p = instance.presences(label)[pi];
            let (start_ok, end_ok) = justified_endpoints(instance, &acts, label, &p, iv);
            let (start_ok, end_ok) = match mode {
                AmMode::Am1 => (iv.start == p.start, iv.end == p.end),
                AmMode::Am2 => (iv.start == p.start, end_ok),
                AmMode::Am3 => (start_ok, end_ok),
            };
            if !start_ok {
                report.push(Rule::AmStart, vec![id], *iv);
            }
            if !end_ok {
                report.push(Rule::AmEnd, vec![id], *iv);
            }
        }
    }
    if let Some(k) = k {
        for (t, active) in k_overloads(&acts, k) {
            let ids = active.into_iter().map(|l| instance.labels()[l].id).collect();
            report.push(Rule::KBound, ids, TimeInterval::new(t, t));
        }
    }
    Ok(report)
}

/// Repeatedly applies the best same-cluster swap `v -> v'` that keeps the
/// selection independent and strictly increases its weight. Ties on gain go
/// to the smaller id of `v'`.
pub fn saturate(graph: &ConflictGraph, selection: &[usize]) -> Result<Vec<usize>> {
    if let Some((u, v)) = graph.find_adjacent_pair(selection) {
        return Err(Error::NotIndependent(u, v));
    }
    let mut selected: Vec<usize> = selection.to_vec();
    let mut count = vec![0usize; graph.len()];
    for &v in &selected {
        for &u in graph.neighbors(v) {
            count[u] += 1;
        }
    }
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for (slot, &v) in selected.iter().enumerate() {
            let wv = graph.weight(v);
            for &alt in &graph.clusters()[graph.cluster_of(v)].members {
                // alt shares a cluster with v, so v itself accounts for one count.
                if alt == v || count[alt] != 1 || graph.weight(alt) <= wv {
                    continue;
                }
                let gain = graph.weight(alt) - wv;
                let better = match best {
                    None => true,
                    Some((g, _, b)) => gain > g || (gain == g && alt < b),
                };
                if better {
                    best = Some((gain, slot, alt));
                }
            }
        }
        let Some((_, slot, alt)) = best else { break };
        let old = selected[slot];
        for &u in graph.neighbors(old) {
            count[u] -= 1;
        }
        for &u in graph.neighbors(alt) {
            count[u] += 1;
        }
        selected[slot] = alt;
    }
    selected.sort_unstable();
    Ok(selected)
}

fn selection_acts(instance: &Instance, graph: &ConflictGraph, selection: &[usize]) -> Vec<Vec<TimeInterval>> {
    let mut acts = vec![Vec::new(); instance.labels().len()];
    for &v in selection {
        let c = graph.candidate(v);
        acts[c.label].push(c.interval);
    }
    acts
}

fn candidate_justified(instance: &Instance, graph: &ConflictGraph, acts: &[Vec<TimeInterval>], v: usize) -> bool {
    let c = graph.candidate(v);
    let p = instance.presences(c.label)[c.presence];
    let (s, e) = justified_endpoints(instance, acts, c.label, &p, &c.interval);
    match graph.mode() {
        AmMode::Am1 => true,
        AmMode::Am2 => e,
        AmMode::Am3 => s && e,
    }
}

/// Whether every selected candidate has justified endpoints under the
/// graph's activity model.
pub fn selection_justified(instance: &Instance, graph: &ConflictGraph, selection: &[usize]) -> bool {
    if graph.mode() == AmMode::Am1 {
        return true;
    }
    let acts = selection_acts(instance, graph, selection);
    selection.iter().all(|&v| candidate_justified(instance, graph, &acts, v))
}

/// Replaces unjustified candidates by the heaviest lighter candidate of the
/// same cluster that is independent and justified, or drops them. Every step
/// strictly lowers the weight, so the loop ends in a justified selection.
pub fn enforce_justification(instance: &Instance, graph: &ConflictGraph, selection: &[usize]) -> Vec<usize> {
    let mut selected: Vec<usize> = selection.to_vec();
    selected.sort_unstable();
    if graph.mode() == AmMode::Am1 {
        return selected;
    }
    let mut count = vec![0usize; graph.len()];
    for &v in &selected {
        for &u in graph.neighbors(v) {
            count[u] += 1;
        }
    }
    loop {
        let acts = selection_acts(instance, graph, &selected);
        let Some(slot) = selected.iter().position(|&v| !candidate_justified(instance, graph, &acts, v)) else {
            return selected;
        };
        let v = selected[slot];
        let wv = graph.weight(v);
        let mut acts_without = acts;
        let lv = graph.candidate(v).label;
        acts_without[lv].retain(|iv| *iv != graph.candidate(v).interval);
        let mut replacement: Option<usize> = None;
        for &alt in &graph.clusters()[graph.cluster_of(v)].members {
            if alt == v || graph.weight(alt) >= wv || count[alt] != 1 {
                continue;
            }
            if replacement.is_some_and(|r| graph.weight(r) >= graph.weight(alt)) {
                continue;
            }
            acts_without[lv].push(graph.candidate(alt).interval);
            let ok = candidate_justified(instance, graph, &acts_without, alt);
            acts_without[lv].pop();
            if ok {
                replacement = Some(alt);
            }
        }
        for &u in graph.neighbors(v) {
            count[u] -= 1;
        }
        match replacement {
            Some(alt) => {
                for &u in graph.neighbors(alt) {
                    count[u] += 1;
                }
                selected[slot] = alt;
            }
            None => {
                selected.remove(slot);
            }
        }
        selected.sort_unstable();
    }
}

/// Saturation followed by justification repair, alternated while the weight
/// keeps improving. The result is a valid activity set for the graph's
/// activity model (without a k bound).
pub fn saturate_and_repair(instance: &Instance, graph: &ConflictGraph, selection: &[usize]) -> Result<Vec<usize>> {
    let mut best = enforce_justification(instance, graph, &saturate(graph, selection)?);
    for _ in 0..16 {
        let next = enforce_justification(instance, graph, &saturate(graph, &best)?);
        if graph.selection_weight(&next) > graph.selection_weight(&best) {
            best = next;
        } else {
            break;
        }
    }
    Ok(best)
}
