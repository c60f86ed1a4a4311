//! The abstract temporal labeling instance: labels, presence intervals and
//! conflict intervals over a time span `[0, T]`, plus activity sets and the
//! weighted-duration objective.
//!
//! Interval comparisons here are exact. Open/closed distinctions are not
//! stored; every interval is kept as a closed `[start, end]` and the open
//! interpretation is applied where activities are compared (see
//! [`TimeInterval::open_overlap`]).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelId(pub u32);

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A closed time interval in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeInterval {
    pub start: f64,
    pub end: f64,
}

impl TimeInterval {
    pub const fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, other: &TimeInterval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn contains_time(&self, t: f64) -> bool {
        self.start <= t && t <= self.end
    }

    /// Closed intersection test; touching endpoints intersect.
    pub fn intersects(&self, other: &TimeInterval) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    /// Intersection of the open interiors, if non-empty.
    pub fn open_overlap(&self, other: &TimeInterval) -> Option<TimeInterval> {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        (lo < hi).then_some(TimeInterval::new(lo, hi))
    }

    /// Whether the open set `(lo, hi)` meets the closed interval `self`.
    pub fn meets_open(&self, lo: f64, hi: f64) -> bool {
        lo < hi && self.start < hi && self.end > lo
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub id: LabelId,
    pub weight: f64,
    #[serde(default, rename = "name")]
    pub display_name: String,
}

impl Label {
    pub fn new(id: u32, weight: f64, name: impl Into<String>) -> Self {
        Self { id: LabelId(id), weight, display_name: name.into() }
    }
}

/// Undirected conflict; `a < b` in canonical form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conflict {
    pub a: LabelId,
    pub b: LabelId,
    pub interval: TimeInterval,
}

impl Conflict {
    pub fn new(a: u32, b: u32, start: f64, end: f64) -> Self {
        Self { a: LabelId(a), b: LabelId(b), interval: TimeInterval::new(start, end) }
    }
}

/// A conflict seen from one of its labels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabelConflict {
    pub other: usize,
    pub interval: TimeInterval,
}

#[derive(Clone, Debug)]
pub struct Instance {
    horizon: f64,
    labels: Vec<Label>,
    index: HashMap<LabelId, usize>,
    presences: Vec<Vec<TimeInterval>>,
    conflicts: Vec<Conflict>,
    by_label: Vec<Vec<LabelConflict>>,
    by_pair: HashMap<(usize, usize), Vec<TimeInterval>>,
}

impl Instance {
    /// Builds an instance and checks every integrity rule. Presences may be
    /// given in any order; conflicts are canonicalized and exact duplicates
    /// dropped.
    pub fn new(
        horizon: f64,
        mut labels: Vec<Label>,
        presences: Vec<(LabelId, TimeInterval)>,
        conflicts: Vec<Conflict>,
    ) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Integrity(format!("horizon must be positive, got {horizon}")));
        }
        labels.sort_by_key(|l| l.id);
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if !(l.weight.is_finite() && l.weight > 0.0) {
                return Err(Error::Integrity(format!("label {} has non-positive weight {}", l.id, l.weight)));
            }
            if index.insert(l.id, i).is_some() {
                return Err(Error::Integrity(format!("duplicate label id {}", l.id)));
            }
        }
        let check_span = |what: &str, iv: &TimeInterval| -> Result<()> {
            let ok = iv.start.is_finite()
                && iv.end.is_finite()
                && iv.start <= iv.end
                && iv.start >= 0.0
                && iv.end <= horizon;
            if ok {
                Ok(())
            } else {
                Err(Error::Integrity(format!("{what} interval {iv} is not inside [0, {horizon}]")))
            }
        };

        let mut per_label: Vec<Vec<TimeInterval>> = vec![Vec::new(); labels.len()];
        for (id, iv) in presences {
            let &i = index.get(&id).ok_or(Error::UnknownLabel(id))?;
            check_span(&format!("presence of label {id}"), &iv)?;
            per_label[i].push(iv);
        }
        for (i, list) in per_label.iter_mut().enumerate() {
            list.sort_by(|x, y| x.start.total_cmp(&y.start).then(x.end.total_cmp(&y.end)));
            for w in list.windows(2) {
                if w[1].start <= w[0].end {
                    return Err(Error::Integrity(format!(
                        "presences {} and {} of label {} are not disjoint",
                        w[0], w[1], labels[i].id
                    )));
                }
            }
        }

        let mut canon: Vec<Conflict> = Vec::with_capacity(conflicts.len());
        for c in conflicts {
            if c.a == c.b {
                return Err(Error::Integrity(format!("self-conflict on label {}", c.a)));
            }
            let (a, b) = if c.a < c.b { (c.a, c.b) } else { (c.b, c.a) };
            let ia = *index.get(&a).ok_or(Error::UnknownLabel(a))?;
            let ib = *index.get(&b).ok_or(Error::UnknownLabel(b))?;
            check_span(&format!("conflict ({a}, {b})"), &c.interval)?;
            for (i, id) in [(ia, a), (ib, b)] {
                if !per_label[i].iter().any(|p| p.contains(&c.interval)) {
                    return Err(Error::Integrity(format!(
                        "conflict ({a}, {b}) {} lies outside every presence of label {id}",
                        c.interval
                    )));
                }
            }
            canon.push(Conflict { a, b, interval: c.interval });
        }
        canon.sort_by(|x, y| {
            (x.a, x.b)
                .cmp(&(y.a, y.b))
                .then(x.interval.start.total_cmp(&y.interval.start))
                .then(x.interval.end.total_cmp(&y.interval.end))
        });
        canon.dedup();
        for w in canon.windows(2) {
            if (w[0].a, w[0].b) == (w[1].a, w[1].b) && w[1].interval.start <= w[0].interval.end {
                return Err(Error::Integrity(format!(
                    "conflicts {} and {} of pair ({}, {}) are not disjoint",
                    w[0].interval, w[1].interval, w[0].a, w[0].b
                )));
            }
        }

        let mut by_label = vec![Vec::new(); labels.len()];
        let mut by_pair: HashMap<(usize, usize), Vec<TimeInterval>> = HashMap::new();
        for c in &canon {
            let (ia, ib) = (index[&c.a], index[&c.b]);
            by_label[ia].push(LabelConflict { other: ib, interval: c.interval });
            by_label[ib].push(LabelConflict { other: ia, interval: c.interval });
            by_pair.entry((ia, ib)).or_default().push(c.interval);
        }
        for list in &mut by_label {
            list.sort_by(|x, y| x.interval.start.total_cmp(&y.interval.start).then(x.other.cmp(&y.other)));
        }

        Ok(Self { horizon, labels, index, presences: per_label, conflicts: canon, by_label, by_pair })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Labels sorted by id; positions in this slice are the label indices
    /// used throughout the crate.
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label_index(&self, id: LabelId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn weight(&self, label: usize) -> f64 {
        self.labels[label].weight
    }

    pub fn presences(&self, label: usize) -> &[TimeInterval] {
        &self.presences[label]
    }

    pub fn conflicts(&self) -> &[Conflict] {
        &self.conflicts
    }

    /// Conflicts involving `label`, sorted by start time.
    pub fn label_conflicts(&self, label: usize) -> &[LabelConflict] {
        &self.by_label[label]
    }

    /// Conflict intervals between two labels (by index), in either order.
    pub fn conflicts_between(&self, a: usize, b: usize) -> &[TimeInterval] {
        let key = if a < b { (a, b) } else { (b, a) };
        self.by_pair.get(&key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn presence_count(&self) -> usize {
        self.presences.iter().map(Vec::len).sum()
    }

    /// `|Ψ| + |C|`.
    pub fn complexity(&self) -> usize {
        self.presence_count() + self.conflicts.len()
    }

    /// Index of the presence interval of `label` containing `iv`.
    pub fn presence_containing(&self, label: usize, iv: &TimeInterval) -> Option<usize> {
        self.presences[label].iter().position(|p| p.contains(iv))
    }

    /// Sum over all activity intervals of `(end - start) * weight`.
    pub fn objective(&self, phi: &ActivitySet) -> Result<f64> {
        let mut total = 0.0;
        for (id, list) in &phi.activities {
            let i = self.label_index(*id).ok_or(Error::UnknownLabel(*id))?;
            let w = self.labels[i].weight;
            total += list.iter().map(|iv| iv.len() * w).sum::<f64>();
        }
        Ok(total)
    }

    /// Activities re-keyed by label index.
    pub fn activity_by_index(&self, phi: &ActivitySet) -> Result<Vec<Vec<TimeInterval>>> {
        let mut out = vec![Vec::new(); self.labels.len()];
        for (id, list) in &phi.activities {
            let i = self.label_index(*id).ok_or(Error::UnknownLabel(*id))?;
            out[i] = list.clone();
        }
        Ok(out)
    }

    pub fn activity_from_index(&self, by_index: &[Vec<TimeInterval>]) -> ActivitySet {
        let mut phi = ActivitySet::default();
        for (i, list) in by_index.iter().enumerate() {
            for iv in list {
                phi.insert(self.labels[i].id, *iv);
            }
        }
        phi
    }

    pub fn load<R: Read>(source: R) -> Result<Self> {
        let file: InstanceFile = serde_json::from_reader(source)?;
        file.into_instance()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::load(text.as_bytes())
    }

    pub fn to_file(&self) -> InstanceFile {
        let mut presences = Vec::with_capacity(self.presence_count());
        for (i, list) in self.presences.iter().enumerate() {
            for iv in list {
                presences.push(PresenceRecord { label: self.labels[i].id, start: iv.start, end: iv.end });
            }
        }
        InstanceFile {
            horizon: self.horizon,
            labels: self.labels.clone(),
            presences,
            conflicts: self
                .conflicts
                .iter()
                .map(|c| ConflictRecord { a: c.a, b: c.b, start: c.interval.start, end: c.interval.end })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serializes")
    }
}

/// Parses an instance file from a byte stream.
pub fn load_instance<R: Read>(source: R) -> Result<Instance> {
    Instance::load(source)
}

/// On-disk instance layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub horizon: f64,
    #[serde(default)]
    pub labels: Vec<Label>,
    #[serde(default)]
    pub presences: Vec<PresenceRecord>,
    #[serde(default)]
    pub conflicts: Vec<ConflictRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresenceRecord {
    pub label: LabelId,
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConflictRecord {
    pub a: LabelId,
    pub b: LabelId,
    pub start: f64,
    pub end: f64,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        Instance::new(
            self.horizon,
            self.labels,
            self.presences.into_iter().map(|p| (p.label, TimeInterval::new(p.start, p.end))).collect(),
            self.conflicts
                .into_iter()
                .map(|c| Conflict { a: c.a, b: c.b, interval: TimeInterval::new(c.start, c.end) })
                .collect(),
        )
    }
}

/// Per-label activity intervals, kept sorted by start.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ActivitySet {
    activities: BTreeMap<LabelId, Vec<TimeInterval>>,
}

impl ActivitySet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64, f64)>) -> Self {
        let mut phi = Self::default();
        for (id, s, e) in pairs {
            phi.insert(LabelId(id), TimeInterval::new(s, e));
        }
        phi
    }

    pub fn insert(&mut self, label: LabelId, iv: TimeInterval) {
        let list = self.activities.entry(label).or_default();
        let pos = list.partition_point(|x| x.start.total_cmp(&iv.start).then(x.end.total_cmp(&iv.end)).is_lt());
        list.insert(pos, iv);
    }

    pub fn intervals(&self, label: LabelId) -> &[TimeInterval] {
        self.activities.get(&label).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains(&self, label: LabelId, iv: &TimeInterval) -> bool {
        self.intervals(label).iter().any(|x| x == iv)
    }

    pub fn iter(&self) -> impl Iterator<Item = (LabelId, &TimeInterval)> {
        self.activities.iter().flat_map(|(id, list)| list.iter().map(move |iv| (*id, iv)))
    }

    pub fn labels(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.activities.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.activities.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Union of two activity sets.
    pub fn merged(&self, other: &ActivitySet) -> ActivitySet {
        let mut out = self.clone();
        for (id, iv) in other.iter() {
            out.insert(id, *iv);
        }
        out
    }

    pub fn to_file(&self) -> SolutionFile {
        SolutionFile {
            activities: self
                .iter()
                .map(|(label, iv)| ActivityRecord { label, start: iv.start, end: iv.end })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("solution serializes")
    }

    pub fn load<R: Read>(source: R) -> Result<Self> {
        let file: SolutionFile = serde_json::from_reader(source)?;
        file.into_activity_set()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::load(text.as_bytes())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub activities: Vec<ActivityRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivityRecord {
    pub label: LabelId,
    pub start: f64,
    pub end: f64,
}

impl SolutionFile {
    pub fn into_activity_set(self) -> Result<ActivitySet> {
        let mut phi = ActivitySet::default();
        for r in self.activities {
            let iv = TimeInterval::new(r.start, r.end);
            if !(iv.start.is_finite() && iv.end.is_finite() && iv.start <= iv.end) {
                return Err(Error::Integrity(format!("activity {iv} of label {} is malformed", r.label)));
            }
            phi.insert(r.label, iv);
        }
        for (id, list) in &phi.activities {
            for w in list.windows(2) {
                if w[1].start < w[0].end {
                    return Err(Error::Integrity(format!(
                        "activities {} and {} of label {id} overlap",
                        w[0], w[1]
                    )));
                }
            }
        }
        Ok(phi)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Three unit-weight labels on `[0, 10]`; labels 1 and 2 conflict on `[4, 6]`.
    pub fn i1() -> Instance {
        Instance::new(
            10.0,
            vec![Label::new(1, 1.0, "l1"), Label::new(2, 1.0, "l2"), Label::new(3, 1.0, "l3")],
            vec![
                (LabelId(1), TimeInterval::new(0.0, 10.0)),
                (LabelId(2), TimeInterval::new(0.0, 10.0)),
                (LabelId(3), TimeInterval::new(2.0, 8.0)),
            ],
            vec![Conflict::new(1, 2, 4.0, 6.0)],
        )
        .unwrap()
    }

    /// A saturated AM3 selection whose start is unjustified: label 1 starts
    /// at the end of its conflict with label 2, but label 2 already stopped
    /// at 4 because label 3 started there.
    pub fn saturated_but_unjustified() -> Instance {
        Instance::new(
            10.0,
            vec![Label::new(1, 1.0, "a"), Label::new(2, 10.0, "b"), Label::new(3, 100.0, "c")],
            vec![
                (LabelId(1), TimeInterval::new(0.0, 10.0)),
                (LabelId(2), TimeInterval::new(0.0, 10.0)),
                (LabelId(3), TimeInterval::new(4.0, 10.0)),
            ],
            vec![Conflict::new(1, 2, 2.0, 6.0), Conflict::new(2, 3, 4.0, 8.0)],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::i1;
    use super::*;

    #[test]
    fn empty_instance_loads() {
        let inst = Instance::from_json(r#"{"horizon": 1, "labels": [], "presences": [], "conflicts": []}"#).unwrap();
        assert_eq!(inst.labels().len(), 0);
        assert_eq!(inst.complexity(), 0);
    }

    #[test]
    fn unknown_label_in_conflict_is_rejected() {
        let text = r#"{"horizon": 10,
            "labels": [{"id": 1, "weight": 1, "name": "a"}],
            "presences": [{"label": 1, "start": 0, "end": 10}],
            "conflicts": [{"a": 1, "b": 7, "start": 1, "end": 2}]}"#;
        assert!(matches!(Instance::from_json(text), Err(Error::UnknownLabel(LabelId(7)))));
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(Instance::from_json("{\"horizon\": "), Err(Error::Parse(_))));
    }

    #[test]
    fn integrity_rules() {
        let labels = || vec![Label::new(1, 1.0, "a"), Label::new(2, 1.0, "b")];
        let p = |l: u32, s: f64, e: f64| (LabelId(l), TimeInterval::new(s, e));
        // overlapping presences
        assert!(Instance::new(10.0, labels(), vec![p(1, 0.0, 5.0), p(1, 4.0, 6.0)], vec![]).is_err());
        // conflict outside presence of b
        assert!(Instance::new(10.0, labels(), vec![p(1, 0.0, 10.0), p(2, 0.0, 3.0)], vec![Conflict::new(1, 2, 2.0, 4.0)]).is_err());
        // self conflict
        assert!(Instance::new(10.0, labels(), vec![p(1, 0.0, 10.0)], vec![Conflict::new(1, 1, 2.0, 4.0)]).is_err());
        // overlapping conflicts of one pair, given in both orientations
        let both = vec![p(1, 0.0, 10.0), p(2, 0.0, 10.0)];
        assert!(Instance::new(10.0, labels(), both.clone(), vec![Conflict::new(1, 2, 2.0, 4.0), Conflict::new(2, 1, 3.0, 5.0)]).is_err());
        // exact duplicate in reversed orientation is deduplicated
        let inst = Instance::new(10.0, labels(), both, vec![Conflict::new(1, 2, 2.0, 4.0), Conflict::new(2, 1, 2.0, 4.0)]).unwrap();
        assert_eq!(inst.conflicts().len(), 1);
        // weight must be positive, horizon respected
        assert!(Instance::new(10.0, vec![Label::new(1, 0.0, "a")], vec![], vec![]).is_err());
        assert!(Instance::new(10.0, labels(), vec![p(1, 0.0, 11.0)], vec![]).is_err());
        assert!(Instance::new(10.0, vec![Label::new(1, 1.0, "a"), Label::new(1, 2.0, "b")], vec![], vec![]).is_err());
    }

    #[test]
    fn objective_examples() {
        let inst = i1();
        assert_eq!(inst.objective(&ActivitySet::new()).unwrap(), 0.0);
        let single = Instance::new(
            10.0,
            vec![Label::new(1, 2.0, "a")],
            vec![(LabelId(1), TimeInterval::new(0.0, 10.0))],
            vec![],
        )
        .unwrap();
        assert_eq!(single.objective(&ActivitySet::from_pairs([(1, 1.0, 4.0)])).unwrap(), 6.0);
        let phi = ActivitySet::from_pairs([(1, 0.0, 10.0), (3, 2.0, 8.0)]);
        assert_eq!(inst.objective(&phi).unwrap(), 16.0);
        assert!(matches!(inst.objective(&ActivitySet::from_pairs([(9, 0.0, 1.0)])), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn complexity_counts_presences_and_conflicts() {
        assert_eq!(i1().complexity(), 4);
        let labels = vec![Label::new(1, 1.0, "a"), Label::new(2, 1.0, "b")];
        let inst = Instance::new(
            10.0,
            labels,
            vec![(LabelId(1), TimeInterval::new(0.0, 10.0)), (LabelId(2), TimeInterval::new(0.0, 10.0))],
            vec![Conflict::new(1, 2, 1.0, 2.0), Conflict::new(1, 2, 3.0, 4.0), Conflict::new(1, 2, 5.0, 6.0)],
        )
        .unwrap();
        assert_eq!(inst.complexity(), 5);
    }

    #[test]
    fn overlapping_solution_activities_rejected() {
        let text = r#"{"activities": [{"label": 1, "start": 0, "end": 5}, {"label": 1, "start": 4, "end": 6}]}"#;
        assert!(ActivitySet::from_json(text).is_err());
    }
}
