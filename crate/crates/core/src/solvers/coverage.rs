use crate::graph::ConflictGraph;

/// Counts of selected candidates over the elementary intervals formed by
/// all candidate endpoints. Open activities overlap at some time iff they
/// share an elementary interval.
pub(crate) struct Coverage {
    ranges: Vec<(usize, usize)>,
    lengths: Vec<f64>,
    count: Vec<u32>,
    k: u32,
}

impl Coverage {
    pub fn new(graph: &ConflictGraph, k: usize) -> Self {
        let mut points: Vec<f64> =
            graph.candidates().iter().flat_map(|c| [c.interval.start, c.interval.end]).collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let ranges = graph
            .candidates()
            .iter()
            .map(|c| {
                let lo = points.partition_point(|&p| p < c.interval.start);
                let hi = points.partition_point(|&p| p < c.interval.end);
                (lo, hi)
            })
            .collect();
        let lengths: Vec<f64> = points.windows(2).map(|w| w[1] - w[0]).collect();
        let count = vec![0; lengths.len()];
        Self { ranges, lengths, count, k: k.min(u32::MAX as usize) as u32 }
    }

    pub fn fits(&self, v: usize) -> bool {
        let (lo, hi) = self.ranges[v];
        self.count[lo..hi].iter().all(|&c| c < self.k)
    }

    pub fn add(&mut self, v: usize) {
        let (lo, hi) = self.ranges[v];
        self.count[lo..hi].iter_mut().for_each(|c| *c += 1);
    }

    pub fn remove(&mut self, v: usize) {
        let (lo, hi) = self.ranges[v];
        self.count[lo..hi].iter_mut().for_each(|c| *c -= 1);
    }

    pub fn range(&self, v: usize) -> (usize, usize) {
        self.ranges[v]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn count(&self, e: usize) -> u32 {
        self.count[e]
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}
