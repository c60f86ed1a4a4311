//! Exact maximum-weight independent sets on induced subgraphs, by branch
//! and reduce: isolated vertices are taken, disconnected parts are solved
//! separately, and a weighted clique cover bounds each branch.

use std::collections::HashMap;
use std::time::Instant;

pub(crate) struct Bits {
    pub words: usize,
    data: Vec<u64>,
}

impl Bits {
    pub fn rows(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        Self { words, data: vec![0; rows * words] }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn set(&mut self, r: usize, c: usize) {
        self.data[r * self.words + c / 64] |= 1 << (c % 64);
    }
}

pub(crate) fn first_set(set: &[u64]) -> Option<usize> {
    set.iter().enumerate().find(|(_, w)| **w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

pub(crate) fn clear(set: &mut [u64], i: usize) {
    set[i / 64] &= !(1 << (i % 64));
}

pub(crate) fn insert(set: &mut [u64], i: usize) {
    set[i / 64] |= 1 << (i % 64);
}

pub(crate) fn has(set: &[u64], i: usize) -> bool {
    set[i / 64] >> (i % 64) & 1 == 1
}

fn members(set: &[u64]) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(i * 64 + b)
        })
    })
}

/// Vertices are local indices sorted by decreasing weight, so the lowest
/// set bit of any subset is one of its heaviest vertices.
pub(crate) struct Mwis {
    pub weight: Vec<f64>,
    pub adj: Bits,
    memo: HashMap<Vec<u64>, (f64, Vec<usize>)>,
    pub nodes: u64,
    deadline: Instant,
    pub timed_out: bool,
}

impl Mwis {
    pub fn new(weight: Vec<f64>, adj: Bits, deadline: Instant) -> Self {
        Self { weight, adj, memo: HashMap::new(), nodes: 0, deadline, timed_out: false }
    }

    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn full(&self) -> Vec<u64> {
        let mut s = vec![0u64; self.adj.words];
        for v in 0..self.len() {
            insert(&mut s, v);
        }
        s
    }

    /// Removes `v` and its neighbors from `set`.
    pub fn remove_closed(&self, set: &mut [u64], v: usize) {
        for (s, a) in set.iter_mut().zip(self.adj.row(v)) {
            *s &= !a;
        }
        clear(set, v);
    }

    fn isolated(&self, set: &[u64], v: usize) -> bool {
        set.iter().zip(self.adj.row(v)).all(|(s, a)| s & a == 0)
    }

    pub fn cover_bound(&self, set: &[u64], limit: f64) -> f64 {
        let mut rem = set.to_vec();
        let mut cand = vec![0u64; rem.len()];
        let mut bound = 0.0;
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

    fn components(&self, set: &[u64]) -> Vec<Vec<u64>> {
        let mut rem = set.to_vec();
        let mut out = Vec::new();
        while let Some(s) = first_set(&rem) {
            let mut comp = vec![0u64; rem.len()];
            let mut frontier = vec![0u64; rem.len()];
            insert(&mut frontier, s);
            clear(&mut rem, s);
            while let Some(v) = first_set(&frontier) {
                clear(&mut frontier, v);
                insert(&mut comp, v);
                for ((f, r), a) in frontier.iter_mut().zip(rem.iter_mut()).zip(self.adj.row(v)) {
                    let new = *r & a;
                    *f |= new;
                    *r &= !new;
                }
            }
            out.push(comp);
        }
        out
    }

    fn greedy(&self, set: &[u64]) -> (f64, Vec<usize>) {
        let mut rem = set.to_vec();
        let mut chosen = Vec::new();
        let mut total = 0.0;
        while let Some(v) = first_set(&rem) {
            chosen.push(v);
            total += self.weight[v];
            self.remove_closed(&mut rem, v);
        }
        (total, chosen)
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes.is_multiple_of(256) && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        self.timed_out
    }

    /// Maximum-weight independent subset of `set`. After a timeout the
    /// result is independent but may be suboptimal.
    pub fn solve(&mut self, set: &[u64]) -> (f64, Vec<usize>) {
        let mut rem = set.to_vec();
        let mut total = 0.0;
        let mut chosen = Vec::new();
        let isolated: Vec<usize> = members(&rem).filter(|&v| self.isolated(&rem, v)).collect();
        for v in isolated {
            clear(&mut rem, v);
            total += self.weight[v];
            chosen.push(v);
        }
        for comp in self.components(&rem) {
            let (w, s) = self.solve_connected(comp);
            total += w;
            chosen.extend(s);
        }
        chosen.sort_unstable();
        (total, chosen)
    }

    /// Like [`Self::solve_connected`], but gives up with `None` once it is
    /// clear that the optimum does not exceed `floor`.
    fn solve_above(&mut self, comp: Vec<u64>, floor: f64) -> Option<(f64, Vec<usize>)> {
        if let Some(hit) = self.memo.get(&comp) {
            return (hit.0 > floor).then(|| hit.clone());
        }
        let greedy = self.greedy(&comp);
        if greedy.0 > floor {
            return Some(self.solve_connected(comp));
        }
        let mut best = (floor, Vec::new());
        let mut chosen = Vec::new();
        self.branch(comp.clone(), 0.0, &mut chosen, &mut best, true);
        if best.0 <= floor || best.1.is_empty() && floor >= 0.0 {
            return None;
        }
        if !self.timed_out {
            self.memo.insert(comp, best.clone());
        }
        Some(best)
    }

    fn solve_connected(&mut self, comp: Vec<u64>) -> (f64, Vec<usize>) {
        if let Some(hit) = self.memo.get(&comp) {
            return hit.clone();
        }
        let mut best = self.greedy(&comp);
        let mut chosen = Vec::new();
        self.branch(comp.clone(), 0.0, &mut chosen, &mut best, true);
        if !self.timed_out {
            self.memo.insert(comp, best.clone());
        }
        best
    }

    fn branch(&mut self, mut set: Vec<u64>, mut cur: f64, chosen: &mut Vec<usize>, best: &mut (f64, Vec<usize>), connected: bool) {
        if self.tick() {
            return;
        }
        let mark = chosen.len();
        let isolated: Vec<usize> = members(&set).filter(|&v| self.isolated(&set, v)).collect();
        for v in isolated {
            clear(&mut set, v);
            cur += self.weight[v];
            chosen.push(v);
        }
        if first_set(&set).is_none() {
            if cur > best.0 {
                *best = (cur, chosen.clone());
            }
            chosen.truncate(mark);
            return;
        }
        let slack = best.0 - cur;
        if self.cover_bound(&set, slack) <= slack {
            chosen.truncate(mark);
            return;
        }
        if !connected {
            let comps = self.components(&set);
            if comps.len() > 1 {
                let bounds: Vec<f64> = comps.iter().map(|c| self.cover_bound(c, f64::INFINITY)).collect();
                let mut rest: f64 = bounds.iter().sum();
                let mut total = cur;
                let mut all = chosen.clone();
                for (comp, b) in comps.into_iter().zip(bounds) {
                    rest -= b;
                    let Some((w, s)) = self.solve_above(comp, best.0 - total - rest) else {
                        chosen.truncate(mark);
                        return;
                    };
                    total += w;
                    all.extend(s);
                }
                if total > best.0 {
                    all.sort_unstable();
                    *best = (total, all);
                }
                chosen.truncate(mark);
                return;
            }
        }
        let v = first_set(&set).unwrap();
        let mut with = set.clone();
        self.remove_closed(&mut with, v);
        chosen.push(v);
        self.branch(with, cur + self.weight[v], chosen, best, false);
        chosen.pop();
        clear(&mut set, v);
        self.branch(set, cur, chosen, best, false);
        chosen.truncate(mark);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(weight: &[f64], edges: &[(usize, usize)]) -> f64 {
        let n = weight.len();
        (0u32..1 << n)
            .filter(|m| edges.iter().all(|&(a, b)| m >> a & 1 == 0 || m >> b & 1 == 0))
            .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).map(|i| weight[i]).sum::<f64>())
            .fold(0.0, f64::max)
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..300 {
            let n = rng.gen_range(1..14);
            let mut weight: Vec<f64> = (0..n).map(|_| rng.gen_range(1..10) as f64).collect();
            weight.sort_by(|a, b| b.total_cmp(a));
            let mut adj = Bits::rows(n, n);
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.3) {
                        adj.set(a, b);
                        adj.set(b, a);
                        edges.push((a, b));
                    }
                }
            }
            let mut m = Mwis::new(weight.clone(), adj, Instant::now() + std::time::Duration::from_secs(10));
            let full = m.full();
            let (w, set) = m.solve(&full);
            assert_eq!(w, brute(&weight, &edges));
            assert!(edges.iter().all(|&(a, b)| !(set.contains(&a) && set.contains(&b))));
        }
    }
}
