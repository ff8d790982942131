//! Backtracking search with arc consistency for functional constraints.
//!
//! Every constraint has the shape `value(to) = map[value(from)]`, one per
//! table entry. Domains are bitsets of at most 64 values. Propagation is AC-3
//! over both directions of each constraint; branching follows a static order
//! of descending constraint degree and tries values in ascending order.

use std::collections::{HashSet, VecDeque};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Functional {
    pub from: usize,
    pub to: usize,
    pub map: Vec<u8>,
}

#[derive(Clone, Debug)]
pub struct Csp {
    initial: Vec<u64>,
    constraints: Vec<Functional>,
    touching: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl Csp {
    /// `domains[v]` is the bitset of allowed values of variable `v`.
    pub fn new(domains: Vec<u64>, constraints: impl IntoIterator<Item = Functional>) -> Self {
        let n = domains.len();
        let mut initial = domains;
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for c in constraints {
            if c.from == c.to {
                // value = map[value]: keep only fixed points.
                let fixed = c
                    .map
                    .iter()
                    .enumerate()
                    .filter(|(v, &w)| *v == w as usize)
                    .fold(0u64, |m, (v, _)| m | (1 << v));
                initial[c.from] &= fixed;
            } else if seen.insert(c.clone()) {
                kept.push(c);
            }
        }
        let mut touching = vec![Vec::new(); n];
        for (k, c) in kept.iter().enumerate() {
            touching[c.from].push(k);
            touching[c.to].push(k);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(touching[v].len()), v));
        Csp {
            initial,
            constraints: kept,
            touching,
            order,
        }
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Shrinks both ends of constraint `k`; returns which ends changed.
    fn revise(&self, k: usize, dom: &mut [u64]) -> (bool, bool) {
        let c = &self.constraints[k];
        let (df, dt) = (dom[c.from], dom[c.to]);
        let mut image = 0u64;
        let mut support = 0u64;
        let mut bits = df;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let w = c.map[v];
            if dt >> w & 1 == 1 {
                image |= 1 << w;
                support |= 1 << v;
            }
        }
        dom[c.from] = support;
        dom[c.to] = image;
        (support != df, image != dt)
    }

    fn propagate(&self, dom: &mut [u64], start: impl IntoIterator<Item = usize>) -> bool {
        let mut queue: VecDeque<usize> = start.into_iter().collect();
        let mut queued = vec![false; dom.len()];
        for &v in &queue {
            queued[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            queued[v] = false;
            for &k in &self.touching[v] {
                let (from_changed, to_changed) = self.revise(k, dom);
                let c = &self.constraints[k];
                if dom[c.from] == 0 || dom[c.to] == 0 {
                    return false;
                }
                for (changed, w) in [(from_changed, c.from), (to_changed, c.to)] {
                    if changed && !queued[w] {
                        queued[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        true
    }

    /// All solutions (up to `limit`), each as one value per variable, sorted.
    pub fn solve(&self, limit: Option<usize>) -> Vec<Vec<usize>> {
        let mut dom = self.initial.clone();
        let mut out = Vec::new();
        if dom.iter().all(|&d| d != 0) && self.propagate(&mut dom, 0..self.initial.len()) {
            self.search(dom, limit, &mut out);
        }
        out.sort();
        out
    }

    fn search(&self, dom: Vec<u64>, limit: Option<usize>, out: &mut Vec<Vec<usize>>) {
        if limit.is_some_and(|l| out.len() >= l) {
            return;
        }
        let Some(&v) = self.order.iter().find(|&&v| dom[v].count_ones() > 1) else {
            out.push(dom.iter().map(|d| d.trailing_zeros() as usize).collect());
            return;
        };
        let mut bits = dom[v];
        while bits != 0 {
            let value = bits.trailing_zeros();
            bits &= bits - 1;
            let mut next = dom.clone();
            next[v] = 1 << value;
            if self.propagate(&mut next, [v]) {
                self.search(next, limit, out);
                if limit.is_some_and(|l| out.len() >= l) {
                    return;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_of_equalities() {
        // a = b = c over {0,1}, c = 1 - a is unsatisfiable
        let id = vec![0, 1];
        let flip = vec![1, 0];
        let c = |from, to, map: &Vec<u8>| Functional { from, to, map: map.clone() };
        let sat = Csp::new(vec![0b11; 3], [c(0, 1, &id), c(1, 2, &id)]);
        assert_eq!(sat.solve(None), vec![vec![0, 0, 0], vec![1, 1, 1]]);
        let unsat = Csp::new(vec![0b11; 3], [c(0, 1, &id), c(1, 2, &id), c(0, 2, &flip)]);
        assert!(unsat.solve(None).is_empty());
        assert_eq!(sat.solve(Some(1)).len(), 1);
    }

    #[test]
    fn self_loops_keep_fixed_points() {
        let csp = Csp::new(vec![0b111], [Functional { from: 0, to: 0, map: vec![1, 1, 2] }]);
        assert_eq!(csp.solve(None), vec![vec![1], vec![2]]);
    }
}
