//! Successive shortest paths with Dijkstra on reduced costs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub(crate) const INF_CAP: i64 = i64::MAX / 4;

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

pub(crate) struct MinCostFlow {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<f64>,
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        MinCostFlow {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
        }
    }

    /// Adds an arc and returns its index; the residual arc is `index ^ 1`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64, cost: f64) -> usize {
        let e = self.to.len();
        self.adj[u].push(e);
        self.to.push(v);
        self.cap.push(cap);
        self.cost.push(cost);
        self.adj[v].push(e + 1);
        self.to.push(u);
        self.cap.push(0);
        self.cost.push(-cost);
        e
    }

    /// Flow currently carried by arc `e`.
    pub fn flow(&self, e: usize) -> i64 {
        self.cap[e ^ 1]
    }

    /// Sends up to `need` units from `s` to `t`; returns `(sent, cost)`. Arc costs
    /// must be nonnegative.
    pub fn run(&mut self, s: usize, t: usize, need: i64) -> (i64, f64) {
        let nn = self.adj.len();
        let mut pot = vec![0.0; nn];
        let mut sent = 0;
        let mut total = 0.0;
        while sent < need {
            let mut dist = vec![f64::INFINITY; nn];
            let mut prev = vec![usize::MAX; nn];
            dist[s] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(Entry(0.0, s));
            while let Some(Entry(dv, v)) = heap.pop() {
                if dv > dist[v] {
                    continue;
                }
                for &e in &self.adj[v] {
                    if self.cap[e] <= 0 {
                        continue;
                    }
                    let w = self.to[e];
                    let rc = (self.cost[e] + pot[v] - pot[w]).max(0.0);
                    let nd = dv + rc;
                    if nd < dist[w] - 1e-15 {
                        dist[w] = nd;
                        prev[w] = e;
                        heap.push(Entry(nd, w));
                    }
                }
            }
            if !dist[t].is_finite() {
                break;
            }
            for v in 0..nn {
                if dist[v].is_finite() {
                    pot[v] += dist[v];
                }
            }
            let mut push = need - sent;
            let mut v = t;
            while v != s {
                let e = prev[v];
                push = push.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                total += push as f64 * self.cost[e];
                v = self.to[e ^ 1];
            }
            sent += push;
        }
        (sent, total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefers_the_cheaper_route() {
        let mut f = MinCostFlow::new(4);
        let a = f.add_edge(0, 1, 1, 1.0);
        let b = f.add_edge(0, 2, 5, 3.0);
        f.add_edge(1, 3, 5, 1.0);
        f.add_edge(2, 3, 5, 0.5);
        let (sent, cost) = f.run(0, 3, 3);
        assert_eq!(sent, 3);
        assert!((cost - (2.0 + 2.0 * 3.5)).abs() < 1e-12);
        assert_eq!(f.flow(a), 1);
        assert_eq!(f.flow(b), 2);
    }
}
