//! Dinic max-flow on `f64` capacities, used for maximum-weight closure.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: f64,
}

/// Residual network with paired forward/backward edges (`e ^ 1` is the twin).
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    eps: f64,
}

impl FlowNetwork {
    /// `eps` is the residual capacity treated as saturated.
    pub fn new(nodes: usize, eps: f64) -> Self {
        Self { adjacency: vec![Vec::new(); nodes], edges: Vec::new(), eps }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        self.adjacency[from].push(self.edges.len());
        self.edges.push(Edge { to, cap });
        self.adjacency[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0.0 });
    }

    fn bfs(&self, source: usize, sink: usize, level: &mut [i32]) -> bool {
        level.fill(-1);
        level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adjacency[u] {
                let edge = &self.edges[e];
                if edge.cap > self.eps && level[edge.to] < 0 {
                    level[edge.to] = level[u] + 1;
                    queue.push_back(edge.to);
                }
            }
        }
        level[sink] >= 0
    }

    fn dfs(&mut self, u: usize, sink: usize, pushed: f64, level: &[i32], next: &mut [usize]) -> f64 {
        if u == sink {
            return pushed;
        }
        while next[u] < self.adjacency[u].len() {
            let e = self.adjacency[u][next[u]];
            let (to, cap) = (self.edges[e].to, self.edges[e].cap);
            if cap > self.eps && level[to] == level[u] + 1 {
                let got = self.dfs(to, sink, pushed.min(cap), level, next);
                if got > 0.0 {
                    self.edges[e].cap -= got;
                    self.edges[e ^ 1].cap += got;
                    return got;
                }
            }
            next[u] += 1;
        }
        0.0
    }

    /// Pushes a maximum flow and returns its value.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        let n = self.node_count();
        let mut level = vec![-1; n];
        let mut next = vec![0usize; n];
        let mut total = 0.0;
        while self.bfs(source, sink, &mut level) {
            next.fill(0);
            loop {
                let f = self.dfs(source, sink, f64::INFINITY, &level, &mut next);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
        total
    }

    /// Nodes reachable from `source` in the residual network (the source
    /// side of a minimum cut once `max_flow` has run).
    pub fn source_side(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[source] = true;
        let mut stack = vec![source];
        while let Some(u) = stack.pop() {
            for &e in &self.adjacency[u] {
                let edge = &self.edges[e];
                if edge.cap > self.eps && !seen[edge.to] {
                    seen[edge.to] = true;
                    stack.push(edge.to);
                }
            }
        }
        seen
    }
}
