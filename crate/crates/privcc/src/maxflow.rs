//! Dinic max-flow / min-cut over f64 capacities, used by the closure-based
//! separation oracle.

#[derive(Clone, Copy)]
struct Arc {
    to: usize,
    cap: f64,
    rev: usize,
}

pub(crate) struct FlowNetwork {
    arcs: Vec<Vec<Arc>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            arcs: vec![Vec::new(); nodes],
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: f64) {
        let rev_from = self.arcs[to].len();
        let rev_to = self.arcs[from].len();
        self.arcs[from].push(Arc {
            to,
            cap,
            rev: rev_from,
        });
        self.arcs[to].push(Arc {
            to: from,
            cap: 0.0,
            rev: rev_to,
        });
    }

    /// Max flow from `s` to `t`. `eps` is the smallest augmentation treated as
    /// nonzero, which also bounds the termination error.
    pub fn max_flow(&mut self, s: usize, t: usize, eps: f64) -> f64 {
        let n = self.arcs.len();
        let mut flow = 0.0;
        loop {
            // BFS level graph over residual arcs
            let mut level = vec![usize::MAX; n];
            level[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for a in &self.arcs[u] {
                    if a.cap > eps && level[a.to] == usize::MAX {
                        level[a.to] = level[u] + 1;
                        queue.push_back(a.to);
                    }
                }
            }
            if level[t] == usize::MAX {
                return flow;
            }
            let mut iter = vec![0usize; n];
            loop {
                let pushed = self.dfs(s, t, f64::INFINITY, &level, &mut iter, eps);
                if pushed <= eps {
                    break;
                }
                flow += pushed;
            }
        }
    }

    fn dfs(
        &mut self,
        u: usize,
        t: usize,
        limit: f64,
        level: &[usize],
        iter: &mut [usize],
        eps: f64,
    ) -> f64 {
        if u == t {
            return limit;
        }
        while iter[u] < self.arcs[u].len() {
            let Arc { to, cap, rev } = self.arcs[u][iter[u]];
            if cap > eps && level[to] == level[u] + 1 {
                let pushed = self.dfs(to, t, limit.min(cap), level, iter, eps);
                if pushed > eps {
                    self.arcs[u][iter[u]].cap -= pushed;
                    self.arcs[to][rev].cap += pushed;
                    return pushed;
                }
            }
            iter[u] += 1;
        }
        0.0
    }

    /// Nodes reachable from `s` in the residual graph (the source side of a
    /// minimum cut once `max_flow` has run).
    pub fn source_side(&self, s: usize, eps: f64) -> Vec<bool> {
        let n = self.arcs.len();
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for a in &self.arcs[u] {
                if a.cap > eps && !seen[a.to] {
                    seen[a.to] = true;
                    stack.push(a.to);
                }
            }
        }
        seen
    }
}
