//! Degree-bounded spanning forests: the local-repair procedure, the
//! incremental construction it powers, and an exact minimizer for the
//! smallest achievable maximum degree.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{connected_components, Graph};

/// An acyclic edge set over vertices `0..n`. Insertions that would close a
/// cycle are rejected, so the invariant holds by construction.
#[derive(Clone, PartialEq, Eq)]
pub struct ForestEdgeSet {
    n: usize,
    adj: Vec<BTreeSet<usize>>,
    m: usize,
}

impl std::fmt::Debug for ForestEdgeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Forest(n={}, edges={:?})", self.n, self.edges())
    }
}

impl ForestEdgeSet {
    pub fn new(n: usize) -> Self {
        ForestEdgeSet {
            n,
            adj: vec![BTreeSet::new(); n],
            m: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].contains(&v)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    /// Edges as `(u, v)` with `u < v`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// True if `u` and `v` are already connected by forest edges.
    pub fn connects(&self, u: usize, v: usize) -> bool {
        if u == v {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![u];
        seen[u] = true;
        while let Some(x) = stack.pop() {
            for &y in &self.adj[x] {
                if y == v {
                    return true;
                }
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        false
    }

    /// Insert an edge, rejecting duplicates, out-of-range endpoints, and
    /// anything that would close a cycle.
    pub fn insert(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n {
            return Err(Error::VertexRange { id: u, n: self.n });
        }
        if v >= self.n {
            return Err(Error::VertexRange { id: v, n: self.n });
        }
        if u == v {
            return Err(Error::Parameter(format!("self-loop at vertex {u}")));
        }
        if self.contains(u, v) {
            return Err(Error::Parameter(format!("edge ({u}, {v}) already present")));
        }
        if self.connects(u, v) {
            return Err(Error::ContractViolation(format!(
                "edge ({u}, {v}) would close a cycle"
            )));
        }
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        self.m += 1;
        Ok(())
    }

    pub fn remove(&mut self, u: usize, v: usize) -> bool {
        if u < self.n && self.adj[u].remove(&v) {
            self.adj[v].remove(&u);
            self.m -= 1;
            true
        } else {
            false
        }
    }

    /// Component partition of the forest, as a canonical labeling.
    pub fn component_labels(&self) -> Vec<usize> {
        let g = Graph::from_edges(self.n, self.edges()).expect("forest edges valid");
        connected_components(&g).labels
    }

    /// A spanning forest of `g` has all edges in `g`, is acyclic (by type
    /// invariant), and induces the same component partition as `g`.
    pub fn is_spanning_forest_of(&self, g: &Graph) -> bool {
        if self.n != g.n() {
            return false;
        }
        if !self.edges().iter().all(|&(u, v)| g.has_edge(u, v)) {
            return false;
        }
        self.component_labels() == connected_components(g).labels
    }

    /// 0/1 weights over `g.edge_list()` marking forest membership.
    pub fn indicator(&self, g: &Graph) -> Vec<f64> {
        g.edge_list()
            .iter()
            .map(|&(u, v)| if self.contains(u, v) { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Deterministic DFS spanning forest (smallest-id roots, sorted adjacency).
pub fn dfs_spanning_forest(g: &Graph) -> ForestEdgeSet {
    let n = g.n();
    let mut forest = ForestEdgeSet::new(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for v in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    forest.insert(u, v).expect("tree edge");
                    stack.push(v);
                }
            }
        }
    }
    forest
}

/// One step of a repair run: the vertex repaired at this step and the forest
/// after the swap.
#[derive(Clone, Debug)]
pub struct RepairStep {
    pub vertex: usize,
    pub forest: ForestEdgeSet,
}

/// Full record of a repair run: the starting vertex, the forest it started
/// from, and every intermediate forest.
#[derive(Clone, Debug)]
pub struct RepairTrace {
    pub start_vertex: usize,
    pub initial: ForestEdgeSet,
    pub steps: Vec<RepairStep>,
}

/// Rebalance a spanning forest in which at most one vertex exceeds the degree
/// bound by one. Each step picks the over-degree vertex, selects its `delta`
/// smallest forest neighbors excluding the previous step's vertex, finds the
/// lexicographically smallest pair among them adjacent in `g`, and swaps one
/// forest edge for that graph edge. Returns the repaired forest and the trace.
pub fn repair_spanning_forest(
    g: &Graph,
    delta: usize,
    v0: usize,
    f0: ForestEdgeSet,
) -> Result<(ForestEdgeSet, RepairTrace)> {
    validate_repair_input(g, delta, v0, &f0)?;
    let initial = f0.clone();
    let mut forest = f0;
    let mut steps = Vec::new();
    repair_loop(g, delta, v0, &mut forest, Some(&mut steps))?;
    Ok((
        forest,
        RepairTrace {
            start_vertex: v0,
            initial,
            steps,
        },
    ))
}

fn validate_repair_input(g: &Graph, delta: usize, v0: usize, f0: &ForestEdgeSet) -> Result<()> {
    if v0 >= g.n() {
        return Err(Error::VertexRange { id: v0, n: g.n() });
    }
    let over: Vec<usize> = (0..g.n()).filter(|&v| f0.degree(v) > delta).collect();
    if over.len() > 1 || over.iter().any(|&v| f0.degree(v) > delta + 1) {
        return Err(Error::ContractViolation(format!(
            "input forest must have at most one vertex of degree {}, none higher; found {over:?}",
            delta + 1
        )));
    }
    if !f0.is_spanning_forest_of(g) {
        return Err(Error::ContractViolation(
            "input is not a spanning forest of the graph".into(),
        ));
    }
    Ok(())
}

/// Shared body of the repair loop; `steps` is only populated when a trace is
/// requested. Degrees change only at the repaired vertex (down by one) and at
/// the kept neighbor (up by one), so the next over-degree vertex is known
/// without rescanning.
fn repair_loop(
    g: &Graph,
    delta: usize,
    v0: usize,
    forest: &mut ForestEdgeSet,
    mut steps: Option<&mut Vec<RepairStep>>,
) -> Result<()> {
    let mut prev = v0;
    let mut over = (0..g.n()).find(|&v| forest.degree(v) > delta);
    let mut guard = 0usize;
    while let Some(vi) = over {
        guard += 1;
        if guard > g.n() + 1 {
            return Err(Error::ContractViolation(
                "repair did not terminate within n steps".into(),
            ));
        }
        let chosen: Vec<usize> = forest
            .neighbors(vi)
            .filter(|&x| x != prev)
            .take(delta)
            .collect();
        let mut pair = None;
        'scan: for &a in &chosen {
            for &b in &chosen {
                if a != b && g.has_edge(a, b) {
                    pair = Some((a, b));
                    break 'scan;
                }
            }
        }
        let Some((a, b)) = pair else {
            return Err(Error::ContractViolation(format!(
                "no adjacent pair among {} neighbors of vertex {vi}; the graph has an induced \
                 star of size at least {delta}",
                chosen.len()
            )));
        };
        forest.remove(vi, b);
        forest.insert(a, b)?;
        if let Some(trace) = steps.as_deref_mut() {
            trace.push(RepairStep {
                vertex: vi,
                forest: forest.clone(),
            });
        }
        prev = vi;
        over = if forest.degree(a) > delta { Some(a) } else { None };
    }
    Ok(())
}

/// Build a spanning forest of maximum degree at most `delta`, assuming
/// `s(G) < delta`. Vertices are peeled off as leaves of scratch spanning
/// forests, then reinserted one at a time; each insertion attaches by a
/// single edge and a repair run restores the bound. A violated assumption
/// surfaces as a contract-violation error from the repair step.
pub fn build_bounded_spanning_forest(g: &Graph, delta: usize) -> Result<ForestEdgeSet> {
    let n = g.n();
    if delta == 0 {
        return if g.m() == 0 {
            Ok(ForestEdgeSet::new(n))
        } else {
            Err(Error::ContractViolation(
                "a graph with edges has no spanning 0-forest".into(),
            ))
        };
    }
    let mut active = vec![true; n];
    let mut current = g.clone();
    let mut peeled = Vec::new();
    while current.m() > 0 {
        let scratch = dfs_spanning_forest(&current);
        let v0 = (0..n)
            .find(|&v| scratch.degree(v) == 1)
            .expect("a forest with edges has a leaf");
        peeled.push(v0);
        active[v0] = false;
        current = g.restrict_to(&active);
    }

    let mut forest = ForestEdgeSet::new(n);
    for &v0 in peeled.iter().rev() {
        active[v0] = true;
        let stage = g.restrict_to(&active);
        let v1 = stage
            .neighbors(v0)
            .next()
            .expect("peeled vertex was not isolated at its stage");
        forest.insert(v0, v1)?;
        if forest.degree(v1) > delta {
            repair_loop(&stage, delta, v0, &mut forest, None)?;
        }
    }
    Ok(forest)
}

/// Exact smallest possible maximum degree of a spanning forest, by
/// per-component backtracking over edge subsets. Capped at n <= 9.
pub fn delta_star_exact(g: &Graph) -> Result<usize> {
    if g.n() > 9 {
        return Err(Error::Capacity(format!(
            "delta_star_exact enumerates spanning trees; n = {} > 9",
            g.n()
        )));
    }
    let labeling = connected_components(g);
    let mut best = 0usize;
    for c in 0..labeling.count {
        let verts: Vec<usize> = (0..g.n()).filter(|&v| labeling.labels[v] == c).collect();
        let k = verts.len();
        if k <= 1 {
            continue;
        }
        let mut local = vec![usize::MAX; g.n()];
        for (i, &v) in verts.iter().enumerate() {
            local[v] = i;
        }
        let mut edges = Vec::new();
        for &u in &verts {
            for w in g.neighbors(u) {
                if u < w {
                    edges.push((local[u], local[w]));
                }
            }
        }
        // Any tree on k >= 3 vertices has a vertex of degree >= 2.
        let floor = if k == 2 { 1 } else { 2 };
        let mut d = floor;
        while !has_bounded_spanning_tree(k, &edges, d) {
            d += 1;
            debug_assert!(d < k, "a spanning tree always exists within a component");
        }
        best = best.max(d);
    }
    Ok(best)
}

fn has_bounded_spanning_tree(k: usize, edges: &[(usize, usize)], cap: usize) -> bool {
    struct Search<'a> {
        edges: &'a [(usize, usize)],
        k: usize,
        cap: usize,
        parent: Vec<usize>,
        deg: Vec<usize>,
    }
    impl Search<'_> {
        fn find(&mut self, mut x: usize) -> usize {
            while self.parent[x] != x {
                self.parent[x] = self.parent[self.parent[x]];
                x = self.parent[x];
            }
            x
        }
        fn rec(&mut self, idx: usize, used: usize) -> bool {
            if used == self.k - 1 {
                return true;
            }
            if self.edges.len() - idx < self.k - 1 - used {
                return false;
            }
            let (u, v) = self.edges[idx];
            let (ru, rv) = (self.find(u), self.find(v));
            if ru != rv && self.deg[u] < self.cap && self.deg[v] < self.cap {
                let saved = self.parent.clone();
                self.parent[ru] = rv;
                self.deg[u] += 1;
                self.deg[v] += 1;
                if self.rec(idx + 1, used + 1) {
                    return true;
                }
                self.parent = saved;
                self.deg[u] -= 1;
                self.deg[v] -= 1;
            }
            self.rec(idx + 1, used)
        }
    }
    Search {
        edges,
        k,
        cap,
        parent: (0..k).collect(),
        deg: vec![0; k],
    }
    .rec(0, 0)
}
