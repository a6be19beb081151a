//! Simple undirected graphs over dense integer vertex ids, plus connectivity
//! statistics and induced-subgraph navigation.
//!
//! Graphs are immutable after construction and safe to share across threads.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Simple undirected graph on vertices `0..n`. No self-loops, no parallel
/// edges; adjacency is kept symmetric and sorted.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<BTreeSet<usize>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edge_list())
    }
}

impl Graph {
    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![BTreeSet::new(); n],
        }
    }

    /// Build from an explicit vertex count and edge list. Duplicate edges are
    /// deduplicated; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in (u + 1)..n {
                g.add_edge(u, v).expect("in range");
            }
        }
        g
    }

    fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n {
            return Err(Error::VertexRange { id: u, n: self.n });
        }
        if v >= self.n {
            return Err(Error::VertexRange { id: v, n: self.n });
        }
        if u == v {
            return Err(Error::Parameter(format!("self-loop at vertex {u}")));
        }
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].contains(&v)
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    /// All edges as `(u, v)` with `u < v`, in lexicographic order. This is the
    /// canonical edge indexing used by the LP layer.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m());
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Parse the edge-list format: first significant line is the vertex count,
    /// each following significant line is `u v`. Lines starting with `#` are
    /// comments; blank lines are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut g: Option<Graph> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            match g {
                None => {
                    let n: usize = s.parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("expected vertex count, got {s:?}"),
                    })?;
                    g = Some(Graph::empty(n));
                }
                Some(ref mut g) => {
                    let mut it = s.split_whitespace();
                    let (a, b) = match (it.next(), it.next(), it.next()) {
                        (Some(a), Some(b), None) => (a, b),
                        _ => {
                            return Err(Error::Parse {
                                line,
                                msg: format!("expected \"u v\", got {s:?}"),
                            })
                        }
                    };
                    let u: usize = a.parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad vertex id {a:?}"),
                    })?;
                    let v: usize = b.parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad vertex id {b:?}"),
                    })?;
                    if u == v {
                        return Err(Error::Parse {
                            line,
                            msg: format!("self-loop at vertex {u}"),
                        });
                    }
                    g.add_edge(u, v)?;
                }
            }
        }
        g.ok_or(Error::Parse {
            line: 0,
            msg: "missing vertex count header".into(),
        })
    }

    /// Subgraph induced by `keep`, with vertices relabeled to `0..keep.len()`.
    /// The returned mapping sends new id `i` to the old id `mapping[i]`.
    pub fn induced_subgraph(&self, keep: &VertexSet) -> Result<(Graph, Vec<usize>)> {
        let mapping: Vec<usize> = keep.iter().collect();
        if let Some(&bad) = mapping.iter().find(|&&v| v >= self.n) {
            return Err(Error::VertexRange { id: bad, n: self.n });
        }
        let mut back = vec![usize::MAX; self.n];
        for (new, &old) in mapping.iter().enumerate() {
            back[old] = new;
        }
        let mut g = Graph::empty(mapping.len());
        for (new_u, &old_u) in mapping.iter().enumerate() {
            for &old_v in &self.adj[old_u] {
                if old_v > old_u && back[old_v] != usize::MAX {
                    g.add_edge(new_u, back[old_v])?;
                }
            }
        }
        Ok((g, mapping))
    }

    /// Induced subgraph on the vertices of `mask` (bit i = vertex i),
    /// relabeled to dense ids. Only valid for parents with at most 64
    /// vertices; used by the exponential-time poset scanners.
    pub fn induced_by_mask(&self, mask: u64) -> Graph {
        debug_assert!(self.n <= 64 && (self.n == 64 || mask < (1u64 << self.n)));
        self.induced_subgraph(&VertexSet::from_mask(mask))
            .expect("mask within range")
            .0
    }

    /// Same vertex set, but keep only edges with both endpoints in `active`.
    /// Inactive vertices become isolated; ids are preserved.
    pub(crate) fn restrict_to(&self, active: &[bool]) -> Graph {
        let mut g = Graph::empty(self.n);
        for u in 0..self.n {
            if !active[u] {
                continue;
            }
            for &v in &self.adj[u] {
                if u < v && active[v] {
                    g.add_edge(u, v).expect("in range");
                }
            }
        }
        g
    }
}

/// A set of vertex ids, kept sorted.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct VertexSet {
    members: BTreeSet<usize>,
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.members)
    }
}

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_iter<I: IntoIterator<Item = usize>>(it: I) -> Self {
        VertexSet {
            members: it.into_iter().collect(),
        }
    }

    /// All of `0..n`.
    pub fn full(n: usize) -> Self {
        Self::from_iter(0..n)
    }

    pub fn insert(&mut self, v: usize) {
        self.members.insert(v);
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    /// Bitmask representation, valid for parents with at most 64 vertices.
    pub fn to_mask(&self) -> u64 {
        self.iter().fold(0u64, |m, v| m | (1 << v))
    }

    pub fn from_mask(mut mask: u64) -> Self {
        let mut s = VertexSet::new();
        while mask != 0 {
            let v = mask.trailing_zeros() as usize;
            s.insert(v);
            mask &= mask - 1;
        }
        s
    }
}

/// Per-vertex component labels and the component count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub labels: Vec<usize>,
    pub count: usize,
}

/// Label connected components by BFS in vertex-id order; labels are assigned
/// in order of first discovery, so the labeling is canonical.
pub fn connected_components(g: &Graph) -> ComponentLabeling {
    let n = g.n();
    let mut labels = vec![usize::MAX; n];
    let mut count = 0;
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for v in g.neighbors(u) {
                if labels[v] == usize::MAX {
                    labels[v] = count;
                    queue.push_back(v);
                }
            }
        }
        count += 1;
    }
    ComponentLabeling { labels, count }
}

/// Number of edges in any spanning forest: `n - (#components)`.
pub fn spanning_forest_size(g: &Graph) -> usize {
    g.n() - connected_components(g).count
}

/// Distance between two induced subgraphs of a common parent, measured in the
/// vertex-insertion/removal poset: the symmetric-difference size of their
/// vertex sets.
pub fn node_distance_in_poset(a: &VertexSet, b: &VertexSet) -> usize {
    let only_a = a.iter().filter(|v| !b.contains(*v)).count();
    let only_b = b.iter().filter(|v| !a.contains(*v)).count();
    only_a + only_b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1))).unwrap()
    }

    #[test]
    fn parse_basic() {
        let g = Graph::parse_edge_list("3\n0 1\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_list(), vec![(0, 1)]);
    }

    #[test]
    fn parse_isolated_vertex() {
        let g = Graph::parse_edge_list("1\n").unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn parse_dedups_symmetric_duplicates() {
        let a = Graph::parse_edge_list("3\n0 1\n").unwrap();
        let b = Graph::parse_edge_list("3\n0 1\n1 0\n").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parse_comments_and_blanks() {
        let g = Graph::parse_edge_list("# header\n\n3\n# edge\n0 2\n").unwrap();
        assert_eq!(g.edge_list(), vec![(0, 2)]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match Graph::parse_edge_list("3\n0 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        match Graph::parse_edge_list("2\n0 5\n") {
            Err(Error::VertexRange { id, n }) => {
                assert_eq!((id, n), (5, 2));
            }
            other => panic!("expected range error, got {other:?}"),
        }
        assert!(Graph::parse_edge_list("3\n1 1\n").is_err());
    }

    #[test]
    fn components_counts() {
        assert_eq!(connected_components(&Graph::empty(3)).count, 3);
        assert_eq!(connected_components(&path(3)).count, 1);
        // K_{1,3} plus one isolated vertex: hand BFS gives 2 components.
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let lab = connected_components(&g);
        assert_eq!(lab.count, 2);
        assert_eq!(lab.labels[4], 1);
    }

    #[test]
    fn sf_size() {
        assert_eq!(spanning_forest_size(&Graph::empty(4)), 0);
        assert_eq!(spanning_forest_size(&Graph::complete(3)), 2);
        let two_edges = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(spanning_forest_size(&two_edges), 2);
    }

    #[test]
    fn cc_plus_sf_is_n() {
        let mut rng = crate::stream::RngStream::from_seed(11);
        for _ in 0..200 {
            let n = 1 + (rand::Rng::gen_range(&mut rng, 0..16usize));
            let g = crate::gen::gen_gnp(n, 0.3, &mut rng).unwrap();
            assert_eq!(connected_components(&g).count + spanning_forest_size(&g), g.n());
        }
    }

    #[test]
    fn components_agree_with_naive_dfs() {
        // Independent oracle: recursive DFS labeling.
        fn naive(g: &Graph) -> usize {
            fn dfs(g: &Graph, v: usize, seen: &mut Vec<bool>) {
                seen[v] = true;
                for w in g.neighbors(v) {
                    if !seen[w] {
                        dfs(g, w, seen);
                    }
                }
            }
            let mut seen = vec![false; g.n()];
            let mut c = 0;
            for v in 0..g.n() {
                if !seen[v] {
                    dfs(g, v, &mut seen);
                    c += 1;
                }
            }
            c
        }
        let mut rng = crate::stream::RngStream::from_seed(5);
        for i in 0..200 {
            let n = 1 + (i % 64);
            let g = crate::gen::gen_gnp(n, 0.08, &mut rng).unwrap();
            assert_eq!(connected_components(&g).count, naive(&g));
        }
    }

    #[test]
    fn induced_subgraph_cases() {
        let tri = Graph::complete(3);
        let (e, map) = tri.induced_subgraph(&VertexSet::from_iter([0, 2])).unwrap();
        assert_eq!(e.edge_list(), vec![(0, 1)]);
        assert_eq!(map, vec![0, 2]);

        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let (h, map) = g.induced_subgraph(&VertexSet::full(4)).unwrap();
        assert_eq!(h, g);
        assert_eq!(map, vec![0, 1, 2, 3]);

        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let (leaves, _) = star.induced_subgraph(&VertexSet::from_iter([1, 2, 3])).unwrap();
        assert_eq!(leaves.m(), 0);
        assert_eq!(leaves.n(), 3);

        assert!(star.induced_subgraph(&VertexSet::from_iter([7])).is_err());
    }

    #[test]
    fn poset_distance_is_symmetric_difference() {
        let a = VertexSet::from_iter([0, 1, 2]);
        let b = VertexSet::from_iter([0, 1]);
        assert_eq!(node_distance_in_poset(&a, &a), 0);
        assert_eq!(node_distance_in_poset(&a, &b), 1);
        let c = VertexSet::from_iter([0, 1]);
        let d = VertexSet::from_iter([1, 2]);
        assert_eq!(node_distance_in_poset(&c, &d), 2);
    }

    #[test]
    fn poset_distance_matches_exhaustive_shortest_path() {
        // Oracle: BFS over the poset of subsets of [0, n), where each move
        // inserts or removes a single vertex.
        fn bfs_dist(n: usize, a: u64, b: u64) -> usize {
            let mut dist = vec![usize::MAX; 1 << n];
            let mut q = std::collections::VecDeque::new();
            dist[a as usize] = 0;
            q.push_back(a);
            while let Some(m) = q.pop_front() {
                if m == b {
                    return dist[m as usize];
                }
                for v in 0..n {
                    let nxt = m ^ (1 << v);
                    if dist[nxt as usize] == usize::MAX {
                        dist[nxt as usize] = dist[m as usize] + 1;
                        q.push_back(nxt);
                    }
                }
            }
            unreachable!()
        }
        for n in 1..=5usize {
            for a in 0..(1u64 << n) {
                for b in 0..(1u64 << n) {
                    let va = VertexSet::from_mask(a);
                    let vb = VertexSet::from_mask(b);
                    assert_eq!(node_distance_in_poset(&va, &vb), bfs_dist(n, a, b));
                }
            }
        }
    }

    #[test]
    fn mask_round_trip() {
        let s = VertexSet::from_iter([0, 3, 5]);
        assert_eq!(VertexSet::from_mask(s.to_mask()), s);
    }
}
