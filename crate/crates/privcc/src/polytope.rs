//! The degree-bounded forest polytope and its extension evaluator.
//!
//! For a graph G and a bound Δ, the polytope consists of nonnegative edge
//! weights x with x(E[S]) ≤ |S| − 1 for every vertex subset S (|S| ≥ 2) and
//! x(δ(v)) ≤ Δ at every vertex. The extension value is the maximum total
//! weight over the polytope, computed either by cutting planes with a
//! min-cut separation oracle or, as a reference, with every subset row
//! materialized.

use std::collections::HashSet;

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Solution, Variable};

use crate::error::{Error, Result};
use crate::forest::dfs_spanning_forest;
use crate::graph::{Graph, VertexSet};
use crate::maxflow::FlowNetwork;

/// Default feasibility/optimality tolerance. Optima of this LP family are
/// half-integral in practice, so 1e-7 separates cleanly.
pub const DEFAULT_TOL: f64 = 1e-7;

const BRUTEFORCE_MAX_N: usize = 14;
const SEPARATION_MAX_N: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowKind {
    /// `x_e >= 0` for the single support edge.
    NonNeg,
    /// `x(δ(v)) <= Δ`.
    Degree,
    /// `x(E[S]) <= |S| - 1`; carries the witness S.
    ForestSubset,
}

/// One linear constraint over edge variables, identified by edge indices into
/// the graph's canonical edge list.
#[derive(Clone, Debug)]
pub struct ConstraintRow {
    pub kind: RowKind,
    pub support: Vec<usize>,
    pub bound: f64,
    pub witness: Option<VertexSet>,
}

impl ConstraintRow {
    pub fn nonneg(edge: usize) -> Self {
        ConstraintRow {
            kind: RowKind::NonNeg,
            support: vec![edge],
            bound: 0.0,
            witness: None,
        }
    }

    pub fn degree(g: &Graph, v: usize, delta: f64) -> Self {
        let edges = g.edge_list();
        let support = edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a == v || b == v)
            .map(|(i, _)| i)
            .collect();
        ConstraintRow {
            kind: RowKind::Degree,
            support,
            bound: delta,
            witness: None,
        }
    }

    /// Subset row for S: support is E[S], bound |S| - 1.
    pub fn forest_subset(g: &Graph, s: &VertexSet) -> Self {
        let edges = g.edge_list();
        let support = edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| s.contains(a) && s.contains(b))
            .map(|(i, _)| i)
            .collect();
        ConstraintRow {
            kind: RowKind::ForestSubset,
            support,
            bound: s.len() as f64 - 1.0,
            witness: Some(s.clone()),
        }
    }
}

/// A point in edge-weight space, indexed like `Graph::edge_list`.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalEdgeWeights {
    pub weights: Vec<f64>,
}

impl FractionalEdgeWeights {
    pub fn zeros(m: usize) -> Self {
        FractionalEdgeWeights {
            weights: vec![0.0; m],
        }
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn on(&self, support: &[usize]) -> f64 {
        support.iter().map(|&e| self.weights[e]).sum()
    }
}

/// Result of an extension evaluation: the optimum, the optimal point, and how
/// much work the cutting-plane loop did.
#[derive(Clone, Debug)]
pub struct LpCertificate {
    pub value: f64,
    pub point: FractionalEdgeWeights,
    pub iterations: usize,
    pub rows_added: usize,
}

/// Build and solve the LP for a row set, returning the solver state so the
/// cutting-plane loop can extend it incrementally.
fn build_and_solve(num_edges: usize, rows: &[ConstraintRow]) -> Result<(Vec<Variable>, Solution)> {
    let mut covered = vec![false; num_edges];
    for row in rows {
        if row.kind == RowKind::NonNeg {
            for &e in &row.support {
                if e >= num_edges {
                    return Err(Error::LpStructure(format!(
                        "row references edge {e} beyond {num_edges} variables"
                    )));
                }
                covered[e] = true;
            }
        }
    }
    if let Some(missing) = covered.iter().position(|&c| !c) {
        return Err(Error::LpStructure(format!(
            "edge {missing} has no nonnegativity row"
        )));
    }

    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let mut upper = vec![f64::INFINITY; num_edges];
    for row in rows {
        if row.kind != RowKind::NonNeg && row.support.len() == 1 {
            let e = row.support[0];
            upper[e] = upper[e].min(row.bound);
        }
    }
    let vars: Vec<Variable> = (0..num_edges)
        .map(|e| problem.add_var(1.0, (0.0, upper[e])))
        .collect();
    for row in rows {
        if row.kind == RowKind::NonNeg || row.support.len() < 2 {
            continue;
        }
        let mut expr = LinearExpr::empty();
        for &e in &row.support {
            expr.add(vars[e], 1.0);
        }
        problem.add_constraint(expr, ComparisonOp::Le, row.bound);
    }
    let solution = problem
        .solve()
        .map_err(|e| Error::LpStructure(e.to_string()))?;
    Ok((vars, solution))
}

fn extract_point(vars: &[Variable], solution: &Solution) -> FractionalEdgeWeights {
    FractionalEdgeWeights {
        weights: vars.iter().map(|&v| *solution.var_value(v)).collect(),
    }
}

/// Maximize total edge weight over the rows. Rows must include a
/// nonnegativity row for every edge; singleton-support upper-bound rows are
/// folded into variable bounds. Deterministic given identical input order.
pub fn lp_maximize(
    num_edges: usize,
    rows: &[ConstraintRow],
    tol: f64,
) -> Result<FractionalEdgeWeights> {
    let (vars, solution) = build_and_solve(num_edges, rows)?;
    let point = extract_point(&vars, &solution);
    check_rows(&point, rows, 10.0 * tol)?;
    Ok(point)
}

fn check_rows(x: &FractionalEdgeWeights, rows: &[ConstraintRow], slack: f64) -> Result<()> {
    for row in rows {
        match row.kind {
            RowKind::NonNeg => {
                for &e in &row.support {
                    if x.weights[e] < -slack {
                        return Err(Error::LpStructure(format!(
                            "solver returned x_{e} = {} < 0",
                            x.weights[e]
                        )));
                    }
                }
            }
            _ => {
                let v = x.on(&row.support);
                if v > row.bound + slack {
                    return Err(Error::LpStructure(format!(
                        "solver violated a {:?} row: {v} > {}",
                        row.kind, row.bound
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Most-violated subset row by exhaustive scan over all vertex subsets.
/// Returns the S maximizing `x(E[S]) - |S| + 1` when that exceeds `tol`.
pub fn separate_forest_bruteforce(
    g: &Graph,
    x: &FractionalEdgeWeights,
    tol: f64,
) -> Result<Option<VertexSet>> {
    let n = g.n();
    if n > SEPARATION_MAX_N {
        return Err(Error::Capacity(format!(
            "brute-force separation scans 2^n subsets; n = {n} > {SEPARATION_MAX_N}"
        )));
    }
    if g.m() == 0 || n < 2 {
        return Ok(None);
    }
    // incident[v] lists (neighbor, edge index)
    let edges = g.edge_list();
    let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        incident[u].push((v, i));
        incident[v].push((u, i));
    }
    let size = 1usize << n;
    let mut weight_in = vec![0.0f64; size];
    let mut best: Option<(f64, u64)> = None;
    for mask in 1..size as u64 {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let mut w = weight_in[rest as usize];
        for &(u, e) in &incident[v] {
            if rest & (1 << u) != 0 {
                w += x.weights[e];
            }
        }
        weight_in[mask as usize] = w;
        let k = mask.count_ones() as usize;
        if k >= 2 {
            let viol = w - (k as f64 - 1.0);
            if viol > tol && best.map_or(true, |(bv, _)| viol > bv) {
                best = Some((viol, mask));
            }
        }
    }
    Ok(best.map(|(_, mask)| VertexSet::from_mask(mask)))
}

/// Min-cut separation for the subset rows. A violated subset must contain an
/// edge of positive weight, so for each such anchor edge (scanned by
/// decreasing weight) we solve a maximum-weight closure: edges carry profit
/// x_e, vertices cost 1, selecting an edge forces its endpoints, and the
/// anchor endpoints are forced in. A closure of value above −1 yields a
/// violated S; the first one found is returned.
pub fn separate_forest_maxflow(
    g: &Graph,
    x: &FractionalEdgeWeights,
    tol: f64,
) -> Option<VertexSet> {
    let n = g.n();
    let edges = g.edge_list();
    let m = edges.len();
    let w: Vec<f64> = x.weights.iter().map(|&v| v.max(0.0)).collect();

    let positive: Vec<usize> = (0..m).filter(|&e| w[e] > 0.0).collect();
    let total: f64 = positive.iter().map(|&e| w[e]).sum();
    if total <= 1.0 + tol {
        // x(E[S]) <= total <= 1 + tol <= |S| - 1 + tol for any |S| >= 2
        return None;
    }

    let mut anchors: Vec<usize> = (0..m).filter(|&e| w[e] > tol).collect();
    anchors.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap().then(a.cmp(&b)));

    // node layout: 0 = source, 1 = sink, 2.. = positive edge nodes, then
    // vertex nodes (only vertices touching positive edges matter)
    let mut vertex_node = vec![usize::MAX; n];
    let mut vertices = Vec::new();
    for &e in &positive {
        let (u, v) = edges[e];
        for z in [u, v] {
            if vertex_node[z] == usize::MAX {
                vertex_node[z] = 2 + positive.len() + vertices.len();
                vertices.push(z);
            }
        }
    }
    let node_count = 2 + positive.len() + vertices.len();
    let inf = total + n as f64 + 10.0;
    let flow_eps = 1e-12;

    for &anchor in &anchors {
        let (au, av) = edges[anchor];
        let mut net = FlowNetwork::new(node_count);
        for (i, &e) in positive.iter().enumerate() {
            let (u, v) = edges[e];
            net.add_arc(0, 2 + i, w[e]);
            net.add_arc(2 + i, vertex_node[u], inf);
            net.add_arc(2 + i, vertex_node[v], inf);
        }
        for &v in &vertices {
            net.add_arc(vertex_node[v], 1, 1.0);
        }
        net.add_arc(0, vertex_node[au], inf);
        net.add_arc(0, vertex_node[av], inf);

        let cut = net.max_flow(0, 1, flow_eps);
        if total - cut > -1.0 + tol {
            let side = net.source_side(0, 1e-9);
            let s =
                VertexSet::from_iter(vertices.iter().copied().filter(|&v| side[vertex_node[v]]));
            // recompute the violation from the raw point
            let in_s: f64 = edges
                .iter()
                .enumerate()
                .filter(|(_, &(u, v))| s.contains(u) && s.contains(v))
                .map(|(e, _)| x.weights[e])
                .sum();
            let viol = in_s - (s.len() as f64 - 1.0);
            if s.len() >= 2 && viol > tol {
                return Some(s);
            }
        }
    }
    None
}

/// Cheap exact pre-checks for violated subset rows, used by the evaluation
/// loop before paying for the min-cut scan. Returns only genuinely violated
/// sets (possibly many per call); an empty result certifies nothing.
///
/// Two passes. The first peels each positive-weight region by repeatedly
/// removing the vertex of smallest weighted degree, checking the violation
/// x(E[S]) − |S| + 1 of every nested subset along the way; when a violated
/// subset is found, it is recorded and the remainder of the region is peeled
/// again, so disjoint violated pockets each yield a row. The second pass
/// sweeps for cycles of near-unit edges, each violated by construction.
fn separate_cheap(g: &Graph, x: &FractionalEdgeWeights, tol: f64) -> Vec<VertexSet> {
    let n = g.n();
    let edges = g.edge_list();

    let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        if x.weights[i] > 0.0 {
            incident[u].push((v, i));
            incident[v].push((u, i));
        }
    }

    // connected pieces of the positive-weight subgraph restricted to `live`
    fn pieces(live: &[usize], incident: &[Vec<(usize, usize)>], n: usize) -> Vec<Vec<usize>> {
        let mut inside = vec![false; n];
        for &v in live {
            inside[v] = true;
        }
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for &start in live {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut members = vec![start];
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &(v, _) in &incident[u] {
                    if inside[v] && !seen[v] {
                        seen[v] = true;
                        members.push(v);
                        stack.push(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    let mut found: Vec<VertexSet> = Vec::new();
    let all: Vec<usize> = (0..n).filter(|&v| !incident[v].is_empty()).collect();
    let mut work: Vec<Vec<usize>> = pieces(&all, &incident, n);
    while let Some(members) = work.pop() {
        if members.len() < 2 {
            continue;
        }
        let mut alive = vec![false; n];
        let mut wdeg = vec![0.0f64; n];
        let mut total = 0.0f64;
        for &v in &members {
            alive[v] = true;
        }
        for &v in &members {
            for &(u, e) in &incident[v] {
                if alive[u] {
                    wdeg[v] += x.weights[e];
                    if v < u {
                        total += x.weights[e];
                    }
                }
            }
        }
        let mut size = members.len();
        let mut removed_order: Vec<usize> = Vec::new();
        let mut best_local: Option<(f64, usize)> = None; // (viol, removals before)
        while size >= 2 {
            let viol = total - (size as f64 - 1.0);
            if viol > tol && best_local.map_or(true, |(bv, _)| viol > bv) {
                best_local = Some((viol, removed_order.len()));
            }
            let v = members
                .iter()
                .copied()
                .filter(|&v| alive[v])
                .min_by(|&a, &b| wdeg[a].partial_cmp(&wdeg[b]).unwrap().then(a.cmp(&b)))
                .expect("nonempty");
            alive[v] = false;
            total -= wdeg[v];
            for &(u, e) in &incident[v] {
                if alive[u] {
                    wdeg[u] -= x.weights[e];
                }
            }
            removed_order.push(v);
            size -= 1;
        }
        if let Some((_, cut)) = best_local {
            let dropped: std::collections::HashSet<usize> =
                removed_order[..cut].iter().copied().collect();
            let subset: Vec<usize> = members
                .iter()
                .copied()
                .filter(|v| !dropped.contains(v))
                .collect();
            // the leftover may hide further disjoint pockets
            let leftover: Vec<usize> = if subset.len() + 1 < members.len() {
                let kept: std::collections::HashSet<usize> = subset.iter().copied().collect();
                members
                    .iter()
                    .copied()
                    .filter(|v| !kept.contains(v))
                    .collect()
            } else {
                Vec::new()
            };
            found.push(VertexSet::from_iter(subset));
            if leftover.len() >= 2 {
                work.extend(pieces(&leftover, &incident, n));
            }
        }
    }

    // Heavy cycles: each cycle whose edges all carry weight >= 1 - 1/(2n) is
    // violated by at least 1/2. Closing edges are withheld from the scratch
    // forest, so one sweep reports every independent heavy cycle.
    let heavy = 1.0 - 1.0 / (2.0 * n.max(2) as f64);
    let mut forest = crate::forest::ForestEdgeSet::new(n);
    for (i, &(u, v)) in edges.iter().enumerate() {
        if x.weights[i] >= heavy {
            if forest.connects(u, v) {
                found.push(VertexSet::from_iter(forest_path(&forest, u, v)));
            } else {
                forest.insert(u, v).expect("checked acyclic");
            }
        }
    }
    found
}

/// Vertices on the unique forest path between `u` and `v` (inclusive).
fn forest_path(forest: &crate::forest::ForestEdgeSet, u: usize, v: usize) -> Vec<usize> {
    let n = forest.n();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([u]);
    seen[u] = true;
    'bfs: while let Some(a) = queue.pop_front() {
        for b in forest.neighbors(a) {
            if !seen[b] {
                seen[b] = true;
                prev[b] = a;
                if b == v {
                    break 'bfs;
                }
                queue.push_back(b);
            }
        }
    }
    let mut path = vec![v];
    let mut cur = v;
    while cur != u {
        cur = prev[cur];
        path.push(cur);
    }
    path
}

fn initial_rows(g: &Graph, delta: f64) -> Vec<ConstraintRow> {
    let edges = g.edge_list();
    let mut rows: Vec<ConstraintRow> = (0..edges.len()).map(ConstraintRow::nonneg).collect();
    for v in 0..g.n() {
        if g.degree(v) > 0 {
            rows.push(ConstraintRow::degree(g, v, delta));
        }
    }
    for (u, v) in edges {
        rows.push(ConstraintRow::forest_subset(g, &VertexSet::from_iter([u, v])));
    }
    rows
}

/// Evaluate the extension by cutting planes: start from nonnegativity, degree
/// rows, and all pairwise rows, then alternate LP solves with min-cut
/// separation until no subset row is violated beyond `tol`.
pub fn eval_lipschitz_extension(g: &Graph, delta: f64, tol: f64) -> Result<LpCertificate> {
    let (cert, _) = eval_lipschitz_extension_with_rows(g, delta, tol)?;
    Ok(cert)
}

/// Same as [`eval_lipschitz_extension`] but also returns the final row set,
/// for debugging dumps.
pub fn eval_lipschitz_extension_with_rows(
    g: &Graph,
    delta: f64,
    tol: f64,
) -> Result<(LpCertificate, Vec<ConstraintRow>)> {
    let mut pool = Vec::new();
    let cert = eval_lipschitz_extension_pooled(g, delta, tol, &mut pool)?;
    let mut rows = initial_rows(g, delta);
    rows.extend(pool.iter().map(|s| ConstraintRow::forest_subset(g, s)));
    Ok((cert, rows))
}

/// Cutting-plane evaluation that seeds from (and extends) a pool of
/// previously discovered subset rows. Subset rows are valid for every graph
/// and every Δ, so a release can share one pool across all its grid
/// evaluations; the separation loop still certifies the final point.
pub fn eval_lipschitz_extension_pooled(
    g: &Graph,
    delta: f64,
    tol: f64,
    pool: &mut Vec<VertexSet>,
) -> Result<LpCertificate> {
    if delta <= 0.0 || !delta.is_finite() {
        return Err(Error::Parameter(format!("delta = {delta} must be positive")));
    }
    let n = g.n();
    let m = g.m();

    // Any spanning forest has per-vertex degree at most max_degree(G), so for
    // delta at or above it the forest indicator is optimal and the value is
    // the spanning-forest size itself.
    if delta >= g.max_degree() as f64 {
        let forest = dfs_spanning_forest(g);
        let cert = LpCertificate {
            value: forest.len() as f64,
            point: FractionalEdgeWeights {
                weights: forest.indicator(g),
            },
            iterations: 0,
            rows_added: 0,
        };
        return Ok(cert);
    }

    let mut rows = initial_rows(g, delta);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for s in pool.iter() {
        rows.push(ConstraintRow::forest_subset(g, s));
        seen.insert(s.iter().collect());
    }
    let (vars, mut solution) = build_and_solve(m, &rows)?;
    let mut point = extract_point(&vars, &solution);
    let mut iterations = 1usize;
    let mut rows_added = 0usize;
    let cap = 10 * n * n;

    loop {
        // cheap checks first; only the min-cut scan may certify feasibility
        let mut batch: Vec<VertexSet> = separate_cheap(g, &point, tol)
            .into_iter()
            .filter(|s| !seen.contains(&s.iter().collect::<Vec<_>>()))
            .collect();
        if batch.is_empty() {
            match separate_forest_maxflow(g, &point, tol) {
                None => break,
                Some(s) => {
                    if seen.contains(&s.iter().collect::<Vec<_>>()) {
                        return Err(Error::LpStructure(format!(
                            "separator returned an already-added subset of {} vertices; \
                             solver/separator tolerance conflict",
                            s.len()
                        )));
                    }
                    batch.push(s);
                }
            }
        }
        for s in batch {
            if !seen.insert(s.iter().collect::<Vec<_>>()) {
                continue;
            }
            if iterations >= cap {
                return Err(Error::Convergence {
                    max_iters: cap,
                    last: Box::new(LpCertificate {
                        value: point.total(),
                        point,
                        iterations,
                        rows_added,
                    }),
                });
            }
            let row = ConstraintRow::forest_subset(g, &s);
            let mut expr = LinearExpr::empty();
            for &e in &row.support {
                expr.add(vars[e], 1.0);
            }
            let bound = row.bound;
            rows.push(row);
            pool.push(s);
            // Re-optimize from the previous basis; rebuild from scratch if
            // the incremental step trips on numerics.
            solution = match solution.add_constraint(expr, ComparisonOp::Le, bound) {
                Ok(s) => s,
                Err(_) => build_and_solve(m, &rows)?.1,
            };
            iterations += 1;
            rows_added += 1;
        }
        point = extract_point(&vars, &solution);
    }
    check_rows(&point, &rows, 10.0 * tol)?;

    let cert = LpCertificate {
        value: point.total(),
        point,
        iterations,
        rows_added,
    };
    Ok(cert)
}

/// Reference evaluator: materialize every subset row with a nonempty induced
/// edge set and solve the LP once. Exponential; capped at n <= 14.
pub fn eval_extension_bruteforce(g: &Graph, delta: f64, tol: f64) -> Result<f64> {
    if delta <= 0.0 || !delta.is_finite() {
        return Err(Error::Parameter(format!("delta = {delta} must be positive")));
    }
    let n = g.n();
    if n > BRUTEFORCE_MAX_N {
        return Err(Error::Capacity(format!(
            "brute-force evaluation materializes 2^n rows; n = {n} > {BRUTEFORCE_MAX_N}"
        )));
    }
    let edges = g.edge_list();
    let m = edges.len();
    if m == 0 {
        return Ok(0.0);
    }
    let mut rows: Vec<ConstraintRow> = (0..m).map(ConstraintRow::nonneg).collect();
    for v in 0..n {
        if g.degree(v) > 0 {
            rows.push(ConstraintRow::degree(g, v, delta));
        }
    }
    for mask in 1u64..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let support: Vec<usize> = edges
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| mask & (1 << u) != 0 && mask & (1 << v) != 0)
            .map(|(i, _)| i)
            .collect();
        if support.is_empty() {
            continue;
        }
        rows.push(ConstraintRow {
            kind: RowKind::ForestSubset,
            support,
            bound: mask.count_ones() as f64 - 1.0,
            witness: Some(VertexSet::from_mask(mask)),
        });
    }
    let point = lp_maximize(m, &rows, tol)?;
    Ok(point.total())
}

/// Debug dump of a row set and point as JSON: row kinds, support as edge
/// pairs, bounds, and the weight map.
pub fn dump_lp_json(
    g: &Graph,
    rows: &[ConstraintRow],
    x: &FractionalEdgeWeights,
) -> serde_json::Value {
    let edges = g.edge_list();
    let rows_json: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "kind": r.kind,
                "support": r.support.iter().map(|&e| edges[e]).collect::<Vec<_>>(),
                "bound": r.bound,
            })
        })
        .collect();
    let weights: serde_json::Map<String, serde_json::Value> = edges
        .iter()
        .zip(&x.weights)
        .map(|(&(u, v), &w)| (format!("{u}-{v}"), serde_json::json!(w)))
        .collect();
    serde_json::json!({ "rows": rows_json, "weights": weights })
}
