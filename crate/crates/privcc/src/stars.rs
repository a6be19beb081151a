//! Induced-star analysis and down-sensitivity of the spanning-forest size.
//!
//! An induced k-star is a center adjacent to k pairwise non-adjacent leaves;
//! `s(G)` is the largest such k. The down-sensitivity of the spanning-forest
//! size equals `s(G)`, which the brute-force scanner here verifies at desk
//! scale.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::stream::RngStream;

const NEIGHBORHOOD_CAP: usize = 30;

/// Exact `s(G)` with a witness (center plus independent leaves).
///
/// For each center, the leaves form a maximum independent set of the
/// subgraph induced by its neighborhood; that set is found by branch and
/// bound over a degeneracy ordering. Requires every degree at most 30
/// (automatic when n <= 30); larger graphs get a capacity error pointing at
/// the greedy variant.
pub fn largest_induced_star_exact(g: &Graph) -> Result<(usize, VertexSet)> {
    if g.max_degree() > NEIGHBORHOOD_CAP {
        return Err(Error::Capacity(format!(
            "a vertex has degree {} > {NEIGHBORHOOD_CAP}; use largest_induced_star_greedy",
            g.max_degree()
        )));
    }
    let mut best = 0usize;
    let mut witness = VertexSet::new();
    for center in 0..g.n() {
        let nbrs: Vec<usize> = g.neighbors(center).collect();
        if nbrs.len() <= best {
            continue;
        }
        let (size, leaves_local) = max_independent_set(g, &nbrs);
        if size > best {
            best = size;
            witness = VertexSet::from_iter(
                std::iter::once(center).chain(leaves_local.iter().map(|&i| nbrs[i])),
            );
        }
    }
    Ok((best, witness))
}

/// Branch-and-bound maximum independent set on the subgraph induced by
/// `verts` (indices into `verts` are the local ids). Deterministic.
fn max_independent_set(g: &Graph, verts: &[usize]) -> (usize, Vec<usize>) {
    let k = verts.len();
    debug_assert!(k <= 64);
    let mut adj = vec![0u64; k];
    for i in 0..k {
        for j in (i + 1)..k {
            if g.has_edge(verts[i], verts[j]) {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
    }
    // Degeneracy order: repeatedly peel a minimum-degree vertex. Branching in
    // this order keeps candidate sets small early.
    let order = degeneracy_order(&adj);

    let mut best = 0usize;
    let mut best_set = 0u64;
    let full: u64 = if k == 64 { !0 } else { (1 << k) - 1 };

    fn rec(
        adj: &[u64],
        order: &[usize],
        cand: u64,
        cur: u64,
        cur_size: usize,
        best: &mut usize,
        best_set: &mut u64,
    ) {
        if cur_size + (cand.count_ones() as usize) <= *best {
            return;
        }
        if cand == 0 {
            if cur_size > *best {
                *best = cur_size;
                *best_set = cur;
            }
            return;
        }
        let &v = order
            .iter()
            .find(|&&v| cand & (1 << v) != 0)
            .expect("cand nonempty");
        // include v
        rec(
            adj,
            order,
            cand & !(adj[v] | (1 << v)),
            cur | (1 << v),
            cur_size + 1,
            best,
            best_set,
        );
        // exclude v
        rec(adj, order, cand & !(1 << v), cur, cur_size, best, best_set);
    }
    rec(&adj, &order, full, 0, 0, &mut best, &mut best_set);

    let set: Vec<usize> = (0..k).filter(|&i| best_set & (1 << i) != 0).collect();
    (best, set)
}

fn degeneracy_order(adj: &[u64]) -> Vec<usize> {
    let k = adj.len();
    let mut removed = 0u64;
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let v = (0..k)
            .filter(|&v| removed & (1 << v) == 0)
            .min_by_key(|&v| (adj[v] & !removed).count_ones())
            .expect("vertices remain");
        removed |= 1 << v;
        order.push(v);
    }
    order
}

/// Greedy lower bound for `s(G)`: randomized maximal independent sets in each
/// neighborhood with a few restarts. Always returns the size of some valid
/// induced star, hence a value at most `s(G)`.
pub fn largest_induced_star_greedy(g: &Graph, rng: &mut RngStream) -> usize {
    const RESTARTS: usize = 3;
    let mut best = 0usize;
    for center in 0..g.n() {
        let nbrs: Vec<usize> = g.neighbors(center).collect();
        if nbrs.len() <= best {
            continue;
        }
        for _ in 0..RESTARTS {
            let mut perm = nbrs.clone();
            for i in (1..perm.len()).rev() {
                let j = rng.gen_range(0..=i);
                perm.swap(i, j);
            }
            let mut chosen: Vec<usize> = Vec::new();
            for &u in &perm {
                if chosen.iter().all(|&w| !g.has_edge(u, w)) {
                    chosen.push(u);
                }
            }
            best = best.max(chosen.len());
        }
    }
    best
}

/// Down-sensitivity of the spanning-forest size, computed as `s(G)`.
pub fn down_sensitivity_sf(g: &Graph) -> Result<usize> {
    largest_induced_star_exact(g).map(|(s, _)| s)
}

/// Exact down-sensitivity of an arbitrary graph function by scanning every
/// pair of node-neighboring induced subgraphs. Exponential; capped at n <= 12.
pub fn down_sensitivity_bruteforce<F>(f: F, g: &Graph) -> Result<f64>
where
    F: Fn(&Graph) -> f64,
{
    let n = g.n();
    if n > 12 {
        return Err(Error::Capacity(format!(
            "down_sensitivity_bruteforce enumerates 2^n induced subgraphs; n = {n} > 12"
        )));
    }
    let values: Vec<f64> = (0u64..(1 << n))
        .map(|mask| f(&g.induced_by_mask(mask)))
        .collect();
    let mut ds: f64 = 0.0;
    for mask in 0u64..(1 << n) {
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros();
            rest &= rest - 1;
            let smaller = mask & !(1u64 << v);
            ds = ds.max((values[mask as usize] - values[smaller as usize]).abs());
        }
    }
    Ok(ds)
}
