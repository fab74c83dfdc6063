//! Offline tour oracles: minimum spanning tree weight, the exact shortest
//! covering walk, and the MST doubling walk.
//!
//! All oracles first collapse the input to its distinct points, since the
//! optimal walk does not depend on order or repetition.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{euclidean, MetricSpace, PointId};

/// Largest number of distinct points the Held-Karp oracle accepts by default.
pub const DEFAULT_EXACT_CAP: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("point set is empty")]
    Empty,
    #[error("{distinct} distinct points exceed the exact-oracle cap of {cap}")]
    CapExceeded { distinct: usize, cap: usize },
}

/// Lower and upper bounds on the optimal walk length of a point set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TourBounds {
    pub mst: f64,
    pub lower: f64,
    pub upper: f64,
    pub exact: Option<f64>,
}

impl TourBounds {
    /// The tightest available upper estimate of OPT.
    pub fn best_upper(&self) -> f64 {
        self.exact.unwrap_or(self.upper)
    }

    pub fn best_lower(&self) -> f64 {
        self.exact.unwrap_or(self.lower)
    }
}

/// A minimum spanning tree over the distinct points of some input.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    /// Canonical ids, ascending. Node 0 is the root.
    pub nodes: Vec<PointId>,
    /// Parent node index of each node; `None` for the root.
    pub parent: Vec<Option<usize>>,
    pub weight: f64,
}

impl SpanningTree {
    pub fn edges(&self) -> impl Iterator<Item = (PointId, PointId)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|u| (self.nodes[u], self.nodes[v])))
    }
}

/// Prim's algorithm on the complete graph over the distinct points of `ids`.
///
/// Equal-weight candidates are ordered by their (smaller id, larger id) pair,
/// which makes the tree unique.
pub fn minimum_spanning_tree(
    space: &MetricSpace,
    ids: &[PointId],
) -> Result<SpanningTree, OracleError> {
    let nodes = space.distinct(ids);
    let k = nodes.len();
    if k == 0 {
        return Err(OracleError::Empty);
    }
    if let Some((dim, coords)) = space.euclidean_coords() {
        let packed: Vec<f64> = nodes
            .iter()
            .flat_map(|p| {
                coords[p.index() * dim..(p.index() + 1) * dim]
                    .iter()
                    .copied()
            })
            .collect();
        let at = |i: usize| &packed[i * dim..(i + 1) * dim];
        return Ok(prim(nodes, |u, v| euclidean(at(u), at(v))));
    }
    let dist = |u: usize, v: usize| space.dist(nodes[u], nodes[v]);
    let tree = prim(nodes.clone(), dist);
    Ok(tree)
}

/// Dense Prim over `nodes` with distances given by node index.
fn prim(nodes: Vec<PointId>, dist: impl Fn(usize, usize) -> f64) -> SpanningTree {
    let k = nodes.len();
    let mut parent: Vec<Option<usize>> = vec![None; k];
    let mut key = vec![f64::INFINITY; k];
    let mut weight = 0.0;
    // Vertices outside the tree. Selection is by (key, edge pair), a total
    // order, so the scanning order does not affect the result.
    let mut outside: Vec<usize> = (1..k).collect();
    let mut u = 0;
    loop {
        let mut best: Option<usize> = None;
        for (slot, &v) in outside.iter().enumerate() {
            let d = dist(u, v);
            let take = match parent[v] {
                None => true,
                Some(c) => d < key[v] || (d == key[v] && pair(u, v) < pair(c, v)),
            };
            if take {
                key[v] = d;
                parent[v] = Some(u);
            }
            let better = match best {
                None => true,
                Some(bs) => {
                    let b = outside[bs];
                    key[v] < key[b]
                        || (key[v] == key[b]
                            && pair(parent[v].unwrap(), v) < pair(parent[b].unwrap(), b))
                }
            };
            if better {
                best = Some(slot);
            }
        }
        match best {
            Some(slot) => {
                u = outside.swap_remove(slot);
                weight += key[u];
            }
            None => break,
        }
    }
    SpanningTree {
        nodes,
        parent,
        weight,
    }
}

#[inline]
fn pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A minimum spanning tree grown one vertex at a time.
///
/// Inserting a vertex walks the current tree once in post-order: at every
/// node the heavier of (best edge from the child's subtree to the new
/// vertex, tree edge to the child) is dropped, which costs one distance
/// evaluation per existing node.
#[derive(Debug, Clone, Default)]
pub struct IncrementalMst {
    nodes: Vec<PointId>,
    edges: Vec<(u32, u32, f64)>,
}

impl IncrementalMst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Adds `z`, which should not already be a node (a duplicate only adds a
    /// zero-weight edge).
    pub fn insert(&mut self, z: PointId, space: &MetricSpace) {
        let k = self.nodes.len();
        self.nodes.push(z);
        if k == 0 {
            return;
        }
        let mut start = vec![0usize; k + 1];
        for &(a, b, _) in &self.edges {
            start[a as usize + 1] += 1;
            start[b as usize + 1] += 1;
        }
        for i in 0..k {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut adj = vec![(0u32, 0.0); 2 * self.edges.len()];
        for &(a, b, w) in &self.edges {
            adj[fill[a as usize]] = (b, w);
            fill[a as usize] += 1;
            adj[fill[b as usize]] = (a, w);
            fill[b as usize] += 1;
        }

        let mut parent = vec![u32::MAX; k];
        let mut up = vec![0.0; k];
        let mut order = Vec::with_capacity(k);
        let mut stack = vec![0u32];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &(w, wt) in &adj[start[v as usize]..start[v as usize + 1]] {
                if w != parent[v as usize] && w != 0 {
                    parent[w as usize] = v;
                    up[w as usize] = wt;
                    stack.push(w);
                }
            }
        }

        let zi = k as u32;
        let mut best: Vec<(u32, u32, f64)> = (0..k)
            .map(|v| (zi, v as u32, space.dist(z, self.nodes[v])))
            .collect();
        let mut edges = Vec::with_capacity(k);
        for &v in order[1..].iter().rev() {
            let p = parent[v as usize];
            let t = best[v as usize];
            let tree = (v, p, up[v as usize]);
            let (heavy, light) = if t.2 > tree.2 { (t, tree) } else { (tree, t) };
            edges.push(light);
            if heavy.2 < best[p as usize].2 {
                best[p as usize] = heavy;
            }
        }
        edges.push(best[0]);
        self.edges = edges;
    }
}

/// Weight of a minimum spanning tree of the distinct points of `ids`.
pub fn mst_weight(space: &MetricSpace, ids: &[PointId]) -> Result<f64, OracleError> {
    minimum_spanning_tree(space, ids).map(|t| t.weight)
}

/// Exact shortest covering walk, by Held-Karp over Hamiltonian paths with a
/// free start and end. Accepts at most [`DEFAULT_EXACT_CAP`] distinct points.
pub fn exact_opt(space: &MetricSpace, ids: &[PointId]) -> Result<f64, OracleError> {
    exact_opt_with_cap(space, ids, DEFAULT_EXACT_CAP)
}

pub fn exact_opt_with_cap(
    space: &MetricSpace,
    ids: &[PointId],
    cap: usize,
) -> Result<f64, OracleError> {
    let nodes = space.distinct(ids);
    let k = nodes.len();
    if k == 0 {
        return Err(OracleError::Empty);
    }
    if k > cap {
        return Err(OracleError::CapExceeded { distinct: k, cap });
    }
    if k == 1 {
        return Ok(0.0);
    }
    let d: Vec<f64> = (0..k * k)
        .map(|i| space.dist(nodes[i / k], nodes[i % k]))
        .collect();
    let full = (1usize << k) - 1;
    // best[mask * k + end]: shortest path visiting exactly `mask`, ending at `end`.
    let mut best = vec![f64::INFINITY; (full + 1) * k];
    for v in 0..k {
        best[(1 << v) * k + v] = 0.0;
    }
    for mask in 1..=full {
        for end in 0..k {
            let cur = best[mask * k + end];
            if cur == f64::INFINITY || mask & (1 << end) == 0 {
                continue;
            }
            let mut rest = full & !mask;
            while rest != 0 {
                let t = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let slot = &mut best[(mask | (1 << t)) * k + t];
                let cand = cur + d[end * k + t];
                if cand < *slot {
                    *slot = cand;
                }
            }
        }
    }
    Ok(best[full * k..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// Depth-first preorder of the MST from its smallest id, visiting children in
/// ascending id order. Repeated vertices are shortcut, so the walk lists each
/// distinct point once and has length at most twice the tree weight.
pub fn doubling_walk(
    space: &MetricSpace,
    ids: &[PointId],
) -> Result<(Vec<PointId>, f64), OracleError> {
    let tree = minimum_spanning_tree(space, ids)?;
    Ok(walk_tree(space, &tree))
}

fn walk_tree(space: &MetricSpace, tree: &SpanningTree) -> (Vec<PointId>, f64) {
    let k = tree.nodes.len();
    let mut children = vec![Vec::new(); k];
    for (v, p) in tree.parent.iter().enumerate() {
        if let Some(u) = p {
            children[*u].push(v);
        }
    }
    let mut walk = Vec::with_capacity(k);
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        walk.push(tree.nodes[u]);
        // node indices ascend with ids; push in reverse to visit smallest first
        stack.extend(children[u].iter().rev());
    }
    let length = walk.windows(2).map(|w| space.dist(w[0], w[1])).sum();
    (walk, length)
}

/// MST sandwich bounds on OPT, optionally with the exact value when the
/// distinct-point count is within `cap`.
pub fn opt_bounds_with_cap(
    space: &MetricSpace,
    ids: &[PointId],
    want_exact: bool,
    cap: usize,
) -> Result<TourBounds, OracleError> {
    let tree = minimum_spanning_tree(space, ids)?;
    let (_, walk_len) = walk_tree(space, &tree);
    let exact = if want_exact && tree.nodes.len() <= cap {
        Some(exact_opt_with_cap(space, ids, cap)?)
    } else {
        None
    };
    Ok(TourBounds {
        mst: tree.weight,
        lower: tree.weight,
        upper: walk_len.min(2.0 * tree.weight),
        exact,
    })
}

pub fn opt_bounds(
    space: &MetricSpace,
    ids: &[PointId],
    want_exact: bool,
) -> Result<TourBounds, OracleError> {
    opt_bounds_with_cap(space, ids, want_exact, DEFAULT_EXACT_CAP)
}
