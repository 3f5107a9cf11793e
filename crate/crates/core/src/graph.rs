//! Undirected weighted graphs in compressed adjacency form, seeded random
//! generators and a few combinatorial utilities.

use std::collections::{BTreeMap, VecDeque};
use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Hop distance reported for nodes that cannot be reached.
pub const UNREACHABLE: usize = usize::MAX;

/// One undirected edge as read from an edge list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: Option<f64>,
}

impl Edge {
    pub fn new(u: usize, v: usize) -> Self {
        Edge { u, v, weight: None }
    }

    pub fn weighted(u: usize, v: usize, weight: f64) -> Self {
        Edge {
            u,
            v,
            weight: Some(weight),
        }
    }
}

impl From<(usize, usize)> for Edge {
    fn from((u, v): (usize, usize)) -> Self {
        Edge::new(u, v)
    }
}

impl From<(usize, usize, f64)> for Edge {
    fn from((u, v, w): (usize, usize, f64)) -> Self {
        Edge::weighted(u, v, w)
    }
}

/// Symmetric adjacency in CSR layout. Neighbor lists are sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
}

impl Graph {
    /// Builds a graph from undirected edges. Either orientation is accepted;
    /// repeated edges collapse and the last weight wins.
    pub fn from_edge_list<E: Into<Edge> + Copy>(edges: &[E], n: usize) -> Result<Graph> {
        let mut unique: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &e in edges {
            let Edge { u, v, weight } = e.into();
            if u >= n || v >= n {
                return Err(Error::NodeOutOfRange { u, v, n });
            }
            if u == v {
                return Err(Error::SelfLoop { u });
            }
            let w = weight.unwrap_or(1.0);
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::BadWeight { u, v, weight: w });
            }
            unique.insert((u.min(v), u.max(v)), w);
        }
        Ok(Self::from_unique(n, &unique))
    }

    fn from_unique(n: usize, unique: &BTreeMap<(usize, usize), f64>) -> Graph {
        let mut counts = vec![0usize; n];
        for &(u, v) in unique.keys() {
            counts[u] += 1;
            counts[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let total = offsets[n];
        let mut neighbors = vec![0usize; total];
        let mut weights = vec![0.0; total];
        let mut fill = offsets[..n].to_vec();
        // BTreeMap order visits (u, v) with u < v sorted; pushing both
        // directions keeps each list sorted because lower neighbors of v
        // arrive before its higher ones.
        let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * unique.len());
        for (&(u, v), &w) in unique {
            pairs.push((u, v, w));
            pairs.push((v, u, w));
        }
        pairs.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for (u, v, w) in pairs {
            neighbors[fill[u]] = v;
            weights[fill[u]] = w;
            fill[u] += 1;
        }
        Graph {
            n,
            offsets,
            neighbors,
            weights,
        }
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Graph {
        Graph {
            n,
            offsets: vec![0; n + 1],
            neighbors: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Edge weights aligned with [`Graph::neighbors`].
    pub fn neighbor_weights(&self, v: usize) -> &[f64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Number of incident edges.
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Sum of incident edge weights; equals [`Graph::degree`] when unweighted.
    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.neighbor_weights(v).iter().sum()
    }

    pub fn weighted_degrees(&self) -> Vec<f64> {
        (0..self.n).map(|v| self.weighted_degree(v)).collect()
    }

    pub fn max_weighted_degree(&self) -> f64 {
        self.weighted_degrees().into_iter().fold(0.0, f64::max)
    }

    /// Weight of edge `(u, v)` if present.
    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        let nb = self.neighbors(u);
        nb.binary_search(&v).ok().map(|i| self.neighbor_weights(u)[i])
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_weight(u, v).is_some()
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`, in sorted order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for (&v, &w) in self.neighbors(u).iter().zip(self.neighbor_weights(u)) {
                if u < v {
                    out.push((u, v, w));
                }
            }
        }
        out
    }

    /// Copy of the graph with `(u, v)` added (or its weight replaced).
    pub fn with_edge(&self, u: usize, v: usize, weight: f64) -> Result<Graph> {
        let mut edges: Vec<Edge> = self
            .edges()
            .into_iter()
            .map(|(a, b, w)| Edge::weighted(a, b, w))
            .collect();
        edges.push(Edge::weighted(u, v, weight));
        Graph::from_edge_list(&edges, self.n)
    }

    /// Disjoint union; nodes of `other` are shifted by `self.node_count()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n;
        let mut edges: Vec<Edge> = self
            .edges()
            .into_iter()
            .map(|(a, b, w)| Edge::weighted(a, b, w))
            .collect();
        edges.extend(
            other
                .edges()
                .into_iter()
                .map(|(a, b, w)| Edge::weighted(a + shift, b + shift, w)),
        );
        Graph::from_edge_list(&edges, self.n + other.n).expect("union of valid graphs")
    }

    /// Relabels nodes so that old node `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: perm.len(),
            });
        }
        let edges: Vec<Edge> = self
            .edges()
            .into_iter()
            .map(|(a, b, w)| Edge::weighted(perm[a], perm[b], w))
            .collect();
        Graph::from_edge_list(&edges, self.n)
    }

    /// Subgraph induced by `nodes`; node `nodes[i]` becomes `i`.
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let mut index = vec![UNREACHABLE; self.n];
        for (i, &v) in nodes.iter().enumerate() {
            index[v] = i;
        }
        let edges: Vec<Edge> = self
            .edges()
            .into_iter()
            .filter(|&(a, b, _)| index[a] != UNREACHABLE && index[b] != UNREACHABLE)
            .map(|(a, b, w)| Edge::weighted(index[a], index[b], w))
            .collect();
        Graph::from_edge_list(&edges, nodes.len()).expect("induced subgraph of a valid graph")
    }

    /// True when every edge of `self` is in `other` with at least the same
    /// weight and the node counts match.
    pub fn is_dominated_by(&self, other: &Graph) -> bool {
        self.n == other.n
            && self
                .edges()
                .into_iter()
                .all(|(u, v, w)| other.edge_weight(u, v).is_some_and(|w2| w2 >= w))
    }
}

/// Real value per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal(Vec<f64>);

impl Signal {
    pub fn new(values: Vec<f64>) -> Result<Signal> {
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Signal(values))
    }

    pub fn zeros(n: usize) -> Signal {
        Signal(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Signal {
        Signal(vec![1.0; n])
    }

    /// Indicator of node `v`.
    pub fn dirac(n: usize, v: usize) -> Signal {
        let mut x = vec![0.0; n];
        x[v] = 1.0;
        Signal(x)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    /// Errors unless the signal has one value per node of `g`.
    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() == n {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: n,
                got: self.0.len(),
            })
        }
    }
}

impl Deref for Signal {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::BadProbability(p))
    }
}

/// Erdős–Rényi G(n, p): each unordered pair independently with probability
/// `p`. Pairs are visited in `(i, j)`, `i < j` lexicographic order, one
/// uniform draw each, from stream 0 of `seed`.
pub fn generate_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    generate_er_stream(n, p, seed, seed::streams::GRAPH)
}

/// [`generate_er`] drawing from an explicit stream; batch item `j` uses
/// `streams::GRAPH + j`.
pub fn generate_er_stream(n: usize, p: f64, seed: u64, stream: u64) -> Result<Graph> {
    check_probability(p)?;
    let mut rng = seed::rng(seed, stream);
    let mut unique = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                unique.insert((i, j), 1.0);
            }
        }
    }
    Ok(Graph::from_unique(n, &unique))
}

/// Block id of each node for `n` nodes split into `blocks` contiguous blocks
/// of size `n / blocks`, the first `n % blocks` blocks taking one extra node.
pub fn sbm_assignment(n: usize, blocks: usize) -> Vec<usize> {
    let base = n / blocks;
    let extra = n % blocks;
    let mut out = Vec::with_capacity(n);
    for b in 0..blocks {
        let size = base + usize::from(b < extra);
        out.extend(std::iter::repeat_n(b, size));
    }
    out
}

/// Stochastic block model with contiguous near-equal blocks (see
/// [`sbm_assignment`]). Same draw order as [`generate_er`].
pub fn generate_sbm(n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64) -> Result<Graph> {
    generate_sbm_stream(n, blocks, p_in, p_out, seed, seed::streams::GRAPH)
}

/// [`generate_sbm`] drawing from an explicit stream.
pub fn generate_sbm_stream(
    n: usize,
    blocks: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
    stream: u64,
) -> Result<Graph> {
    check_probability(p_in)?;
    check_probability(p_out)?;
    if blocks == 0 || blocks > n {
        return Err(Error::InvalidParameter(format!(
            "blocks must be in [1, n]; got {blocks} for n = {n}"
        )));
    }
    let block = sbm_assignment(n, blocks);
    let mut rng = seed::rng(seed, stream);
    let mut unique = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if block[i] == block[j] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                unique.insert((i, j), 1.0);
            }
        }
    }
    Ok(Graph::from_unique(n, &unique))
}

/// Cycle C_n.
pub fn generate_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("cycle needs n >= 3, got {n}")));
    }
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edge_list(&edges, n)
}

/// Path P_n.
pub fn generate_path(n: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edge_list(&edges, n).expect("path edges are valid")
}

/// Complete graph K_n.
pub fn generate_complete(n: usize) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j));
        }
    }
    Graph::from_edge_list(&edges, n).expect("complete graph edges are valid")
}

/// Star with center 0 and `leaves` leaves.
pub fn generate_star(leaves: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (1..=leaves).map(|i| (0, i)).collect();
    Graph::from_edge_list(&edges, leaves + 1).expect("star edges are valid")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub labels: Vec<usize>,
    pub count: usize,
}

impl ComponentLabeling {
    /// Members of each component, in label order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, &c) in self.labels.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

/// Component labels numbered by smallest member.
pub fn connected_components(g: &Graph) -> ComponentLabeling {
    let n = g.node_count();
    let mut labels = vec![UNREACHABLE; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if labels[start] != UNREACHABLE {
            continue;
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if labels[w] == UNREACHABLE {
                    labels[w] = count;
                    queue.push_back(w);
                }
            }
        }
        count += 1;
    }
    ComponentLabeling { labels, count }
}

/// Unweighted hop distances from `v`; [`UNREACHABLE`] for other components.
pub fn bfs_distances(g: &Graph, v: usize) -> Vec<usize> {
    let mut dist = vec![UNREACHABLE; g.node_count()];
    let mut queue = VecDeque::new();
    dist[v] = 0;
    queue.push_back(v);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if dist[w] == UNREACHABLE {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Closed balls `{u : dist(u, v) <= k}` for `k = 0..=max_hop`, each sorted.
pub fn k_hop_neighborhoods(g: &Graph, v: usize, max_hop: usize) -> Vec<Vec<usize>> {
    let dist = bfs_distances(g, v);
    (0..=max_hop)
        .map(|k| (0..g.node_count()).filter(|&u| dist[u] <= k).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_basics() {
        let k2 = Graph::from_edge_list(&[(0, 1)], 2).unwrap();
        assert_eq!(k2.edge_count(), 1);
        assert_eq!(k2.weighted_degrees(), vec![1.0, 1.0]);

        let tri = Graph::from_edge_list(&[(0, 1), (1, 2), (2, 0)], 3).unwrap();
        assert_eq!(tri.weighted_degrees(), vec![2.0, 2.0, 2.0]);

        let dup = Graph::from_edge_list(&[(0, 1), (1, 0)], 2).unwrap();
        assert_eq!(dup, k2);
    }

    #[test]
    fn duplicate_keeps_last_weight() {
        let g = Graph::from_edge_list(&[(0, 1, 2.0), (1, 0, 5.0)], 2).unwrap();
        assert_eq!(g.edge_weight(0, 1), Some(5.0));
        assert_eq!(g.edge_weight(1, 0), Some(5.0));
    }

    #[test]
    fn edge_list_errors() {
        assert_eq!(
            Graph::from_edge_list(&[(0, 3)], 3),
            Err(Error::NodeOutOfRange { u: 0, v: 3, n: 3 })
        );
        assert_eq!(
            Graph::from_edge_list(&[(1, 1)], 3),
            Err(Error::SelfLoop { u: 1 })
        );
        assert!(matches!(
            Graph::from_edge_list(&[(0, 1, 0.0)], 2),
            Err(Error::BadWeight { u: 0, v: 1, .. })
        ));
        assert!(matches!(
            Graph::from_edge_list(&[(0, 1, -1.0)], 2),
            Err(Error::BadWeight { .. })
        ));
    }

    #[test]
    fn offsets_and_symmetry() {
        let g = generate_er(40, 0.2, 3).unwrap();
        assert_eq!(*g.offsets().last().unwrap(), 2 * g.edge_count());
        assert!(g.offsets().windows(2).all(|w| w[0] <= w[1]));
        for u in 0..g.node_count() {
            for (&v, &w) in g.neighbors(u).iter().zip(g.neighbor_weights(u)) {
                assert_ne!(u, v);
                assert_eq!(g.edge_weight(v, u), Some(w));
            }
        }
    }

    #[test]
    fn er_extremes() {
        assert_eq!(generate_er(100, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(generate_er(25, 1.0, 1).unwrap().edge_count(), 300);
        assert_eq!(generate_er(10, 1.5, 1), Err(Error::BadProbability(1.5)));
        assert_eq!(generate_er(30, 0.1, 9), generate_er(30, 0.1, 9));
    }

    #[test]
    fn sbm_block_sizes() {
        let a = sbm_assignment(10, 3);
        assert_eq!(a, vec![0, 0, 0, 0, 1, 1, 1, 2, 2, 2]);
        assert!(generate_sbm(3, 4, 0.5, 0.1, 0).is_err());
        assert!(generate_sbm(3, 0, 0.5, 0.1, 0).is_err());
    }

    #[test]
    fn sbm_disconnected_blocks() {
        let g = generate_sbm(10, 2, 1.0, 0.0, 4).unwrap();
        let c = connected_components(&g);
        assert_eq!(c.count, 2);
        assert_eq!(g.edge_count(), 20);
    }

    #[test]
    fn sbm_single_block_is_er() {
        // One block draws every pair with p_in in the same order as ER.
        assert_eq!(
            generate_sbm(10, 1, 0.5, 0.05, 11).unwrap(),
            generate_er(10, 0.5, 11).unwrap()
        );
    }

    #[test]
    fn cycles() {
        assert_eq!(generate_cycle(3).unwrap().edge_count(), 3);
        let c4 = generate_cycle(4).unwrap();
        assert_eq!(c4.edge_count(), 4);
        assert!((0..4).all(|v| c4.degree(v) == 2));
        assert!(generate_cycle(2).is_err());
    }

    #[test]
    fn components() {
        let k5 = generate_complete(5);
        assert_eq!(connected_components(&k5.disjoint_union(&k5)).count, 2);
        assert_eq!(connected_components(&generate_cycle(4).unwrap()).count, 1);
        let c = connected_components(&Graph::empty(3));
        assert_eq!(c.count, 3);
        assert_eq!(c.labels, vec![0, 1, 2]);
    }

    #[test]
    fn balls_and_distances() {
        let c4 = generate_cycle(4).unwrap();
        let balls = k_hop_neighborhoods(&c4, 0, 2);
        assert_eq!(balls[0], vec![0]);
        assert_eq!(balls[1], vec![0, 1, 3]);
        assert_eq!(balls[2], vec![0, 1, 2, 3]);
        assert_eq!(bfs_distances(&c4, 0), vec![0, 1, 2, 1]);

        let iso = Graph::empty(2);
        assert!(k_hop_neighborhoods(&iso, 1, 3).iter().all(|b| b == &vec![1]));

        let k2 = generate_path(2);
        assert_eq!(k_hop_neighborhoods(&k2, 0, 1)[1], vec![0, 1]);

        assert_eq!(bfs_distances(&generate_path(3), 0), vec![0, 1, 2]);
        assert_eq!(bfs_distances(&Graph::empty(2), 0), vec![0, UNREACHABLE]);
    }

    #[test]
    fn dominance_relation() {
        let c6 = generate_cycle(6).unwrap();
        let chord = c6.with_edge(0, 3, 1.0).unwrap();
        assert!(c6.is_dominated_by(&chord));
        assert!(!chord.is_dominated_by(&c6));
    }
}
