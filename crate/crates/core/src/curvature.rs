//! Ollivier-Ricci curvature with exact optimal transport.
//!
//! `κ(u, v) = 1 - W1(m_u, m_v) / d(u, v)` where `m_x` puts mass `α` on `x`
//! and spreads `1 - α` uniformly over its neighbors, and `W1` is the
//! earth mover's distance under the hop metric. Node labels average `κ` over
//! incident edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, Graph, UNREACHABLE};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMeasure {
    pub support: Vec<usize>,
    pub masses: Vec<f64>,
}

impl NodeMeasure {
    /// Validates distinct support, nonnegative masses and unit total.
    pub fn new(support: Vec<usize>, masses: Vec<f64>) -> Result<Self> {
        if support.len() != masses.len() {
            return Err(Error::LengthMismatch {
                expected: support.len(),
                got: masses.len(),
            });
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("measure support has repeated nodes".into()));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidParameter("measure masses must be >= 0".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("measure mass sums to {total}")));
        }
        Ok(NodeMeasure { support, masses })
    }

    /// Unit mass on one node.
    pub fn point(v: usize) -> Self {
        NodeMeasure {
            support: vec![v],
            masses: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCurvature {
    pub u: usize,
    pub v: usize,
    pub kappa: f64,
}

/// Mass `alpha` on `v`, the rest uniform over its neighbors.
pub fn neighbor_measure(g: &Graph, v: usize, alpha: f64) -> Result<NodeMeasure> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} must be in [0, 1)")));
    }
    let nb = g.neighbors(v);
    if nb.is_empty() {
        return Err(Error::IsolatedNode(v));
    }
    let share = (1.0 - alpha) / nb.len() as f64;
    let mut support = nb.to_vec();
    let mut masses = vec![share; nb.len()];
    if alpha > 0.0 {
        support.push(v);
        masses.push(alpha);
    }
    Ok(NodeMeasure { support, masses })
}

/// Earth mover's distance between two measures under hop distance.
pub fn wasserstein1(g: &Graph, mu: &NodeMeasure, nu: &NodeMeasure) -> Result<f64> {
    let mut cost = Vec::with_capacity(mu.support.len());
    for &a in &mu.support {
        let dist = bfs_distances(g, a);
        let mut row = Vec::with_capacity(nu.support.len());
        for &b in &nu.support {
            if dist[b] == UNREACHABLE {
                return Err(Error::Disconnected);
            }
            row.push(dist[b] as f64);
        }
        cost.push(row);
    }
    Ok(transport_cost(&cost, &mu.masses, &nu.masses))
}

// Residual amounts at or below this are treated as exhausted.
const FLOW_EPS: f64 = 1e-14;

struct Arc {
    to: usize,
    cap: f64,
    cost: f64,
}

fn add_arc(arcs: &mut Vec<Arc>, adj: &mut [Vec<usize>], from: usize, to: usize, cap: f64, cost: f64) {
    adj[from].push(arcs.len());
    arcs.push(Arc { to, cap, cost });
    adj[to].push(arcs.len());
    arcs.push(Arc {
        to: from,
        cap: 0.0,
        cost: -cost,
    });
}

/// Minimum cost of shipping `supply` to `demand` (equal totals) with unit
/// costs `cost[i][j]`, by successive shortest augmenting paths.
///
/// Path search is Bellman–Ford on the residual network, so negative reduced
/// costs on reverse arcs need no potentials. Capacities stay real valued.
pub fn transport_cost(cost: &[Vec<f64>], supply: &[f64], demand: &[f64]) -> f64 {
    let a = supply.len();
    let b = demand.len();
    let source = a + b;
    let sink = a + b + 1;
    let nodes = a + b + 2;
    let mut arcs: Vec<Arc> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (i, &s) in supply.iter().enumerate() {
        add_arc(&mut arcs, &mut adj, source, i, s, 0.0);
    }
    for (j, &d) in demand.iter().enumerate() {
        add_arc(&mut arcs, &mut adj, a + j, sink, d, 0.0);
    }
    for i in 0..a {
        for j in 0..b {
            add_arc(&mut arcs, &mut adj, i, a + j, f64::INFINITY, cost[i][j]);
        }
    }

    let mut total = 0.0;
    loop {
        let mut dist = vec![f64::INFINITY; nodes];
        let mut via: Vec<Option<usize>> = vec![None; nodes];
        dist[source] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if dist[u] == f64::INFINITY {
                    continue;
                }
                for &e in &adj[u] {
                    let arc = &arcs[e];
                    if arc.cap > FLOW_EPS && dist[u] + arc.cost < dist[arc.to] - 1e-12 {
                        dist[arc.to] = dist[u] + arc.cost;
                        via[arc.to] = Some(e);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[sink] == f64::INFINITY {
            break;
        }
        let mut push = f64::INFINITY;
        let mut v = sink;
        while let Some(e) = via[v] {
            push = push.min(arcs[e].cap);
            v = arcs[e ^ 1].to;
        }
        let mut v = sink;
        while let Some(e) = via[v] {
            arcs[e].cap -= push;
            arcs[e ^ 1].cap += push;
            v = arcs[e ^ 1].to;
        }
        total += push * dist[sink];
    }
    total
}

/// Curvature of edge `(u, v)`.
pub fn ollivier_ricci_edge(g: &Graph, u: usize, v: usize, alpha: f64) -> Result<EdgeCurvature> {
    if !g.has_edge(u, v) {
        return Err(Error::InvalidParameter(format!("({u}, {v}) is not an edge")));
    }
    // The flow solver is exact only up to rounding; a fixed orientation
    // makes the value bitwise symmetric in the endpoints.
    let (a, b) = (u.min(v), u.max(v));
    let mu = neighbor_measure(g, a, alpha)?;
    let nu = neighbor_measure(g, b, alpha)?;
    let w1 = wasserstein1(g, &mu, &nu)?;
    Ok(EdgeCurvature { u, v, kappa: 1.0 - w1 })
}

/// Curvature of every edge, in [`Graph::edges`] order.
pub fn edge_curvatures(g: &Graph, alpha: f64) -> Result<Vec<EdgeCurvature>> {
    let edges = g.edges();
    par::map_indexed(edges.len(), |i| {
        let (u, v, _) = edges[i];
        ollivier_ricci_edge(g, u, v, alpha)
    })
    .into_iter()
    .collect()
}

/// Mean curvature of incident edges; `None` for isolated nodes.
pub fn node_curvature(g: &Graph, alpha: f64) -> Result<Vec<Option<f64>>> {
    let n = g.node_count();
    let mut sum = vec![0.0; n];
    let mut count = vec![0usize; n];
    for e in edge_curvatures(g, alpha)? {
        for x in [e.u, e.v] {
            sum[x] += e.kappa;
            count[x] += 1;
        }
    }
    Ok((0..n)
        .map(|v| (count[v] > 0).then(|| sum[v] / count[v] as f64))
        .collect())
}
