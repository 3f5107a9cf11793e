//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// Minimum transport cost by enumerating every basic solution of the
/// transportation polytope: each basis is a spanning tree of the complete
/// bipartite graph on supply and demand nodes, whose flows are fixed by
/// peeling leaves. Exponential; meant for supports of at most four points.
pub fn brute_force_transport(cost: &[Vec<f64>], supply: &[f64], demand: &[f64]) -> f64 {
    let a = supply.len();
    let b = demand.len();
    let cells: Vec<(usize, usize)> = (0..a).flat_map(|i| (0..b).map(move |j| (i, j))).collect();
    let need = a + b - 1;
    let mut best = f64::INFINITY;
    let mut pick = Vec::with_capacity(need);
    choose(&cells, need, 0, &mut pick, &mut |basis| {
        if let Some(flow) = tree_flows(basis, a, b, supply, demand) {
            let c: f64 = basis.iter().zip(&flow).map(|(&(i, j), f)| cost[i][j] * f).sum();
            best = best.min(c);
        }
    });
    best
}

fn choose(
    cells: &[(usize, usize)],
    k: usize,
    start: usize,
    pick: &mut Vec<(usize, usize)>,
    visit: &mut dyn FnMut(&[(usize, usize)]),
) {
    if pick.len() == k {
        visit(pick);
        return;
    }
    for idx in start..cells.len() {
        if cells.len() - idx < k - pick.len() {
            break;
        }
        pick.push(cells[idx]);
        choose(cells, k, idx + 1, pick, visit);
        pick.pop();
    }
}

/// Flows on a spanning-tree basis, or `None` if the cells do not form a
/// spanning tree or a flow is negative.
fn tree_flows(
    basis: &[(usize, usize)],
    a: usize,
    b: usize,
    supply: &[f64],
    demand: &[f64],
) -> Option<Vec<f64>> {
    // Union-find over a + b nodes rejects cycles.
    let mut parent: Vec<usize> = (0..a + b).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &(i, j) in basis {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, a + j));
        if ri == rj {
            return None;
        }
        parent[ri] = rj;
    }
    let mut rest: Vec<f64> = supply.iter().chain(demand).copied().collect();
    let mut alive = vec![true; basis.len()];
    let mut flow = vec![0.0; basis.len()];
    for _ in 0..basis.len() {
        let mut degree = vec![0usize; a + b];
        for (e, &(i, j)) in basis.iter().enumerate() {
            if alive[e] {
                degree[i] += 1;
                degree[a + j] += 1;
            }
        }
        let (e, leaf) = basis
            .iter()
            .enumerate()
            .filter(|(e, _)| alive[*e])
            .find_map(|(e, &(i, j))| {
                if degree[i] == 1 {
                    Some((e, i))
                } else if degree[a + j] == 1 {
                    Some((e, a + j))
                } else {
                    None
                }
            })?;
        let (i, j) = basis[e];
        let other = if leaf == i { a + j } else { i };
        flow[e] = rest[leaf];
        rest[other] -= rest[leaf];
        rest[leaf] = 0.0;
        alive[e] = false;
    }
    if flow.iter().any(|&f| f < -1e-12) {
        return None;
    }
    Some(flow)
}

/// All-pairs hop distances by Floyd–Warshall on an edge list.
pub fn hop_distances(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v) in edges {
        d[u][v] = 1.0;
        d[v][u] = 1.0;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// `1 - W1(m_u, m_v)` with uniform neighbor measures, computed from the edge
/// list alone.
pub fn curvature_by_enumeration(n: usize, edges: &[(usize, usize)], u: usize, v: usize) -> f64 {
    let d = hop_distances(n, edges);
    let nbrs = |x: usize| -> Vec<usize> {
        let mut out: Vec<usize> = edges
            .iter()
            .filter_map(|&(p, q)| if p == x { Some(q) } else if q == x { Some(p) } else { None })
            .collect();
        out.sort_unstable();
        out
    };
    let (nu, nv) = (nbrs(u), nbrs(v));
    let cost: Vec<Vec<f64>> = nu.iter().map(|&p| nv.iter().map(|&q| d[p][q]).collect()).collect();
    let mu = vec![1.0 / nu.len() as f64; nu.len()];
    let mv = vec![1.0 / nv.len() as f64; nv.len()];
    1.0 - brute_force_transport(&cost, &mu, &mv) / d[u][v]
}
