//! Moment features from Dirac-source PDE solutions.
//!
//! Every node `i` launches its own solution `u^{(i)}` from the initial
//! condition `x̃(v_i) δ_{v_i}`. The node representation collects power sums of
//! that solution over closed hop balls around `i`:
//!
//! ```text
//! h_i(t)[k][m] = Σ_{j : dist(i, j) <= k} |u^{(i)}(v_j, t)|^m
//! ```
//!
//! and the graph representation pools node representations with power sums
//! over nodes, `w(t)[s][k][m] = Σ_i |h_i(t)[k][m]|^s`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{heat_solution_cheb, wave_solution_cheb, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{bfs_distances, Graph, Signal};
use crate::par;
use crate::spectral::{
    eigendecompose, heat_fn, wave_position_fn, wave_velocity_fn, LaplacianKind, Pde,
    SolutionTensor,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Exact,
    Chebyshev,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SolverKind::Exact),
            "chebyshev" | "cheb" => Ok(SolverKind::Chebyshev),
            other => Err(Error::InvalidParameter(format!("unknown solver {other:?}"))),
        }
    }
}

/// Initial velocity of the wave runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveVelocity {
    Zero,
    EqualX,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Node,
    Graph,
}

impl std::str::FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "node" => Ok(Level::Node),
            "graph" => Ok(Level::Graph),
            other => Err(Error::InvalidParameter(format!("unknown level {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub pde: Pde,
    pub kind: LaplacianKind,
    pub solver: SolverKind,
    /// Largest node moment order `M`.
    pub max_moment: usize,
    /// Largest hop radius `K`.
    pub max_hop: usize,
    /// Number of time samples `T`.
    pub time_steps: usize,
    /// Uniform grid `t_j = j * t_max / T`, `j = 1..=T`, unless `times` is set.
    pub t_max: f64,
    /// Explicit time grid; overrides `time_steps` and `t_max`.
    pub times: Option<Vec<f64>>,
    /// Largest graph moment order `S`.
    pub max_graph_moment: usize,
    pub wave_velocity: WaveVelocity,
    /// Adds the radius-1 ball to the hop range, which otherwise starts at 2.
    pub include_hop_one: bool,
    pub solver_config: SolverConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            pde: Pde::Heat,
            kind: LaplacianKind::SymmetricNormalized,
            solver: SolverKind::Exact,
            max_moment: 4,
            max_hop: 4,
            time_steps: 20,
            t_max: 20.0,
            times: None,
            max_graph_moment: 4,
            wave_velocity: WaveVelocity::Zero,
            include_hop_one: false,
            solver_config: SolverConfig::default(),
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.max_moment < 1 {
            return bad("M must be >= 1");
        }
        if self.max_hop < 2 {
            return bad("K must be >= 2");
        }
        if self.max_graph_moment < 1 {
            return bad("S must be >= 1");
        }
        match &self.times {
            Some(ts) if ts.is_empty() => return bad("time grid is empty"),
            Some(ts) if ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) => {
                return bad("times must be finite and >= 0")
            }
            None if self.time_steps < 1 => return bad("T must be >= 1"),
            None if !(self.t_max.is_finite() && self.t_max > 0.0) => {
                return bad("t_max must be > 0")
            }
            _ => {}
        }
        Ok(())
    }

    pub fn time_grid(&self) -> Vec<f64> {
        match &self.times {
            Some(ts) => ts.clone(),
            None => (1..=self.time_steps)
                .map(|j| j as f64 * (self.t_max / self.time_steps as f64))
                .collect(),
        }
    }

    pub fn hops(&self) -> Vec<usize> {
        let first = if self.include_hop_one { 1 } else { 2 };
        (first..=self.max_hop).collect()
    }

    /// Length of the flattened graph vector.
    pub fn graph_feature_len(&self) -> usize {
        self.time_grid().len() * self.max_graph_moment * self.hops().len() * self.max_moment
    }
}

/// Node representations indexed (node, time, hop, moment).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFeatureTensor {
    pub nodes: usize,
    pub times: Vec<f64>,
    pub hops: Vec<usize>,
    pub moments: usize,
    values: Vec<f64>,
    pub tolerance_met: bool,
}

impl NodeFeatureTensor {
    fn index(&self, node: usize, time: usize, hop: usize, moment: usize) -> usize {
        ((node * self.times.len() + time) * self.hops.len() + hop) * self.moments + moment
    }

    /// `hop` and `moment` are positions in `hops` and `0..moments`
    /// (moment position `m` is order `m + 1`).
    pub fn get(&self, node: usize, time: usize, hop: usize, moment: usize) -> f64 {
        self.values[self.index(node, time, hop, moment)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Features of one node flattened in (time, hop, moment) order.
    pub fn node_row(&self, node: usize) -> &[f64] {
        let w = self.times.len() * self.hops.len() * self.moments;
        &self.values[node * w..(node + 1) * w]
    }
}

/// Graph representation indexed (time, s, hop, moment).
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFeatureVector {
    pub times: Vec<f64>,
    pub graph_moments: usize,
    pub hops: Vec<usize>,
    pub moments: usize,
    values: Vec<f64>,
    pub tolerance_met: bool,
}

impl GraphFeatureVector {
    pub fn get(&self, time: usize, s: usize, hop: usize, moment: usize) -> f64 {
        let i = ((time * self.graph_moments + s) * self.hops.len() + hop) * self.moments + moment;
        self.values[i]
    }

    /// Flattened in (time, s, hop, moment) order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    Node(NodeFeatureTensor),
    Graph(GraphFeatureVector),
}

/// `x̃(v_i) δ_{v_i}` for every node, or plain Diracs without a signal.
pub fn dirac_initial_conditions(n: usize, x_tilde: Option<&Signal>) -> Result<Vec<Signal>> {
    if let Some(x) = x_tilde {
        x.check_len(n)?;
    }
    Ok((0..n)
        .map(|i| {
            let mut d = Signal::dirac(n, i).into_inner();
            if let Some(x) = x_tilde {
                d[i] = x[i];
            }
            Signal::new(d).expect("finite")
        })
        .collect())
}

/// Closed-ball power sums of each source's own solution. Source `i` must be
/// the run started at node `i`.
pub fn node_moments(
    solutions: &SolutionTensor,
    g: &Graph,
    max_moment: usize,
    hops: &[usize],
) -> Result<NodeFeatureTensor> {
    let n = g.node_count();
    if solutions.sources != n || solutions.nodes != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: solutions.sources,
        });
    }
    if max_moment < 1 || hops.is_empty() {
        return Err(Error::InvalidParameter("need M >= 1 and at least one hop".into()));
    }
    let max_hop = *hops.iter().max().unwrap();
    let nt = solutions.times.len();
    let per_node = par::map_indexed(n, |i| {
        let dist = bfs_distances(g, i);
        let mut row = Vec::with_capacity(nt * hops.len() * max_moment);
        // shell[d][m]: sum over nodes at exact distance d.
        let mut shell = vec![vec![0.0; max_moment]; max_hop + 1];
        for j in 0..nt {
            shell.iter_mut().for_each(|s| s.fill(0.0));
            for (v, &u) in solutions.snapshot(i, j).iter().enumerate() {
                let d = dist[v];
                if d > max_hop {
                    continue;
                }
                let a = u.abs();
                let mut p = 1.0;
                for m in 0..max_moment {
                    p *= a;
                    shell[d][m] += p;
                }
            }
            let mut ball = vec![vec![0.0; max_moment]; max_hop + 1];
            for d in 0..=max_hop {
                for m in 0..max_moment {
                    ball[d][m] = shell[d][m] + if d > 0 { ball[d - 1][m] } else { 0.0 };
                }
            }
            for &k in hops {
                row.extend_from_slice(&ball[k]);
            }
        }
        row
    });
    Ok(NodeFeatureTensor {
        nodes: n,
        times: solutions.times.clone(),
        hops: hops.to_vec(),
        moments: max_moment,
        values: per_node.concat(),
        tolerance_met: solutions.tolerance_met,
    })
}

/// Power sums over nodes, `w(t)[s][k][m] = Σ_i |h_i(t)[k][m]|^s`.
pub fn graph_moments(h: &NodeFeatureTensor, max_graph_moment: usize) -> GraphFeatureVector {
    let nt = h.times.len();
    let nk = h.hops.len();
    let nm = h.moments;
    let mut values = vec![0.0; nt * max_graph_moment * nk * nm];
    for i in 0..h.nodes {
        for t in 0..nt {
            for k in 0..nk {
                for m in 0..nm {
                    let a = h.get(i, t, k, m).abs();
                    let mut p = 1.0;
                    for s in 0..max_graph_moment {
                        p *= a;
                        values[((t * max_graph_moment + s) * nk + k) * nm + m] += p;
                    }
                }
            }
        }
    }
    GraphFeatureVector {
        times: h.times.clone(),
        graph_moments: max_graph_moment,
        hops: h.hops.clone(),
        moments: nm,
        values,
        tolerance_met: h.tolerance_met,
    }
}

/// Dirac-source solutions for every node of `g` under `cfg`.
pub fn dirac_solutions(
    g: &Graph,
    x_tilde: Option<&Signal>,
    y_tilde: Option<&Signal>,
    cfg: &FeatureConfig,
) -> Result<SolutionTensor> {
    cfg.validate()?;
    let n = g.node_count();
    let times = cfg.time_grid();
    let xs = dirac_initial_conditions(n, x_tilde)?;
    let ys = match (y_tilde, cfg.wave_velocity) {
        (Some(y), _) => dirac_initial_conditions(n, Some(y))?,
        (None, WaveVelocity::EqualX) => xs.clone(),
        (None, WaveVelocity::Zero) => vec![Signal::zeros(n); n],
    };
    match cfg.solver {
        SolverKind::Chebyshev => match cfg.pde {
            Pde::Heat => heat_solution_cheb(g, cfg.kind, &xs, &times, &cfg.solver_config),
            Pde::Wave => wave_solution_cheb(g, cfg.kind, &xs, &ys, &times, &cfg.solver_config),
        },
        SolverKind::Exact => {
            let dec = eigendecompose(g, cfg.kind)?;
            // With Dirac sources every solution is a scaled kernel column, so
            // build one kernel per time instead of n separate syntheses.
            let kernels: Vec<(DMatrix<f64>, Option<DMatrix<f64>>)> =
                par::map_indexed(times.len(), |j| {
                    let t = times[j];
                    match cfg.pde {
                        Pde::Heat => (dec.kernel(|l| heat_fn(l, t)), None),
                        Pde::Wave => (
                            dec.kernel(|l| wave_position_fn(l, t)),
                            Some(dec.kernel(|l| wave_velocity_fn(l, t))),
                        ),
                    }
                });
            let snapshots = (0..n)
                .map(|i| {
                    let xi = xs[i][i];
                    let yi = ys[i][i];
                    times
                        .iter()
                        .zip(&kernels)
                        .map(|(&t, (kx, ky))| {
                            if t == 0.0 {
                                return xs[i].to_vec();
                            }
                            let mut u: Vec<f64> = kx.column(i).iter().map(|v| v * xi).collect();
                            if let Some(ky) = ky {
                                if yi != 0.0 {
                                    u.iter_mut()
                                        .zip(ky.column(i).iter())
                                        .for_each(|(a, b)| *a += b * yi);
                                }
                            }
                            u
                        })
                        .collect()
                })
                .collect();
            SolutionTensor::from_snapshots(cfg.pde, cfg.kind, times, n, snapshots)
        }
    }
}

/// Full pipeline: Dirac sources, PDE solves, node moments and, for
/// [`Level::Graph`], pooling over nodes.
pub fn extract_features(
    g: &Graph,
    x_tilde: Option<&Signal>,
    y_tilde: Option<&Signal>,
    cfg: &FeatureConfig,
    level: Level,
) -> Result<Features> {
    let sols = dirac_solutions(g, x_tilde, y_tilde, cfg)?;
    let h = node_moments(&sols, g, cfg.max_moment, &cfg.hops())?;
    Ok(match level {
        Level::Node => Features::Node(h),
        Level::Graph => Features::Graph(graph_moments(&h, cfg.max_graph_moment)),
    })
}

/// Graph vector of `g`, flattened.
pub fn graph_feature_vector(g: &Graph, cfg: &FeatureConfig) -> Result<GraphFeatureVector> {
    match extract_features(g, None, None, cfg, Level::Graph)? {
        Features::Graph(w) => Ok(w),
        Features::Node(_) => unreachable!(),
    }
}

/// Graph vectors for several input signals, concatenated channel by channel.
pub fn graph_features_multichannel(
    g: &Graph,
    signals: &[Signal],
    cfg: &FeatureConfig,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for x in signals {
        match extract_features(g, Some(x), None, cfg, Level::Graph)? {
            Features::Graph(w) => out.extend_from_slice(w.values()),
            Features::Node(_) => unreachable!(),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_cycle, generate_path};

    fn tensor_from(nodes: usize, snaps: Vec<Vec<Vec<f64>>>, times: Vec<f64>) -> SolutionTensor {
        SolutionTensor::from_snapshots(Pde::Heat, LaplacianKind::Combinatorial, times, nodes, snaps)
            .unwrap()
    }

    #[test]
    fn dirac_construction() {
        let plain = dirac_initial_conditions(3, Some(&Signal::ones(3))).unwrap();
        assert_eq!(plain[1].values(), &[0.0, 1.0, 0.0]);
        let x = Signal::new(vec![2.0, 0.0, 3.0]).unwrap();
        let ds = dirac_initial_conditions(3, Some(&x)).unwrap();
        assert_eq!(ds[1].values(), &[0.0, 0.0, 0.0]);
        assert_eq!(ds[0].values(), &[2.0, 0.0, 0.0]);
        assert_eq!(dirac_initial_conditions(2, None).unwrap()[0].values(), &[1.0, 0.0]);
        assert!(dirac_initial_conditions(2, Some(&x)).is_err());
    }

    #[test]
    fn p3_center_moments() {
        let g = generate_path(3);
        let mut snaps = vec![vec![vec![0.0; 3]]; 3];
        snaps[1][0] = vec![0.25, 0.5, 0.25];
        let sol = tensor_from(3, snaps, vec![1.0]);
        let h = node_moments(&sol, &g, 2, &[2]).unwrap();
        assert_eq!(h.get(1, 0, 0, 0), 1.0);
        assert_eq!(h.get(1, 0, 0, 1), 0.375);
        assert!(h.node_row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn isolated_node_keeps_unit_moments() {
        let g = generate_path(2).disjoint_union(&Graph::empty(1));
        let cfg = FeatureConfig::default();
        let Features::Node(h) = extract_features(&g, None, None, &cfg, Level::Node).unwrap() else {
            panic!()
        };
        assert!(h.node_row(2).iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn graph_moment_sums() {
        let g = generate_path(3);
        let mut snaps = vec![vec![vec![0.0; 3]]; 3];
        snaps[0][0] = vec![1.0, 0.0, 0.0];
        snaps[1][0] = vec![0.0, 2.0, 0.0];
        snaps[2][0] = vec![0.0, 0.0, 3.0];
        let h = node_moments(&tensor_from(3, snaps, vec![1.0]), &g, 1, &[2]).unwrap();
        let w = graph_moments(&h, 2);
        assert_eq!(w.get(0, 0, 0, 0), 6.0);
        assert_eq!(w.get(0, 1, 0, 0), 14.0);
    }

    #[test]
    fn single_node_graph_vector() {
        let g = Graph::empty(1);
        let sol = tensor_from(1, vec![vec![vec![0.5]]], vec![1.0]);
        let h = node_moments(&sol, &g, 2, &[2]).unwrap();
        let w = graph_moments(&h, 3);
        for s in 0..3 {
            for m in 0..2 {
                assert_eq!(w.get(0, s, 0, m), h.get(0, 0, 0, m).powi(s as i32 + 1));
            }
        }
    }

    #[test]
    fn zero_features() {
        let g = generate_cycle(4).unwrap();
        let sol = tensor_from(4, vec![vec![vec![0.0; 4]; 2]; 4], vec![1.0, 2.0]);
        let h = node_moments(&sol, &g, 3, &[2, 3]).unwrap();
        assert!(h.values().iter().all(|&v| v == 0.0));
        assert!(graph_moments(&h, 2).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn default_shapes() {
        let cfg = FeatureConfig::default();
        assert_eq!(cfg.time_grid().len(), 20);
        assert_eq!(cfg.time_grid()[0], 1.0);
        assert_eq!(cfg.hops(), vec![2, 3, 4]);
        assert_eq!(cfg.graph_feature_len(), 20 * 4 * 3 * 4);
        let g = generate_cycle(4).unwrap();
        let Features::Node(h) = extract_features(&g, None, None, &cfg, Level::Node).unwrap() else {
            panic!()
        };
        assert_eq!(h.values().len(), 4 * 20 * 3 * 4);
    }

    #[test]
    fn config_validation() {
        let cfg = FeatureConfig {
            max_hop: 1,
            ..FeatureConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = FeatureConfig {
            times: Some(vec![]),
            ..FeatureConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
