//! Feature invariants: symmetry under relabelling, ball monotonicity,
//! solver agreement, determinism and the large-time limit.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gdenet::features::{
    extract_features, graph_feature_vector, FeatureConfig, Features, Level, NodeFeatureTensor,
    SolverKind,
};
use gdenet::graph::{bfs_distances, generate_er, Graph};
use gdenet::io::{format_graph_features, format_node_features};
use gdenet::spectral::{LaplacianKind, Pde};

fn node_features(g: &Graph, cfg: &FeatureConfig) -> NodeFeatureTensor {
    match extract_features(g, None, None, cfg, Level::Node).unwrap() {
        Features::Node(h) => h,
        Features::Graph(_) => unreachable!(),
    }
}

fn small_config(pde: Pde) -> FeatureConfig {
    FeatureConfig {
        pde,
        time_steps: 6,
        t_max: 12.0,
        max_moment: 3,
        max_hop: 3,
        max_graph_moment: 3,
        include_hop_one: true,
        ..FeatureConfig::default()
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn permutation_equivariance_and_invariance() {
    let g = generate_er(18, 0.25, 21).unwrap();
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for pde in [Pde::Heat, Pde::Wave] {
        let cfg = small_config(pde);
        let h = node_features(&g, &cfg);
        let w = graph_feature_vector(&g, &cfg).unwrap();
        for _ in 0..20 {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let gp = g.permuted(&perm).unwrap();
            let hp = node_features(&gp, &cfg);
            for v in 0..n {
                for (a, b) in h.node_row(v).iter().zip(hp.node_row(perm[v])) {
                    assert!(rel_close(*a, *b, 1e-9), "{pde}: node {v}: {a} vs {b}");
                }
            }
            let wp = graph_feature_vector(&gp, &cfg).unwrap();
            for (a, b) in w.values().iter().zip(wp.values()) {
                assert!(rel_close(*a, *b, 1e-9), "{pde}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn first_moment_grows_with_radius() {
    let g = generate_er(25, 0.15, 23).unwrap();
    for pde in [Pde::Heat, Pde::Wave] {
        let cfg = FeatureConfig {
            pde,
            include_hop_one: true,
            max_hop: 6,
            ..FeatureConfig::default()
        };
        let h = node_features(&g, &cfg);
        for v in 0..h.nodes {
            for t in 0..h.times.len() {
                for k in 1..h.hops.len() {
                    assert!(h.get(v, t, k, 0) >= h.get(v, t, k - 1, 0));
                }
            }
        }
    }
}

#[test]
fn chebyshev_features_match_exact() {
    let g = generate_er(30, 0.2, 24).unwrap();
    for pde in [Pde::Heat, Pde::Wave] {
        for kind in [LaplacianKind::SymmetricNormalized, LaplacianKind::Combinatorial] {
            let exact = FeatureConfig {
                kind,
                ..small_config(pde)
            };
            let cheb = FeatureConfig {
                solver: SolverKind::Chebyshev,
                ..exact.clone()
            };
            let a = node_features(&g, &exact);
            let b = node_features(&g, &cheb);
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(rel_close(*x, *y, 1e-6), "{pde} {kind:?}: {x} vs {y}");
            }
            let a = graph_feature_vector(&g, &exact).unwrap();
            let b = graph_feature_vector(&g, &cheb).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(rel_close(*x, *y, 1e-6), "{pde} {kind:?}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn feature_output_is_deterministic() {
    let cfg = small_config(Pde::Wave);
    let run = || {
        let g = generate_er(20, 0.2, 25).unwrap();
        let h = node_features(&g, &cfg);
        let w = graph_feature_vector(&g, &cfg).unwrap();
        (format_node_features(&h), format_graph_features(&w))
    };
    assert_eq!(run(), run());
}

#[test]
fn heat_features_reach_the_stationary_limit() {
    // Connected graph: the sym-normalized heat flow from δ_i tends to
    // <ν_1, δ_i> ν_1 with ν_1 = sqrt(d / vol).
    let g = generate_er(20, 0.4, 26).unwrap();
    let n = g.node_count();
    assert!(bfs_distances(&g, 0).iter().all(|&d| d < n));
    let cfg = FeatureConfig {
        times: Some(vec![400.0]),
        ..small_config(Pde::Heat)
    };
    let h = node_features(&g, &cfg);
    let d = g.weighted_degrees();
    let vol: f64 = d.iter().sum();
    for i in 0..n {
        let limit: Vec<f64> = (0..n).map(|v| (d[i] * d[v]).sqrt() / vol).collect();
        let dist = bfs_distances(&g, i);
        for (k_pos, &k) in h.hops.iter().enumerate() {
            for m in 1..=h.moments {
                let expected: f64 = (0..n)
                    .filter(|&v| dist[v] <= k)
                    .map(|v| limit[v].powi(m as i32))
                    .sum();
                let got = h.get(i, 0, k_pos, m - 1);
                assert!((got - expected).abs() <= 1e-10, "node {i} k={k} m={m}: {got} vs {expected}");
            }
        }
    }
}
