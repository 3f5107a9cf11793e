//! Acceptance criteria. Runs every criterion, prints one PASS/FAIL line
//! each, and exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gdenet::chebyshev::{heat_solution_cheb, wave_solution_cheb, SolverConfig};
use gdenet::curvature::{ollivier_ricci_edge, wasserstein1, NodeMeasure};
use gdenet::dynamics::{
    check_ctrw_identity, check_energy_dominance, check_heat_energy_bounds, check_wave_energy_bounds,
    energy_curve, er_decay_trend, largest_component, uniform_grid,
};
use gdenet::experiment::{run_experiment, ExperimentConfig, Task};
use gdenet::graph::{
    connected_components, generate_complete, generate_cycle, generate_er, generate_path,
    generate_sbm, Graph, Signal,
};
use gdenet::mlp::{self, Mlp};
use gdenet::spectral::{eigendecompose, heat_solution_exact, wave_solution_exact, LaplacianKind, Pde};

const SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ (tag << 40))
}

fn random_connected_er(r: &mut ChaCha8Rng, n_lo: usize, n_hi: usize, p_lo: f64, p_hi: f64) -> Graph {
    loop {
        let n = r.random_range(n_lo..=n_hi);
        let p = r.random_range(p_lo..=p_hi);
        let g = generate_er(n, p, r.random()).unwrap();
        if connected_components(&g).count == 1 {
            return g;
        }
    }
}

fn criterion_1() -> Outcome {
    let times: Vec<f64> = (1..=40).map(|k| 0.5 * k as f64).collect();
    let cfg = SolverConfig::default();
    let mut r = rng(1);
    let (mut heat_err, mut wave_err) = (0.0f64, 0.0f64);
    let mut unmet = 0;
    for j in 0..30 {
        let g = generate_er(100, 0.06, SEED + j).unwrap();
        let kind = if j % 2 == 0 {
            LaplacianKind::SymmetricNormalized
        } else {
            LaplacianKind::Combinatorial
        };
        let dec = eigendecompose(&g, kind).unwrap();
        let mut xs: Vec<Signal> = (0..2).map(|_| Signal::dirac(100, r.random_range(0..100))).collect();
        xs.push(Signal::new((0..100).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap());
        let ys: Vec<Signal> = (0..xs.len())
            .map(|_| Signal::new((0..100).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap())
            .collect();
        let he = heat_solution_exact(&dec, &xs, &times).unwrap();
        let hc = heat_solution_cheb(&g, kind, &xs, &times, &cfg).unwrap();
        let we = wave_solution_exact(&dec, &xs, &ys, &times).unwrap();
        let wc = wave_solution_cheb(&g, kind, &xs, &ys, &times, &cfg).unwrap();
        unmet += usize::from(!hc.tolerance_met) + usize::from(!wc.tolerance_met);
        heat_err = heat_err.max(he.max_abs_diff(&hc));
        wave_err = wave_err.max(we.max_abs_diff(&wc));
    }
    outcome(
        heat_err <= 1e-8 && wave_err <= 1e-6 && unmet == 0,
        format!("heat max err {heat_err:.2e} (<= 1e-8), wave {wave_err:.2e} (<= 1e-6), tolerance misses {unmet}"),
    )
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let g = generate_er(r.random_range(10..=40), r.random_range(0.1..0.5), r.random()).unwrap();
        let kind = if i % 2 == 0 {
            LaplacianKind::Combinatorial
        } else {
            LaplacianKind::SymmetricNormalized
        };
        let dec = eigendecompose(&g, kind).unwrap();
        let x = Signal::dirac(g.node_count(), r.random_range(0..g.node_count()));
        let t = r.random_range(0.0..10.0);
        let rep = check_heat_energy_bounds(&dec, &x, &[0.0, t / 2.0, t]).unwrap();
        violations += usize::from(!rep.pass);
        worst = worst.min(rep.margin);
    }
    outcome(violations == 0, format!("{violations} violations in 100 instances, worst raw margin {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let g = loop {
        let g = generate_er(25, 0.3, r.random()).unwrap();
        if connected_components(&g).count == 1 {
            break g;
        }
    };
    let dec = eigendecompose(&g, LaplacianKind::Combinatorial).unwrap();
    let l2 = dec.eigenvalues()[1];
    let nu1 = dec.eigenvectors().column(0).into_owned();
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for _ in 0..5 {
        let x = Signal::new((0..25).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
        let xn = x.norm_squared().sqrt();
        let proj = nu1.dot(&nalgebra::DVector::from_column_slice(x.values()));
        let sol = heat_solution_exact(&dec, &[x], &[10.0, 50.0]).unwrap();
        for (j, t) in [10.0f64, 50.0].into_iter().enumerate() {
            let u = sol.snapshot(0, j);
            let dev = u.iter().zip(nu1.iter()).map(|(a, b)| (a - proj * b).powi(2)).sum::<f64>().sqrt();
            let bound = (-t * l2).exp() * xn + 1e-12;
            worst = worst.min(bound - dev);
            ok &= dev <= bound;
        }
    }
    outcome(ok, format!("lambda_2 = {l2:.4}, min slack to bound {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let g = generate_er(r.random_range(10..=40), r.random_range(0.1..0.5), r.random()).unwrap();
        let kind = if i % 2 == 0 {
            LaplacianKind::Combinatorial
        } else {
            LaplacianKind::SymmetricNormalized
        };
        let dec = eigendecompose(&g, kind).unwrap();
        let x = Signal::dirac(g.node_count(), r.random_range(0..g.node_count()));
        let t = r.random_range(0.0..20.0);
        // Covers both bounds and the cosine closed form (tolerance 1e-10 for unit x).
        let rep = check_wave_energy_bounds(&dec, &x, &[0.0, t / 2.0, t]).unwrap();
        violations += usize::from(!rep.pass);
        worst = worst.min(rep.margin);
    }
    outcome(violations == 0, format!("{violations} violations in 100 instances, worst raw margin {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    let times = uniform_grid(10.0, 20);
    let cfg = SolverConfig::default();
    for i in 0..20 {
        let g = if i < 10 {
            let a = generate_er(r.random_range(5..=20), 0.3, r.random()).unwrap();
            let b = generate_er(r.random_range(5..=20), 0.3, r.random()).unwrap();
            a.disjoint_union(&b)
        } else {
            generate_sbm(40, r.random_range(2..=4), 0.4, 0.0, r.random()).unwrap()
        };
        let comps = connected_components(&g);
        assert!(comps.count >= 2);
        let n = g.node_count();
        let src = r.random_range(0..n);
        let off: Vec<usize> = (0..n).filter(|&v| comps.labels[v] != comps.labels[src]).collect();
        let x = [Signal::dirac(n, src)];
        let y = [Signal::zeros(n)];
        for kind in [LaplacianKind::Combinatorial, LaplacianKind::SymmetricNormalized, LaplacianKind::RandomWalk] {
            let dec = eigendecompose(&g, kind).unwrap();
            let sols = [
                heat_solution_exact(&dec, &x, &times).unwrap(),
                wave_solution_exact(&dec, &x, &y, &times).unwrap(),
                heat_solution_cheb(&g, kind, &x, &times, &cfg).unwrap(),
                wave_solution_cheb(&g, kind, &x, &y, &times, &cfg).unwrap(),
            ];
            for sol in &sols {
                for j in 0..times.len() {
                    let snap = sol.snapshot(0, j);
                    for &v in &off {
                        worst = worst.max(snap[v].abs());
                    }
                }
            }
        }
    }
    outcome(worst <= 1e-10, format!("max off-support |u| = {worst:.2e} over 20 graphs, 3 Laplacians, both solvers"))
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let mut ok = true;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let g = random_connected_er(&mut r, 10, 50, 0.15, 0.4);
        for t in [0.5, 1.0, 2.0, 5.0] {
            let tail = 1e-10;
            let rep = check_ctrw_identity(&g, t, tail).unwrap();
            // The report's margin is its allowance (tail + 1e-8) minus the
            // worst entrywise deviation.
            let deviation = tail + 1e-8 - rep.margin;
            ok &= rep.pass && deviation <= 1e-8;
            worst = worst.max(deviation);
        }
    }
    outcome(ok, format!("max |U_H - Poisson mixture| = {worst:.2e} (<= 1e-8)"))
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut ok = true;
    let mut worst = f64::INFINITY;
    let times = uniform_grid(10.0, 100);
    for _ in 0..20 {
        let g = generate_er(r.random_range(8..=30), r.random_range(0.1..0.4), r.random()).unwrap();
        let n = g.node_count();
        let missing: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !g.has_edge(u, v))
            .collect();
        let (u, v) = missing[r.random_range(0..missing.len())];
        let denser = g.with_edge(u, v, 1.0).unwrap();
        let rep = check_energy_dominance(&g, &denser, &times).unwrap();
        ok &= rep.pass;
        worst = worst.min(rep.margin);
    }
    outcome(ok, format!("20 pairs, worst raw margin {worst:.2e} (slack 1e-10)"))
}

fn criterion_8() -> Outcome {
    let ps = [0.1, 0.2, 0.3];
    let means = er_decay_trend(25, &ps, 30, 1.0, SEED, LaplacianKind::Combinatorial).unwrap();
    let ok = means.windows(2).all(|w| w[0] > w[1]);
    outcome(ok, format!("mean |u_H(1)|^2 for p = 0.1, 0.2, 0.3: {means:.4?}"))
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let g = largest_component(&generate_er(25, 0.2, r.random()).unwrap());
    let n = g.node_count();
    let times = uniform_grid(20.0, 2000);
    let dec = eigendecompose(&g, LaplacianKind::Combinatorial).unwrap();
    let x = [Signal::dirac(n, r.random_range(0..n))];
    let wave = wave_solution_exact(&dec, &x, &[Signal::zeros(n)], &times).unwrap();
    let heat = heat_solution_exact(&dec, &x, &times).unwrap();
    let rise = energy_curve(&wave, 0).unwrap().max_step_increase();
    let heat_rise = energy_curve(&heat, 0).unwrap().max_step_increase();
    assert_eq!(wave.pde, Pde::Wave);
    outcome(
        rise >= 1e-6 && heat_rise <= 0.0,
        format!("largest wave step increase {rise:.3e} (>= 1e-6), heat {heat_rise:.2e} (<= 0) on {n} nodes"),
    )
}

fn recovery(task: Task, mse_cap: f64) -> Outcome {
    let cfg = ExperimentConfig::new(task, SEED);
    let res = run_experiment(&cfg).unwrap();
    let cv = &res.cv;
    let improved = cv.fold_validation_loss.iter().all(|(a, b)| b <= a);
    outcome(
        cv.mean_mse <= mse_cap && cv.mean_mse < cv.mean_baseline_mse && improved,
        format!(
            "10-fold MSE {:.3e} (<= {mse_cap:.1e}), mean-predictor baseline {:.3e}, target variance {:.3e}, validation loss never worse than at init: {improved}",
            cv.mean_mse, cv.mean_baseline_mse, res.target_variance
        ),
    )
}

fn criterion_10() -> Outcome {
    recovery(Task::ErPRecovery, 2e-2)
}

fn criterion_11() -> Outcome {
    recovery(Task::SbmBlocks, 3.0)
}

fn criterion_12() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    let cases: [(&str, Graph, Vec<(usize, usize)>, f64); 3] = [
        ("triangle", generate_complete(3), vec![(0, 1), (1, 2), (0, 2)], 0.5),
        ("K2", generate_path(2), vec![(0, 1)], 0.0),
        ("C4", generate_cycle(4).unwrap(), vec![(0, 1), (1, 2), (2, 3), (3, 0)], 0.0),
    ];
    for (name, g, edges, want) in &cases {
        for &(u, v) in edges {
            let oracle = common::curvature_by_enumeration(g.node_count(), edges, u, v);
            let got = ollivier_ricci_edge(g, u, v, 0.0).unwrap().kappa;
            ok &= (oracle - want).abs() < 1e-12 && (got - oracle).abs() < 1e-12;
        }
        details.push(format!("{name} {want}"));
    }
    let mut r = rng(12);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let g = random_connected_er(&mut r, 6, 12, 0.25, 0.6);
        let n = g.node_count();
        let mut measure = || {
            let k = r.random_range(1..=4.min(n));
            let mut nodes: Vec<usize> = (0..n).collect();
            for i in 0..k {
                let j = r.random_range(i..n);
                nodes.swap(i, j);
            }
            let w: Vec<f64> = (0..k).map(|_| r.random_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            let masses: Vec<f64> = w.iter().map(|x| x / s).collect();
            NodeMeasure::new(nodes[..k].to_vec(), masses).unwrap()
        };
        let (mu, nu) = (measure(), measure());
        let flow = wasserstein1(&g, &mu, &nu).unwrap();
        let edges: Vec<(usize, usize)> = g.edges().into_iter().map(|(u, v, _)| (u, v)).collect();
        let d = common::hop_distances(n, &edges);
        let cost: Vec<Vec<f64>> = mu.support.iter().map(|&a| nu.support.iter().map(|&b| d[a][b]).collect()).collect();
        let brute = common::brute_force_transport(&cost, &mu.masses, &nu.masses);
        worst = worst.max((flow - brute).abs());
    }
    ok &= worst <= 1e-10;
    outcome(ok, format!("edge curvatures match enumeration ({}); max |W1 flow - brute force| = {worst:.2e} on 100 measures", details.join(", ")))
}

fn flat(g: &mlp::Gradients) -> Vec<f64> {
    let mut out = Vec::new();
    for (w, b) in g.weights.iter().zip(&g.biases) {
        out.extend_from_slice(w.as_slice());
        out.extend_from_slice(b.as_slice());
    }
    out
}

fn criterion_13() -> Outcome {
    let mut r = rng(13);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let depth = r.random_range(2..=4);
        let mut widths: Vec<usize> = (0..depth).map(|_| r.random_range(1..=6)).collect();
        let task = if i % 2 == 0 {
            mlp::Task::Regression
        } else {
            mlp::Task::Classification
        };
        if task == mlp::Task::Classification {
            *widths.last_mut().unwrap() = r.random_range(2..=4);
        }
        let mut model = Mlp::init(&widths, task, r.random()).unwrap();
        // Random biases too: zero biases behind a dead layer put the next
        // pre-activation exactly on the rectifier kink.
        let random: Vec<f64> = (0..model.param_count()).map(|_| r.random_range(-1.0..1.0)).collect();
        model.set_params(&random).unwrap();
        let rows = r.random_range(3..=10);
        let x = DMatrix::from_fn(rows, widths[0], |_, _| r.random_range(-2.0..2.0));
        let out = *widths.last().unwrap();
        let y = match task {
            mlp::Task::Regression => DMatrix::from_fn(rows, out, |_, _| r.random_range(-1.0..1.0)),
            mlp::Task::Classification => {
                let labels: Vec<usize> = (0..rows).map(|_| r.random_range(0..out)).collect();
                DMatrix::from_fn(rows, out, |i, c| f64::from(u8::from(labels[i] == c)))
            }
        };
        let (_, grads) = model.gradients(&x, &y).unwrap();
        let analytic = flat(&grads);
        let params = model.params();
        let h = 1e-5;
        let mut numeric = vec![0.0; params.len()];
        for k in 0..params.len() {
            let mut p = params.clone();
            p[k] += h;
            model.set_params(&p).unwrap();
            let up = model.loss(&x, &y).unwrap();
            p[k] -= 2.0 * h;
            model.set_params(&p).unwrap();
            let down = model.loss(&x, &y).unwrap();
            numeric[k] = (up - down) / (2.0 * h);
        }
        model.set_params(&params).unwrap();
        let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(numeric.iter().map(|a| a * a).sum::<f64>().sqrt());
        let rel = if scale > 0.0 { diff / scale } else { diff };
        worst = worst.max(rel);
    }
    outcome(worst <= 1e-5, format!("max relative gradient error {worst:.2e} over 20 models (<= 1e-5)"))
}

/// Every regular file under `dir` with its bytes.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.clone(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn criterion_14() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    fs::write(p("k2.csv"), "src,dst\n0,1\n").unwrap();
    fs::write(p("split.csv"), "# nodes=5\nsrc,dst\n0,1\n1,2\n3,4\n").unwrap();
    let commands: Vec<Vec<String>> = [
        vec!["generate", "--family", "er", "--n", "40", "--count", "12", "--seed", "3", "--out", &p("er")],
        vec!["generate", "--family", "sbm", "--n", "40", "--blocks", "4", "--count", "3", "--seed", "3", "--out", &p("sbm")],
        vec!["solve", "--graph", &p("er/er_0000.csv"), "--pde", "heat", "--solver", "exact", "--times", "0,0.5,2", "--out", &p("h_exact.csv")],
        vec!["solve", "--graph", &p("er/er_0000.csv"), "--pde", "wave", "--solver", "chebyshev", "--laplacian", "rw", "--times", "0,0.5,2", "--out", &p("w_cheb.csv")],
        vec!["solve", "--graph", &p("k2.csv"), "--pde", "heat", "--laplacian", "comb", "--source", "0", "--times", "0,1", "--out", &p("k2_sol.csv")],
        vec!["solve", "--graph", &p("split.csv"), "--source", "0", "--times", "0,1", "--out", &p("split_sol.csv")],
        vec!["features", "--graph", &p("er"), "--T", "6", "--out", &p("feat_graph")],
        vec!["features", "--graph", &p("sbm/sbm_0000.csv"), "--level", "node", "--pde", "wave", "--solver", "chebyshev", "--out", &p("feat_node.csv")],
        vec!["labels", "--graph", &p("er"), "--out", &p("labels_node")],
        vec!["labels", "--graph", &p("sbm/sbm_0001.csv"), "--level", "edge", "--out", &p("labels_edge.csv")],
        vec!["train", "--features", &p("feat_graph"), "--targets", &p("er/manifest.csv"), "--hidden", "8,8", "--epochs", "30", "--folds", "3", "--seed", "5", "--out", &p("model")],
        vec!["eval", "--features", &p("feat_graph"), "--targets", &p("er/manifest.csv"), "--model", &p("model/model.json"), "--out", &p("eval.json")],
        vec!["verify", "--graph", &p("sbm/sbm_0002.csv"), "--suite", "all", "--seed", "9", "--out", &p("verify.jsonl")],
        vec!["verify", "--graph", &p("split.csv"), "--solution", &p("split_sol.csv"), "--out", &p("verify_sol.jsonl")],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();

    let run_all = || -> Vec<i32> {
        commands
            .iter()
            .map(|c| gdenet_cli::run(std::iter::once("gdenet".to_string()).chain(c.iter().cloned())))
            .collect()
    };
    let codes_a = run_all();
    let first = snapshot(dir.path());
    let codes_b = run_all();
    let second = snapshot(dir.path());
    let changed: Vec<String> = first
        .iter()
        .filter(|(k, v)| second.get(*k) != Some(*v))
        .map(|(k, _)| k.strip_prefix(dir.path()).unwrap().display().to_string())
        .collect();
    let all_zero = codes_a.iter().chain(&codes_b).all(|&c| c == 0);
    outcome(
        all_zero && changed.is_empty() && first.len() == second.len(),
        format!(
            "{} commands, {} output files, exit codes {:?}, differing files {:?}",
            commands.len(),
            first.len(),
            codes_a,
            changed
        ),
    )
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 14] = [
        ("oracle equivalence (Chebyshev vs exact)", Duration::from_secs(120), criterion_1),
        ("heat energy bounds and monotonicity", Duration::from_secs(60), criterion_2),
        ("heat limit", Duration::from_secs(10), criterion_3),
        ("wave energy bounds and cosine form", Duration::from_secs(60), criterion_4),
        ("component confinement", Duration::from_secs(60), criterion_5),
        ("continuous-time random walk identity", Duration::from_secs(60), criterion_6),
        ("between-graphs energy dominance", Duration::from_secs(60), criterion_7),
        ("ER decay trend in p", Duration::from_secs(60), criterion_8),
        ("wave energy non-monotonicity", Duration::from_secs(10), criterion_9),
        ("ER edge-probability recovery", Duration::from_secs(900), criterion_10),
        ("SBM block-count recovery", Duration::from_secs(900), criterion_11),
        ("curvature and transport oracles", Duration::from_secs(60), criterion_12),
        ("MLP gradient check", Duration::from_secs(60), criterion_13),
        ("CLI determinism", Duration::from_secs(300), criterion_14),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = Vec::new();
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let pass = o.pass && took <= *budget;
        println!(
            "[{}] {id:>2} {name}: {} ({:.1} s, budget {} s)",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
