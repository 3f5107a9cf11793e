//! Computations behind the browser demo, free of any JS types so they can
//! be tested natively.

use rand::Rng;

use gdenet::chebyshev::{
    estimate_lambda_max, fit_series, heat_solution_cheb, wave_solution_cheb, SolverConfig,
    TargetFunction,
};
use gdenet::curvature::edge_curvatures;
use gdenet::dynamics::{energy_curve, uniform_grid};
use gdenet::graph::{generate_er, generate_sbm, Graph, Signal};
use gdenet::seed::{self, streams};
use gdenet::spectral::{eigendecompose, heat_solution_exact, wave_solution_exact, LaplacianKind, Pde};

/// Largest graph the page will build; dense eigendecompositions beyond this
/// make the interface sluggish.
pub const MAX_NODES: usize = 300;

const LAYOUT_ITERATIONS: usize = 300;

pub type Result<T> = std::result::Result<T, String>;

fn err(e: gdenet::Error) -> String {
    e.to_string()
}

/// A generated graph with a fixed drawing.
#[derive(Debug, Clone)]
pub struct Scene {
    pub graph: Graph,
    /// Node coordinates in `[0, 1]²`, interleaved `x, y`.
    pub positions: Vec<f64>,
}

/// `param` is the edge probability for `er` and the block count for `sbm`
/// (with `p_in = 0.5`, `p_out = 0.02`).
pub fn build_scene(family: &str, n: usize, param: f64, seed: u64) -> Result<Scene> {
    if n == 0 || n > MAX_NODES {
        return Err(format!("n must be in 1..={MAX_NODES}"));
    }
    let graph = match family {
        "er" => generate_er(n, param, seed).map_err(err)?,
        "sbm" => {
            if !(param >= 1.0 && param.fract() == 0.0) {
                return Err("block count must be a positive integer".into());
            }
            generate_sbm(n, param as usize, 0.5, 0.02, seed).map_err(err)?
        }
        other => return Err(format!("unknown family {other:?}")),
    };
    let positions = layout(&graph, seed);
    Ok(Scene { graph, positions })
}

/// Fruchterman–Reingold spring layout from seeded random positions,
/// rescaled to the unit square.
pub fn layout(g: &Graph, seed: u64) -> Vec<f64> {
    let n = g.node_count();
    let mut rng = seed::rng(seed, streams::DIRAC);
    let mut pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    if n > 1 {
        let k = (1.0 / n as f64).sqrt();
        let mut temperature = 0.1;
        for _ in 0..LAYOUT_ITERATIONS {
            let mut disp = vec![[0.0f64; 2]; n];
            for a in 0..n {
                for b in a + 1..n {
                    let dx = pos[a][0] - pos[b][0];
                    let dy = pos[a][1] - pos[b][1];
                    let d2 = (dx * dx + dy * dy).max(1e-9);
                    let f = k * k / d2;
                    disp[a][0] += dx * f;
                    disp[a][1] += dy * f;
                    disp[b][0] -= dx * f;
                    disp[b][1] -= dy * f;
                }
            }
            for (a, b, _) in g.edges() {
                let dx = pos[a][0] - pos[b][0];
                let dy = pos[a][1] - pos[b][1];
                let d = (dx * dx + dy * dy).sqrt();
                let f = d / k;
                disp[a][0] -= dx * f;
                disp[a][1] -= dy * f;
                disp[b][0] += dx * f;
                disp[b][1] += dy * f;
            }
            for (p, d) in pos.iter_mut().zip(&disp) {
                // Weak pull to the centre keeps isolated nodes on screen.
                let gx = d[0] - 0.05 * (p[0] - 0.5) / k;
                let gy = d[1] - 0.05 * (p[1] - 0.5) / k;
                let len = (gx * gx + gy * gy).sqrt().max(1e-12);
                let step = len.min(temperature);
                p[0] += gx / len * step;
                p[1] += gy / len * step;
            }
            temperature *= 0.985;
        }
    }
    normalize(&mut pos);
    pos.into_iter().flatten().collect()
}

fn normalize(pos: &mut [[f64; 2]]) {
    for axis in 0..2 {
        let lo = pos.iter().map(|p| p[axis]).fold(f64::INFINITY, f64::min);
        let hi = pos.iter().map(|p| p[axis]).fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        for p in pos.iter_mut() {
            p[axis] = if span > 0.0 { (p[axis] - lo) / span } else { 0.5 };
        }
    }
}

/// Snapshots of one Dirac-started run and its energy curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub times: Vec<f64>,
    /// `times.len()` snapshots of `n` values each, concatenated.
    pub frames: Vec<f64>,
    pub energies: Vec<f64>,
}

pub fn parse_kind(kind: &str) -> Result<LaplacianKind> {
    kind.parse().map_err(err)
}

pub fn parse_pde(pde: &str) -> Result<Pde> {
    pde.parse().map_err(err)
}

/// Exact solution from a unit impulse at `source`, zero initial velocity
/// for the wave equation, sampled at `steps + 1` times in `[0, t_max]`.
pub fn simulate(
    g: &Graph,
    pde: Pde,
    kind: LaplacianKind,
    source: usize,
    t_max: f64,
    steps: usize,
) -> Result<Run> {
    let n = g.node_count();
    if source >= n {
        return Err(format!("source {source} out of range"));
    }
    if !(t_max.is_finite() && t_max > 0.0) || steps == 0 {
        return Err("need t_max > 0 and at least one step".into());
    }
    let times = uniform_grid(t_max, steps);
    let dec = eigendecompose(g, kind).map_err(err)?;
    let x = [Signal::dirac(n, source)];
    let sol = match pde {
        Pde::Heat => heat_solution_exact(&dec, &x, &times),
        Pde::Wave => wave_solution_exact(&dec, &x, &[Signal::zeros(n)], &times),
    }
    .map_err(err)?;
    let energies = energy_curve(&sol, 0).map_err(err)?.energies;
    let frames = (0..times.len()).flat_map(|j| sol.snapshot(0, j).to_vec()).collect();
    Ok(Run {
        times,
        frames,
        energies,
    })
}

/// One point of the Chebyshev convergence sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub tolerance: f64,
    pub order: usize,
    /// Max-abs difference to the exact solution over all nodes.
    pub error: f64,
}

/// Solves from a Dirac at `source` up to time `t` with the Chebyshev solver
/// at tolerances `10⁻¹ … 10⁻¹²`, reporting polynomial order and error.
/// For the wave equation the order is that of the cosine series.
pub fn chebyshev_convergence(
    g: &Graph,
    pde: Pde,
    kind: LaplacianKind,
    source: usize,
    t: f64,
) -> Result<Vec<ConvergencePoint>> {
    let n = g.node_count();
    if source >= n {
        return Err(format!("source {source} out of range"));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err("need t > 0".into());
    }
    let dec = eigendecompose(g, kind).map_err(err)?;
    let x = [Signal::dirac(n, source)];
    let y = [Signal::zeros(n)];
    let exact = match pde {
        Pde::Heat => heat_solution_exact(&dec, &x, &[t]),
        Pde::Wave => wave_solution_exact(&dec, &x, &y, &[t]),
    }
    .map_err(err)?;
    (1..=12)
        .map(|e| {
            let tolerance = 10f64.powi(-e);
            let cfg = SolverConfig {
                tolerance,
                ..SolverConfig::default()
            };
            let lmax = estimate_lambda_max(g, kind, cfg.lambda_max);
            let target = match pde {
                Pde::Heat => TargetFunction::Heat(t),
                Pde::Wave => TargetFunction::WaveCos(t),
            };
            let order = fit_series(target, lmax, &cfg).map_err(err)?.order();
            let approx = match pde {
                Pde::Heat => heat_solution_cheb(g, kind, &x, &[t], &cfg),
                Pde::Wave => wave_solution_cheb(g, kind, &x, &y, &[t], &cfg),
            }
            .map_err(err)?;
            Ok(ConvergencePoint {
                tolerance,
                order,
                error: exact.max_abs_diff(&approx),
            })
        })
        .collect()
}

/// Ollivier–Ricci curvature of every edge in [`Graph::edges`] order.
pub fn curvatures(g: &Graph, alpha: f64) -> Result<Vec<f64>> {
    Ok(edge_curvatures(g, alpha).map_err(err)?.into_iter().map(|e| e.kappa).collect())
}
