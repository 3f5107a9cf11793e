//! Energy curves and executable checks of the structural statements about
//! heat and wave solutions.
//!
//! Every check returns a [`PropositionReport`]. A violated bound is a result,
//! not an error; `Err` is reserved for inputs the check cannot run on.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{connected_components, generate_er_stream, Graph, Signal};
use crate::par;
use crate::seed::{self, streams};
use crate::spectral::{
    build_laplacian, eigendecompose, heat_kernel, heat_solution_exact, wave_solution_exact,
    LaplacianKind, Pde, SolutionTensor, SpectralDecomposition,
};

/// Relative slack applied to energy comparisons, scaled by `‖x‖²`.
pub const ENERGY_SLACK: f64 = 1e-10;
/// Off-support magnitude tolerated by the confinement check.
pub const CONFINEMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCurve {
    pub pde: Pde,
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
}

impl EnergyCurve {
    /// Largest rise `energies[b] - energies[a]` over `a < b`.
    pub fn max_increase(&self) -> f64 {
        let mut lowest = f64::INFINITY;
        let mut best = f64::NEG_INFINITY;
        for &e in &self.energies {
            best = best.max(e - lowest);
            lowest = lowest.min(e);
        }
        best
    }

    /// Largest rise between consecutive samples.
    pub fn max_step_increase(&self) -> f64 {
        self.energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `‖u(source, ·, t)‖²` at every grid time.
pub fn energy_curve(sol: &SolutionTensor, source: usize) -> Result<EnergyCurve> {
    if source >= sol.sources {
        return Err(Error::InvalidParameter(format!(
            "source {source} out of range for {} sources",
            sol.sources
        )));
    }
    let energies = (0..sol.times.len())
        .map(|j| sol.snapshot(source, j).iter().map(|v| v * v).sum())
        .collect();
    Ok(EnergyCurve {
        pde: sol.pde,
        times: sol.times.clone(),
        energies,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Outcome of one check. `margin` is the worst signed distance to the bound
/// (negative means the raw inequality is violated); `pass` also accounts for
/// the check's slack. Failing reports always carry a witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub id: String,
    pub pass: bool,
    pub margin: f64,
    pub witness: Option<Witness>,
}

impl PropositionReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        if let Some(w) = self.witness.as_mut() {
            w.seed = Some(seed);
        }
        self
    }
}

/// Tracks the worst margin seen and where it happened.
struct Tracker {
    id: String,
    slack: f64,
    margin: f64,
    pass: bool,
    witness: Option<Witness>,
    first_failure: Option<Witness>,
}

impl Tracker {
    fn new(id: &str, slack: f64) -> Self {
        Tracker {
            id: id.to_string(),
            slack,
            margin: f64::INFINITY,
            pass: true,
            witness: None,
            first_failure: None,
        }
    }

    fn observe(&mut self, margin: f64, witness: impl FnOnce() -> Witness) {
        let ok = margin >= -self.slack;
        if margin < self.margin || (!ok && self.first_failure.is_none()) {
            let w = witness();
            if margin < self.margin {
                self.margin = margin;
                self.witness = Some(w.clone());
            }
            if !ok && self.first_failure.is_none() {
                self.first_failure = Some(w);
            }
        }
        self.pass &= ok;
    }

    fn finish(self) -> PropositionReport {
        let margin = if self.margin.is_finite() { self.margin } else { 0.0 };
        PropositionReport {
            id: self.id,
            pass: self.pass,
            margin,
            witness: if self.pass {
                self.witness
            } else {
                self.first_failure.or(self.witness)
            },
        }
    }
}

fn at_time(t: f64, detail: &str) -> Witness {
    Witness {
        time: Some(t),
        detail: Some(detail.to_string()),
        ..Witness::default()
    }
}

fn require_symmetric(dec: &SpectralDecomposition, what: &'static str) -> Result<()> {
    if dec.kind().is_symmetric() {
        Ok(())
    } else {
        Err(Error::RequiresSymmetricKind(what))
    }
}

/// Lower bound `e^{-2tλ_n}‖x‖²`, upper bound `|<ν_1,x>|² + e^{-2tλ_2}‖x‖²`
/// and non-increase of the heat energy at every grid time.
pub fn check_heat_energy_bounds(
    dec: &SpectralDecomposition,
    x: &Signal,
    times: &[f64],
) -> Result<PropositionReport> {
    require_symmetric(dec, "heat energy bounds")?;
    let sol = heat_solution_exact(dec, std::slice::from_ref(x), times)?;
    let curve = energy_curve(&sol, 0)?;
    let norm2 = x.norm_squared();
    let lambdas = dec.eigenvalues();
    let lambda_n = lambdas.last().copied().unwrap_or(0.0);
    let lambda_2 = lambdas.get(1).copied().unwrap_or(0.0);
    let p1 = dec.coefficients(x)[0].powi(2);

    let mut tr = Tracker::new("heat_energy_bounds", ENERGY_SLACK * norm2);
    for (j, (&t, &e)) in times.iter().zip(&curve.energies).enumerate() {
        tr.observe(e - (-2.0 * t * lambda_n).exp() * norm2, || at_time(t, "lower"));
        tr.observe(p1 + (-2.0 * t * lambda_2).exp() * norm2 - e, || at_time(t, "upper"));
        tr.observe(norm2 - e, || at_time(t, "initial energy"));
        if j > 0 && times[j - 1] <= t {
            tr.observe(curve.energies[j - 1] - e, || at_time(t, "monotone"));
        }
    }
    Ok(tr.finish())
}

/// `|<ν_1,x>|² <= ‖u_W(t)‖² <= ‖x‖²` with zero initial velocity, plus the
/// closed form `Σ cos²(√λ_i t)|<ν_i,x>|²` of the energy.
pub fn check_wave_energy_bounds(
    dec: &SpectralDecomposition,
    x: &Signal,
    times: &[f64],
) -> Result<PropositionReport> {
    require_symmetric(dec, "wave energy bounds")?;
    let n = dec.len();
    let sol = wave_solution_exact(dec, std::slice::from_ref(x), &[Signal::zeros(n)], times)?;
    let curve = energy_curve(&sol, 0)?;
    let norm2 = x.norm_squared();
    let c = dec.coefficients(x);
    let p1 = c[0].powi(2);

    let mut tr = Tracker::new("wave_energy_bounds", ENERGY_SLACK * norm2);
    for (&t, &e) in times.iter().zip(&curve.energies) {
        tr.observe(e - p1, || at_time(t, "lower"));
        tr.observe(norm2 - e, || at_time(t, "upper"));
        let closed: f64 = dec
            .eigenvalues()
            .iter()
            .zip(c.iter())
            .map(|(l, ci)| (l.sqrt() * t).cos().powi(2) * ci * ci)
            .sum();
        tr.observe(-(closed - e).abs(), || at_time(t, "cosine expression"));
    }
    Ok(tr.finish())
}

/// Component ids touched by any initial condition (nonzero entry).
pub fn support_components(g: &Graph, xs: &[&[f64]]) -> Vec<usize> {
    let labels = connected_components(g).labels;
    let mut comps: Vec<usize> = xs
        .iter()
        .flat_map(|x| {
            x.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| labels[i])
                .collect::<Vec<_>>()
        })
        .collect();
    comps.sort_unstable();
    comps.dedup();
    comps
}

/// Solutions started on the components in `support` must stay zero
/// elsewhere.
pub fn check_component_confinement(
    g: &Graph,
    sol: &SolutionTensor,
    support: &[usize],
) -> Result<PropositionReport> {
    if sol.nodes != g.node_count() {
        return Err(Error::LengthMismatch {
            expected: g.node_count(),
            got: sol.nodes,
        });
    }
    let labels = connected_components(g).labels;
    let outside: Vec<usize> = (0..g.node_count())
        .filter(|&v| !support.contains(&labels[v]))
        .collect();
    let mut tr = Tracker::new(&format!("component_confinement_{}", sol.pde), 0.0);
    tr.observe(CONFINEMENT_TOL, Witness::default);
    for s in 0..sol.sources {
        for (j, &t) in sol.times.iter().enumerate() {
            let snap = sol.snapshot(s, j);
            for &v in &outside {
                let m = CONFINEMENT_TOL - snap[v].abs();
                tr.observe(m, || Witness {
                    node: Some(v),
                    time: Some(t),
                    detail: Some(format!("source {s}")),
                    ..Witness::default()
                });
            }
        }
    }
    Ok(tr.finish())
}

/// Poisson weights `p_t(k) = t^k e^{-t} / k!` for `k = 0..=K`, with `K` the
/// first index whose upper tail mass is at most `tail_tol`.
pub fn poisson_weights(t: f64, tail_tol: f64) -> Vec<f64> {
    let mut weights = vec![(-t).exp()];
    let mut cumulative = weights[0];
    let mut k = 0usize;
    // The tail is computed as 1 - cumulative; stop once it is small enough or
    // the terms underflow.
    while 1.0 - cumulative > tail_tol && k < 10_000 {
        let next = weights[k] * t / (k + 1) as f64;
        k += 1;
        weights.push(next);
        cumulative += next;
        if next == 0.0 && k as f64 > t {
            break;
        }
    }
    weights
}

/// Heat kernel of the random-walk Laplacian against the Poisson mixture of
/// random-walk powers `Σ_k p_t(k) P^k`, `P = D^{-1} A`.
pub fn check_ctrw_identity(g: &Graph, t: f64, tail_tol: f64) -> Result<PropositionReport> {
    if !(t.is_finite() && t >= 0.0) || !(tail_tol > 0.0) {
        return Err(Error::InvalidParameter("need t >= 0 and tail_tol > 0".into()));
    }
    let n = g.node_count();
    let dec = eigendecompose(g, LaplacianKind::RandomWalk)?;
    let kernel = heat_kernel(&dec, t);
    let p = DMatrix::identity(n, n) - build_laplacian(g, LaplacianKind::RandomWalk);
    let weights = poisson_weights(t, tail_tol);
    let mut power = DMatrix::identity(n, n);
    let mut mixture = DMatrix::zeros(n, n);
    for (k, w) in weights.iter().enumerate() {
        if k > 0 {
            power = &power * &p;
        }
        mixture += &power * *w;
    }
    let mut tr = Tracker::new("ctrw_identity", 0.0);
    let allowed = tail_tol + 1e-8;
    for r in 0..n {
        for c in 0..n {
            let dev = (kernel[(r, c)] - mixture[(r, c)]).abs();
            tr.observe(allowed - dev, || Witness {
                node: Some(r),
                time: Some(t),
                detail: Some(format!("entry ({r}, {c}), K = {}", weights.len() - 1)),
                ..Witness::default()
            });
        }
    }
    if n == 0 {
        tr.observe(allowed, Witness::default);
    }
    Ok(tr.finish())
}

/// Heat energy on `denser` never exceeds the energy on `g` when both start
/// from the sum of their (combinatorial) Laplacian eigenvectors.
pub fn check_energy_dominance(
    g: &Graph,
    denser: &Graph,
    times: &[f64],
) -> Result<PropositionReport> {
    if !g.is_dominated_by(denser) {
        return Err(Error::NotSubgraph(
            "every edge of the first graph must appear in the second with at least its weight"
                .into(),
        ));
    }
    let n = g.node_count();
    let energies = |graph: &Graph| -> Result<(Vec<f64>, f64)> {
        let dec = eigendecompose(graph, LaplacianKind::Combinatorial)?;
        let x: Vec<f64> = dec.eigenvectors().column_iter().fold(vec![0.0; n], |mut acc, col| {
            acc.iter_mut().zip(col.iter()).for_each(|(a, v)| *a += v);
            acc
        });
        let x = Signal::new(x)?;
        let norm2 = x.norm_squared();
        let sol = heat_solution_exact(&dec, &[x], times)?;
        Ok((energy_curve(&sol, 0)?.energies, norm2))
    };
    let (base, norm2) = energies(g)?;
    let (dense, _) = energies(denser)?;
    let mut tr = Tracker::new("energy_dominance", ENERGY_SLACK * norm2.max(1.0));
    for (j, &t) in times.iter().enumerate() {
        tr.observe(base[j] - dense[j], || at_time(t, "denser graph holds more energy"));
    }
    Ok(tr.finish())
}

/// Mean heat energy at `t_probe` over `graphs_per_p` ER graphs per edge
/// probability, each started from a Dirac at a uniformly chosen node of its
/// largest component. Graph `b` of probability `a` uses graph stream
/// `a * graphs_per_p + b`, and the same index on the Dirac stream.
pub fn er_decay_trend(
    n: usize,
    p_list: &[f64],
    graphs_per_p: usize,
    t_probe: f64,
    seed: u64,
    kind: LaplacianKind,
) -> Result<Vec<f64>> {
    if p_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("p_list must be strictly increasing".into()));
    }
    if graphs_per_p == 0 || n == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and graphs_per_p >= 1".into()));
    }
    p_list
        .iter()
        .enumerate()
        .map(|(a, &p)| {
            let energies: Vec<Result<f64>> = par::map_indexed(graphs_per_p, |b| {
                let idx = (a * graphs_per_p + b) as u64;
                let g = generate_er_stream(n, p, seed, streams::GRAPH + idx)?;
                let g = largest_component(&g);
                let mut rng = seed::rng(seed, streams::DIRAC + idx);
                let v = rng.random_range(0..g.node_count());
                let dec = eigendecompose(&g, kind)?;
                let sol = heat_solution_exact(&dec, &[Signal::dirac(g.node_count(), v)], &[t_probe])?;
                Ok(sol.snapshot(0, 0).iter().map(|u| u * u).sum())
            });
            let energies: Vec<f64> = energies.into_iter().collect::<Result<_>>()?;
            Ok(energies.iter().sum::<f64>() / graphs_per_p as f64)
        })
        .collect()
}

/// Induced subgraph on the largest connected component (smallest id on ties).
pub fn largest_component(g: &Graph) -> Graph {
    let comps = connected_components(g).members();
    let best = comps
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    match comps.get(best) {
        Some(nodes) => g.induced(nodes),
        None => g.clone(),
    }
}

/// Report that passes iff `means` is strictly decreasing.
pub fn trend_report(p_list: &[f64], means: &[f64]) -> PropositionReport {
    let mut margin = f64::INFINITY;
    let mut worst = None;
    for (i, w) in means.windows(2).enumerate() {
        if w[0] - w[1] < margin {
            margin = w[0] - w[1];
            worst = Some(Witness {
                detail: Some(format!("p = {} vs p = {}", p_list[i], p_list[i + 1])),
                ..Witness::default()
            });
        }
    }
    PropositionReport {
        id: "er_decay_trend".into(),
        pass: margin > 0.0,
        margin: if margin.is_finite() { margin } else { 0.0 },
        witness: worst,
    }
}

/// Which checks [`verify_graph`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Heat,
    Wave,
    Confinement,
    Ctrw,
    Dominance,
    Trend,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "heat" => Suite::Heat,
            "wave" => Suite::Wave,
            "confinement" => Suite::Confinement,
            "ctrw" => Suite::Ctrw,
            "dominance" => Suite::Dominance,
            "trend" => Suite::Trend,
            other => return Err(Error::InvalidParameter(format!("unknown suite {other:?}"))),
        })
    }
}

/// Uniform grid `0, step, ..., t_max`.
pub fn uniform_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|j| t_max * j as f64 / steps as f64).collect()
}

const SUITE_DIRACS: usize = 8;

/// Runs the selected checks on `g`. Dirac sources are drawn from the
/// `SUITE` stream of `seed`; the trend check uses its own ER ensemble
/// (n = 25, p in {0.1, 0.2, 0.3}, 30 graphs each, t = 1).
pub fn verify_graph(g: &Graph, suite: Suite, seed: u64) -> Result<Vec<PropositionReport>> {
    let n = g.node_count();
    let mut out = Vec::new();
    let wants = |s: Suite| suite == Suite::All || suite == s;
    let mut rng = seed::rng(seed, streams::SUITE);
    let sources: Vec<usize> = if n == 0 {
        Vec::new()
    } else {
        (0..SUITE_DIRACS.min(n)).map(|_| rng.random_range(0..n)).collect()
    };

    if wants(Suite::Heat) || wants(Suite::Wave) {
        for kind in [LaplacianKind::Combinatorial, LaplacianKind::SymmetricNormalized] {
            let dec = eigendecompose(g, kind)?;
            for &v in &sources {
                let x = Signal::dirac(n, v);
                if wants(Suite::Heat) {
                    let mut r = check_heat_energy_bounds(&dec, &x, &uniform_grid(5.0, 50))?;
                    r.id = format!("{}_{}_node{}", r.id, kind, v);
                    out.push(r.with_seed(seed));
                }
                if wants(Suite::Wave) {
                    let mut r = check_wave_energy_bounds(&dec, &x, &uniform_grid(20.0, 200))?;
                    r.id = format!("{}_{}_node{}", r.id, kind, v);
                    out.push(r.with_seed(seed));
                }
            }
        }
    }
    if wants(Suite::Confinement) {
        let members = connected_components(g).members();
        let times = uniform_grid(10.0, 20);
        for kind in [LaplacianKind::Combinatorial, LaplacianKind::SymmetricNormalized] {
            let dec = eigendecompose(g, kind)?;
            for (c, nodes) in members.iter().enumerate().take(SUITE_DIRACS) {
                let x = [Signal::dirac(n, nodes[0])];
                let heat = heat_solution_exact(&dec, &x, &times)?;
                let wave = wave_solution_exact(&dec, &x, &[Signal::zeros(n)], &times)?;
                for sol in [heat, wave] {
                    let mut r = check_component_confinement(g, &sol, &[c])?;
                    r.id = format!("{}_{}_component{}", r.id, kind, c);
                    out.push(r.with_seed(seed));
                }
            }
        }
    }
    if wants(Suite::Ctrw) {
        for t in [0.5, 1.0, 2.0, 5.0] {
            let mut r = check_ctrw_identity(g, t, 1e-10)?;
            r.id = format!("{}_t{}", r.id, t);
            out.push(r);
        }
    }
    if wants(Suite::Dominance) {
        let missing: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !g.has_edge(u, v))
            .collect();
        let denser = if missing.is_empty() {
            g.clone()
        } else {
            let (u, v) = missing[rng.random_range(0..missing.len())];
            g.with_edge(u, v, 1.0)?
        };
        out.push(check_energy_dominance(g, &denser, &uniform_grid(10.0, 100))?.with_seed(seed));
    }
    if wants(Suite::Trend) {
        let ps = [0.1, 0.2, 0.3];
        let means = er_decay_trend(25, &ps, 30, 1.0, seed, LaplacianKind::Combinatorial)?;
        out.push(trend_report(&ps, &means).with_seed(seed));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_complete, generate_cycle, generate_er, generate_path, generate_sbm};

    #[test]
    fn energy_curve_k2() {
        let dec = eigendecompose(&generate_path(2), LaplacianKind::Combinatorial).unwrap();
        let times = uniform_grid(2.0, 8);
        let sol = heat_solution_exact(&dec, &[Signal::dirac(2, 0)], &times).unwrap();
        let curve = energy_curve(&sol, 0).unwrap();
        assert_eq!(curve.energies[0], 1.0);
        for (t, e) in times.iter().zip(&curve.energies) {
            assert!((e - (1.0 + (-4.0 * t).exp()) / 2.0).abs() < 1e-14);
        }
        assert!(energy_curve(&sol, 1).is_err());

        let zero = heat_solution_exact(&dec, &[Signal::zeros(2)], &times).unwrap();
        assert!(energy_curve(&zero, 0).unwrap().energies.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn k2_wave_energy() {
        let dec = eigendecompose(&generate_path(2), LaplacianKind::Combinatorial).unwrap();
        let times = uniform_grid(10.0, 100);
        let sol =
            wave_solution_exact(&dec, &[Signal::dirac(2, 0)], &[Signal::zeros(2)], &times).unwrap();
        let curve = energy_curve(&sol, 0).unwrap();
        for (t, e) in times.iter().zip(&curve.energies) {
            let c = (2f64.sqrt() * t).cos();
            assert!((e - (1.0 + c * c) / 2.0).abs() < 1e-14);
        }
        let r = check_wave_energy_bounds(&dec, &Signal::dirac(2, 0), &times).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn zero_mode_is_stationary() {
        let g = generate_er(15, 0.4, 2).unwrap();
        let dec = eigendecompose(&g, LaplacianKind::Combinatorial).unwrap();
        let nu1 = Signal::new(dec.eigenvectors().column(0).iter().copied().collect()).unwrap();
        let times = uniform_grid(5.0, 10);
        assert!(check_heat_energy_bounds(&dec, &nu1, &times).unwrap().pass);
        assert!(check_wave_energy_bounds(&dec, &nu1, &times).unwrap().pass);
        let sol = heat_solution_exact(&dec, &[nu1], &times).unwrap();
        let e = energy_curve(&sol, 0).unwrap();
        assert!(e.energies.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn random_walk_kind_rejected() {
        let dec = eigendecompose(&generate_cycle(5).unwrap(), LaplacianKind::RandomWalk).unwrap();
        assert!(matches!(
            check_heat_energy_bounds(&dec, &Signal::dirac(5, 0), &[0.0, 1.0]),
            Err(Error::RequiresSymmetricKind(_))
        ));
    }

    #[test]
    fn confinement_on_disjoint_k5() {
        let k5 = generate_complete(5);
        let g = k5.disjoint_union(&k5);
        let dec = eigendecompose(&g, LaplacianKind::Combinatorial).unwrap();
        let x = [Signal::dirac(10, 2)];
        let times = uniform_grid(10.0, 20);
        let heat = heat_solution_exact(&dec, &x, &times).unwrap();
        let wave = wave_solution_exact(&dec, &x, &[Signal::zeros(10)], &times).unwrap();
        let support = support_components(&g, &[&x[0]]);
        assert_eq!(support, vec![0]);
        assert!(check_component_confinement(&g, &heat, &support).unwrap().pass);
        assert!(check_component_confinement(&g, &wave, &support).unwrap().pass);

        let mut bad = heat.clone();
        bad.snapshot_mut(0, 3)[7] = 1e-3;
        let r = check_component_confinement(&g, &bad, &support).unwrap();
        assert!(!r.pass);
        assert_eq!(r.witness.unwrap().node, Some(7));
    }

    #[test]
    fn confinement_sbm_blocks() {
        let g = generate_sbm(15, 3, 1.0, 0.0, 1).unwrap();
        let dec = eigendecompose(&g, LaplacianKind::SymmetricNormalized).unwrap();
        let x = [Signal::dirac(15, 6)];
        let sol = heat_solution_exact(&dec, &x, &uniform_grid(5.0, 10)).unwrap();
        let r = check_component_confinement(&g, &sol, &[1]).unwrap();
        assert!(r.pass);
        assert!(r.margin > 0.0);
    }

    #[test]
    fn poisson_weights_tail() {
        assert_eq!(poisson_weights(0.0, 1e-10), vec![1.0]);
        let w = poisson_weights(2.0, 1e-10);
        let total: f64 = w.iter().sum();
        assert!((1.0 - 1e-10..=1.0 + 1e-15).contains(&total));
        assert!((w[3] - 8.0 * (-2f64).exp() / 6.0).abs() < 1e-15);
    }

    #[test]
    fn ctrw_small() {
        let g = generate_er(25, 0.2, 4).unwrap();
        let r = check_ctrw_identity(&g, 2.0, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(check_ctrw_identity(&g, 0.0, 1e-10).unwrap().pass);
    }

    #[test]
    fn dominance_cycle_chord() {
        let c6 = generate_cycle(6).unwrap();
        let chord = c6.with_edge(0, 3, 1.0).unwrap();
        let times = uniform_grid(10.0, 50);
        assert!(check_energy_dominance(&c6, &chord, &times).unwrap().pass);
        let same = check_energy_dominance(&c6, &c6, &times).unwrap();
        assert!(same.pass);
        assert!(same.margin.abs() < 1e-12);
        assert!(matches!(
            check_energy_dominance(&chord, &c6, &times),
            Err(Error::NotSubgraph(_))
        ));
    }

    #[test]
    fn trend_single_and_complete() {
        let one = er_decay_trend(10, &[0.3], 3, 1.0, 1, LaplacianKind::Combinatorial).unwrap();
        assert_eq!(one.len(), 1);
        assert!(trend_report(&[0.3], &one).pass);
        let m = er_decay_trend(25, &[0.1, 1.0], 10, 1.0, 5, LaplacianKind::Combinatorial).unwrap();
        assert!(m[1] < m[0]);
        assert!(er_decay_trend(10, &[0.2, 0.1], 3, 1.0, 1, LaplacianKind::Combinatorial).is_err());
        assert!(!trend_report(&[0.1, 0.2], &[0.5, 0.5]).pass);
    }

    #[test]
    fn max_increase() {
        let c = EnergyCurve {
            pde: Pde::Wave,
            times: vec![0.0, 1.0, 2.0, 3.0],
            energies: vec![1.0, 0.2, 0.5, 0.4],
        };
        assert!((c.max_increase() - 0.3).abs() < 1e-15);
        assert!((c.max_step_increase() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn report_json_shape() {
        let r = trend_report(&[0.1, 0.2], &[0.5, 0.4]);
        let v: serde_json::Value = serde_json::from_str(&r.to_json_line()).unwrap();
        for key in ["id", "pass", "margin", "witness"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
