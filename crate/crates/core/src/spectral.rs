//! Laplacians, dense eigendecomposition and the closed-form heat and wave
//! solutions built from it.
//!
//! For a decomposition `L = S Λ S⁻¹` every solver here evaluates a spectral
//! function `f(L) x = S f(Λ) S⁻¹ x`:
//!
//! ```text
//! heat:  u(t) = Σ e^{-tλ_i} <s̃_i, x> s_i
//! wave:  u(t) = Σ cos(√λ_i t) <s̃_i, x> s_i + Σ g_t(λ_i) <s̃_i, y> s_i
//!        g_t(λ) = sin(√λ t) / √λ,  g_t(0) = t
//! ```
//!
//! where `s̃_i` are the rows of `S⁻¹`. For the combinatorial and symmetric
//! normalized Laplacians `S` is orthogonal and `S⁻¹ = Sᵀ`. The random-walk
//! Laplacian is similar to the symmetric one, `L_rw = D^{-1/2} L_s D^{1/2}`,
//! so it shares its eigenvalues and uses `S = D^{-1/2} Ψ`, `S⁻¹ = Ψᵀ D^{1/2}`.
//!
//! Isolated nodes get a zero Laplacian row under every kind: they form their
//! own component and never change.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Signal};
use crate::par;

/// Largest node count accepted by [`eigendecompose`].
pub const DENSE_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianKind {
    /// `L = D - A`
    Combinatorial,
    /// `L_s = D^{-1/2} L D^{-1/2}`
    SymmetricNormalized,
    /// `L_rw = I - D^{-1} A`
    RandomWalk,
}

impl LaplacianKind {
    pub fn is_symmetric(self) -> bool {
        !matches!(self, LaplacianKind::RandomWalk)
    }

    pub fn short_name(self) -> &'static str {
        match self {
            LaplacianKind::Combinatorial => "comb",
            LaplacianKind::SymmetricNormalized => "sym",
            LaplacianKind::RandomWalk => "rw",
        }
    }
}

impl fmt::Display for LaplacianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for LaplacianKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "comb" | "combinatorial" => Ok(LaplacianKind::Combinatorial),
            "sym" | "symmetric_normalized" => Ok(LaplacianKind::SymmetricNormalized),
            "rw" | "random_walk" => Ok(LaplacianKind::RandomWalk),
            other => Err(Error::InvalidParameter(format!("unknown Laplacian kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pde {
    Heat,
    Wave,
}

impl fmt::Display for Pde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pde::Heat => "heat",
            Pde::Wave => "wave",
        })
    }
}

impl FromStr for Pde {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heat" => Ok(Pde::Heat),
            "wave" => Ok(Pde::Wave),
            other => Err(Error::InvalidParameter(format!("unknown pde {other:?}"))),
        }
    }
}

/// `d^{-1/2}` per node, with 1 for isolated nodes (their Laplacian row is
/// zero, so the choice only has to keep the similarity invertible).
pub fn inv_sqrt_degrees(g: &Graph) -> Vec<f64> {
    g.weighted_degrees()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 1.0 })
        .collect()
}

/// Dense Laplacian of the requested kind.
pub fn build_laplacian(g: &Graph, kind: LaplacianKind) -> DMatrix<f64> {
    let n = g.node_count();
    let deg = g.weighted_degrees();
    let mut l = DMatrix::zeros(n, n);
    match kind {
        LaplacianKind::Combinatorial => {
            for u in 0..n {
                l[(u, u)] = deg[u];
                for (&v, &w) in g.neighbors(u).iter().zip(g.neighbor_weights(u)) {
                    l[(u, v)] = -w;
                }
            }
        }
        LaplacianKind::SymmetricNormalized => {
            let s = inv_sqrt_degrees(g);
            for u in 0..n {
                if deg[u] > 0.0 {
                    l[(u, u)] = 1.0;
                }
                for (&v, &w) in g.neighbors(u).iter().zip(g.neighbor_weights(u)) {
                    l[(u, v)] = -w * (s[u] * s[v]);
                }
            }
        }
        LaplacianKind::RandomWalk => {
            for u in 0..n {
                if deg[u] > 0.0 {
                    l[(u, u)] = 1.0;
                }
                for (&v, &w) in g.neighbors(u).iter().zip(g.neighbor_weights(u)) {
                    l[(u, v)] = -w / deg[u];
                }
            }
        }
    }
    l
}

/// `out = L x` using the sparse adjacency only.
pub fn apply_laplacian(g: &Graph, kind: LaplacianKind, x: &[f64], out: &mut [f64]) {
    let n = g.node_count();
    match kind {
        LaplacianKind::Combinatorial => {
            for u in 0..n {
                let mut acc = 0.0;
                let mut d = 0.0;
                for (&v, &w) in g.neighbors(u).iter().zip(g.neighbor_weights(u)) {
                    acc += w * x[v];
                    d += w;
                }
                out[u] = d * x[u] - acc;
            }
        }
        LaplacianKind::SymmetricNormalized | LaplacianKind::RandomWalk => {
            let s = inv_sqrt_degrees(g);
            for u in 0..n {
                if g.degree(u) == 0 {
                    out[u] = 0.0;
                    continue;
                }
                let mut acc = 0.0;
                if kind == LaplacianKind::SymmetricNormalized {
                    for (&v, &w) in g.neighbors(u).iter().zip(g.neighbor_weights(u)) {
                        acc += w * (s[u] * s[v]) * x[v];
                    }
                } else {
                    let d = g.weighted_degree(u);
                    for (&v, &w) in g.neighbors(u).iter().zip(g.neighbor_weights(u)) {
                        acc += w / d * x[v];
                    }
                }
                out[u] = x[u] - acc;
            }
        }
    }
}

/// Eigendecomposition `L = S Λ S⁻¹` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    kind: LaplacianKind,
    eigenvalues: Vec<f64>,
    /// Column i is the right eigenvector `s_i`.
    eigenvectors: DMatrix<f64>,
    /// `S⁻¹`; row i pairs with column i of `eigenvectors`.
    left_basis: DMatrix<f64>,
}

impl SpectralDecomposition {
    /// Assembles a decomposition from parts; used to test basis independence.
    pub fn from_parts(
        kind: LaplacianKind,
        eigenvalues: Vec<f64>,
        eigenvectors: DMatrix<f64>,
        left_basis: DMatrix<f64>,
    ) -> Self {
        SpectralDecomposition {
            kind,
            eigenvalues,
            eigenvectors,
            left_basis,
        }
    }

    pub fn kind(&self) -> LaplacianKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn left_basis(&self) -> &DMatrix<f64> {
        &self.left_basis
    }

    /// `S⁻¹ x`.
    pub fn coefficients(&self, x: &[f64]) -> DVector<f64> {
        &self.left_basis * DVector::from_column_slice(x)
    }

    /// `S f(Λ) S⁻¹` as a dense matrix.
    pub fn kernel<F: Fn(f64) -> f64>(&self, f: F) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (i, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.eigenvalues[i]);
        }
        scaled * &self.left_basis
    }

    /// `S f(Λ) S⁻¹ x`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F, x: &[f64]) -> Vec<f64> {
        let mut c = self.coefficients(x);
        for (ci, &l) in c.iter_mut().zip(&self.eigenvalues) {
            *ci *= f(l);
        }
        (&self.eigenvectors * c).as_slice().to_vec()
    }

    /// Number of eigenvalues at most `tol`.
    pub fn zero_multiplicity(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l <= tol).count()
    }
}

/// Dense eigendecomposition of the chosen Laplacian of `g`.
pub fn eigendecompose(g: &Graph, kind: LaplacianKind) -> Result<SpectralDecomposition> {
    let n = g.node_count();
    if n > DENSE_CAP {
        return Err(Error::TooLargeForDense { n, cap: DENSE_CAP });
    }
    let sym_kind = match kind {
        LaplacianKind::Combinatorial => LaplacianKind::Combinatorial,
        _ => LaplacianKind::SymmetricNormalized,
    };
    let l = build_laplacian(g, sym_kind);
    let max_iter = 100 * n.max(10);
    let eig = nalgebra::SymmetricEigen::try_new(l, f64::EPSILON, max_iter)
        .ok_or(Error::EigenNoConvergence { iterations: max_iter })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let mut psi = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        psi.set_column(dst, &eig.eigenvectors.column(src));
    }

    let (right, left) = match kind {
        LaplacianKind::RandomWalk => {
            let s = inv_sqrt_degrees(g);
            let mut right = psi.clone();
            for (r, mut row) in right.row_iter_mut().enumerate() {
                row *= s[r];
            }
            let mut left = psi.transpose();
            for (c, mut col) in left.column_iter_mut().enumerate() {
                col /= s[c];
            }
            (right, left)
        }
        _ => {
            let left = psi.transpose();
            (psi, left)
        }
    };
    Ok(SpectralDecomposition {
        kind,
        eigenvalues,
        eigenvectors: right,
        left_basis: left,
    })
}

/// `sin(√λ t) / √λ`, continuously extended by `t` at `λ = 0`.
pub fn wave_velocity_fn(lambda: f64, t: f64) -> f64 {
    if lambda > 0.0 {
        let r = lambda.sqrt();
        (r * t).sin() / r
    } else {
        t
    }
}

pub fn wave_position_fn(lambda: f64, t: f64) -> f64 {
    (lambda.sqrt() * t).cos()
}

pub fn heat_fn(lambda: f64, t: f64) -> f64 {
    (-t * lambda).exp()
}

/// Solution values indexed by (source, node, time).
///
/// Stored source-major with one contiguous node vector per (source, time).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTensor {
    pub pde: Pde,
    pub kind: LaplacianKind,
    pub times: Vec<f64>,
    pub sources: usize,
    pub nodes: usize,
    values: Vec<f64>,
    /// False when an approximate solver could not reach its tolerance.
    pub tolerance_met: bool,
}

impl SolutionTensor {
    /// Wraps snapshots given as `snapshots[source][time] = node values`.
    pub fn from_snapshots(
        pde: Pde,
        kind: LaplacianKind,
        times: Vec<f64>,
        nodes: usize,
        snapshots: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let sources = snapshots.len();
        let mut values = Vec::with_capacity(sources * times.len() * nodes);
        for per_source in snapshots {
            if per_source.len() != times.len() {
                return Err(Error::LengthMismatch {
                    expected: times.len(),
                    got: per_source.len(),
                });
            }
            for snap in per_source {
                if snap.len() != nodes {
                    return Err(Error::LengthMismatch {
                        expected: nodes,
                        got: snap.len(),
                    });
                }
                values.extend(snap);
            }
        }
        Ok(SolutionTensor {
            pde,
            kind,
            times,
            sources,
            nodes,
            values,
            tolerance_met: true,
        })
    }

    pub fn get(&self, source: usize, node: usize, time: usize) -> f64 {
        self.snapshot(source, time)[node]
    }

    /// Node values for one (source, time index).
    pub fn snapshot(&self, source: usize, time: usize) -> &[f64] {
        let start = (source * self.times.len() + time) * self.nodes;
        &self.values[start..start + self.nodes]
    }

    pub fn snapshot_mut(&mut self, source: usize, time: usize) -> &mut [f64] {
        let start = (source * self.times.len() + time) * self.nodes;
        &mut self.values[start..start + self.nodes]
    }

    /// Largest absolute entrywise difference; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &SolutionTensor) -> f64 {
        if self.values.len() != other.values.len() {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidParameter(format!("time {t} must be finite and >= 0")));
    }
    Ok(())
}

fn check_sources(dec: &SpectralDecomposition, xs: &[Signal]) -> Result<()> {
    xs.iter().try_for_each(|x| x.check_len(dec.len()))
}

/// Exact heat solutions for each initial condition in `xs`.
pub fn heat_solution_exact(
    dec: &SpectralDecomposition,
    xs: &[Signal],
    times: &[f64],
) -> Result<SolutionTensor> {
    check_sources(dec, xs)?;
    check_times(times)?;
    let snapshots = par::map_indexed(xs.len(), |s| {
        let c = dec.coefficients(&xs[s]);
        times
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    return xs[s].to_vec();
                }
                synthesize(dec, &c, |l| heat_fn(l, t))
            })
            .collect()
    });
    SolutionTensor::from_snapshots(Pde::Heat, dec.kind, times.to_vec(), dec.len(), snapshots)
}

/// Exact wave solutions with positions `xs` and velocities `ys`.
pub fn wave_solution_exact(
    dec: &SpectralDecomposition,
    xs: &[Signal],
    ys: &[Signal],
    times: &[f64],
) -> Result<SolutionTensor> {
    check_sources(dec, xs)?;
    check_sources(dec, ys)?;
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    check_times(times)?;
    let snapshots = par::map_indexed(xs.len(), |s| {
        let cx = dec.coefficients(&xs[s]);
        let cy = dec.coefficients(&ys[s]);
        times
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    return xs[s].to_vec();
                }
                let mut c = cx.clone();
                for i in 0..c.len() {
                    let l = dec.eigenvalues[i];
                    c[i] = wave_position_fn(l, t) * cx[i] + wave_velocity_fn(l, t) * cy[i];
                }
                (&dec.eigenvectors * c).as_slice().to_vec()
            })
            .collect()
    });
    SolutionTensor::from_snapshots(Pde::Wave, dec.kind, times.to_vec(), dec.len(), snapshots)
}

fn synthesize<F: Fn(f64) -> f64>(dec: &SpectralDecomposition, c: &DVector<f64>, f: F) -> Vec<f64> {
    let mut c = c.clone();
    for (ci, &l) in c.iter_mut().zip(&dec.eigenvalues) {
        *ci *= f(l);
    }
    (&dec.eigenvectors * c).as_slice().to_vec()
}

/// Heat kernel `e^{-tL}`.
pub fn heat_kernel(dec: &SpectralDecomposition, t: f64) -> DMatrix<f64> {
    if t == 0.0 {
        return DMatrix::identity(dec.len(), dec.len());
    }
    dec.kernel(|l| heat_fn(l, t))
}
