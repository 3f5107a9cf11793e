//! Partial differential equations on graphs.
//!
//! The crate solves the semi-discrete heat equation `du/dt = -L u` and wave
//! equation `d2u/dt2 = -L u` on undirected weighted graphs, either exactly
//! through a dense eigendecomposition of the Laplacian or approximately with
//! Chebyshev polynomial filters that only need sparse matrix-vector products.
//!
//! On top of the solvers sit:
//!
//! - [`features`]: Dirac-source moment features per node and pooled per graph,
//! - [`dynamics`]: executable checks of the energy, confinement, random-walk
//!   and between-graph statements about heat and wave solutions,
//! - [`curvature`]: exact Ollivier-Ricci curvature labels,
//! - [`mlp`]: a small dense network used as the trainable head.

pub mod chebyshev;
pub mod curvature;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod features;
pub mod graph;
pub mod io;
pub mod mlp;
pub mod seed;
pub mod spectral;

mod par;

pub use error::{Error, Result};
pub use graph::{Graph, Signal};
pub use spectral::{LaplacianKind, Pde, SolutionTensor, SpectralDecomposition};
