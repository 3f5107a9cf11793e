//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The page builds a [`Demo`] from a random graph, then asks it for
//! propagation runs, Chebyshev convergence sweeps and edge curvatures.

pub mod model;

use wasm_bindgen::prelude::*;

use model::{Run, Scene};

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub struct Demo {
    scene: Scene,
}

#[wasm_bindgen]
impl Demo {
    /// `family` is `er` (with `param` the edge probability) or `sbm` (with
    /// `param` the block count).
    #[wasm_bindgen(constructor)]
    pub fn new(family: &str, n: usize, param: f64, seed: u64) -> Result<Demo, JsError> {
        Ok(Demo {
            scene: model::build_scene(family, n, param, seed).map_err(js)?,
        })
    }

    #[wasm_bindgen(getter)]
    pub fn nodes(&self) -> usize {
        self.scene.graph.node_count()
    }

    /// Edge endpoints, interleaved.
    pub fn edges(&self) -> Vec<u32> {
        self.scene
            .graph
            .edges()
            .into_iter()
            .flat_map(|(u, v, _)| [u as u32, v as u32])
            .collect()
    }

    /// Node coordinates in the unit square, interleaved `x, y`.
    pub fn positions(&self) -> Vec<f64> {
        self.scene.positions.clone()
    }

    /// Propagation from a unit impulse at `source`.
    pub fn simulate(
        &self,
        pde: &str,
        kind: &str,
        source: usize,
        t_max: f64,
        steps: usize,
    ) -> Result<Simulation, JsError> {
        let pde = model::parse_pde(pde).map_err(js)?;
        let kind = model::parse_kind(kind).map_err(js)?;
        let run = model::simulate(&self.scene.graph, pde, kind, source, t_max, steps).map_err(js)?;
        Ok(Simulation { run })
    }

    /// Flattened `tolerance, order, error` triples of the Chebyshev sweep.
    pub fn chebyshev_convergence(
        &self,
        pde: &str,
        kind: &str,
        source: usize,
        t: f64,
    ) -> Result<Vec<f64>, JsError> {
        let pde = model::parse_pde(pde).map_err(js)?;
        let kind = model::parse_kind(kind).map_err(js)?;
        let points =
            model::chebyshev_convergence(&self.scene.graph, pde, kind, source, t).map_err(js)?;
        Ok(points
            .iter()
            .flat_map(|p| [p.tolerance, p.order as f64, p.error])
            .collect())
    }

    /// Curvature per edge, in the order of [`Demo::edges`].
    pub fn curvatures(&self, alpha: f64) -> Result<Vec<f64>, JsError> {
        model::curvatures(&self.scene.graph, alpha).map_err(js)
    }
}

#[wasm_bindgen]
pub struct Simulation {
    run: Run,
}

#[wasm_bindgen]
impl Simulation {
    pub fn times(&self) -> Vec<f64> {
        self.run.times.clone()
    }

    /// All snapshots, `times().length` blocks of node values.
    pub fn frames(&self) -> Vec<f64> {
        self.run.frames.clone()
    }

    /// Squared norm of each snapshot.
    pub fn energies(&self) -> Vec<f64> {
        self.run.energies.clone()
    }
}
