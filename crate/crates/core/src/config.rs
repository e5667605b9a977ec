//! Every numerical default in one place. Outputs echo this block.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::MeshOptions;
use crate::numerics::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub rtol: f64,
    pub atol: f64,
    /// Intervals across the padded support window for quadrature meshes.
    pub mesh_intervals: usize,
    /// Resonance threshold on the scaled margin.
    pub tau: f64,
    /// Tail truncation threshold on `|v| (1+|x|)^(2n+1)`.
    pub eps_tail: f64,
    /// Expansion order the tail truncation is sized for.
    pub max_order: u32,
    pub dyson_order: usize,
    /// Contour radius is this value divided by the window width.
    pub contour_radius: f64,
    pub contour_nodes: usize,
    /// Warn when `|k| * width` falls below this.
    pub small_k_guard: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            mesh_intervals: 4096,
            tau: 1e-8,
            eps_tail: 1e-12,
            max_order: 3,
            dyson_order: 12,
            contour_radius: 0.05,
            contour_nodes: 64,
            small_k_guard: 1e-3,
        }
    }
}

impl Settings {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances { rtol: self.rtol, atol: self.atol }
    }

    pub fn mesh(&self) -> MeshOptions {
        MeshOptions { intervals: self.mesh_intervals, max_h: None }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !(pos(self.rtol) && pos(self.atol)) {
            return Err(Error::Config("rtol and atol must be positive".into()));
        }
        if !pos(self.tau) || !pos(self.eps_tail) || !pos(self.contour_radius) {
            return Err(Error::Config("tau, eps_tail and contour_radius must be positive".into()));
        }
        if self.mesh_intervals < 8 || self.contour_nodes < 4 || self.dyson_order == 0 {
            return Err(Error::Config("mesh_intervals >= 8, contour_nodes >= 4, dyson_order >= 1".into()));
        }
        Ok(())
    }
}
