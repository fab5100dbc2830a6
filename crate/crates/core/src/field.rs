//! Per-cell species densities.

use serde::{Deserialize, Serialize};

use crate::geometry::{Mesh, Side};

/// Densities stored cell-major: `values[cell * n_species + i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateField {
    pub n_species: usize,
    pub values: Vec<f64>,
}

impl StateField {
    pub fn zeros(n_cells: usize, n_species: usize) -> Self {
        StateField { n_species, values: vec![0.0; n_cells * n_species] }
    }

    pub fn from_fn(mesh: &Mesh, n_species: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut s = StateField::zeros(mesh.n_cells(), n_species);
        for c in 0..mesh.n_cells() {
            for i in 0..n_species {
                s.values[c * n_species + i] = f(c, i);
            }
        }
        s
    }

    pub fn n_cells(&self) -> usize {
        self.values.len() / self.n_species.max(1)
    }

    pub fn cell(&self, c: usize) -> &[f64] {
        &self.values[c * self.n_species..(c + 1) * self.n_species]
    }

    pub fn cell_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.n_species;
        &mut self.values[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, i: usize) -> f64 {
        self.values[c * self.n_species + i]
    }

    /// Total amount of species `i` in compartment `side`.
    pub fn mass(&self, mesh: &Mesh, side: Side, i: usize) -> f64 {
        mesh.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.side == side)
            .map(|(k, c)| c.volume * self.get(k, i))
            .sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute difference to `other`.
    pub fn sup_distance(&self, other: &StateField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Volume-weighted averages onto a coarser nested mesh.
    pub fn restrict(&self, fine: &Mesh, coarse: &Mesh, map: &[usize]) -> StateField {
        let n = self.n_species;
        let mut out = StateField::zeros(coarse.n_cells(), n);
        for (f, &c) in map.iter().enumerate() {
            let w = fine.cells[f].volume / coarse.cells[c].volume;
            for i in 0..n {
                out.values[c * n + i] += w * self.get(f, i);
            }
        }
        out
    }
}
