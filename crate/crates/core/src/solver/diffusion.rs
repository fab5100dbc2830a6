//! Two-point flux diffusion operator and the backward-Euler solve.

use crate::error::{Error, Result};
use crate::geometry::Mesh;

/// Per-species face transmissibilities `|f| a_f / d_f` with harmonic-mean `a_f`.
/// Interface faces carry no diffusive flux.
#[derive(Debug, Clone)]
pub struct DiffusionOperator {
    pub faces: Vec<(usize, usize)>,
    pub trans: Vec<Vec<f64>>,
    pub volumes: Vec<f64>,
    plus_cells: Vec<usize>,
    minus_cells: Vec<usize>,
}

/// Assembles the operator from per-cell diagonal tensors `coeffs[species][cell]`.
pub fn assemble_diffusion(mesh: &Mesh, coeffs: &[Vec<[f64; 2]>]) -> Result<DiffusionOperator> {
    let mut trans = Vec::with_capacity(coeffs.len());
    for a in coeffs {
        if a.len() != mesh.n_cells() {
            return Err(Error::Config("one diffusion tensor per cell is required".into()));
        }
        if a.iter().flatten().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(Error::Config("diffusion tensor is not symmetric positive definite".into()));
        }
        trans.push(
            mesh.faces
                .iter()
                .map(|f| {
                    let (ka, kb) = (a[f.a][f.axis], a[f.b][f.axis]);
                    f.length * 2.0 * ka * kb / (ka + kb) / f.distance
                })
                .collect(),
        );
    }
    Ok(DiffusionOperator {
        faces: mesh.faces.iter().map(|f| (f.a, f.b)).collect(),
        trans,
        volumes: mesh.cells.iter().map(|c| c.volume).collect(),
        plus_cells: mesh.cells_on(crate::geometry::Side::Plus).collect(),
        minus_cells: mesh.cells_on(crate::geometry::Side::Minus).collect(),
    })
}

impl DiffusionOperator {
    /// `(L u)_c = (1/|c|) sum_f T_f (u_nb - u_c)` for species `i`.
    pub fn apply(&self, i: usize, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for ((a, b), t) in self.faces.iter().zip(&self.trans[i]) {
            let flux = t * (u[*b] - u[*a]);
            out[*a] += flux;
            out[*b] -= flux;
        }
        for (o, v) in out.iter_mut().zip(&self.volumes) {
            *o /= v;
        }
        out
    }

    /// `(V + dt K) x` where `K` is the transmissibility graph Laplacian.
    fn system_apply(&self, i: usize, dt: f64, x: &[f64], out: &mut [f64]) {
        for ((o, v), xi) in out.iter_mut().zip(&self.volumes).zip(x) {
            *o = v * xi;
        }
        for ((a, b), t) in self.faces.iter().zip(&self.trans[i]) {
            let flux = dt * t * (x[*a] - x[*b]);
            out[*a] += flux;
            out[*b] -= flux;
        }
    }

    /// Solves `(V + dt K) x = b` by Jacobi-preconditioned CG to relative residual
    /// `tol`, then shifts each compartment by a constant so that `sum V x = sum b`
    /// holds exactly per compartment. Returns the iteration count.
    pub fn solve(&self, i: usize, dt: f64, b: &[f64], x: &mut [f64], tol: f64) -> Result<usize> {
        let n = b.len();
        let mut diag: Vec<f64> = self.volumes.clone();
        for ((a, c), t) in self.faces.iter().zip(&self.trans[i]) {
            diag[*a] += dt * t;
            diag[*c] += dt * t;
        }
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut r = vec![0.0; n];
        let mut ap = vec![0.0; n];
        self.system_apply(i, dt, x, &mut ap);
        for k in 0..n {
            r[k] = b[k] - ap[k];
        }
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let max_iter = 10 * n + 100;
        let mut iters = 0;
        while r.iter().map(|v| v * v).sum::<f64>().sqrt() > tol * bnorm && bnorm > 0.0 {
            if iters >= max_iter {
                return Err(Error::Abort(format!("CG did not converge in {max_iter} iterations")));
            }
            iters += 1;
            self.system_apply(i, dt, &p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            let alpha = rz / pap;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            for k in 0..n {
                z[k] = r[k] / diag[k];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        for block in [&self.plus_cells, &self.minus_cells] {
            let vol: f64 = block.iter().map(|&c| self.volumes[c]).sum();
            if vol == 0.0 {
                continue;
            }
            let target: f64 = block.iter().map(|&c| b[c]).sum();
            let have: f64 = block.iter().map(|&c| self.volumes[c] * x[c]).sum();
            let shift = (target - have) / vol;
            for &c in block {
                x[c] += shift;
            }
        }
        Ok(iters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;

    fn op(res: usize, a: f64) -> (Mesh, DiffusionOperator) {
        let m = Mesh::build(&Geometry::flat_symmetric(), res).unwrap();
        let coeffs = vec![vec![[a, a]; m.n_cells()]];
        let d = assemble_diffusion(&m, &coeffs).unwrap();
        (m, d)
    }

    #[test]
    fn constants_are_in_the_kernel() {
        let (m, d) = op(8, 1.7);
        let u = vec![3.0; m.n_cells()];
        assert!(d.apply(0, &u).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn interior_stencil_is_five_point() {
        let (m, d) = op(8, 1.0);
        let c = m.cell_at(12, 4).unwrap();
        let mut u = vec![0.0; m.n_cells()];
        u[c] = 1.0;
        let lu = d.apply(0, &u);
        let h2 = m.h * m.h;
        assert!((lu[c] + 4.0 / h2).abs() < 1e-9);
        assert!((lu[m.cell_at(13, 4).unwrap()] - 1.0 / h2).abs() < 1e-9);
    }

    #[test]
    fn no_coupling_across_interface() {
        let (m, d) = op(4, 1.0);
        let u: Vec<f64> = m.cells.iter().map(|c| if c.center[0] > 0.0 { 1.0 } else { 0.0 }).collect();
        assert!(d.apply(0, &u).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn harmonic_mean_on_faces() {
        let m = Mesh::build(&Geometry::flat_symmetric(), 2).unwrap();
        let coeffs = vec![m.cells.iter().map(|c| if c.ix == 2 { [1.0, 1.0] } else { [3.0, 3.0] }).collect()];
        let d = assemble_diffusion(&m, &coeffs).unwrap();
        let f = m.faces.iter().position(|f| f.axis == 0 && m.cells[f.a].ix == 2).unwrap();
        assert!((d.trans[0][f] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn solve_conserves_block_mass() {
        let (m, d) = op(8, 1.0);
        let b: Vec<f64> = m.cells.iter().map(|c| c.volume * (1.0 + c.center[0] * c.center[1])).collect();
        let mut x = vec![0.0; m.n_cells()];
        d.solve(0, 0.1, &b, &mut x, 1e-10).unwrap();
        let mass: f64 = x.iter().zip(&d.volumes).map(|(a, v)| a * v).sum();
        assert!((mass - b.iter().sum::<f64>()).abs() < 1e-14);
    }
}
