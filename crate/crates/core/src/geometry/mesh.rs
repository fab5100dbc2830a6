//! Structured finite-volume mesh over a two-compartment geometry.

use std::io::Write;

use super::{Geometry, Point, Side};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub ix: usize,
    pub iy: usize,
    pub side: Side,
    pub center: Point,
    pub volume: f64,
}

/// Face between two cells of the same compartment; the normal points from `a` to `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub distance: f64,
    pub axis: usize,
    pub midpoint: Point,
}

/// Transmitting face on the interface.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceFace {
    pub plus: usize,
    pub minus: usize,
    pub length: f64,
    pub midpoint: Point,
}

/// No-flux face on the outer boundary (or on a non-transmitting wall).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFace {
    pub cell: usize,
    pub length: f64,
    pub midpoint: Point,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub resolution: usize,
    pub h: f64,
    pub origin: Point,
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    pub interface_faces: Vec<InterfaceFace>,
    pub boundary_faces: Vec<BoundaryFace>,
    lookup: Vec<Option<usize>>,
}

fn on_grid(v: f64, origin: f64, h: f64) -> bool {
    let k = (v - origin) / h;
    (k - k.round()).abs() < 1e-9
}

impl Mesh {
    /// Uniform grid with `resolution` cells per unit length.
    pub fn build(geometry: &Geometry, resolution: usize) -> Result<Mesh> {
        if resolution < 2 {
            return Err(Error::Mesh(format!("resolution must be at least 2, got {resolution}")));
        }
        let h = 1.0 / resolution as f64;
        let (lp, hp) = geometry.plus.bbox();
        let (lm, hm) = geometry.minus.bbox();
        let origin = [lp[0].min(lm[0]), lp[1].min(lm[1])];
        let top = [hp[0].max(hm[0]), hp[1].max(hm[1])];
        let verts = geometry.plus.vertices.iter().chain(geometry.minus.vertices.iter());
        for v in verts {
            if !on_grid(v[0], origin[0], h) || !on_grid(v[1], origin[1], h) {
                return Err(Error::Mesh(format!("vertex {v:?} is not on a grid line at resolution {resolution}")));
            }
        }
        for seg in &geometry.interface {
            for e in seg {
                if !on_grid(e[0], origin[0], h) || !on_grid(e[1], origin[1], h) {
                    return Err(Error::Mesh(format!(
                        "interface endpoint {e:?} is not on a grid line at resolution {resolution}"
                    )));
                }
            }
        }
        let nx = ((top[0] - origin[0]) / h).round() as usize;
        let ny = ((top[1] - origin[1]) / h).round() as usize;
        let mut cells = Vec::new();
        let mut lookup = vec![None; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let c = [origin[0] + (ix as f64 + 0.5) * h, origin[1] + (iy as f64 + 0.5) * h];
                let side = if geometry.plus.contains(c) {
                    Side::Plus
                } else if geometry.minus.contains(c) {
                    Side::Minus
                } else {
                    continue;
                };
                lookup[iy * nx + ix] = Some(cells.len());
                cells.push(Cell { ix, iy, side, center: c, volume: h * h });
            }
        }
        let mut faces = Vec::new();
        let mut interface_faces = Vec::new();
        let mut boundary_faces = Vec::new();
        let iface_tol = 1e-9 * h;
        for (id, cell) in cells.iter().enumerate() {
            let neighbours = [
                (cell.ix + 1 < nx).then(|| lookup[cell.iy * nx + cell.ix + 1]).flatten(),
                (cell.iy + 1 < ny).then(|| lookup[(cell.iy + 1) * nx + cell.ix]).flatten(),
            ];
            let lower = [
                (cell.ix > 0).then(|| lookup[cell.iy * nx + cell.ix - 1]).flatten(),
                (cell.iy > 0).then(|| lookup[(cell.iy - 1) * nx + cell.ix]).flatten(),
            ];
            for axis in 0..2 {
                let mut mid = cell.center;
                mid[axis] += 0.5 * h;
                match neighbours[axis] {
                    Some(nb) if cells[nb].side == cell.side => faces.push(Face {
                        a: id,
                        b: nb,
                        length: h,
                        distance: h,
                        axis,
                        midpoint: mid,
                    }),
                    Some(nb) => {
                        if geometry.interface_distance(mid) <= iface_tol {
                            let (p, m) = if cell.side == Side::Plus { (id, nb) } else { (nb, id) };
                            interface_faces.push(InterfaceFace { plus: p, minus: m, length: h, midpoint: mid });
                        } else {
                            boundary_faces.push(BoundaryFace { cell: id, length: h, midpoint: mid });
                            boundary_faces.push(BoundaryFace { cell: nb, length: h, midpoint: mid });
                        }
                    }
                    None => boundary_faces.push(BoundaryFace { cell: id, length: h, midpoint: mid }),
                }
                if lower[axis].is_none() {
                    let mut lo = cell.center;
                    lo[axis] -= 0.5 * h;
                    boundary_faces.push(BoundaryFace { cell: id, length: h, midpoint: lo });
                }
            }
        }
        Ok(Mesh { resolution, h, origin, nx, ny, cells, faces, interface_faces, boundary_faces, lookup })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_at(&self, ix: usize, iy: usize) -> Option<usize> {
        if ix < self.nx && iy < self.ny {
            self.lookup[iy * self.nx + ix]
        } else {
            None
        }
    }

    /// Cell whose closed square contains `p`, if any.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let fx = (p[0] - self.origin[0]) / self.h;
        let fy = (p[1] - self.origin[1]) / self.h;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let ix = (fx.floor() as usize).min(self.nx.saturating_sub(1));
        let iy = (fy.floor() as usize).min(self.ny.saturating_sub(1));
        if fx > self.nx as f64 || fy > self.ny as f64 {
            return None;
        }
        self.cell_at(ix, iy)
    }

    pub fn side_volume(&self, side: Side) -> f64 {
        self.cells.iter().filter(|c| c.side == side).map(|c| c.volume).sum()
    }

    pub fn interface_length(&self) -> f64 {
        self.interface_faces.iter().map(|f| f.length).sum()
    }

    pub fn cells_on(&self, side: Side) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().enumerate().filter(move |(_, c)| c.side == side).map(|(i, _)| i)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "cell_id,compartment,center_x,center_y,volume")?;
        for (i, c) in self.cells.iter().enumerate() {
            writeln!(w, "{},{},{},{},{}", i, c.side.name(), c.center[0], c.center[1], c.volume)?;
        }
        Ok(())
    }

    /// Coarse cell containing each cell of `fine`, for meshes sharing an origin.
    pub fn coarsening_map(&self, fine: &Mesh) -> Result<Vec<usize>> {
        if !fine.resolution.is_multiple_of(self.resolution) {
            return Err(Error::Mesh("fine resolution must be a multiple of the coarse one".into()));
        }
        let ratio = fine.resolution / self.resolution;
        fine.cells
            .iter()
            .map(|c| {
                self.cell_at(c.ix / ratio, c.iy / ratio)
                    .filter(|&k| self.cells[k].side == c.side)
                    .ok_or_else(|| Error::Mesh("meshes do not nest".into()))
            })
            .collect()
    }
}
