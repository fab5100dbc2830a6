use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::projection::ProjectionTruncation;
use crate::error::{config, Error, Result};
use crate::field::StateField;
use crate::geometry::polygon::dist;
use crate::geometry::{reflection_map, Geometry, Point, ReflectionMap, ReflectionPartners, Side};
use crate::profile::cutoff;
use crate::solver::{run, Scenario, ScenarioDescriptor, Trajectory};

/// Nonlinearity composed with the densities inside a residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenormTest {
    Constant(f64),
    Linear(Vec<f64>),
    Projection { trunc: ProjectionTruncation, j: usize },
    Combination(Vec<(f64, RenormTest)>),
}

impl RenormTest {
    pub fn projection(e: f64, dim: usize, j: usize) -> Result<Self> {
        let trunc = ProjectionTruncation::new(e, dim)?;
        if j >= dim {
            return config(format!("component {j} out of range for {dim} variables"));
        }
        Ok(RenormTest::Projection { trunc, j })
    }

    /// Number of variables, when fixed by the test itself.
    pub fn dim(&self) -> Option<usize> {
        match self {
            RenormTest::Constant(_) => None,
            RenormTest::Linear(c) => Some(c.len()),
            RenormTest::Projection { trunc, .. } => Some(trunc.dim),
            RenormTest::Combination(parts) => parts.iter().find_map(|(_, t)| t.dim()),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        let ok = match self {
            RenormTest::Combination(parts) => {
                return parts.iter().try_for_each(|(_, t)| t.check_dim(dim));
            }
            _ => self.dim().is_none_or(|d| d == dim),
        };
        if ok {
            Ok(())
        } else {
            config(format!("test function acts on {:?} variables, residual needs {dim}", self.dim()))
        }
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        match self {
            RenormTest::Constant(c) => *c,
            RenormTest::Linear(c) => c.iter().zip(u).map(|(a, b)| a * b).sum(),
            RenormTest::Projection { trunc, j } => trunc.value(*j, u),
            RenormTest::Combination(parts) => parts.iter().map(|(a, t)| a * t.value(u)).sum(),
        }
    }

    /// Adds `scale * D(test)(u)` to `out`.
    pub fn add_gradient(&self, u: &[f64], scale: f64, out: &mut [f64], scratch: &mut Vec<f64>) {
        match self {
            RenormTest::Constant(_) => {}
            RenormTest::Linear(c) => {
                for (o, a) in out.iter_mut().zip(c) {
                    *o += scale * a;
                }
            }
            RenormTest::Projection { trunc, j } => {
                scratch.resize(u.len(), 0.0);
                trunc.gradient_into(*j, u, scratch);
                for (o, g) in out.iter_mut().zip(scratch.iter()) {
                    *o += scale * g;
                }
            }
            RenormTest::Combination(parts) => {
                for (a, t) in parts {
                    t.add_gradient(u, scale * a, out, scratch);
                }
            }
        }
    }
}

/// `psi(t, x) = (1 + cos(pi t) / 2) cutoff(|x - center| / radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeBump {
    pub center: Point,
    pub radius: f64,
}

impl SpaceTimeBump {
    pub fn time_factor(t: f64) -> f64 {
        1.0 + 0.5 * (std::f64::consts::PI * t).cos()
    }

    pub fn spatial(&self, x: Point) -> f64 {
        cutoff(dist(x, self.center) / self.radius)
    }
}

/// Cells, faces and interface faces touched by a sparse weight field.
struct Active {
    cells: Vec<usize>,
    faces: Vec<usize>,
    interface: Vec<usize>,
}

impl Active {
    fn new(sc: &Scenario, cells: Vec<usize>) -> Active {
        let mut mark = vec![false; sc.mesh.n_cells()];
        for &c in &cells {
            mark[c] = true;
        }
        let faces = (0..sc.mesh.faces.len())
            .filter(|&f| mark[sc.mesh.faces[f].a] || mark[sc.mesh.faces[f].b])
            .collect();
        let interface = (0..sc.mesh.interface_faces.len())
            .filter(|&f| mark[sc.mesh.interface_faces[f].plus] || mark[sc.mesh.interface_faces[f].minus])
            .collect();
        Active { cells, faces, interface }
    }
}

/// Right-hand side of the discrete equations tested with the cell weights `w`:
/// `-sum_f T_f dW du + sum_c |c| W . f_eps - sum_Gamma |e| (W+ - W-) . r_eps`.
fn tested_rhs(sc: &Scenario, u: &StateField, w: &[f64], act: &Active) -> f64 {
    let n = sc.n_species();
    let eps = sc.solver.epsilon;
    let mut g = 0.0;
    for &f in &act.faces {
        let face = &sc.mesh.faces[f];
        for i in 0..n {
            let dw = w[face.b * n + i] - w[face.a * n + i];
            let du = u.get(face.b, i) - u.get(face.a, i);
            g -= sc.diffusion.trans[i][f] * dw * du;
        }
    }
    if sc.model.has_reaction() {
        for &c in &act.cells {
            let cell = &sc.mesh.cells[c];
            let f = sc.model.reaction_rate_eps(cell.side, u.cell(c), eps);
            g += cell.volume * (0..n).map(|i| w[c * n + i] * f[i]).sum::<f64>();
        }
    }
    for &k in &act.interface {
        let face = &sc.mesh.interface_faces[k];
        let r = sc.model.transmission_rate_eps(u.cell(face.plus), u.cell(face.minus), eps);
        g -= face.length * (0..n).map(|i| (w[face.plus * n + i] - w[face.minus * n + i]) * r[i]).sum::<f64>();
    }
    g
}

fn check_trajectory(traj: &Trajectory, sc: &Scenario) -> Result<()> {
    if traj.snapshots.len() < 2 || traj.snapshots.len() != traj.times.len() {
        return Err(Error::Precondition("residuals need at least two snapshots with their times".into()));
    }
    if traj.snapshots[0].n_cells() != sc.mesh.n_cells() || traj.snapshots[0].n_species != sc.n_species() {
        return Err(Error::Precondition("trajectory does not match the scenario mesh".into()));
    }
    Ok(())
}

/// Cells of `side` in the support of `psi`; the support must stay off the interface.
fn outer_support(sc: &Scenario, psi: &SpaceTimeBump, side: Side) -> Result<Vec<(usize, f64)>> {
    if sc.geometry.interface_distance(psi.center) < psi.radius {
        return Err(Error::Precondition(format!(
            "test function around {:?} with radius {} reaches the interface",
            psi.center, psi.radius
        )));
    }
    let mut out = Vec::new();
    for (c, cell) in sc.mesh.cells.iter().enumerate() {
        let b = psi.spatial(cell.center);
        if b > 0.0 {
            if cell.side != side {
                return Err(Error::Precondition(format!(
                    "test function around {:?} is not confined to the {} compartment",
                    psi.center,
                    side.name()
                )));
            }
            out.push((c, b));
        }
    }
    Ok(out)
}

/// Support cells with their partners; every cell in the support needs one.
fn interface_support(sc: &Scenario, map: &ReflectionMap, psi: &SpaceTimeBump) -> Result<Vec<(usize, usize, f64)>> {
    let partners = ReflectionPartners::build(map, &sc.mesh)?;
    let mut out = Vec::new();
    for (c, cell) in sc.mesh.cells.iter().enumerate() {
        let b = psi.spatial(cell.center);
        if b > 0.0 {
            let p = partners.partner[c].ok_or_else(|| {
                Error::Precondition(format!(
                    "cell {c} at {:?} is in the test support but outside the reflection neighbourhood",
                    cell.center
                ))
            })?;
            out.push((c, p, b));
        }
    }
    Ok(out)
}

/// Residual of the renormalised bulk equation for `zeta(u)` tested with `psi`
/// supported inside one compartment away from the interface. Signed.
pub fn renormalised_residual_outer(
    traj: &Trajectory,
    sc: &Scenario,
    zeta: &RenormTest,
    psi: &SpaceTimeBump,
    side: Side,
) -> Result<f64> {
    check_trajectory(traj, sc)?;
    let n = sc.n_species();
    zeta.check_dim(n)?;
    let support = outer_support(sc, psi, side)?;
    let act = Active::new(sc, support.iter().map(|s| s.0).collect());
    let mut w = vec![0.0; sc.mesh.n_cells() * n];
    let mut scratch = Vec::new();
    let mut g_prev = 0.0;
    let mut total = 0.0;
    for (k, (t, u)) in traj.times.iter().zip(&traj.snapshots).enumerate() {
        let theta = SpaceTimeBump::time_factor(*t);
        for &(c, b) in &support {
            let wc = &mut w[c * n..(c + 1) * n];
            wc.fill(0.0);
            zeta.add_gradient(u.cell(c), theta * b, wc, &mut scratch);
        }
        let g = tested_rhs(sc, u, &w, &act);
        if k > 0 {
            let prev = &traj.snapshots[k - 1];
            let tp = traj.times[k - 1];
            let mean = 0.5 * (SpaceTimeBump::time_factor(tp) + theta);
            let mut lhs = 0.0;
            for &(c, b) in &support {
                lhs += sc.mesh.cells[c].volume * mean * b * (zeta.value(u.cell(c)) - zeta.value(prev.cell(c)));
            }
            total += lhs - 0.5 * (t - tp) * (g_prev + g);
        }
        g_prev = g;
    }
    Ok(total)
}

/// Residual of the renormalised equation for `xi(u, u o Phi)` around one
/// anchor, tested with `psi` supported in the reflection neighbourhood.
/// Derivatives in the reflected variables are moved to the partner cells. Signed.
pub fn renormalised_residual_interface(
    traj: &Trajectory,
    sc: &Scenario,
    xi: &RenormTest,
    map: &ReflectionMap,
    psi: &SpaceTimeBump,
) -> Result<f64> {
    check_trajectory(traj, sc)?;
    let n = sc.n_species();
    xi.check_dim(2 * n)?;
    let support = interface_support(sc, map, psi)?;
    let mut touched: Vec<usize> = support.iter().flat_map(|s| [s.0, s.1]).collect();
    touched.sort_unstable();
    touched.dedup();
    let act = Active::new(sc, touched.clone());
    let vol = |c: usize| sc.mesh.cells[c].volume;
    let mut w = vec![0.0; sc.mesh.n_cells() * n];
    let mut pair = vec![0.0; 2 * n];
    let mut grad = vec![0.0; 2 * n];
    let mut scratch = Vec::new();
    let paired = |u: &StateField, c: usize, p: usize, buf: &mut Vec<f64>| {
        buf[..n].copy_from_slice(u.cell(c));
        buf[n..].copy_from_slice(u.cell(p));
    };
    let mut g_prev = 0.0;
    let mut total = 0.0;
    for (k, (t, u)) in traj.times.iter().zip(&traj.snapshots).enumerate() {
        let theta = SpaceTimeBump::time_factor(*t);
        for &c in &touched {
            w[c * n..(c + 1) * n].fill(0.0);
        }
        for &(c, p, b) in &support {
            paired(u, c, p, &mut pair);
            grad.fill(0.0);
            xi.add_gradient(&pair, theta * b, &mut grad, &mut scratch);
            let ratio = vol(c) / vol(p);
            for i in 0..n {
                w[c * n + i] += grad[i];
                w[p * n + i] += ratio * grad[n + i];
            }
        }
        let g = tested_rhs(sc, u, &w, &act);
        if k > 0 {
            let prev = &traj.snapshots[k - 1];
            let tp = traj.times[k - 1];
            let mean = 0.5 * (SpaceTimeBump::time_factor(tp) + theta);
            let mut lhs = 0.0;
            for &(c, p, b) in &support {
                paired(u, c, p, &mut pair);
                let now = xi.value(&pair);
                paired(prev, c, p, &mut pair);
                lhs += vol(c) * mean * b * (now - xi.value(&pair));
            }
            total += lhs - 0.5 * (t - tp) * (g_prev + g);
        }
        g_prev = g;
    }
    Ok(total)
}

/// Plain weak-form residual with static per-cell test weights `phi[c * n + i]`
/// modulated by the bump's time factor.
fn weak_form_residual(traj: &Trajectory, sc: &Scenario, phi: &[f64]) -> f64 {
    let n = sc.n_species();
    let cells: Vec<usize> = (0..sc.mesh.n_cells()).filter(|&c| phi[c * n..(c + 1) * n].iter().any(|x| *x != 0.0)).collect();
    let act = Active::new(sc, cells.clone());
    let mut total = 0.0;
    let mut g_prev = 0.0;
    for (k, (t, u)) in traj.times.iter().zip(&traj.snapshots).enumerate() {
        let theta = SpaceTimeBump::time_factor(*t);
        let g = theta * tested_rhs(sc, u, phi, &act);
        if k > 0 {
            let prev = &traj.snapshots[k - 1];
            let tp = traj.times[k - 1];
            let mean = 0.5 * (SpaceTimeBump::time_factor(tp) + theta);
            let mut lhs = 0.0;
            for &c in &cells {
                let du: f64 = (0..n).map(|i| phi[c * n + i] * (u.get(c, i) - prev.get(c, i))).sum();
                lhs += sc.mesh.cells[c].volume * mean * du;
            }
            total += lhs - 0.5 * (t - tp) * (g_prev + g);
        }
        g_prev = g;
    }
    total
}

/// Weak-form residual of `sum_i coeffs_i u_i` tested with `psi` inside one compartment.
pub fn weak_form_residual_outer(
    traj: &Trajectory,
    sc: &Scenario,
    coeffs: &[f64],
    psi: &SpaceTimeBump,
    side: Side,
) -> Result<f64> {
    check_trajectory(traj, sc)?;
    let n = sc.n_species();
    if coeffs.len() != n {
        return config(format!("need {n} coefficients"));
    }
    let mut phi = vec![0.0; sc.mesh.n_cells() * n];
    for (c, b) in outer_support(sc, psi, side)? {
        for i in 0..n {
            phi[c * n + i] = b * coeffs[i];
        }
    }
    Ok(weak_form_residual(traj, sc, &phi))
}

/// Weak-form residual of `sum_i c_i u_i + c_{i+n} (u_i o Phi)` around one anchor.
pub fn weak_form_residual_interface(
    traj: &Trajectory,
    sc: &Scenario,
    coeffs: &[f64],
    map: &ReflectionMap,
    psi: &SpaceTimeBump,
) -> Result<f64> {
    check_trajectory(traj, sc)?;
    let n = sc.n_species();
    if coeffs.len() != 2 * n {
        return config(format!("need {} coefficients", 2 * n));
    }
    let mut phi = vec![0.0; sc.mesh.n_cells() * n];
    for (c, p, b) in interface_support(sc, map, psi)? {
        let ratio = sc.mesh.cells[c].volume / sc.mesh.cells[p].volume;
        for i in 0..n {
            phi[c * n + i] += b * coeffs[i];
            phi[p * n + i] += ratio * b * coeffs[n + i];
        }
    }
    Ok(weak_form_residual(traj, sc, &phi))
}

/// Where a battery entry is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Outer { side: Side },
    Interface { anchor: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryItem {
    pub test_id: String,
    pub target: Target,
    pub psi: SpaceTimeBump,
    pub xi: RenormTest,
    pub e: f64,
}

/// Finite family of test functions and anchors for the residual checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    pub anchors: Vec<Point>,
    pub map_radius: f64,
    pub items: Vec<BatteryItem>,
}

/// Number of truncation shapes per target in the default battery.
pub const SHAPES_PER_TARGET: usize = 12;

fn shapes(dim: usize) -> Result<Vec<(f64, RenormTest)>> {
    let groups = SHAPES_PER_TARGET.div_ceil(dim);
    (0..SHAPES_PER_TARGET)
        .map(|k| {
            let g = k / dim;
            let e = if groups > 1 { 3f64.powf(g as f64 / (groups - 1) as f64) } else { 1.0 };
            Ok((e, RenormTest::projection(e, dim, k % dim)?))
        })
        .collect()
}

impl Battery {
    /// 12 projection shapes on 3 interior anchors with 4 bumps each, and 12
    /// shapes on each compartment with 4 bumps away from the interface.
    pub fn default_for(geometry: &Geometry, n_species: usize) -> Result<Battery> {
        let seg = geometry.interface[0];
        let len = dist(seg[0], seg[1]);
        let along = |s: f64| [seg[0][0] + s * (seg[1][0] - seg[0][0]), seg[0][1] + s * (seg[1][1] - seg[0][1])];
        let anchors = vec![along(0.25), along(0.5), along(0.75)];
        let r = (0.25 * len).min(0.3);
        let interface_bumps = [([0.0, 0.0], 0.7), ([0.0, 0.0], 0.45), ([0.25, 0.1], 0.55), ([-0.2, -0.15], 0.55)];
        let outer_bumps = [([0.5, 0.5], 0.3), ([0.6, 0.3], 0.25), ([0.4, 0.7], 0.2), ([0.7, 0.6], 0.3)];
        let mut items = Vec::new();
        for (a, anchor) in anchors.iter().enumerate() {
            for (b, (off, rho)) in interface_bumps.iter().enumerate() {
                let psi = SpaceTimeBump { center: [anchor[0] + off[0] * r, anchor[1] + off[1] * r], radius: rho * r };
                for (s, (e, xi)) in shapes(2 * n_species)?.into_iter().enumerate() {
                    items.push(BatteryItem {
                        test_id: format!("interface-a{a}-b{b}-x{s}"),
                        target: Target::Interface { anchor: a },
                        psi,
                        xi,
                        e,
                    });
                }
            }
        }
        let (lo, hi) = geometry.plus.bbox();
        for side in Side::BOTH {
            for (b, (frac, rho)) in outer_bumps.iter().enumerate() {
                let p = [lo[0] + frac[0] * (hi[0] - lo[0]), lo[1] + frac[1] * (hi[1] - lo[1])];
                let center = if side == Side::Plus { p } else { geometry.line.reflect(p) };
                let psi = SpaceTimeBump { center, radius: rho * (hi[0] - lo[0]).min(hi[1] - lo[1]) };
                for (s, (e, xi)) in shapes(n_species)?.into_iter().enumerate() {
                    items.push(BatteryItem {
                        test_id: format!("outer-{}-b{b}-x{s}", side.name()),
                        target: Target::Outer { side },
                        psi,
                        xi,
                        e,
                    });
                }
            }
        }
        Ok(Battery { anchors, map_radius: r, items })
    }

    pub fn maps(&self, geometry: &Geometry) -> Result<Vec<ReflectionMap>> {
        self.anchors.iter().map(|a| reflection_map(geometry, *a, self.map_radius)).collect()
    }

    /// Signed residual of every item, evaluated in parallel.
    pub fn evaluate(&self, traj: &Trajectory, sc: &Scenario) -> Result<Vec<f64>> {
        if self.items.is_empty() {
            return config("nothing to verify: the battery is empty");
        }
        let maps = self.maps(&sc.geometry)?;
        self.items
            .par_iter()
            .map(|it| match it.target {
                Target::Outer { side } => renormalised_residual_outer(traj, sc, &it.xi, &it.psi, side),
                Target::Interface { anchor } => {
                    let map = maps.get(anchor).ok_or_else(|| Error::Config(format!("no anchor {anchor}")))?;
                    renormalised_residual_interface(traj, sc, &it.xi, map, &it.psi)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub h: f64,
    pub dt: f64,
    pub residual: f64,
}

/// One battery entry across the refinement levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub test_id: String,
    pub anchor: Option<Point>,
    #[serde(rename = "E")]
    pub e: f64,
    /// Absolute residual on the finest level.
    pub residual: f64,
    pub refinement_series: Vec<SeriesPoint>,
    /// Least-squares slope of `log |R|` against `log h`; absent when fewer than two residuals are nonzero.
    pub fitted_order: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub resolution: usize,
    pub h: f64,
    pub dt: f64,
    pub max_outer: f64,
    pub max_interface: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub levels: Vec<LevelSummary>,
    pub entries: Vec<ResidualEntry>,
}

impl RefinementReport {
    /// Ratios `max_k / max_{k+1}` of the outer and interface maxima.
    pub fn decrease_factors(&self) -> Vec<(f64, f64)> {
        self.levels
            .windows(2)
            .map(|w| (w[0].max_outer / w[1].max_outer, w[0].max_interface / w[1].max_interface))
            .collect()
    }
}

fn fitted_order(series: &[SeriesPoint]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        series.iter().filter(|p| p.residual > 0.0).map(|p| (p.h.ln(), p.residual.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Runs `desc` at each `(resolution, dt)` up to `t_end`, storing every step,
/// and evaluates the default battery on each trajectory.
pub fn refinement_study(desc: &ScenarioDescriptor, levels: &[(usize, f64)], t_end: f64) -> Result<RefinementReport> {
    if levels.is_empty() {
        return config("refinement needs at least one level");
    }
    let mut summaries = Vec::new();
    let mut per_level: Vec<Vec<f64>> = Vec::new();
    let mut battery = None;
    for &(res, dt) in levels {
        let mut d = desc.clone();
        d.mesh.resolution = res;
        d.solver.dt_init = dt;
        d.solver.dt_min = d.solver.dt_min.min(dt);
        d.solver.t_end = t_end;
        d.solver.output_every = 0.0;
        let sc = Scenario::build(&d)?;
        let b = Battery::default_for(&sc.geometry, sc.n_species())?;
        let traj = run(&sc)?;
        let r = b.evaluate(&traj, &sc)?;
        let max_of = |outer: bool| {
            b.items
                .iter()
                .zip(&r)
                .filter(|(it, _)| matches!(it.target, Target::Outer { .. }) == outer)
                .map(|(_, v)| v.abs())
                .fold(0.0, f64::max)
        };
        summaries.push(LevelSummary { resolution: res, h: sc.mesh.h, dt, max_outer: max_of(true), max_interface: max_of(false) });
        per_level.push(r);
        battery = Some(b);
    }
    let battery = battery.expect("at least one level");
    let entries = battery
        .items
        .iter()
        .enumerate()
        .map(|(k, it)| {
            let series: Vec<SeriesPoint> = summaries
                .iter()
                .zip(&per_level)
                .map(|(s, r)| SeriesPoint { h: s.h, dt: s.dt, residual: r[k].abs() })
                .collect();
            ResidualEntry {
                test_id: it.test_id.clone(),
                anchor: match it.target {
                    Target::Interface { anchor } => Some(battery.anchors[anchor]),
                    Target::Outer { .. } => None,
                },
                e: it.e,
                residual: series.last().map(|p| p.residual).unwrap_or(0.0),
                fitted_order: fitted_order(&series),
                refinement_series: series,
            }
        })
        .collect();
    Ok(RefinementReport { levels: summaries, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::builtin;

    fn short_run() -> (Scenario, Trajectory) {
        let mut d = builtin("flat_linear").unwrap();
        d.mesh.resolution = 8;
        d.solver.dt_init = 4e-3;
        d.solver.t_end = 0.05;
        d.solver.output_every = 0.0;
        let sc = Scenario::build(&d).unwrap();
        let traj = run(&sc).unwrap();
        (sc, traj)
    }

    #[test]
    fn constant_tests_have_zero_residual() {
        let (sc, traj) = short_run();
        let psi = SpaceTimeBump { center: [0.5, 0.5], radius: 0.3 };
        let r = renormalised_residual_outer(&traj, &sc, &RenormTest::Constant(2.0), &psi, Side::Plus).unwrap();
        assert_eq!(r, 0.0);
        let map = reflection_map(&sc.geometry, [0.0, 0.5], 0.25).unwrap();
        let psi = SpaceTimeBump { center: [0.0, 0.5], radius: 0.2 };
        let r = renormalised_residual_interface(&traj, &sc, &RenormTest::Constant(1.0), &map, &psi).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn support_touching_interface_is_rejected() {
        let (sc, traj) = short_run();
        let psi = SpaceTimeBump { center: [0.2, 0.5], radius: 0.3 };
        let zeta = RenormTest::projection(2.0, 2, 0).unwrap();
        assert!(matches!(
            renormalised_residual_outer(&traj, &sc, &zeta, &psi, Side::Plus),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn support_outside_map_is_rejected() {
        let (sc, traj) = short_run();
        let map = reflection_map(&sc.geometry, [0.0, 0.5], 0.1).unwrap();
        let psi = SpaceTimeBump { center: [0.0, 0.5], radius: 0.3 };
        let xi = RenormTest::projection(2.0, 4, 0).unwrap();
        assert!(renormalised_residual_interface(&traj, &sc, &xi, &map, &psi).is_err());
    }

    #[test]
    fn residual_is_linear_in_the_test() {
        let (sc, traj) = short_run();
        let a = RenormTest::projection(1.5, 4, 0).unwrap();
        let b = RenormTest::projection(3.0, 4, 3).unwrap();
        let combo = RenormTest::Combination(vec![(0.7, a.clone()), (-1.3, b.clone())]);
        let map = reflection_map(&sc.geometry, [0.0, 0.5], 0.25).unwrap();
        let psi = SpaceTimeBump { center: [0.05, 0.5], radius: 0.15 };
        let ra = renormalised_residual_interface(&traj, &sc, &a, &map, &psi).unwrap();
        let rb = renormalised_residual_interface(&traj, &sc, &b, &map, &psi).unwrap();
        let rc = renormalised_residual_interface(&traj, &sc, &combo, &map, &psi).unwrap();
        assert!((rc - (0.7 * ra - 1.3 * rb)).abs() < 1e-12);
    }

    #[test]
    fn unattained_levels_give_zero() {
        let (sc, traj) = short_run();
        let hi = RenormTest::projection(200.0, 2, 1).unwrap();
        let lo = RenormTest::projection(100.0, 2, 1).unwrap();
        let zeta = RenormTest::Combination(vec![(1.0, hi), (-1.0, lo)]);
        let psi = SpaceTimeBump { center: [-0.5, 0.5], radius: 0.3 };
        assert_eq!(renormalised_residual_outer(&traj, &sc, &zeta, &psi, Side::Minus).unwrap(), 0.0);
    }

    #[test]
    fn default_battery_shape() {
        let g = Geometry::flat_symmetric();
        let b = Battery::default_for(&g, 2).unwrap();
        assert_eq!(b.items.len(), 12 * 3 * 4 + 12 * 4 * 2);
        assert!(Battery::default_for(&Geometry::triple_junction(), 2).is_ok());
    }
}
