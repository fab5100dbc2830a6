//! Cell-centred finite volumes with implicit diffusion, explicit regularized
//! reactions and explicit interface fluxes.

mod diffusion;
mod run;

pub use diffusion::{assemble_diffusion, DiffusionOperator};
pub use run::{interface_trace, run, run_from, step, LedgerRow, StepOutcome, Trajectory};

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::field::StateField;
use crate::geometry::{Geometry, GeometryDescriptor, Mesh, Point, Side};
use crate::kinetics::{KineticModel, ModelDescriptor};

/// Diagonal diffusion tensor of one species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionSpec {
    pub plus: [f64; 2],
    pub minus: [f64; 2],
    /// Relative amplitude of a `sin(2 pi y)` modulation of both entries.
    #[serde(default)]
    pub modulation: f64,
}

impl DiffusionSpec {
    pub fn isotropic(a: f64) -> Self {
        DiffusionSpec { plus: [a, a], minus: [a, a], modulation: 0.0 }
    }

    pub fn at(&self, side: Side, x: Point) -> [f64; 2] {
        let base = match side {
            Side::Plus => self.plus,
            Side::Minus => self.minus,
        };
        let m = 1.0 + self.modulation * (std::f64::consts::TAU * x[1]).sin();
        [base[0] * m, base[1] * m]
    }

    fn validate(&self) -> Result<()> {
        let ok = self.plus.iter().chain(&self.minus).all(|a| *a > 0.0 && a.is_finite())
            && self.modulation.abs() < 1.0;
        if ok {
            Ok(())
        } else {
            config("diffusion tensor is not symmetric positive definite")
        }
    }
}

/// Scalar profile used for initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant { value: f64 },
    Linear { value: f64, gradient: [f64; 2] },
    Gaussian { base: f64, amplitude: f64, center: [f64; 2], width: f64 },
    /// `base + amplitude cos(kx pi x) cos(ky pi y)`
    Cosine { base: f64, amplitude: f64, modes: [f64; 2] },
}

impl Profile {
    pub fn eval(&self, x: Point) -> f64 {
        match *self {
            Profile::Constant { value } => value,
            Profile::Linear { value, gradient } => value + gradient[0] * x[0] + gradient[1] * x[1],
            Profile::Gaussian { base, amplitude, center, width } => {
                let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                base + amplitude * (-r2 / (width * width)).exp()
            }
            Profile::Cosine { base, amplitude, modes } => {
                let pi = std::f64::consts::PI;
                base + amplitude * (modes[0] * pi * x[0]).cos() * (modes[1] * pi * x[1]).cos()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub plus: Profile,
    pub minus: Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub epsilon: f64,
    pub dt_init: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    pub t_end: f64,
    /// Snapshot spacing; 0 stores every step.
    pub output_every: f64,
    #[serde(default = "default_cg_tol")]
    pub cg_tol: f64,
    #[serde(default = "default_max_change")]
    pub max_relative_change: f64,
}

fn default_dt_min() -> f64 {
    1e-12
}

fn default_cg_tol() -> f64 {
    1e-10
}

fn default_max_change() -> f64 {
    0.2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub resolution: usize,
}

/// Complete run description as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDescriptor {
    pub name: String,
    pub geometry: GeometryDescriptor,
    pub mesh: MeshSpec,
    pub model: ModelDescriptor,
    pub diffusion: Vec<DiffusionSpec>,
    pub initial: Vec<InitialSpec>,
    pub solver: SolverSpec,
}

/// Validated scenario with its mesh and assembled coefficients.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub descriptor: ScenarioDescriptor,
    pub geometry: Geometry,
    pub mesh: Mesh,
    pub model: KineticModel,
    pub diffusion: DiffusionOperator,
    pub solver: SolverSpec,
}

impl Scenario {
    pub fn build(desc: &ScenarioDescriptor) -> Result<Scenario> {
        let geometry = Geometry::build(&desc.geometry)?;
        let mesh = Mesh::build(&geometry, desc.mesh.resolution)?;
        let model = KineticModel::from_descriptor(&desc.model)?;
        let n = model.n_species;
        if desc.diffusion.len() != n || desc.initial.len() != n {
            return config(format!("diffusion and initial data need {n} entries"));
        }
        for d in &desc.diffusion {
            d.validate()?;
        }
        let s = &desc.solver;
        if !(s.epsilon > 0.0 && s.epsilon <= 1.0) {
            return config(format!("epsilon must lie in (0, 1], got {}", s.epsilon));
        }
        if !(s.dt_init > 0.0) || !(s.dt_min > 0.0) || s.dt_min > s.dt_init {
            return config("need 0 < dt_min <= dt_init");
        }
        if !(s.t_end > 0.0) || !(s.output_every >= 0.0) || !(s.cg_tol > 0.0) {
            return config("t_end and cg_tol must be positive, output_every nonnegative");
        }
        if !(s.max_relative_change > 0.0) {
            return config("max_relative_change must be positive");
        }
        let coeffs: Vec<Vec<[f64; 2]>> = desc
            .diffusion
            .iter()
            .map(|d| mesh.cells.iter().map(|c| d.at(c.side, c.center)).collect())
            .collect();
        let diffusion = assemble_diffusion(&mesh, &coeffs)?;
        Ok(Scenario { descriptor: desc.clone(), geometry, mesh, model, diffusion, solver: *s })
    }

    pub fn from_json(text: &str) -> Result<Scenario> {
        let d: ScenarioDescriptor = serde_json::from_str(text)?;
        Scenario::build(&d)
    }

    pub fn n_species(&self) -> usize {
        self.model.n_species
    }

    /// Initial data at cell centres, clipped at `1/epsilon`.
    pub fn initial_state(&self) -> Result<StateField> {
        let n = self.n_species();
        let cap = 1.0 / self.solver.epsilon;
        let mut s = StateField::zeros(self.mesh.n_cells(), n);
        for (c, cell) in self.mesh.cells.iter().enumerate() {
            for i in 0..n {
                let spec = &self.descriptor.initial[i];
                let p = match cell.side {
                    Side::Plus => &spec.plus,
                    Side::Minus => &spec.minus,
                };
                let v = p.eval(cell.center);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!("initial density {v} at {:?} is not nonnegative", cell.center)));
                }
                s.values[c * n + i] = v.min(cap);
            }
        }
        Ok(s)
    }
}
