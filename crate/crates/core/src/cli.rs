//! Command-line front end. [`run`] parses arguments, dispatches and maps
//! outcomes to exit codes: 0 success, 1 configuration error, 2 solver abort,
//! 3 verification failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::diagnostics::{entropy_inequality_check, stability_experiment, EntropyTruncation, Perturbation};
use crate::error::{config, Error, Result};
use crate::geometry::Side;
use crate::kinetics::KineticModel;
use crate::renormalisation::refinement_study;
use crate::scenarios::builtin;
use crate::solver::{run as run_scenario, Scenario, ScenarioDescriptor, Trajectory};
use crate::suites;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_ABORT: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bulkflux", version, about = "Two-compartment reaction-diffusion runs and their diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// `builtin:<name>` or a path to a scenario JSON file.
    #[arg(long, default_value = "builtin:flat_linear")]
    pub scenario: String,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Dotted-key override such as `solver.epsilon=0.05`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Seed for every sampled check and perturbation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the scenario and write snapshots, ledger and entropy report.
    Simulate(Common),
    /// Reflection maps and partition of unity on both templates.
    VerifyGeometry {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Dissipation, mass and gradient-structure checks of the kinetics.
    VerifyKinetics {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Check every built-in model instead of the scenario's.
        #[arg(long)]
        all_builtin: bool,
    },
    /// Property suite of the truncation families.
    VerifyTruncations {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
    },
    /// Entropy inequality along one run, optionally over the refinement levels.
    EntropyReport {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        refine: bool,
    },
    /// Relative entropy between a perturbed and an unperturbed run.
    Stability {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-3)]
        amplitude: f64,
    },
    /// Residuals of the renormalised formulation over the refinement levels.
    RenormResidual {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.1)]
        t_end: f64,
    },
    /// Independent runs along one parameter axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// One of epsilon, resolution, E, N, dt.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long)]
        values: String,
    },
    /// Consolidated verification report.
    VerifyAll {
        #[command(flatten)]
        common: Common,
        /// Comma-separated suite names; defaults to all of them.
        #[arg(long)]
        suites: Option<String>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY,
        Err(e) => {
            eprintln!("bulkflux: {e}");
            e.exit_code()
        }
    }
}

/// Returns whether every check of the command passed.
pub fn dispatch(cmd: &Command) -> Result<bool> {
    match cmd {
        Command::Simulate(c) => simulate(c),
        Command::VerifyGeometry { common, samples } => {
            let out = Output::new(common, "verify-geometry", None)?;
            let r = suites::geometry_suite(*samples, common.seed)?;
            out.report("geometry.json", &r, r.passed())
        }
        Command::VerifyKinetics { common, samples, all_builtin } => {
            let out = Output::new(common, "verify-kinetics", None)?;
            let r = if *all_builtin {
                suites::kinetics_suite(*samples, common.seed)?
            } else {
                let d = load_scenario(&common.scenario, &common.set)?;
                let m = KineticModel::from_descriptor(&d.model)?;
                suites::KineticsReport {
                    samples: *samples,
                    models: vec![suites::check_model(&d.name, &m, *samples, common.seed)?],
                }
            };
            let ok = r.hypotheses_hold() && r.gradient_consistent();
            out.report("kinetics.json", &r, ok)
        }
        Command::VerifyTruncations { common, budget } => {
            let d = load_scenario(&common.scenario, &common.set)?;
            let out = Output::new(common, "verify-truncations", Some(&d.name))?;
            let r = suites::truncation_suite(d.model.n_species, *budget, common.seed)?;
            out.report("truncations.json", &r, r.passed())
        }
        Command::EntropyReport { common, refine } => entropy_report(common, *refine),
        Command::Stability { common, amplitude } => stability(common, *amplitude),
        Command::RenormResidual { common, t_end } => renorm_residual(common, *t_end),
        Command::Sweep { common, axis, values } => sweep(common, axis, values),
        Command::VerifyAll { common, suites: names } => {
            let names: Vec<String> = match names {
                Some(s) => s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect(),
                None => suites::SUITE_NAMES.iter().map(|s| s.to_string()).collect(),
            };
            if names.is_empty() {
                return config("nothing to verify");
            }
            let out = Output::new(common, "verify-all", None)?;
            let results = suites::verify_all(&names, common.seed)?;
            let ok = results.iter().all(|r| r.passed);
            for r in &results {
                println!("{:<12} {}", r.name, if r.passed { "pass" } else { "FAIL" });
            }
            out.json("verify_all.json", &json!({ "passed": ok, "suites": results }))?;
            Ok(ok)
        }
    }
}

// ---------------------------------------------------------------- scenario loading

/// Reads `builtin:<name>` or a JSON file and applies the dotted overrides.
pub fn load_scenario(spec: &str, overrides: &[String]) -> Result<ScenarioDescriptor> {
    let mut value: Value = match spec.strip_prefix("builtin:") {
        Some(name) => serde_json::to_value(builtin(name)?)?,
        None => {
            let text = fs::read_to_string(spec)
                .map_err(|e| Error::Config(format!("cannot read scenario `{spec}`: {e}")))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("scenario `{spec}` is not valid JSON: {e}")))?
        }
    };
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let desc: ScenarioDescriptor =
        serde_json::from_value(value).map_err(|e| Error::Config(format!("scenario `{spec}`: {e}")))?;
    // validates geometry, model and coefficients before any run
    Scenario::build(&desc)?;
    Ok(desc)
}

/// Sets `a.b.0.c=value`; the value is parsed as JSON and falls back to a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not KEY=VALUE")))?;
    let new: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return config(format!("override key `{key}` has an empty segment"));
    }
    let mut cur = root;
    for (k, part) in parts.iter().enumerate() {
        let last = k + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), new);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let i: usize = part
                    .parse()
                    .map_err(|_| Error::Config(format!("`{part}` in `{key}` must index an array")))?;
                let len = items.len();
                let slot = items
                    .get_mut(i)
                    .ok_or_else(|| Error::Config(format!("index {i} in `{key}` is out of range ({len})")))?;
                if last {
                    *slot = new;
                    return Ok(());
                }
                slot
            }
            _ => return config(format!("`{key}` descends into a scalar")),
        };
    }
    unreachable!("loop returns on the last segment")
}

// ---------------------------------------------------------------- outputs

/// Output directory plus the run metadata written next to each file.
struct Output {
    dir: PathBuf,
    meta: Value,
}

impl Output {
    fn new(common: &Common, command: &str, scenario: Option<&str>) -> Result<Output> {
        fs::create_dir_all(&common.out)?;
        Ok(Output {
            dir: common.out.clone(),
            meta: json!({
                "command": command,
                "scenario": scenario.unwrap_or(&common.scenario),
                "scenario_source": common.scenario,
                "overrides": common.set,
                "seed": common.seed,
                "version": env!("CARGO_PKG_VERSION"),
            }),
        })
    }

    fn sidecar(&self, file: &str) -> Result<()> {
        let mut meta = self.meta.clone();
        meta["file"] = json!(file);
        meta["created"] = json!(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
        let stem = Path::new(file).file_stem().and_then(|s| s.to_str()).unwrap_or(file);
        fs::write(self.dir.join(format!("{stem}.meta.json")), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    fn csv(&self, file: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(file))?);
        body(&mut w)?;
        w.flush()?;
        self.sidecar(file)
    }

    fn json<T: serde::Serialize>(&self, file: &str, value: &T) -> Result<()> {
        fs::write(self.dir.join(file), serde_json::to_string_pretty(value)?)?;
        Ok(())
    }

    /// Writes a verification report and echoes the verdict.
    fn report<T: serde::Serialize>(&self, file: &str, value: &T, passed: bool) -> Result<bool> {
        self.json(file, &json!({ "passed": passed, "report": value }))?;
        println!("{file}: {}", if passed { "pass" } else { "FAIL" });
        Ok(passed)
    }
}

fn write_snapshots(w: &mut dyn Write, sc: &Scenario, traj: &Trajectory) -> std::io::Result<()> {
    let n = sc.n_species();
    let species: Vec<String> = (1..=n).map(|i| format!("u_{i}")).collect();
    writeln!(w, "t,cell,side,x,y,{}", species.join(","))?;
    for (t, s) in traj.times.iter().zip(&traj.snapshots) {
        for (c, cell) in sc.mesh.cells.iter().enumerate() {
            let vals: Vec<String> = s.cell(c).iter().map(|v| format!("{v:e}")).collect();
            let side = if cell.side == Side::Plus { "plus" } else { "minus" };
            writeln!(w, "{t:e},{c},{side},{:e},{:e},{}", cell.center[0], cell.center[1], vals.join(","))?;
        }
        // blank line between time blocks for gnuplot
        writeln!(w)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- commands

fn simulate(common: &Common) -> Result<bool> {
    let d = load_scenario(&common.scenario, &common.set)?;
    let out = Output::new(common, "simulate", Some(&d.name))?;
    let sc = Scenario::build(&d)?;
    let traj = run_scenario(&sc)?;
    let check = entropy_inequality_check(&traj);
    out.csv("ledger.csv", |w| traj.write_ledger_csv(w))?;
    out.csv("snapshots.csv", |w| write_snapshots(w, &sc, &traj))?;
    out.csv("entropy.csv", |w| check.write_csv(w))?;
    let summary = json!({
        "scenario": d.name,
        "steps": traj.ledger.len() - 1,
        "t_end": traj.times.last(),
        "mass_drift": traj.mass_drift(),
        "floored_mass": traj.floored_mass(),
        "max_entropy_defect": check.max_defect,
    });
    out.json("summary.json", &summary)?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(true)
}

fn entropy_report(common: &Common, refine: bool) -> Result<bool> {
    let d = load_scenario(&common.scenario, &common.set)?;
    let out = Output::new(common, "entropy-report", Some(&d.name))?;
    let traj = run_scenario(&Scenario::build(&d)?)?;
    let check = entropy_inequality_check(&traj);
    out.csv("entropy.csv", |w| check.write_csv(w))?;
    let mut ok = true;
    let mut summary = json!({ "scenario": d.name, "max_defect": check.max_defect });
    if refine {
        let r = suites::entropy_levels(&d.name, &d, &suites::REFINEMENT_LEVELS, d.solver.t_end)?;
        ok = r.passed();
        out.csv("entropy_refinement.csv", |w| {
            writeln!(w, "resolution,dt,max_positive_defect,max_gap")?;
            for l in &r.levels {
                writeln!(w, "{},{:e},{:e},{:e}", l.resolution, l.dt, l.max_positive_defect, l.max_gap)?;
            }
            Ok(())
        })?;
        summary["refinement"] = serde_json::to_value(&r)?;
        summary["passed"] = json!(ok);
    }
    out.json("entropy_summary.json", &summary)?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(ok)
}

fn stability(common: &Common, amplitude: f64) -> Result<bool> {
    if !(amplitude >= 0.0) {
        return config(format!("perturbation amplitude must be nonnegative, got {amplitude}"));
    }
    let d = load_scenario(&common.scenario, &common.set)?;
    let out = Output::new(common, "stability", Some(&d.name))?;
    let r = stability_experiment(&d, Perturbation { amplitude }, None)?;
    out.csv("stability.csv", |w| r.write_csv(w))?;
    let summary = r.summary_json();
    out.json("stability.json", &summary)?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(true)
}

fn renorm_residual(common: &Common, t_end: f64) -> Result<bool> {
    let d = load_scenario(&common.scenario, &common.set)?;
    let out = Output::new(common, "renorm-residual", Some(&d.name))?;
    let r = refinement_study(&d, &suites::REFINEMENT_LEVELS, t_end)?;
    let factors = r.decrease_factors();
    let ok = factors.iter().all(|(o, i)| *o >= suites::MIN_DECREASE && *i >= suites::MIN_DECREASE);
    out.json("residuals.json", &r.entries)?;
    out.csv("residual_levels.csv", |w| {
        writeln!(w, "resolution,h,dt,max_outer,max_interface")?;
        for l in &r.levels {
            writeln!(w, "{},{:e},{:e},{:e},{:e}", l.resolution, l.h, l.dt, l.max_outer, l.max_interface)?;
        }
        Ok(())
    })?;
    println!("decrease factors (outer, interface): {factors:?}");
    Ok(ok)
}

/// Axes accepted by `sweep`.
pub const SWEEP_AXES: [&str; 5] = ["epsilon", "resolution", "E", "N", "dt"];

fn parse_values(values: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = values
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("sweep value `{s}` is not a number"))))
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return config("sweep needs at least one value");
    }
    Ok(v)
}

fn sweep(common: &Common, axis: &str, values: &str) -> Result<bool> {
    if !SWEEP_AXES.contains(&axis) {
        return config(format!("unknown sweep axis `{axis}`; known: {}", SWEEP_AXES.join(", ")));
    }
    let values = parse_values(values)?;
    let d = load_scenario(&common.scenario, &common.set)?;
    let out = Output::new(common, "sweep", Some(&d.name))?;
    let file = format!("sweep_{axis}.csv");
    let n_vars = 2 * d.model.n_species;
    let (header, rows): (&str, Vec<Vec<f64>>) = match axis {
        "epsilon" => {
            let r = suites::epsilon_consistency(&d, &values)?;
            ("epsilon,distance_to_half", values.iter().zip(&r.distances).map(|(e, x)| vec![*e, *x]).collect())
        }
        "resolution" => {
            let levels = values
                .iter()
                .map(|&v| {
                    if v < 1.0 || v.fract() != 0.0 {
                        return config(format!("resolution must be a positive integer, got {v}"));
                    }
                    let scale = d.mesh.resolution as f64 / v;
                    Ok((v as usize, d.solver.dt_init * scale * scale))
                })
                .collect::<Result<Vec<_>>>()?;
            let r = refinement_study(&d, &levels, d.solver.t_end)?;
            let rows = r
                .levels
                .iter()
                .map(|l| vec![l.resolution as f64, l.dt, l.max_outer, l.max_interface])
                .collect();
            ("resolution,dt,max_outer_residual,max_interface_residual", rows)
        }
        "E" | "N" => {
            let rows = values
                .iter()
                .map(|&v| {
                    let t = if axis == "E" { EntropyTruncation::new(v, 4.0)? } else { EntropyTruncation::new(16.0, v)? };
                    Ok(vec![v, t.measured_decay(n_vars, 4000), t.decay_bound(n_vars)])
                })
                .collect::<Result<Vec<_>>>()?;
            (if axis == "E" { "E,measured_decay,decay_bound" } else { "N,measured_decay,decay_bound" }, rows)
        }
        "dt" => {
            let rows = values
                .par_iter()
                .map(|&dt| {
                    let r = suites::entropy_levels(&d.name, &d, &[(d.mesh.resolution, dt)], d.solver.t_end)?;
                    let l = r.levels[0];
                    Ok(vec![dt, l.max_positive_defect, l.max_gap])
                })
                .collect::<Result<Vec<_>>>()?;
            ("dt,max_positive_defect,max_gap", rows)
        }
        _ => unreachable!("axis checked above"),
    };
    out.csv(&file, |w| {
        writeln!(w, "{header}")?;
        for r in &rows {
            let cols: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", cols.join(","))?;
        }
        Ok(())
    })?;
    println!("wrote {}", out.dir.join(&file).display());
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_reach_nested_keys() {
        let mut v = json!({"solver": {"epsilon": 0.1}, "diffusion": [{"plus": [1, 1]}]});
        apply_override(&mut v, "solver.epsilon=0.05").unwrap();
        apply_override(&mut v, "diffusion.0.plus=[2,3]").unwrap();
        apply_override(&mut v, "name=abc").unwrap();
        assert_eq!(v["solver"]["epsilon"], json!(0.05));
        assert_eq!(v["diffusion"][0]["plus"], json!([2, 3]));
        assert_eq!(v["name"], json!("abc"));
        assert!(apply_override(&mut v, "diffusion.7.plus=1").is_err());
        assert!(apply_override(&mut v, "novalue").is_err());
        assert!(apply_override(&mut v, "solver..x=1").is_err());
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let e = load_scenario("builtin:flat_linear", &["solver.bogus=1".into()]).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
        assert!(load_scenario("builtin:nope", &[]).is_err());
        assert!(load_scenario("/definitely/not/here.json", &[]).is_err());
    }

    #[test]
    fn parse_errors_exit_one() {
        assert_eq!(run(["bulkflux", "frobnicate"]), EXIT_CONFIG);
        assert_eq!(run(["bulkflux", "--help"]), EXIT_OK);
    }
}
