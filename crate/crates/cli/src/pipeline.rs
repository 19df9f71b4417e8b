//! Stages of the pipeline. Each reads its inputs from the output directory,
//! so any stage can be rerun alone once its upstream files exist.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use prefractal::fem::{assemble, solve_eigen, solve_poisson, FemSystem};
use prefractal::geometry::{sigma, PrefractalCurve};
use prefractal::lab::{
    measure_density_study, poincare_uniformity_study, random_density_samples, random_polynomials,
    solution_convergence_study_with, svg_line_plot, trace_convergence_study, uniform_trace_ratio, ConvergenceReport,
    Polynomial2, Series, TestField,
};
use prefractal::mesh::{build_domain_with_curve, triangulate, TaggedMesh};
use prefractal::wave::{implicit_time_integrate, Forcing, Trajectory};
use prefractal::westervelt::{estimate_constants, newton_step_solve, picard_solve};

use crate::config::RunConfig;
use crate::manifest::{sha256_hex, write_atomic, Artifact, FailureRecord, RunManifest, Timing};
use crate::CliError;

pub const CURVE_FILE: &str = "curve.txt";
pub const MESH_FILE: &str = "mesh.txt";
pub const POISSON_FILE: &str = "poisson.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Geometry,
    Mesh,
    Eigs,
    Poisson,
    Wave,
    Westervelt,
    Study,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Geometry => "geometry",
            Stage::Mesh => "mesh",
            Stage::Eigs => "eigs",
            Stage::Poisson => "poisson",
            Stage::Wave => "wave",
            Stage::Westervelt => "westervelt",
            Stage::Study => "study",
        }
    }
}

impl FromStr for Stage {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "geometry" => Stage::Geometry,
            "mesh" => Stage::Mesh,
            "eigs" => Stage::Eigs,
            "poisson" => Stage::Poisson,
            "wave" => Stage::Wave,
            "westervelt" => Stage::Westervelt,
            "study" => Stage::Study,
            _ => {
                return Err(CliError::Config {
                    key: "pipeline".into(),
                    constraint: format!("unknown stage {s:?}"),
                })
            }
        })
    }
}

/// One invocation: a validated config, its output directory and the
/// manifest being filled in.
#[derive(Debug)]
pub struct Pipeline {
    config: RunConfig,
    out: PathBuf,
    manifest: RunManifest,
}

impl Pipeline {
    pub fn new(command: &str, config: RunConfig) -> Result<Self, CliError> {
        config.validate()?;
        let out = PathBuf::from(&config.output);
        let manifest = RunManifest::new(command, &config);
        Ok(Self { config, out, manifest })
    }

    pub fn out(&self) -> &Path {
        &self.out
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    /// Runs `stages` in order and writes the manifest, also when a stage
    /// fails; files written before the failure stay in place.
    pub fn execute(&mut self, stages: &[Stage]) -> Result<&RunManifest, CliError> {
        for &stage in stages {
            let start = Instant::now();
            let result = self.run_stage(stage);
            self.manifest.timings.push(Timing {
                stage: stage.name().into(),
                seconds: start.elapsed().as_secs_f64(),
            });
            if let Err(e) = result {
                self.manifest.error = Some(FailureRecord {
                    stage: stage.name().into(),
                    kind: if e.is_validation() { "validation" } else { "solver" }.into(),
                    message: e.to_string(),
                });
                self.write_manifest()?;
                return Err(e);
            }
        }
        self.write_manifest()?;
        Ok(&self.manifest)
    }

    /// The stages listed in the config's `pipeline`.
    pub fn configured_stages(&self) -> Result<Vec<Stage>, CliError> {
        self.config.pipeline.iter().map(|s| s.parse()).collect()
    }

    fn write_manifest(&self) -> Result<(), CliError> {
        write_atomic(&self.out.join(MANIFEST_FILE), self.manifest.to_json().as_bytes())
    }

    fn run_stage(&mut self, stage: Stage) -> Result<(), CliError> {
        match stage {
            Stage::Geometry => self.geometry(),
            Stage::Mesh => self.mesh(),
            Stage::Eigs => self.eigs(),
            Stage::Poisson => self.poisson(),
            Stage::Wave => self.wave(),
            Stage::Westervelt => self.westervelt(),
            Stage::Study => self.study(),
        }
    }

    fn emit(&mut self, name: &str, kind: &str, contents: &str) -> Result<(), CliError> {
        write_atomic(&self.out.join(name), contents.as_bytes())?;
        self.manifest.artifacts.retain(|a| a.path != name);
        self.manifest.artifacts.push(Artifact {
            path: name.into(),
            kind: kind.into(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len(),
        });
        Ok(())
    }

    fn read_upstream(&self, name: &str, producer: &'static str) -> Result<String, CliError> {
        let path = self.out.join(name);
        if !path.exists() {
            return Err(CliError::MissingArtifact { path, stage: producer });
        }
        std::fs::read_to_string(&path).map_err(|source| CliError::Io { path, source })
    }

    fn geometry(&mut self) -> Result<(), CliError> {
        let stage = "geometry";
        let curve = PrefractalCurve::generate(&self.config.ifs()?, self.config.geometry.level)
            .map_err(|source| CliError::Stage { stage, source })?;
        self.emit(CURVE_FILE, "curve", &curve.to_text())
    }

    fn mesh(&mut self) -> Result<(), CliError> {
        let stage = "mesh";
        let wrap = |source| CliError::Stage { stage, source };
        let curve = if self.config.has_prefractal() {
            let text = self.read_upstream(CURVE_FILE, "geometry")?;
            Some(PrefractalCurve::from_text(&text).map_err(wrap)?)
        } else {
            None
        };
        let level = curve.as_ref().map_or(0, |c| c.level());
        let domain = build_domain_with_curve(&self.config.base(), &self.config.boundary()?, curve.as_ref(), level)
            .map_err(wrap)?;
        let mesh = triangulate(&domain, self.config.discretization.h).map_err(wrap)?;
        self.manifest.warnings.extend(mesh.warnings().iter().cloned());
        self.emit(MESH_FILE, "mesh", &mesh.to_text())
    }

    /// Assembled system on the stored mesh with `a·σ` on the Robin part.
    fn system(&self, stage: &'static str) -> Result<FemSystem, CliError> {
        let wrap = |source| CliError::Stage { stage, source };
        let mesh = TaggedMesh::from_text(&self.read_upstream(MESH_FILE, "mesh")?).map_err(wrap)?;
        let weight = if self.config.physics.sigma_scaling && self.config.has_prefractal() {
            sigma(&self.config.ifs()?, self.config.geometry.level).map_err(wrap)?
        } else {
            1.0
        };
        assemble(&mesh, self.config.physics.robin, weight).map_err(wrap)
    }

    fn eigs(&mut self) -> Result<(), CliError> {
        let stage = "eigs";
        let sys = self.system(stage)?;
        let basis = solve_eigen(&sys, self.config.eigs.count).map_err(|source| CliError::Stage { stage, source })?;
        let mut csv = String::from("k,lambda\n");
        for (k, l) in basis.values.iter().enumerate() {
            writeln!(csv, "{},{l}", k + 1).expect("writing to a String cannot fail");
        }
        self.emit("eigenvalues.csv", "csv", &csv)
    }

    fn poisson(&mut self) -> Result<(), CliError> {
        let stage = "poisson";
        let sys = self.system(stage)?;
        let source = vec![self.config.poisson.source; sys.mesh().num_nodes()];
        let u = solve_poisson(&sys, &source).map_err(|source| CliError::Stage { stage, source })?;
        let nodal = sys.expand(&u);
        let mut csv = String::from("node,x,y,u\n");
        for (i, (p, v)) in sys.mesh().nodes().iter().zip(&nodal).enumerate() {
            writeln!(csv, "{i},{},{},{v}", p.x, p.y).expect("writing to a String cannot fail");
        }
        self.emit(POISSON_FILE, "csv", &csv)
    }

    /// Initial displacement: `amplitude` times the stored Poisson solution,
    /// restricted to the free dofs of `sys`.
    fn initial_displacement(&self, sys: &FemSystem, stage: &'static str) -> Result<Vec<f64>, CliError> {
        let text = self.read_upstream(POISSON_FILE, "poisson")?;
        let parse = |line: usize, message: String| CliError::Stage {
            stage,
            source: prefractal::Error::Parse { line, message },
        };
        let mut nodal = Vec::new();
        for (k, line) in text.lines().enumerate().skip(1) {
            let value = line
                .rsplit(',')
                .next()
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| parse(k + 1, format!("bad row {line:?} in {POISSON_FILE}")))?;
            nodal.push(value * self.config.wave.amplitude);
        }
        if nodal.len() != sys.mesh().num_nodes() {
            return Err(CliError::Stage {
                stage,
                source: prefractal::Error::MeshMismatch(format!(
                    "{POISSON_FILE} has {} nodes, {MESH_FILE} has {}",
                    nodal.len(),
                    sys.mesh().num_nodes()
                )),
            });
        }
        Ok(sys.restrict(&nodal))
    }

    fn wave(&mut self) -> Result<(), CliError> {
        let stage = "wave";
        let sys = self.system(stage)?;
        let u0 = self.initial_displacement(&sys, stage)?;
        let u1 = vec![0.0; sys.dim()];
        let traj = implicit_time_integrate(&sys, &self.config.wave_params(), &u0, &u1, Forcing::Zero)
            .map_err(|source| CliError::Stage { stage, source })?;
        self.emit("wave.csv", "trajectory", &traj.to_csv())
    }

    fn westervelt(&mut self) -> Result<(), CliError> {
        let stage = "westervelt";
        let wrap = |source| CliError::Stage { stage, source };
        let sys = self.system(stage)?;
        let u0 = self.initial_displacement(&sys, stage)?;
        let u1 = vec![0.0; sys.dim()];
        let params = self.config.westervelt_params();
        if self.config.westervelt.method == "newton" {
            let run = newton_step_solve(&sys, &params, &u0, &u1, Forcing::Zero).map_err(wrap)?;
            let mut csv = String::from("step,iterations\n");
            for (k, n) in run.iterations.iter().enumerate() {
                writeln!(csv, "{k},{n}").expect("writing to a String cannot fail");
            }
            self.emit("westervelt.csv", "trajectory", &run.trajectory.to_csv())?;
            return self.emit("newton_iterations.csv", "csv", &csv);
        }
        let trials = self.config.westervelt.constant_trials;
        let constants = if trials > 0 {
            Some(estimate_constants(&sys, &params, trials, self.config.seed).map_err(wrap)?)
        } else {
            None
        };
        let (traj, report) =
            picard_solve(&sys, &params, &u0, &u1, Forcing::Zero, self.config.picard_options(), constants).map_err(wrap)?;
        self.manifest.warnings.extend(report.warnings.iter().cloned());
        self.emit("westervelt.csv", "trajectory", &traj.to_csv())?;
        self.emit("contraction.csv", "csv", &report.to_csv())
    }

    fn study(&mut self) -> Result<(), CliError> {
        let stage = "study";
        let wrap = |source| CliError::Stage { stage, source };
        let opts = self.config.study.clone();
        let study = self.config.study_config()?;
        let seed = self.config.seed;
        let (report, plotted, log_y) = match opts.kind.as_str() {
            "solution" => {
                let mut trajectories: Vec<(String, String)> = Vec::new();
                let scaled_default = study.sigma_scaling;
                let report = solution_convergence_study_with(&study, &mut |m, scaled, _, traj: &Trajectory| {
                    let suffix = if scaled == scaled_default { "" } else { "_ablation" };
                    trajectories.push((format!("trajectory_m{m}{suffix}.csv"), traj.to_csv()));
                    Ok(())
                })
                .map_err(wrap)?;
                for (name, csv) in &trajectories {
                    self.emit(name, "trajectory", csv)?;
                }
                (report, vec!["e", "e_ablation"], true)
            }
            "trace" => {
                let g = Polynomial2::new(opts.g.clone());
                let report = trace_convergence_study(&study.ifs, &|p| g.value(p), &opts.levels).map_err(wrap)?;
                (report, vec!["successive_difference"], true)
            }
            "density" => {
                let samples = random_density_samples(&study.ifs, opts.density_samples, seed).map_err(wrap)?;
                let report = measure_density_study(&study.ifs, &opts.levels, &samples).map_err(wrap)?;
                (report, vec!["max_ratio", "mean_ratio"], false)
            }
            "uniform-trace" => {
                let polys = random_polynomials(opts.polynomials, opts.polynomial_degree, seed);
                let fields: Vec<&dyn TestField> = polys.iter().map(|p| p as &dyn TestField).collect();
                let report = uniform_trace_ratio(&study, &fields).map_err(wrap)?;
                (report, Vec::new(), false)
            }
            _ => (poincare_uniformity_study(&study).map_err(wrap)?, vec!["poincare_constant"], false),
        };
        for v in report.verdicts.iter().filter(|v| !v.passed) {
            self.manifest.warnings.push(format!("study verdict failed: {}", v.rule));
        }
        let name = opts.kind.replace('-', "_");
        self.emit(&format!("study_{name}.csv"), "csv", &report.to_csv())?;
        self.emit(&format!("study_{name}.svg"), "svg", &plot(&report, &plotted, log_y))
    }
}

/// Named columns against the level; every column when `columns` is empty.
fn plot(report: &ConvergenceReport, columns: &[&str], log_y: bool) -> String {
    let series: Vec<Series> = report
        .columns
        .iter()
        .filter(|c| columns.is_empty() || columns.contains(&c.as_str()))
        .map(|c| {
            let values = report.column(c).unwrap_or_default();
            let points = report.levels.iter().zip(values).map(|(&m, v)| (m as f64, v)).collect();
            Series::new(c.clone(), points)
        })
        .collect();
    svg_line_plot(&report.study, "level m", &series, log_y)
}
