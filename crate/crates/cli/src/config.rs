//! Run configuration: a JSON tree with every field defaulted.

use serde::{Deserialize, Serialize};

use prefractal::geometry::{build_environment, EnvironmentRule, Family, IfsSystem, Point};
use prefractal::lab::{MeshRule, StudyConfig};
use prefractal::mesh::{BoundaryPiece, BoundarySpec, BoundaryTag, Orientation};
use prefractal::wave::WaveParams;
use prefractal::westervelt::{PicardOptions, WesterveltParams};

use crate::CliError;

/// Stages accepted in `pipeline`, in the order `run` requires them.
pub const STAGES: [&str; 7] = ["geometry", "mesh", "eigs", "poisson", "wave", "westervelt", "study"];
pub const STUDY_KINDS: [&str; 5] = ["solution", "trace", "density", "uniform-trace", "poincare"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub domain: DomainConfig,
    pub physics: PhysicsConfig,
    pub discretization: DiscretizationConfig,
    pub poisson: PoissonConfig,
    pub eigs: EigsConfig,
    pub wave: WaveConfig,
    pub westervelt: WesterveltConfig,
    pub study: StudyOptions,
    /// Stages executed by `run`.
    pub pipeline: Vec<String>,
    pub seed: u64,
    /// Worker threads; the pipeline itself runs levels in order.
    pub threads: usize,
    pub output: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            domain: DomainConfig::default(),
            physics: PhysicsConfig::default(),
            discretization: DiscretizationConfig::default(),
            poisson: PoissonConfig::default(),
            eigs: EigsConfig::default(),
            wave: WaveConfig::default(),
            westervelt: WesterveltConfig::default(),
            study: StudyOptions::default(),
            pipeline: vec!["geometry".into(), "mesh".into(), "poisson".into()],
            seed: 0,
            threads: 1,
            output: "out".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Generator {
    Koch,
    Minkowski,
    /// One Koch family per contraction parameter `l ∈ (2, 4)`.
    KochMixture { l: Vec<f64>, environment: EnvironmentConfig },
    /// Maps sending the base segment onto consecutive polyline edges.
    Polyline { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvironmentConfig {
    Constant { family: usize },
    Periodic { pattern: Vec<usize> },
    Frequency { p: Vec<f64>, c0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub generator: Generator,
    /// Level of the curve written by the `geometry` stage.
    pub level: usize,
    /// Mirror the generator across its base segment.
    pub reflect: bool,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            generator: Generator::Koch,
            level: 3,
            reflect: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PieceConfig {
    /// `dirichlet`, `neumann` or `robin`.
    pub tag: String,
    /// `outward` or `inward` to replace the edge by the prefractal.
    pub prefractal: Option<String>,
}

impl Default for PieceConfig {
    fn default() -> Self {
        Self {
            tag: "dirichlet".into(),
            prefractal: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    /// Counter-clockwise base polygon.
    pub base: Vec<[f64; 2]>,
    /// One piece per base edge, edge `k` running from vertex `k` to `k + 1`.
    pub boundary: Vec<PieceConfig>,
}

impl Default for DomainConfig {
    fn default() -> Self {
        let piece = |tag: &str, prefractal: Option<&str>| PieceConfig {
            tag: tag.into(),
            prefractal: prefractal.map(Into::into),
        };
        Self {
            base: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            boundary: vec![
                piece("robin", Some("outward")),
                piece("dirichlet", None),
                piece("neumann", None),
                piece("dirichlet", None),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub c: f64,
    pub nu: f64,
    pub alpha: f64,
    /// Robin coefficient `a`.
    pub robin: f64,
    /// Multiply `a` by `σₘ` on level `m`.
    pub sigma_scaling: bool,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            nu: 0.5,
            alpha: 1.0,
            robin: 1.0,
            sigma_scaling: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationConfig {
    /// Target mesh size of the `mesh` stage.
    pub h: f64,
    pub dt: f64,
    pub t_final: f64,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self {
            h: 0.0625,
            dt: 0.01,
            t_final: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonConfig {
    /// Constant right-hand side.
    pub source: f64,
}

impl Default for PoissonConfig {
    fn default() -> Self {
        Self { source: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigsConfig {
    pub count: usize,
}

impl Default for EigsConfig {
    fn default() -> Self {
        Self { count: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveConfig {
    /// Initial displacement is this multiple of the Poisson solution; the
    /// initial velocity is zero.
    pub amplitude: f64,
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self { amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WesterveltConfig {
    /// `picard` or `newton`.
    pub method: String,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Random sources for the contraction constants; 0 skips the estimate.
    pub constant_trials: usize,
}

impl Default for WesterveltConfig {
    fn default() -> Self {
        Self {
            method: "picard".into(),
            tolerance: 1e-10,
            max_iterations: 50,
            constant_trials: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyOptions {
    /// One of [`STUDY_KINDS`].
    pub kind: String,
    pub levels: Vec<usize>,
    pub h_max: f64,
    pub h_min: f64,
    /// Background grid points per side.
    pub background: usize,
    pub ablation: bool,
    /// Trace integrand as `[i, j, c]` terms of `Σ c xⁱ yʲ`.
    pub g: Vec<(u32, u32, f64)>,
    /// Disks sampled by the density study.
    pub density_samples: usize,
    /// Random polynomials for the uniform trace ratio.
    pub polynomials: usize,
    pub polynomial_degree: u32,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            kind: "solution".into(),
            levels: vec![1, 2, 3, 4, 5],
            h_max: 0.25,
            h_min: 0.0078125,
            background: 256,
            ablation: false,
            g: vec![(1, 0, 1.0)],
            density_samples: 200,
            polynomials: 10,
            polynomial_degree: 3,
        }
    }
}

fn invalid(key: &str, constraint: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.into(),
        constraint: constraint.into(),
    }
}

fn positive(key: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be a positive number, got {x}")))
    }
}

fn non_negative(key: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be a non-negative number, got {x}")))
    }
}

fn point(p: [f64; 2]) -> Point {
    Point::new(p[0], p[1])
}

impl RunConfig {
    /// Parses JSON, naming the offending key on type errors.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            invalid(if path == "." { "<root>" } else { &path }, e.into_inner().to_string())
        })
    }

    /// Pretty JSON with a trailing newline; parsing it back gives the same
    /// bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Checks every constraint without running anything.
    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.physics;
        positive("physics.c", p.c)?;
        positive("physics.nu", p.nu)?;
        non_negative("physics.alpha", p.alpha)?;
        non_negative("physics.robin", p.robin)?;
        let d = &self.discretization;
        positive("discretization.h", d.h)?;
        positive("discretization.dt", d.dt)?;
        positive("discretization.t_final", d.t_final)?;
        if d.dt > d.t_final {
            return Err(invalid("discretization.dt", format!("must not exceed t_final = {}", d.t_final)));
        }
        if !self.poisson.source.is_finite() {
            return Err(invalid("poisson.source", "must be finite"));
        }
        if self.eigs.count == 0 {
            return Err(invalid("eigs.count", "must be at least 1"));
        }
        if !self.wave.amplitude.is_finite() {
            return Err(invalid("wave.amplitude", "must be finite"));
        }
        let w = &self.westervelt;
        if w.method != "picard" && w.method != "newton" {
            return Err(invalid("westervelt.method", format!("must be picard or newton, got {:?}", w.method)));
        }
        positive("westervelt.tolerance", w.tolerance)?;
        if w.max_iterations == 0 {
            return Err(invalid("westervelt.max_iterations", "must be at least 1"));
        }
        let s = &self.study;
        if !STUDY_KINDS.contains(&s.kind.as_str()) {
            return Err(invalid("study.kind", format!("must be one of {STUDY_KINDS:?}, got {:?}", s.kind)));
        }
        if s.levels.is_empty() || s.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("study.levels", "must be non-empty and strictly increasing"));
        }
        positive("study.h_max", s.h_max)?;
        positive("study.h_min", s.h_min)?;
        if s.h_min > s.h_max {
            return Err(invalid("study.h_min", format!("must not exceed h_max = {}", s.h_max)));
        }
        if s.background < 2 {
            return Err(invalid("study.background", "must be at least 2"));
        }
        if s.density_samples == 0 {
            return Err(invalid("study.density_samples", "must be at least 1"));
        }
        if s.polynomials == 0 {
            return Err(invalid("study.polynomials", "must be at least 1"));
        }
        if s.g.iter().any(|t| !t.2.is_finite()) {
            return Err(invalid("study.g", "coefficients must be finite"));
        }
        for (k, stage) in self.pipeline.iter().enumerate() {
            if !STAGES.contains(&stage.as_str()) {
                return Err(invalid(&format!("pipeline[{k}]"), format!("unknown stage {stage:?}; expected one of {STAGES:?}")));
            }
        }
        if self.threads == 0 {
            return Err(invalid("threads", "must be at least 1"));
        }
        if self.output.is_empty() {
            return Err(invalid("output", "must name a directory"));
        }
        self.boundary()?;
        self.ifs()?;
        Ok(())
    }

    /// Deepest level any stage asks for.
    pub fn max_level(&self) -> usize {
        self.study.levels.iter().copied().chain([self.geometry.level]).max().unwrap_or(0)
    }

    pub fn ifs(&self) -> Result<IfsSystem, CliError> {
        let key = "geometry.generator";
        let wrap = |e: prefractal::Error| invalid(key, e.to_string());
        let ifs = match &self.geometry.generator {
            Generator::Koch => IfsSystem::koch(),
            Generator::Minkowski => IfsSystem::minkowski(),
            Generator::KochMixture { l, environment } => {
                if l.is_empty() {
                    return Err(invalid("geometry.generator.l", "needs at least one family"));
                }
                let rule = match environment {
                    EnvironmentConfig::Constant { family } => EnvironmentRule::Constant(*family),
                    EnvironmentConfig::Periodic { pattern } => EnvironmentRule::Periodic(pattern.clone()),
                    EnvironmentConfig::Frequency { p, c0 } => EnvironmentRule::FrequencyTarget { p: p.clone(), c0: *c0 },
                };
                let env = build_environment(&rule, self.max_level().max(1), l.len())
                    .map_err(|e| invalid("geometry.generator.environment", e.to_string()))?;
                IfsSystem::koch_mixture(l, env.sequence).map_err(wrap)?
            }
            Generator::Polyline { vertices } => {
                if vertices.len() < 3 {
                    return Err(invalid("geometry.generator.vertices", "needs at least three vertices"));
                }
                let pts: Vec<Point> = vertices.iter().copied().map(point).collect();
                let (a, b) = (pts[0], pts[pts.len() - 1]);
                let family = Family::from_polyline(a, b, &pts, false).map_err(wrap)?;
                IfsSystem::new(vec![family], Vec::new(), a, b).map_err(wrap)?
            }
        };
        Ok(if self.geometry.reflect { ifs.reflected() } else { ifs })
    }

    pub fn base(&self) -> Vec<Point> {
        self.domain.base.iter().copied().map(point).collect()
    }

    pub fn boundary(&self) -> Result<BoundarySpec, CliError> {
        let d = &self.domain;
        if d.base.len() < 3 {
            return Err(invalid("domain.base", "needs at least three vertices"));
        }
        if d.boundary.len() != d.base.len() {
            return Err(invalid(
                "domain.boundary",
                format!("has {} pieces for {} base edges", d.boundary.len(), d.base.len()),
            ));
        }
        let pieces = d
            .boundary
            .iter()
            .enumerate()
            .map(|(k, piece)| {
                let tag = BoundaryTag::parse(&piece.tag).map_err(|e| invalid(&format!("domain.boundary[{k}].tag"), e.to_string()))?;
                let prefractal = match piece.prefractal.as_deref() {
                    None => None,
                    Some("outward") => Some(Orientation::Outward),
                    Some("inward") => Some(Orientation::Inward),
                    Some(other) => {
                        return Err(invalid(
                            &format!("domain.boundary[{k}].prefractal"),
                            format!("must be outward or inward, got {other:?}"),
                        ))
                    }
                };
                Ok(BoundaryPiece { tag, prefractal })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(BoundarySpec { pieces })
    }

    pub fn has_prefractal(&self) -> bool {
        self.domain.boundary.iter().any(|p| p.prefractal.is_some())
    }

    pub fn wave_params(&self) -> WaveParams {
        let d = &self.discretization;
        WaveParams::new(self.physics.c, self.physics.nu, d.t_final, d.dt)
    }

    pub fn westervelt_params(&self) -> WesterveltParams {
        WesterveltParams {
            wave: self.wave_params(),
            alpha: self.physics.alpha,
        }
    }

    pub fn picard_options(&self) -> PicardOptions {
        PicardOptions {
            tolerance: self.westervelt.tolerance,
            max_iterations: self.westervelt.max_iterations,
        }
    }

    pub fn study_config(&self) -> Result<StudyConfig, CliError> {
        let s = &self.study;
        let mut study = StudyConfig::new(self.ifs()?);
        study.base = self.base();
        study.boundary = self.boundary()?;
        study.levels = s.levels.clone();
        study.mesh = MeshRule::Conforming {
            h_max: s.h_max,
            h_min: s.h_min,
        };
        study.physics = self.westervelt_params();
        study.robin = self.physics.robin;
        study.sigma_scaling = self.physics.sigma_scaling;
        study.poisson_source = self.poisson.source;
        study.background = s.background;
        study.picard = self.picard_options();
        study.ablation = s.ablation;
        Ok(study)
    }
}
