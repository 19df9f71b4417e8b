//! Numerical studies of the prefractal family: trace integrals against the
//! self-similar measure, uniformity diagnostics across levels, the discrete
//! weak-form residual, and Cauchy convergence of solutions across levels.

mod fields;
mod mosco;
mod plot;
mod poincare;
mod report;
mod solution;
mod trace;

pub use fields::{random_polynomials, Polynomial2, TestField};
pub use mosco::{mosco_residual, test_trajectories, MoscoResidual};
pub use plot::{svg_line_plot, Series};
pub use poincare::poincare_uniformity_study;
pub use report::{spread, strictly_decreasing, ConvergenceReport, Verdict};
pub use solution::{
    solution_convergence_study, solution_convergence_study_with, BackgroundGrid, GridTransfer, LevelObserver,
};
pub use trace::{
    measure_density_study, measure_integral, random_density_samples, trace_convergence_study,
    trace_integral, uniform_trace_ratio, ORACLE_CELL_BUDGET,
};

use crate::error::{Error, Result};
use crate::fem::{assemble, FemSystem};
use crate::geometry::{sigma, IfsSystem, Point};
use crate::mesh::{build_domain, triangulate, unit_square, BoundarySpec, PolygonalDomain, TaggedMesh};
use crate::wave::WaveParams;
use crate::westervelt::{PicardOptions, WesterveltParams};

/// Bound on `max/min` across levels for the measure-density and trace
/// uniformity diagnostics.
pub const UNIFORMITY_BOUND: f64 = 10.0;
/// Bound on `max/min` of Poincaré constants across levels.
pub const POINCARE_BOUND: f64 = 2.0;

/// How the mesh size follows the level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshRule {
    /// `h = clamp(segment length, h_min, h_max)`. Below `h_min` the mesh
    /// still contains every prefractal vertex; only the interior size stops
    /// shrinking.
    Conforming { h_max: f64, h_min: f64 },
    /// `h = h0 · 2^{-k}` at the `k`-th entry of the level list.
    Halving { h0: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub ifs: IfsSystem,
    /// Counter-clockwise base polygon; Ω* is the bounding box of all levels.
    pub base: Vec<Point>,
    pub boundary: BoundarySpec,
    /// Increasing levels to visit.
    pub levels: Vec<usize>,
    pub mesh: MeshRule,
    /// Geometry level used for every entry of `levels` (mesh-only control
    /// runs).
    pub fixed_geometry: Option<usize>,
    pub physics: WesterveltParams,
    /// Robin coefficient `a`.
    pub robin: f64,
    /// Use `aₘ = aσₘ` on level `m`; otherwise `aₘ = a`.
    pub sigma_scaling: bool,
    /// Constant source of the Poisson problem giving the initial
    /// displacement on each level.
    pub poisson_source: f64,
    /// Background grid points per side for cross-level comparison.
    pub background: usize,
    pub picard: PicardOptions,
    /// Also run every level with the opposite Robin scaling.
    pub ablation: bool,
}

impl StudyConfig {
    /// Unit square with the prefractal on the bottom edge, levels 1..=5,
    /// `c = 1`, `ν = 0.5`, `α = 1`, `T = 2`, `dt = 0.01`.
    pub fn new(ifs: IfsSystem) -> Self {
        Self {
            ifs,
            base: unit_square(),
            boundary: BoundarySpec::square_default(),
            levels: (1..=5).collect(),
            mesh: MeshRule::Conforming {
                h_max: 0.25,
                h_min: 1.0 / 128.0,
            },
            fixed_geometry: None,
            physics: WesterveltParams {
                wave: WaveParams::new(1.0, 0.5, 2.0, 0.01),
                alpha: 1.0,
            },
            robin: 1.0,
            sigma_scaling: true,
            poisson_source: 1.0,
            background: 256,
            picard: PicardOptions {
                tolerance: 1e-10,
                max_iterations: 50,
            },
            ablation: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "levels {:?} must be non-empty and strictly increasing",
                self.levels
            )));
        }
        match self.mesh {
            MeshRule::Conforming { h_max, h_min } => {
                if !(h_min > 0.0 && h_min <= h_max && h_max.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "mesh sizes need 0 < h_min <= h_max, got h_min = {h_min}, h_max = {h_max}"
                    )));
                }
            }
            MeshRule::Halving { h0 } => {
                if !(h0 > 0.0 && h0.is_finite()) {
                    return Err(Error::InvalidParameter(format!("h0 = {h0} must be positive")));
                }
            }
        }
        if self.background < 2 {
            return Err(Error::InvalidParameter("background grid needs at least 2 points per side".into()));
        }
        if !(self.robin >= 0.0) {
            return Err(Error::InvalidParameter(format!("Robin coefficient {} must be non-negative", self.robin)));
        }
        if !self.poisson_source.is_finite() {
            return Err(Error::InvalidParameter("Poisson source must be finite".into()));
        }
        self.physics.validate()
    }

    /// Geometry level used at study level `m`.
    pub fn geometry_level(&self, m: usize) -> usize {
        self.fixed_geometry.unwrap_or(m)
    }

    /// Longest prefractal segment of the level-`m` domain.
    pub fn segment_length(&self, m: usize) -> Result<f64> {
        let g = self.geometry_level(m);
        let mut shrink = 1.0;
        for j in 0..g {
            let fam = &self.ifs.families()[self.ifs.family_at(j)?];
            shrink *= fam.maps.iter().map(|s| s.ratio()).fold(0.0, f64::max);
        }
        let n = self.base.len();
        let longest = self
            .boundary
            .pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| p.prefractal.is_some())
            .map(|(k, _)| (self.base[(k + 1) % n] - self.base[k]).norm())
            .fold(0.0, f64::max);
        Ok(longest * shrink / self.ifs.base_length())
    }

    pub fn h(&self, m: usize) -> Result<f64> {
        match self.mesh {
            MeshRule::Conforming { h_max, h_min } => {
                let seg = self.segment_length(m)?;
                Ok(if seg > 0.0 { seg.clamp(h_min, h_max) } else { h_max })
            }
            MeshRule::Halving { h0 } => {
                let k = self.levels.iter().position(|&l| l == m).ok_or_else(|| {
                    Error::InvalidParameter(format!("level {m} is not part of the study"))
                })?;
                Ok(h0 * 0.5f64.powi(k as i32))
            }
        }
    }

    pub fn domain(&self, m: usize) -> Result<PolygonalDomain> {
        build_domain(&self.base, &self.boundary, &self.ifs, self.geometry_level(m))
    }

    pub fn level_mesh(&self, m: usize) -> Result<TaggedMesh> {
        triangulate(&self.domain(m)?, self.h(m)?)
    }

    /// `σₘ` of the geometry used at level `m`.
    pub fn sigma(&self, m: usize) -> Result<f64> {
        sigma(&self.ifs, self.geometry_level(m))
    }

    /// Assembled level system; `scaled` selects `aₘ = aσₘ`.
    pub fn system(&self, m: usize, scaled: bool) -> Result<FemSystem> {
        let weight = if scaled { self.sigma(m)? } else { 1.0 };
        assemble(&self.level_mesh(m)?, self.robin, weight)
    }

    /// Bounding box of the union of all level domains.
    pub fn bounding_box(&self) -> Result<(Point, Point)> {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &m in &self.levels {
            let (a, b) = self.domain(m)?.bounding_box();
            lo = Point::new(lo.x.min(a.x), lo.y.min(a.y));
            hi = Point::new(hi.x.max(b.x), hi.y.max(b.y));
        }
        Ok((lo, hi))
    }
}
