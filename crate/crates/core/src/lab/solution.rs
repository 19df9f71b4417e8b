use super::report::{strictly_decreasing, ConvergenceReport, Verdict};
use super::StudyConfig;
use crate::error::{Error, Result};
use crate::fem::{solve_poisson, FemSystem};
use crate::geometry::Point;
use crate::mesh::TaggedMesh;
use crate::wave::{trapezoid_weights, Forcing, Trajectory};
use crate::westervelt::picard_solve;

/// Cell centers of an `n × n` grid over the box `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundGrid {
    pub lo: Point,
    pub hi: Point,
    pub n: usize,
}

impl BackgroundGrid {
    pub fn new(lo: Point, hi: Point, n: usize) -> Self {
        Self { lo, hi, n }
    }

    pub fn cell_area(&self) -> f64 {
        (self.hi.x - self.lo.x) * (self.hi.y - self.lo.y) / (self.n * self.n) as f64
    }

    /// Row-major, `x` fastest.
    pub fn points(&self) -> Vec<Point> {
        let (dx, dy) = ((self.hi.x - self.lo.x) / self.n as f64, (self.hi.y - self.lo.y) / self.n as f64);
        (0..self.n)
            .flat_map(|j| {
                (0..self.n).map(move |i| Point::new(self.lo.x + (i as f64 + 0.5) * dx, self.lo.y + (j as f64 + 0.5) * dy))
            })
            .collect()
    }

    /// `Σ cell_area · x²`.
    pub fn l2_norm_sq(&self, values: &[f64]) -> f64 {
        self.cell_area() * values.iter().map(|x| x * x).sum::<f64>()
    }
}

/// P1 interpolation from a mesh to grid points, zero outside the mesh.
#[derive(Debug, Clone)]
pub struct GridTransfer {
    /// Containing triangle nodes and barycentric weights per grid point.
    locations: Vec<Option<([usize; 3], [f64; 3])>>,
}

const INSIDE_TOL: f64 = 1e-12;

impl GridTransfer {
    pub fn new(mesh: &TaggedMesh, points: &[Point]) -> Self {
        let nodes = mesh.nodes();
        let (mut lo, mut hi) = (nodes[0], nodes[0]);
        for p in nodes {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let side = ((mesh.num_triangles() as f64).sqrt().ceil() as usize).max(1);
        let (wx, wy) = ((hi.x - lo.x) / side as f64, (hi.y - lo.y) / side as f64);
        let cell = |x: f64, y: f64| -> (usize, usize) {
            let i = (((x - lo.x) / wx).floor().max(0.0) as usize).min(side - 1);
            let j = (((y - lo.y) / wy).floor().max(0.0) as usize).min(side - 1);
            (i, j)
        };
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); side * side];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let ps = tri.map(|v| nodes[v]);
            let (i0, j0) = cell(ps.iter().map(|p| p.x).fold(f64::INFINITY, f64::min), ps.iter().map(|p| p.y).fold(f64::INFINITY, f64::min));
            let (i1, j1) = cell(ps.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max), ps.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * side + i].push(t);
                }
            }
        }
        let locations = points
            .iter()
            .map(|&p| {
                if p.x < lo.x || p.x > hi.x || p.y < lo.y || p.y > hi.y {
                    return None;
                }
                let (i, j) = cell(p.x, p.y);
                buckets[j * side + i].iter().find_map(|&t| {
                    let tri = mesh.triangles()[t];
                    let [a, b, c] = tri.map(|v| nodes[v]);
                    let det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
                    let l1 = ((p.x - a.x) * (c.y - a.y) - (p.y - a.y) * (c.x - a.x)) / det;
                    let l2 = ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / det;
                    let l0 = 1.0 - l1 - l2;
                    (l0 >= -INSIDE_TOL && l1 >= -INSIDE_TOL && l2 >= -INSIDE_TOL).then_some((tri, [l0, l1, l2]))
                })
            })
            .collect();
        Self { locations }
    }

    /// Number of grid points inside the mesh.
    pub fn covered(&self) -> usize {
        self.locations.iter().filter(|l| l.is_some()).count()
    }

    pub fn apply(&self, nodal: &[f64]) -> Vec<f64> {
        self.locations
            .iter()
            .map(|loc| loc.map_or(0.0, |(tri, w)| w[0] * nodal[tri[0]] + w[1] * nodal[tri[1]] + w[2] * nodal[tri[2]]))
            .collect()
    }
}

struct LevelRun {
    h: f64,
    nodes: usize,
    sigma: f64,
    iterations: usize,
    x_norm: f64,
    boundary_term: f64,
    /// Displacement on the background grid at every time.
    samples: Vec<Vec<f64>>,
}

/// Receives `(level, sigma_scaled, system, trajectory)` for every level run.
pub type LevelObserver<'a> = dyn FnMut(usize, bool, &FemSystem, &Trajectory) -> Result<()> + 'a;

fn run_level(
    study: &StudyConfig,
    m: usize,
    scaled: bool,
    points: &[Point],
    observer: &mut LevelObserver<'_>,
) -> Result<LevelRun> {
    let sys: FemSystem = study.system(m, scaled)?;
    let source = vec![study.poisson_source; sys.mesh().num_nodes()];
    let u0 = solve_poisson(&sys, &source)?;
    let u1 = vec![0.0; sys.dim()];
    let (traj, report) = picard_solve(&sys, &study.physics, &u0, &u1, Forcing::Zero, study.picard, None)?;
    observer(m, scaled, &sys, &traj)?;
    let weights = trapezoid_weights(traj.len(), traj.dt());
    let a = sys.robin_coefficient();
    let boundary_term = traj
        .u
        .iter()
        .zip(&weights)
        .map(|(u, w)| w * a * sys.robin().quadratic(u))
        .sum();
    let transfer = GridTransfer::new(sys.mesh(), points);
    let samples = traj.u.iter().map(|u| transfer.apply(&sys.expand(u))).collect();
    Ok(LevelRun {
        h: study.h(m)?,
        nodes: sys.mesh().num_nodes(),
        sigma: sys.sigma_weight(),
        iterations: report.corrections.len(),
        x_norm: report.final_x_norm,
        boundary_term,
        samples,
    })
}

/// `‖a − b‖_{L²(0,T; L²(Ω*))}` on the grid with trapezoidal time weights.
fn grid_distance(grid: &BackgroundGrid, weights: &[f64], a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let total: f64 = a
        .iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), w)| {
            let d: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
            w * grid.l2_norm_sq(&d)
        })
        .sum();
    total.sqrt()
}

/// Westervelt on every level with the level Poisson solution as initial
/// displacement, compared on the background grid over Ω*.
/// `e` at level `m` is the distance to the next level; `boundary_drift` is
/// the change of `∫ aₘ ∫_{Kₘ} u² ds dt` to the next level.
pub fn solution_convergence_study(study: &StudyConfig) -> Result<ConvergenceReport> {
    solution_convergence_study_with(study, &mut |_, _, _, _| Ok(()))
}

/// [`solution_convergence_study`] handing each level's system and trajectory
/// to `observer` before it is reduced to grid samples.
pub fn solution_convergence_study_with(
    study: &StudyConfig,
    observer: &mut LevelObserver<'_>,
) -> Result<ConvergenceReport> {
    study.validate()?;
    let (lo, hi) = study.bounding_box()?;
    let grid = BackgroundGrid::new(lo, hi, study.background);
    let points = grid.points();
    let weights = trapezoid_weights(study.physics.wave.times().len(), study.physics.wave.step());
    let variants: Vec<bool> = if study.ablation {
        vec![study.sigma_scaling, !study.sigma_scaling]
    } else {
        vec![study.sigma_scaling]
    };

    let mut runs: Vec<Vec<LevelRun>> = Vec::new();
    let mut distances: Vec<Vec<f64>> = Vec::new();
    for &scaled in &variants {
        let mut levels = Vec::new();
        let mut dist = Vec::new();
        let mut previous: Option<Vec<Vec<f64>>> = None;
        for &m in &study.levels {
            let mut run = run_level(study, m, scaled, &points, observer).map_err(Error::at_level(m))?;
            if let Some(prev) = previous.take() {
                dist.push(grid_distance(&grid, &weights, &prev, &run.samples));
            }
            previous = Some(std::mem::take(&mut run.samples));
            levels.push(run);
        }
        runs.push(levels);
        distances.push(dist);
    }

    let mut columns = vec!["h", "nodes", "sigma_weight", "picard_iterations", "x_norm", "boundary_term", "boundary_drift", "e"];
    if study.ablation {
        columns.extend(["boundary_term_ablation", "boundary_drift_ablation", "e_ablation"]);
    }
    let mut report = ConvergenceReport::new("solution convergence", &columns);
    let drift = |runs: &[LevelRun], k: usize| {
        runs.get(k + 1).map_or(f64::NAN, |next| (next.boundary_term - runs[k].boundary_term).abs())
    };
    for (k, &m) in study.levels.iter().enumerate() {
        let r = &runs[0][k];
        let mut row = vec![
            r.h,
            r.nodes as f64,
            r.sigma,
            r.iterations as f64,
            r.x_norm,
            r.boundary_term,
            drift(&runs[0], k),
            distances[0].get(k).copied().unwrap_or(f64::NAN),
        ];
        if study.ablation {
            row.extend([
                runs[1][k].boundary_term,
                drift(&runs[1], k),
                distances[1].get(k).copied().unwrap_or(f64::NAN),
            ]);
        }
        report.push_row(m, row);
    }
    report.scalars.push(("background_points".into(), (study.background * study.background) as f64));
    report.verdicts.push(Verdict::new(
        "successive differences e strictly decreasing",
        distances[0].len() >= 2 && strictly_decreasing(&distances[0]),
        distances[0].iter().enumerate().map(|(k, &d)| (format!("e{}", study.levels[k]), d)).collect(),
    ));
    if study.ablation {
        let max_drift = |runs: &[LevelRun]| (0..runs.len()).map(|k| drift(runs, k)).filter(|d| !d.is_nan()).fold(0.0, f64::max);
        let (own, other) = (max_drift(&runs[0]), max_drift(&runs[1]));
        let (scaled, unscaled) = if study.sigma_scaling { (own, other) } else { (other, own) };
        report.verdicts.push(Verdict::new(
            "sigma-scaled boundary drift below the unscaled drift",
            scaled < unscaled,
            vec![("scaled".into(), scaled), ("unscaled".into(), unscaled)],
        ));
    }
    Ok(report)
}
