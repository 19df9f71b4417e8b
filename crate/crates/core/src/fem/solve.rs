use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::system::FemSystem;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg::{norm2, norm_inf, smallest_eigenpairs, EigenOptions};

/// Relative residual accepted from the direct Poisson solve.
pub const POISSON_RESIDUAL_TOL: f64 = 1e-10;

/// Solves `S u = b` for a load vector `b` on the free dofs, with one step of
/// iterative refinement when the first residual misses the tolerance.
pub fn solve_poisson_load(sys: &FemSystem, load: &[f64]) -> Result<Vec<f64>> {
    let factor = sys.operator_factor()?;
    let mut u = factor.solve(load);
    let scale = norm2(load);
    if scale == 0.0 {
        return Ok(u);
    }
    for _ in 0..2 {
        let su = sys.operator().mul_vec(&u);
        let r: Vec<f64> = load.iter().zip(&su).map(|(b, s)| b - s).collect();
        let rel = norm2(&r) / scale;
        if rel <= POISSON_RESIDUAL_TOL {
            return Ok(u);
        }
        let du = factor.solve(&r);
        u.iter_mut().zip(&du).for_each(|(x, d)| *x += d);
    }
    let su = sys.operator().mul_vec(&u);
    let r: Vec<f64> = load.iter().zip(&su).map(|(b, s)| b - s).collect();
    let rel = norm2(&r) / scale;
    if rel <= POISSON_RESIDUAL_TOL {
        Ok(u)
    } else {
        Err(Error::NonConvergence {
            iterations: 3,
            residual: rel,
        })
    }
}

/// Weak Poisson solve `(u, v)_V = (f, v)` with `f` given at every mesh node.
pub fn solve_poisson(sys: &FemSystem, f_nodal: &[f64]) -> Result<Vec<f64>> {
    solve_poisson_load(sys, &sys.load_nodal(f_nodal))
}

/// Eigenpairs of `S w = λ M w`, ascending and M-orthonormal.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub iterations: usize,
}

impl SpectralBasis {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The first `k` pairs.
    pub fn truncated(&self, k: usize) -> SpectralBasis {
        SpectralBasis {
            values: self.values[..k].to_vec(),
            vectors: self.vectors[..k].to_vec(),
            iterations: self.iterations,
        }
    }
}

pub fn solve_eigen(sys: &FemSystem, count: usize) -> Result<SpectralBasis> {
    solve_eigen_with(sys, count, EigenOptions::default())
}

pub fn solve_eigen_with(sys: &FemSystem, count: usize, opts: EigenOptions) -> Result<SpectralBasis> {
    if count == 0 || count > sys.dim() {
        return Err(Error::InvalidParameter(format!(
            "eigenpair count {count} must lie in 1..={}",
            sys.dim()
        )));
    }
    let factor = sys.operator_factor()?;
    let pairs = smallest_eigenpairs(sys.operator(), factor, sys.mass(), count, opts)?;
    Ok(SpectralBasis {
        values: pairs.values,
        vectors: pairs.vectors,
        iterations: pairs.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    pub v_norm: f64,
    pub laplacian_l2: f64,
}

pub fn l2_norm(sys: &FemSystem, u: &[f64]) -> f64 {
    sys.mass().quadratic(u).max(0.0).sqrt()
}

pub fn v_norm(sys: &FemSystem, u: &[f64]) -> f64 {
    sys.operator().quadratic(u).max(0.0).sqrt()
}

/// `‖g‖_{L²}` with `M g = S u`, the discrete `‖Δu‖_{L²}`.
pub fn laplacian_l2(sys: &FemSystem, u: &[f64]) -> Result<f64> {
    let su = sys.operator().mul_vec(u);
    let g = sys.mass_factor()?.solve(&su);
    Ok(sys.mass().quadratic(&g).max(0.0).sqrt())
}

pub fn norms(sys: &FemSystem, u: &[f64]) -> Result<Norms> {
    let m = sys.mass().quadratic(u);
    let a = sys.stiffness().quadratic(u);
    Ok(Norms {
        l2: m.max(0.0).sqrt(),
        h1: (m + a).max(0.0).sqrt(),
        v_norm: v_norm(sys, u),
        laplacian_l2: laplacian_l2(sys, u)?,
    })
}

/// Sharp discrete Poincaré constant `1/√λ₁` of `A w = λ M w` on the
/// Dirichlet-free dofs, Robin term excluded.
pub fn poincare_constant(sys: &FemSystem) -> Result<f64> {
    if !sys.has_dirichlet() {
        return Err(Error::InvalidParameter(
            "the Poincaré constant needs a non-empty Dirichlet boundary".into(),
        ));
    }
    let factor = sys.stiffness_factor()?;
    let count = 1.min(sys.dim());
    let pairs = smallest_eigenpairs(sys.stiffness(), factor, sys.mass(), count, EigenOptions::default())?;
    Ok(1.0 / pairs.values[0].sqrt())
}

/// `(∫|u|⁶)^{1/6}` with the edge-midpoint rule on each triangle; `u` is
/// given at every mesh node.
pub fn l6_norm_nodal(sys: &FemSystem, u: &[f64]) -> f64 {
    let mesh = sys.mesh();
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(t);
        let area = crate::mesh::triangle_area(p[0], p[1], p[2]);
        let mids = [
            0.5 * (u[tri[0]] + u[tri[1]]),
            0.5 * (u[tri[1]] + u[tri[2]]),
            0.5 * (u[tri[2]] + u[tri[0]]),
        ];
        total += area / 3.0 * mids.iter().map(|m| m.powi(6)).sum::<f64>();
    }
    total.powf(1.0 / 6.0)
}

/// `‖u − exact‖_{L²}` for a P1 field given at every node, by the 7-point
/// degree-5 triangle rule.
pub fn l2_error_nodal(sys: &FemSystem, u: &[f64], exact: impl Fn(Point) -> f64) -> f64 {
    const RULE: [(f64, f64, f64); 7] = [
        (1.0 / 3.0, 1.0 / 3.0, 0.225),
        (0.059_715_871_789_770, 0.470_142_064_105_115, 0.132_394_152_788_506),
        (0.470_142_064_105_115, 0.059_715_871_789_770, 0.132_394_152_788_506),
        (0.470_142_064_105_115, 0.470_142_064_105_115, 0.132_394_152_788_506),
        (0.797_426_985_353_087, 0.101_286_507_323_456, 0.125_939_180_544_827),
        (0.101_286_507_323_456, 0.797_426_985_353_087, 0.125_939_180_544_827),
        (0.101_286_507_323_456, 0.101_286_507_323_456, 0.125_939_180_544_827),
    ];
    let mesh = sys.mesh();
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(t);
        let area = crate::mesh::triangle_area(p[0], p[1], p[2]);
        for &(l1, l2, w) in &RULE {
            let l0 = 1.0 - l1 - l2;
            let x = p[0] * l0 + p[1].coords * l1 + p[2].coords * l2;
            let uh = u[tri[0]] * l0 + u[tri[1]] * l1 + u[tri[2]] * l2;
            total += area * w * (uh - exact(x)).powi(2);
        }
    }
    total.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingRatios {
    /// `max ‖u‖_{L⁶} / ‖∇u‖_{L²}`
    pub l6_ratio_max: f64,
    /// `max ‖u‖_{L∞} / ‖f‖_{L²}`
    pub linf_ratio_max: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Embedding ratios over `trials` random nodal sources, i.i.d. uniform on
/// [−1, 1] at every node and normalized in L².
pub fn embedding_ratios(sys: &FemSystem, trials: usize, seed: u64) -> Result<EmbeddingRatios> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let n = sys.mesh().num_nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources: Vec<Vec<f64>> = (0..trials)
        .map(|_| {
            let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let norm = sys.mass_full().quadratic(&f).sqrt();
            f.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    let mut out = embedding_ratios_for(sys, &sources)?;
    out.seed = seed;
    Ok(out)
}

/// Embedding ratios for explicit sources given at every mesh node.
pub fn embedding_ratios_for(sys: &FemSystem, sources: &[Vec<f64>]) -> Result<EmbeddingRatios> {
    let mut l6: f64 = 0.0;
    let mut linf: f64 = 0.0;
    for f in sources {
        let u = solve_poisson(sys, f)?;
        let grad = sys.stiffness().quadratic(&u).max(0.0).sqrt();
        let f_l2 = sys.mass_full().quadratic(f).max(0.0).sqrt();
        if grad == 0.0 || f_l2 == 0.0 {
            continue;
        }
        let nodal = sys.expand(&u);
        l6 = l6.max(l6_norm_nodal(sys, &nodal) / grad);
        linf = linf.max(norm_inf(&u) / f_l2);
    }
    Ok(EmbeddingRatios {
        l6_ratio_max: l6,
        linf_ratio_max: linf,
        trials: sources.len(),
        seed: 0,
    })
}
