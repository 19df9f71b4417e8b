use std::fmt::Write as _;

use crate::error::Result;
use crate::fem::{l2_norm, v_norm, FemSystem};
use crate::geometry::Point;

use super::WaveParams;

/// Source term of the damped wave equation.
#[derive(Clone, Copy)]
pub enum Forcing<'a> {
    Zero,
    /// `f(t, x)` sampled at every mesh node at the grid times.
    Function(&'a (dyn Fn(f64, Point) -> f64 + Sync)),
    /// Values on the free dofs at each grid time; Dirichlet nodes carry zero.
    Samples(&'a [Vec<f64>]),
}

impl std::fmt::Debug for Forcing<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Forcing::Zero => write!(f, "Zero"),
            Forcing::Function(_) => write!(f, "Function(..)"),
            Forcing::Samples(s) => write!(f, "Samples({} steps)", s.len()),
        }
    }
}

impl Forcing<'_> {
    /// Load vector `(f(t_n), φᵢ)` and `‖f(t_n)‖_{L²}` at every grid time.
    pub(crate) fn discretize(&self, sys: &FemSystem, times: &[f64]) -> Vec<(Vec<f64>, f64)> {
        match self {
            Forcing::Zero => times.iter().map(|_| (vec![0.0; sys.dim()], 0.0)).collect(),
            Forcing::Function(f) => times
                .iter()
                .map(|&t| {
                    let nodal = sys.interpolate_nodal(|p| f(t, p));
                    let full = sys.mass_full().mul_vec(&nodal);
                    let norm = crate::linalg::dot(&nodal, &full).max(0.0).sqrt();
                    (sys.restrict(&full), norm)
                })
                .collect(),
            Forcing::Samples(samples) => {
                assert_eq!(samples.len(), times.len(), "one forcing sample per grid time");
                samples
                    .iter()
                    .map(|s| {
                        let load = sys.load(s);
                        let norm = crate::linalg::dot(s, &load).max(0.0).sqrt();
                        (load, norm)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

/// `½vᵀMv + ½c²uᵀSu`
pub fn energy(sys: &FemSystem, params: &WaveParams, u: &[f64], v: &[f64]) -> Energy {
    let kinetic = 0.5 * sys.mass().quadratic(v);
    let potential = 0.5 * params.c * params.c * sys.operator().quadratic(u);
    Energy {
        kinetic,
        potential,
        total: kinetic + potential,
    }
}

/// Norms cached per grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepNorms {
    pub t: f64,
    pub l2_u: f64,
    pub v_norm_u: f64,
    pub laplacian_l2_u: f64,
    pub l2_v: f64,
    pub v_norm_v: f64,
    pub laplacian_l2_v: f64,
    pub l2_a: f64,
    pub energy: Energy,
    /// `‖f(t)‖_{L²}` of the source that produced the trajectory.
    pub source_l2: f64,
}

/// Time samples of `u`, `u_t` and `u_tt` on the free dofs over a uniform grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
    pub norms: Vec<StepNorms>,
}

impl Trajectory {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sys: &FemSystem,
        params: &WaveParams,
        times: Vec<f64>,
        u: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
        a: Vec<Vec<f64>>,
        source_l2: &[f64],
    ) -> Result<Self> {
        let lap_u = laplacian_norms(sys, &u)?;
        let lap_v = laplacian_norms(sys, &v)?;
        let mut norms = Vec::with_capacity(times.len());
        for n in 0..times.len() {
            norms.push(StepNorms {
                t: times[n],
                l2_u: l2_norm(sys, &u[n]),
                v_norm_u: v_norm(sys, &u[n]),
                laplacian_l2_u: lap_u[n],
                l2_v: l2_norm(sys, &v[n]),
                v_norm_v: v_norm(sys, &v[n]),
                laplacian_l2_v: lap_v[n],
                l2_a: l2_norm(sys, &a[n]),
                energy: energy(sys, params, &u[n], &v[n]),
                source_l2: source_l2[n],
            });
        }
        Ok(Self { times, u, v, a, norms })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    /// Trapezoid weights of the time grid.
    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(self.times.len(), self.dt())
    }

    /// Discrete `X`-norm: square root of the trapezoid time integral of
    /// `‖Δu‖² + ‖Δu_t‖² + ‖u‖² + ‖u_t‖² + ‖u_tt‖²`, all pieces weighted 1.
    pub fn x_norm(&self) -> f64 {
        self.weights()
            .iter()
            .zip(&self.norms)
            .map(|(w, n)| {
                w * (n.laplacian_l2_u.powi(2) + n.laplacian_l2_v.powi(2) + n.l2_u.powi(2) + n.l2_v.powi(2) + n.l2_a.powi(2))
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `L²(0,T;L²)` norm of the source.
    pub fn source_y_norm(&self) -> f64 {
        self.weights()
            .iter()
            .zip(&self.norms)
            .map(|(w, n)| w * n.source_l2 * n.source_l2)
            .sum::<f64>()
            .sqrt()
    }

    /// CSV with header `t,l2_u,vnorm_u,l2_v,energy_total,laplacian_l2_u`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,l2_u,vnorm_u,l2_v,energy_total,laplacian_l2_u\n");
        for n in &self.norms {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                n.t, n.l2_u, n.v_norm_u, n.l2_v, n.energy.total, n.laplacian_l2_u
            )
            .expect("writing to a String cannot fail");
        }
        out
    }
}

pub fn trapezoid_weights(len: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![dt; len];
    if len == 1 {
        w[0] = 0.0;
    } else if len > 1 {
        w[0] = 0.5 * dt;
        w[len - 1] = 0.5 * dt;
    }
    w
}

/// `L²(0,T;L²)` norm of free-dof samples on a uniform grid.
pub fn y_norm(sys: &FemSystem, samples: &[Vec<f64>], dt: f64) -> f64 {
    trapezoid_weights(samples.len(), dt)
        .iter()
        .zip(samples)
        .map(|(w, s)| w * sys.mass().quadratic(s))
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

/// Empirical constants of the global a-priori estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriReport {
    /// `sup (‖Δu‖² + ‖u_t‖²_V) + ∫‖Δu_t‖²`
    pub lhs_energy: f64,
    /// `∫‖Δu‖²`
    pub lhs_integral: f64,
    /// `‖f‖²_{L²L²} + ‖Δu₀‖² + ‖u₁‖²_V`
    pub rhs: f64,
    /// `None` when the data vanish.
    pub ratio_energy: Option<f64>,
    pub ratio_integral: Option<f64>,
}

pub fn apriori_check(traj: &Trajectory) -> AprioriReport {
    let w = traj.weights();
    let sup = traj
        .norms
        .iter()
        .map(|n| n.laplacian_l2_u.powi(2) + n.v_norm_v.powi(2))
        .fold(0.0, f64::max);
    let int_v: f64 = w.iter().zip(&traj.norms).map(|(w, n)| w * n.laplacian_l2_v.powi(2)).sum();
    let int_u: f64 = w.iter().zip(&traj.norms).map(|(w, n)| w * n.laplacian_l2_u.powi(2)).sum();
    let first = &traj.norms[0];
    let rhs = traj.source_y_norm().powi(2) + first.laplacian_l2_u.powi(2) + first.v_norm_v.powi(2);
    let ratio = |lhs: f64| if rhs > 0.0 { Some(lhs / rhs) } else { None };
    AprioriReport {
        lhs_energy: sup + int_v,
        lhs_integral: int_u,
        rhs,
        ratio_energy: ratio(sup + int_v),
        ratio_integral: ratio(int_u),
    }
}

/// Discrete `X`-norm of raw samples, matching [`Trajectory::x_norm`].
pub fn x_norm_samples(sys: &FemSystem, dt: f64, u: &[Vec<f64>], v: &[Vec<f64>], a: &[Vec<f64>]) -> Result<f64> {
    let w = trapezoid_weights(u.len(), dt);
    let lap_u = laplacian_norms(sys, u)?;
    let lap_v = laplacian_norms(sys, v)?;
    let mut total = 0.0;
    for n in 0..u.len() {
        let piece = lap_u[n].powi(2)
            + lap_v[n].powi(2)
            + sys.mass().quadratic(&u[n])
            + sys.mass().quadratic(&v[n])
            + sys.mass().quadratic(&a[n]);
        total += w[n] * piece;
    }
    Ok(total.max(0.0).sqrt())
}

/// Columns per block solve in [`laplacian_norms`].
const LAPLACIAN_BLOCK: usize = 32;

/// `‖M⁻¹S x‖_M` for every field, solving in blocks of columns.
pub(crate) fn laplacian_norms(sys: &FemSystem, fields: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = sys.dim();
    if n == 0 {
        return Ok(vec![0.0; fields.len()]);
    }
    let factor = sys.mass_factor()?;
    let mut out = Vec::with_capacity(fields.len());
    let mut block = Vec::with_capacity(n * LAPLACIAN_BLOCK);
    for chunk in fields.chunks(LAPLACIAN_BLOCK) {
        block.clear();
        for x in chunk {
            block.extend(sys.operator().mul_vec(x));
        }
        factor.solve_block_in_place(&mut block, chunk.len());
        out.extend(block.chunks(n).map(|g| sys.mass().quadratic(g).max(0.0).sqrt()));
    }
    Ok(out)
}
