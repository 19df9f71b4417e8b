use crate::error::{Error, Result};
use crate::fem::{solve_eigen, FemSystem};
use crate::linalg::dot;
use crate::wave::{trapezoid_weights, Forcing, Trajectory};
use crate::westervelt::WesterveltParams;

/// Discrete weak-form residual and the size of the terms it balances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoscoResidual {
    pub value: f64,
    /// Trapezoidal sum of the absolute values of the individual terms.
    pub scale: f64,
}

impl MoscoResidual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.abs()
        } else {
            self.value.abs() / self.scale
        }
    }
}

/// `Fₘ[u, φ]`: the trapezoidal time integral of
/// `φᵀ(M u_tt + c²A u + νA u_t + c²aσR u + νaσR u_t − αM(u u_tt) − αM(u_t²) − M f)`
/// with nodal products. `phi` holds one free-dof vector per time of `traj`.
pub fn mosco_residual(
    sys: &FemSystem,
    params: &WesterveltParams,
    traj: &Trajectory,
    phi: &[Vec<f64>],
    forcing: Forcing<'_>,
) -> Result<MoscoResidual> {
    let n = sys.dim();
    let steps = traj.len();
    if phi.len() != steps {
        return Err(Error::MeshMismatch(format!(
            "test trajectory has {} times, solution has {steps}",
            phi.len()
        )));
    }
    if phi.iter().chain(&traj.u).chain(&traj.v).chain(&traj.a).any(|x| x.len() != n) {
        return Err(Error::MeshMismatch(format!("fields must have {n} free dofs")));
    }
    let (c2, nu, alpha) = (params.wave.c * params.wave.c, params.wave.nu, params.alpha);
    let a = sys.robin_coefficient();
    let loads = forcing.discretize(sys, &traj.times);
    let w = trapezoid_weights(steps, traj.dt());
    let (mut value, mut scale) = (0.0, 0.0);
    for k in 0..steps {
        let (u, v, acc, p) = (&traj.u[k], &traj.v[k], &traj.a[k], &phi[k]);
        let mp = sys.mass().mul_vec(p);
        let ap = sys.stiffness().mul_vec(p);
        let rp = sys.robin().mul_vec(p);
        let nonlinear: Vec<f64> = (0..n).map(|i| u[i] * acc[i] + v[i] * v[i]).collect();
        let terms = [
            dot(&mp, acc),
            c2 * dot(&ap, u),
            nu * dot(&ap, v),
            c2 * a * dot(&rp, u),
            nu * a * dot(&rp, v),
            -alpha * dot(&mp, &nonlinear),
            -dot(p, &loads[k].0),
        ];
        value += w[k] * terms.iter().sum::<f64>();
        scale += w[k] * terms.iter().map(|t| t.abs()).sum::<f64>();
    }
    Ok(MoscoResidual { value, scale })
}

/// Test trajectories `wₖ(x)·θ(t)` for the first `modes` eigenfunctions of
/// the level operator and `θ ∈ {1, t, sin t}`, sampled at `times`.
pub fn test_trajectories(sys: &FemSystem, times: &[f64], modes: usize) -> Result<Vec<Vec<Vec<f64>>>> {
    let basis = solve_eigen(sys, modes.min(sys.dim()))?;
    let profiles: [fn(f64) -> f64; 3] = [|_| 1.0, |t| t, f64::sin];
    let mut out = Vec::with_capacity(basis.len() * profiles.len());
    for w in &basis.vectors {
        for theta in profiles {
            out.push(times.iter().map(|&t| w.iter().map(|x| x * theta(t)).collect()).collect());
        }
    }
    Ok(out)
}
