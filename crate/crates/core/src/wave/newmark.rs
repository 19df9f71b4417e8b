use crate::error::{Error, Result};
use crate::fem::FemSystem;
use crate::linalg::SpdFactor;

use super::trajectory::{energy, Forcing, Trajectory};
use super::{WaveParams, QUIESCENT_ENERGY};

/// Raw Newmark samples.
#[derive(Debug, Clone)]
pub(crate) struct Fields {
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
    pub source_l2: Vec<f64>,
}

/// Average-acceleration Newmark (β = 1/4, γ = 1/2) for
/// `M a + νS v + c²S u = M f`, with the effective matrix factored once.
#[derive(Debug)]
pub struct LinearWaveSolver<'s> {
    sys: &'s FemSystem,
    params: WaveParams,
    effective: SpdFactor,
}

impl<'s> LinearWaveSolver<'s> {
    pub fn new(sys: &'s FemSystem, params: WaveParams) -> Result<Self> {
        params.validate()?;
        let dt = params.step();
        let coeff = params.nu * dt / 2.0 + params.c * params.c * dt * dt / 4.0;
        let k = sys.mass().add_scaled(coeff, sys.operator());
        let effective = SpdFactor::new(&k, "Newmark matrix M + (ν dt/2 + c² dt²/4) S")?;
        Ok(Self { sys, params, effective })
    }

    pub fn system(&self) -> &'s FemSystem {
        self.sys
    }

    pub fn params(&self) -> &WaveParams {
        &self.params
    }

    /// The factored `M + (ν dt/2 + c² dt²/4) S`.
    pub fn effective(&self) -> &SpdFactor {
        &self.effective
    }

    pub fn integrate(&self, u0: &[f64], u1: &[f64], forcing: Forcing<'_>) -> Result<Trajectory> {
        let f = self.integrate_fields(u0, u1, forcing)?;
        Trajectory::new(self.sys, &self.params, f.times, f.u, f.v, f.a, &f.source_l2)
    }

    /// Same as [`Self::integrate`] without the per-step norms.
    pub(crate) fn integrate_fields(&self, u0: &[f64], u1: &[f64], forcing: Forcing<'_>) -> Result<Fields> {
        let sys = self.sys;
        let p = &self.params;
        let n = sys.dim();
        if u0.len() != n || u1.len() != n {
            return Err(Error::MeshMismatch(format!(
                "initial data have {} and {} values for {n} free dofs",
                u0.len(),
                u1.len()
            )));
        }
        let times = p.times();
        let dt = p.step();
        let c2 = p.c * p.c;
        let data = forcing.discretize(sys, &times);
        let source_l2: Vec<f64> = data.iter().map(|d| d.1).collect();
        let source_free = matches!(forcing, Forcing::Zero) || source_l2.iter().all(|&s| s == 0.0);

        let s = sys.operator();
        let su0 = s.mul_vec(u0);
        let su1 = s.mul_vec(u1);
        let rhs0: Vec<f64> = (0..n).map(|i| data[0].0[i] - p.nu * su1[i] - c2 * su0[i]).collect();
        let a0 = sys.mass_factor()?.solve(&rhs0);

        let mut u = vec![u0.to_vec()];
        let mut v = vec![u1.to_vec()];
        let mut a = vec![a0];
        let e0 = energy(sys, p, u0, u1).total;
        let mut kept = times.len();
        for step in 1..times.len() {
            let (un, vn, an) = (&u[step - 1], &v[step - 1], &a[step - 1]);
            let v_pred: Vec<f64> = (0..n).map(|i| vn[i] + 0.5 * dt * an[i]).collect();
            let u_pred: Vec<f64> = (0..n).map(|i| un[i] + dt * vn[i] + 0.25 * dt * dt * an[i]).collect();
            let sv = s.mul_vec(&v_pred);
            let su = s.mul_vec(&u_pred);
            let mut next: Vec<f64> = (0..n).map(|i| data[step].0[i] - p.nu * sv[i] - c2 * su[i]).collect();
            self.effective.solve_in_place(&mut next);
            let u_next: Vec<f64> = (0..n).map(|i| u_pred[i] + 0.25 * dt * dt * next[i]).collect();
            let v_next: Vec<f64> = (0..n).map(|i| v_pred[i] + 0.5 * dt * next[i]).collect();
            let quiet = p.early_stop && source_free && energy(sys, p, &u_next, &v_next).total < QUIESCENT_ENERGY * e0;
            u.push(u_next);
            v.push(v_next);
            a.push(next);
            if quiet {
                kept = step + 1;
                break;
            }
        }
        Ok(Fields {
            times: times[..kept].to_vec(),
            u,
            v,
            a,
            source_l2: source_l2[..kept].to_vec(),
        })
    }
}

/// Newmark trajectory of the linear damped wave equation.
pub fn implicit_time_integrate(
    sys: &FemSystem,
    params: &WaveParams,
    u0: &[f64],
    u1: &[f64],
    forcing: Forcing<'_>,
) -> Result<Trajectory> {
    LinearWaveSolver::new(sys, *params)?.integrate(u0, u1, forcing)
}
