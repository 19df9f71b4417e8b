use crate::error::{Error, Result};
use crate::fem::FemSystem;
use crate::linalg::{gmres, norm2, GmresOptions};
use crate::wave::{Forcing, LinearWaveSolver, Trajectory};

use super::WesterveltParams;

/// Smallest admissible `|1 − αu|` at any node.
pub const DEGENERACY_THRESHOLD: f64 = 0.1;

const NEWTON_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 25;

#[derive(Debug, Clone)]
pub struct NewtonRun {
    pub trajectory: Trajectory,
    /// Newton iterations used at each step (the first entry is the initial
    /// acceleration, which needs none).
    pub iterations: Vec<usize>,
}

fn check_degeneracy(alpha: f64, u: &[f64], step: usize) -> Result<()> {
    let worst = u.iter().map(|x| (1.0 - alpha * x).abs()).fold(f64::INFINITY, f64::min);
    if worst < DEGENERACY_THRESHOLD {
        return Err(Error::Degeneracy { step, value: worst });
    }
    Ok(())
}

/// Newmark in time with the nodal nonlinear residual
/// `M((1−αu)a) − αM(v²) + νSv + c²Su − Mf` solved by Newton at each step.
/// Linear systems use GMRES preconditioned by the linear Newmark matrix.
pub fn newton_step_solve(
    sys: &FemSystem,
    params: &WesterveltParams,
    u0: &[f64],
    u1: &[f64],
    forcing: Forcing<'_>,
) -> Result<NewtonRun> {
    params.validate()?;
    let wave = params.wave;
    let linear = LinearWaveSolver::new(sys, wave)?;
    let n = sys.dim();
    if u0.len() != n || u1.len() != n {
        return Err(Error::MeshMismatch("initial data do not match the system".into()));
    }
    let alpha = params.alpha;
    let times = wave.times();
    let dt = wave.step();
    let (beta, gamma) = (0.25, 0.5);
    let c2 = wave.c * wave.c;
    let m = sys.mass();
    let s = sys.operator();
    let data = forcing.discretize(sys, &times);
    let source_l2: Vec<f64> = data.iter().map(|d| d.1).collect();

    check_degeneracy(alpha, u0, 0)?;
    let v2: Vec<f64> = u1.iter().map(|x| alpha * x * x).collect();
    let mv2 = m.mul_vec(&v2);
    let su0 = s.mul_vec(u0);
    let su1 = s.mul_vec(u1);
    let rhs: Vec<f64> = (0..n)
        .map(|i| data[0].0[i] + mv2[i] - wave.nu * su1[i] - c2 * su0[i])
        .collect();
    let y = sys.mass_factor()?.solve(&rhs);
    let a0: Vec<f64> = y.iter().zip(u0).map(|(y, u)| y / (1.0 - alpha * u)).collect();

    let mut u = vec![u0.to_vec()];
    let mut v = vec![u1.to_vec()];
    let mut a = vec![a0];
    let mut iterations = vec![0];
    let stiff = wave.nu * gamma * dt + c2 * beta * dt * dt;
    for step in 1..times.len() {
        let (un, vn, an) = (&u[step - 1], &v[step - 1], &a[step - 1]);
        let u_pred: Vec<f64> = (0..n).map(|i| un[i] + dt * vn[i] + (0.5 - beta) * dt * dt * an[i]).collect();
        let v_pred: Vec<f64> = (0..n).map(|i| vn[i] + (1.0 - gamma) * dt * an[i]).collect();
        let load = &data[step].0;
        let state = |acc: &[f64]| -> (Vec<f64>, Vec<f64>) {
            (
                (0..n).map(|i| u_pred[i] + beta * dt * dt * acc[i]).collect(),
                (0..n).map(|i| v_pred[i] + gamma * dt * acc[i]).collect(),
            )
        };
        let residual = |acc: &[f64]| -> (Vec<f64>, f64) {
            let (uu, vv) = state(acc);
            let weighted: Vec<f64> = (0..n).map(|i| (1.0 - alpha * uu[i]) * acc[i] - alpha * vv[i] * vv[i]).collect();
            let inertia = m.mul_vec(&weighted);
            let elastic: Vec<f64> = s.mul_vec(&(0..n).map(|i| wave.nu * vv[i] + c2 * uu[i]).collect::<Vec<_>>());
            let r: Vec<f64> = (0..n).map(|i| inertia[i] + elastic[i] - load[i]).collect();
            let scale = norm2(&inertia) + norm2(&elastic) + norm2(load);
            (r, scale)
        };
        let mut acc = an.clone();
        let mut count = 0;
        loop {
            let (r, scale) = residual(&acc);
            let rn = norm2(&r);
            if rn <= NEWTON_TOL * scale || rn == 0.0 {
                break;
            }
            if count == MAX_NEWTON {
                return Err(Error::NonConvergence {
                    iterations: count,
                    residual: rn / scale,
                });
            }
            let (uu, vv) = state(&acc);
            let diag: Vec<f64> = (0..n)
                .map(|i| 1.0 - alpha * uu[i] - alpha * beta * dt * dt * acc[i] - 2.0 * alpha * gamma * dt * vv[i])
                .collect();
            let apply = |x: &[f64]| -> Vec<f64> {
                let scaled: Vec<f64> = x.iter().zip(&diag).map(|(x, d)| x * d).collect();
                let mut out = m.mul_vec(&scaled);
                let sx = s.mul_vec(x);
                out.iter_mut().zip(&sx).for_each(|(o, q)| *o += stiff * q);
                out
            };
            let neg: Vec<f64> = r.iter().map(|x| -x).collect();
            let mut delta = vec![0.0; n];
            gmres(
                apply,
                |x: &[f64]| linear.effective().solve(x),
                &neg,
                &mut delta,
                GmresOptions {
                    tolerance: 1e-13,
                    ..GmresOptions::default()
                },
            )?;
            acc.iter_mut().zip(&delta).for_each(|(x, d)| *x += d);
            count += 1;
        }
        let (u_next, v_next) = state(&acc);
        check_degeneracy(alpha, &u_next, step)?;
        u.push(u_next);
        v.push(v_next);
        a.push(acc);
        iterations.push(count);
    }
    let trajectory = Trajectory::new(sys, &wave, times, u, v, a, &source_l2)?;
    Ok(NewtonRun { trajectory, iterations })
}
