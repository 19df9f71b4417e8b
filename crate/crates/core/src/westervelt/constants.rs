use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fem::FemSystem;
use crate::wave::{y_norm, Forcing, LinearWaveSolver, Trajectory};

use super::WesterveltParams;

/// Sampled lower bounds for the constants of the contraction argument.
/// All maxima are empirical; the true constants can only be larger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantEstimates {
    /// `max ‖g b_tt‖_Y` over X-normalized sample pairs.
    pub b1: f64,
    /// `max ‖g_t b_t‖_Y` over X-normalized sample pairs.
    pub b2: f64,
    pub b: f64,
    /// `max ‖u‖_X / ‖f‖_Y` over zero-data linear solves.
    pub c_nu: f64,
    /// `1/(8 B C_ν α)`, infinite when `α = 0`.
    pub r_star: f64,
    pub alpha: f64,
    pub trials: usize,
    pub seed: u64,
}

impl ConstantEstimates {
    /// `r* · 8 · B · C_ν · α`, which is 1 up to rounding when `α > 0`.
    pub fn consistency(&self) -> f64 {
        self.r_star * 8.0 * self.b * self.c_nu * self.alpha
    }
}

/// Sources `φ(x) sin(ωt)` with `φ` i.i.d. uniform on [−1, 1] at the free
/// dofs and `ω` uniform on [1, 2π], solved with zero initial data.
pub fn estimate_constants(
    sys: &FemSystem,
    params: &WesterveltParams,
    trials: usize,
    seed: u64,
) -> Result<ConstantEstimates> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let solver = LinearWaveSolver::new(sys, params.wave)?;
    let times = params.wave.times();
    let dt = params.wave.step();
    let n = sys.dim();
    let zero = vec![0.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c_nu: f64 = 0.0;
    let mut samples: Vec<(Trajectory, f64)> = Vec::with_capacity(trials);
    for _ in 0..trials {
        let phi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let omega = rng.random_range(1.0..=2.0 * PI);
        let f: Vec<Vec<f64>> = times
            .iter()
            .map(|t| phi.iter().map(|x| x * (omega * t).sin()).collect())
            .collect();
        let traj = solver.integrate(&zero, &zero, Forcing::Samples(&f))?;
        let fy = y_norm(sys, &f, dt);
        let x = traj.x_norm();
        if fy > 0.0 {
            c_nu = c_nu.max(x / fy);
        }
        samples.push((traj, x));
    }
    let mut b1: f64 = 0.0;
    let mut b2: f64 = 0.0;
    for (g, gx) in &samples {
        for (b, bx) in &samples {
            if *gx == 0.0 || *bx == 0.0 {
                continue;
            }
            let prod = |x: &[Vec<f64>], y: &[Vec<f64>]| -> Vec<Vec<f64>> {
                x.iter()
                    .zip(y)
                    .map(|(p, q)| p.iter().zip(q).map(|(a, b)| a * b).collect())
                    .collect()
            };
            let scale = gx * bx;
            b1 = b1.max(y_norm(sys, &prod(&g.u, &b.a), dt) / scale);
            b2 = b2.max(y_norm(sys, &prod(&g.v, &b.v), dt) / scale);
        }
    }
    let b = b1.max(b2);
    let r_star = if params.alpha == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (8.0 * b * c_nu * params.alpha)
    };
    Ok(ConstantEstimates {
        b1,
        b2,
        b,
        c_nu,
        r_star,
        alpha: params.alpha,
        trials,
        seed,
    })
}
