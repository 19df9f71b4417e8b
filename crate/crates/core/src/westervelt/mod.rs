//! Westervelt equation `u_tt − c²Δu − νΔu_t = α u u_tt + α u_t² + f` by a
//! fixed-point iteration on the linear damped wave solver and by Newton's
//! method per time step.

mod constants;
mod newton;
mod picard;

use std::fmt::Write as _;

pub use constants::{estimate_constants, ConstantEstimates};
pub use newton::{newton_step_solve, NewtonRun, DEGENERACY_THRESHOLD};
pub use picard::{picard_solve, PicardOptions};

use crate::error::{Error, Result};
use crate::wave::{Trajectory, WaveParams};

/// Wave parameters plus the nonlinearity coefficient. The Robin
/// coefficient and σ weight live in the assembled system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WesterveltParams {
    pub wave: WaveParams,
    pub alpha: f64,
}

impl WesterveltParams {
    pub fn validate(&self) -> Result<()> {
        self.wave.validate()?;
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha = {} must be non-negative", self.alpha)));
        }
        Ok(())
    }
}

/// Nodal samples of `α(u u_tt + u_t²)` at each grid time.
pub fn nonlinear_source(traj: &Trajectory, alpha: f64) -> Vec<Vec<f64>> {
    nonlinear_samples(&traj.u, &traj.v, &traj.a, alpha)
}

pub(crate) fn nonlinear_samples(u: &[Vec<f64>], v: &[Vec<f64>], a: &[Vec<f64>], alpha: f64) -> Vec<Vec<f64>> {
    (0..u.len())
        .map(|n| {
            u[n].iter()
                .zip(&a[n])
                .zip(&v[n])
                .map(|((u, a), v)| alpha * (u * a + v * v))
                .collect()
        })
        .collect()
}

/// Outcome of the fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    /// X-norm of `v_{k+1} − v_k` for each iterate.
    pub corrections: Vec<f64>,
    pub converged: bool,
    /// X-norm of the linear solution `u*`.
    pub linear_x_norm: f64,
    /// X-norm of the returned solution.
    pub final_x_norm: f64,
    /// Empirical constants when supplied.
    pub constants: Option<ConstantEstimates>,
    pub warnings: Vec<String>,
}

impl ContractionReport {
    /// `correction_k / correction_{k−1}`, starting at the second iterate.
    pub fn ratios(&self) -> Vec<f64> {
        self.corrections.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// `iter,correction_norm,ratio` rows followed by a summary line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,correction_norm,ratio\n");
        for (k, c) in self.corrections.iter().enumerate() {
            let ratio = if k == 0 {
                String::new()
            } else {
                (c / self.corrections[k - 1]).to_string()
            };
            writeln!(out, "{},{},{}", k + 1, c, ratio).expect("writing to a String cannot fail");
        }
        let (b, c_nu, r) = match &self.constants {
            Some(k) => (k.b.to_string(), k.c_nu.to_string(), k.r_star.to_string()),
            None => ("na".into(), "na".into(), "na".into()),
        };
        writeln!(out, "# B={b} C_nu={c_nu} r_star={r} converged={}", self.converged)
            .expect("writing to a String cannot fail");
        out
    }
}
