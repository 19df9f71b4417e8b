//! Strongly damped wave equation `u_tt − c²Δu − νΔu_t = f` with mixed
//! boundary conditions: exact-in-time spectral Galerkin and Newmark FEM.

mod newmark;
mod spectral;
mod trajectory;

pub use newmark::{implicit_time_integrate, LinearWaveSolver};
pub use spectral::{propagate_mode, solve_mode, spectral_galerkin_solve, GalerkinModeState};
pub use trajectory::{
    apriori_check, energy, trapezoid_weights, x_norm_samples, y_norm, AprioriReport, Energy, Forcing, StepNorms, Trajectory,
};

use crate::error::{Error, Result};

/// Relative energy below which a source-free run may stop early.
pub const QUIESCENT_ENERGY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    pub c: f64,
    pub nu: f64,
    pub t_final: f64,
    pub dt: f64,
    /// Stop once the total energy drops below `QUIESCENT_ENERGY · E(0)`;
    /// honoured only for source-free runs.
    pub early_stop: bool,
}

impl WaveParams {
    pub fn new(c: f64, nu: f64, t_final: f64, dt: f64) -> Self {
        Self {
            c,
            nu,
            t_final,
            dt,
            early_stop: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.c) {
            return Err(Error::InvalidParameter(format!("c = {} must be positive", self.c)));
        }
        if !ok(self.nu) {
            return Err(Error::InvalidParameter(format!("nu = {} must be positive", self.nu)));
        }
        if !ok(self.dt) || !ok(self.t_final) || self.dt > self.t_final * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < dt <= T, got dt = {} and T = {}",
                self.dt, self.t_final
            )));
        }
        Ok(())
    }

    /// Number of steps; `dt` is shrunk to `T / steps` when it does not
    /// divide the horizon.
    pub fn steps(&self) -> usize {
        let ratio = self.t_final / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) {
            rounded.max(1.0) as usize
        } else {
            ratio.ceil() as usize
        }
    }

    pub fn step(&self) -> f64 {
        self.t_final / self.steps() as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.steps();
        let h = self.step();
        (0..=n).map(|k| k as f64 * h).collect()
    }
}
