use crate::error::{Error, Result};
use crate::fem::{FemSystem, SpectralBasis};
use crate::linalg::dot;

use super::trajectory::{Forcing, Trajectory};
use super::WaveParams;

/// Coefficient `d(t)` of one eigenmode and its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GalerkinModeState {
    pub lambda: f64,
    pub d: f64,
    pub dd: f64,
}

/// `e^{μτ}·(C, S)` for the propagator of `e'' + p e' + q e = 0`, where
/// `μ = −p/2`, `z = p²/4 − q`, `C = cosh(√z τ)` and `S = sinh(√z τ)/√z`
/// (continued analytically through `z ≤ 0`).
fn damped_pair(p: f64, q: f64, tau: f64) -> (f64, f64) {
    let mu = -0.5 * p;
    let z = 0.25 * p * p - q;
    let x = z * tau * tau;
    if x.abs() < 1e-3 {
        let c = 1.0 + x / 2.0 + x * x / 24.0 + x * x * x / 720.0;
        let s = tau * (1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0);
        let e = (mu * tau).exp();
        (e * c, e * s)
    } else if z > 0.0 {
        let w = z.sqrt();
        // μ + w without cancellation.
        let r1 = -q / (0.5 * p + w);
        let r2 = mu - w;
        let (e1, e2) = ((r1 * tau).exp(), (r2 * tau).exp());
        (0.5 * (e1 + e2), (e1 - e2) / (2.0 * w))
    } else {
        let w = (-z).sqrt();
        let e = (mu * tau).exp();
        (e * (w * tau).cos(), e * (w * tau).sin() / w)
    }
}

/// Advances `d'' + νλ d' + c²λ d = g` by `tau` exactly when `g` is linear
/// from `g0` to `g1` over the step.
pub fn propagate_mode(state: GalerkinModeState, c: f64, nu: f64, g0: f64, g1: f64, tau: f64) -> GalerkinModeState {
    let p = nu * state.lambda;
    let q = c * c * state.lambda;
    let slope = (g1 - g0) / tau;
    let b = slope / q;
    let a = (g0 - p * b) / q;
    let (e0, e0d) = (state.d - a, state.dd - b);
    let (ec, es) = damped_pair(p, q, tau);
    let mu = -0.5 * p;
    let e = (ec - mu * es) * e0 + es * e0d;
    let ed = -q * es * e0 + (ec + mu * es) * e0d;
    GalerkinModeState {
        lambda: state.lambda,
        d: e + a + b * tau,
        dd: ed + b,
    }
}

/// One mode over a uniform grid; `forcing[n]` is the projected source at
/// `times[n]`. `ν = 0` is allowed here as an undamped diagnostic.
pub fn solve_mode(
    lambda: f64,
    c: f64,
    nu: f64,
    d0: f64,
    d1: f64,
    times: &[f64],
    forcing: &[f64],
) -> Result<Vec<GalerkinModeState>> {
    if !(c * c * lambda > 0.0) || !(nu * lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mode with λ = {lambda}, c = {c}, ν = {nu} needs c²λ > 0 and νλ ≥ 0"
        )));
    }
    let mut out = vec![GalerkinModeState { lambda, d: d0, dd: d1 }];
    for n in 1..times.len() {
        let prev = out[n - 1];
        out.push(propagate_mode(prev, c, nu, forcing[n - 1], forcing[n], times[n] - times[n - 1]));
    }
    Ok(out)
}

/// Galerkin solution `Σ dₖ(t) wₖ` over the modes in `basis`, each mode
/// propagated exactly with piecewise-linear forcing. The stored initial
/// state is the M-orthogonal projection of `(u0, u1)` onto the basis.
pub fn spectral_galerkin_solve(
    sys: &FemSystem,
    basis: &SpectralBasis,
    params: &WaveParams,
    u0: &[f64],
    u1: &[f64],
    forcing: Forcing<'_>,
) -> Result<Trajectory> {
    params.validate()?;
    let n = sys.dim();
    if u0.len() != n || u1.len() != n || basis.vectors.iter().any(|w| w.len() != n) {
        return Err(Error::MeshMismatch("basis or initial data do not match the system".into()));
    }
    for &lambda in &basis.values {
        if !(params.nu * lambda > 0.0) || !(params.c * params.c * lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue {lambda} gives a non-positive νλ or c²λ"
            )));
        }
    }
    let times = params.times();
    let data = forcing.discretize(sys, &times);
    let mu0 = sys.mass().mul_vec(u0);
    let mu1 = sys.mass().mul_vec(u1);
    let steps = times.len();
    let mut u = vec![vec![0.0; n]; steps];
    let mut v = vec![vec![0.0; n]; steps];
    let mut a = vec![vec![0.0; n]; steps];
    let c2 = params.c * params.c;
    for (lambda, w) in basis.values.iter().zip(&basis.vectors) {
        let g: Vec<f64> = data.iter().map(|(load, _)| dot(load, w)).collect();
        let states = solve_mode(*lambda, params.c, params.nu, dot(&mu0, w), dot(&mu1, w), &times, &g)?;
        for (k, st) in states.iter().enumerate() {
            let acc = g[k] - params.nu * lambda * st.dd - c2 * lambda * st.d;
            for i in 0..n {
                u[k][i] += st.d * w[i];
                v[k][i] += st.dd * w[i];
                a[k][i] += acc * w[i];
            }
        }
    }
    let source_l2: Vec<f64> = data.iter().map(|d| d.1).collect();
    Trajectory::new(sys, params, times, u, v, a, &source_l2)
}
