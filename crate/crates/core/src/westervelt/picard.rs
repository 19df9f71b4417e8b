use crate::error::{Error, Result};
use crate::fem::FemSystem;
use crate::wave::{x_norm_samples, Forcing, LinearWaveSolver, Trajectory};

use super::{nonlinear_samples, ConstantEstimates, ContractionReport, WesterveltParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Absolute tolerance on the X-norm of successive corrections.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 50,
        }
    }
}

/// Consecutive growths of the correction norm treated as divergence.
const GROWTH_LIMIT: usize = 3;

/// Splits `u = u* + v` with `u*` the linear solution and iterates
/// `v_{k+1} = L⁻¹ Φ(u* + v_k)` from `v₀ = 0`, reusing one factorization.
/// `constants`, when given, are copied into the report and used for the
/// smallness warning.
pub fn picard_solve(
    sys: &FemSystem,
    params: &WesterveltParams,
    u0: &[f64],
    u1: &[f64],
    forcing: Forcing<'_>,
    opts: PicardOptions,
    constants: Option<ConstantEstimates>,
) -> Result<(Trajectory, ContractionReport)> {
    params.validate()?;
    let solver = LinearWaveSolver::new(sys, params.wave)?;
    let linear = solver.integrate(u0, u1, forcing)?;
    let dt = linear.dt();
    let steps = linear.len();
    let n = sys.dim();
    let zero = vec![0.0; n];

    let mut warnings = Vec::new();
    let linear_x_norm = linear.x_norm();
    if let Some(k) = &constants {
        if linear_x_norm > k.r_star {
            warnings.push(format!(
                "linear solution X-norm {linear_x_norm} exceeds the empirical radius r* = {}",
                k.r_star
            ));
        }
    }

    let mut v_u = vec![zero.clone(); steps];
    let mut v_v = vec![zero.clone(); steps];
    let mut v_a = vec![zero.clone(); steps];
    let mut corrections: Vec<f64> = Vec::new();
    let mut growths = 0;
    let mut phi = nonlinear_samples(&linear.u, &linear.v, &linear.a, params.alpha);
    for iteration in 1..=opts.max_iterations {
        let next = solver.integrate_fields(&zero, &zero, Forcing::Samples(&phi))?;
        let correction = x_norm_samples(
            sys,
            dt,
            &diff(&next.u, &v_u),
            &diff(&next.v, &v_v),
            &diff(&next.a, &v_a),
        )?;
        if let Some(&prev) = corrections.last() {
            growths = if correction > prev { growths + 1 } else { 0 };
        }
        corrections.push(correction);
        v_u = next.u;
        v_v = next.v;
        v_a = next.a;
        if correction <= opts.tolerance {
            let source: Vec<f64> = linear.norms.iter().map(|n| n.source_l2).collect();
            let combined = Trajectory::new(
                sys,
                &params.wave,
                linear.times.clone(),
                add(&linear.u, &v_u),
                add(&linear.v, &v_v),
                add(&linear.a, &v_a),
                &source,
            )?;
            let report = ContractionReport {
                corrections,
                converged: true,
                linear_x_norm,
                final_x_norm: combined.x_norm(),
                constants,
                warnings,
            };
            return Ok((combined, report));
        }
        if growths >= GROWTH_LIMIT || !correction.is_finite() {
            return Err(Error::Divergence {
                iteration,
                norms: corrections,
            });
        }
        phi = nonlinear_samples(&add(&linear.u, &v_u), &add(&linear.v, &v_v), &add(&linear.a, &v_a), params.alpha);
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residual: corrections.last().copied().unwrap_or(f64::NAN),
    })
}

fn diff(new: &[Vec<f64>], old: &[Vec<f64>]) -> Vec<Vec<f64>> {
    new.iter()
        .zip(old)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect())
        .collect()
}

fn add(base: &[Vec<f64>], extra: &[Vec<f64>]) -> Vec<Vec<f64>> {
    base.iter()
        .zip(extra)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}
