use super::sparse::{dot, norm2};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iterations: usize,
    /// Relative tolerance on the preconditioned residual.
    pub tolerance: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 40,
            max_iterations: 400,
            tolerance: 1e-12,
        }
    }
}

/// Left-preconditioned restarted GMRES for `A x = b`, starting from `x`.
/// Returns the number of inner iterations used.
pub fn gmres<A, P>(apply: A, precondition: P, b: &[f64], x: &mut [f64], opts: GmresOptions) -> Result<usize>
where
    A: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&[f64]) -> Vec<f64>,
{
    let pb = precondition(b);
    let scale = norm2(&pb).max(f64::MIN_POSITIVE);
    let mut total = 0;
    while total < opts.max_iterations {
        let ax = apply(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let r = precondition(&r);
        let beta = norm2(&r);
        if beta / scale <= opts.tolerance {
            return Ok(total);
        }
        let m = opts.restart.min(opts.max_iterations - total).max(1);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let mut w = precondition(&apply(&basis[k]));
            for (i, v) in basis.iter().enumerate() {
                h[i][k] = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(wj, vj)| *wj -= h[i][k] * vj);
            }
            h[k + 1][k] = norm2(&w);
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            let hk1 = h[k + 1][k];
            h[k][k] = cs[k] * h[k][k] + sn[k] * hk1;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            total += 1;
            let lucky = hk1 <= 1e-14 * beta;
            if g[k + 1].abs() / scale <= opts.tolerance || lucky {
                break;
            }
            basis.push(w.iter().map(|v| v / hk1).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, v) in y.iter().zip(&basis) {
            x.iter_mut().zip(v).for_each(|(xj, vj)| *xj += yi * vj);
        }
        if k_used == 0 {
            break;
        }
    }
    let ax = apply(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let final_res = norm2(&precondition(&r)) / scale;
    if final_res <= opts.tolerance {
        return Ok(total);
    }
    Err(Error::NonConvergence {
        iterations: total,
        residual: final_res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonsymmetric_system() {
        let n = 30;
        let apply = |x: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let mut s = 4.0 * x[i];
                    if i > 0 {
                        s -= 1.5 * x[i - 1];
                    }
                    if i + 1 < n {
                        s -= 0.5 * x[i + 1];
                    }
                    s
                })
                .collect()
        };
        let truth: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
        let b = apply(&truth);
        let mut x = vec![0.0; n];
        let opts = GmresOptions {
            restart: 7,
            ..Default::default()
        };
        gmres(apply, |r: &[f64]| r.iter().map(|v| v / 4.0).collect(), &b, &mut x, opts).unwrap();
        let err = x.iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }
}
