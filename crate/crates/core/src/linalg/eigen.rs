use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::factor::SpdFactor;
use super::sparse::{dot, norm2, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Relative residual `‖K w − λ M w‖ / ‖K w‖` required of every
    /// requested pair.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Guard vectors carried beyond the requested count.
    pub guard: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 500,
            guard: 8,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// M-orthonormal.
    pub vectors: Vec<Vec<f64>>,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

/// Smallest `count` eigenpairs of `K w = λ M w` with both matrices SPD, by
/// block inverse iteration with Rayleigh–Ritz projection. `factor` must be
/// a factorization of `k`.
pub fn smallest_eigenpairs(
    k: &CsrMatrix,
    factor: &SpdFactor,
    m: &CsrMatrix,
    count: usize,
    opts: EigenOptions,
) -> Result<EigenPairs> {
    let n = k.nrows();
    if count == 0 || count > n {
        return Err(Error::InvalidParameter(format!(
            "requested {count} eigenpairs of a {n}-dimensional problem"
        )));
    }
    let p = (count + opts.guard).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut block: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    m_orthonormalize(m, &mut block, &mut rng);

    let mut residuals = vec![f64::INFINITY; count];
    for iteration in 1..=opts.max_iterations {
        let mut flat: Vec<f64> = Vec::with_capacity(n * p);
        for v in &block {
            flat.extend(m.mul_vec(v));
        }
        factor.solve_block_in_place(&mut flat, p);
        block = flat.chunks(n).map(<[f64]>::to_vec).collect();
        m_orthonormalize(m, &mut block, &mut rng);

        let kb: Vec<Vec<f64>> = block.iter().map(|v| k.mul_vec(v)).collect();
        let proj = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&block[i], &kb[j]) + dot(&block[j], &kb[i])));
        let eig = SymmetricEigen::new(proj);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let rotate = |vs: &[Vec<f64>]| -> Vec<Vec<f64>> {
            order
                .iter()
                .map(|&c| {
                    let mut out = vec![0.0; n];
                    for (i, v) in vs.iter().enumerate() {
                        let w = eig.eigenvectors[(i, c)];
                        out.iter_mut().zip(v).for_each(|(o, x)| *o += w * x);
                    }
                    out
                })
                .collect()
        };
        block = rotate(&block);
        let kx = rotate(&kb);
        let values: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();

        for i in 0..count {
            let mx = m.mul_vec(&block[i]);
            let r: Vec<f64> = kx[i].iter().zip(&mx).map(|(a, b)| a - values[i] * b).collect();
            residuals[i] = norm2(&r) / norm2(&kx[i]).max(f64::MIN_POSITIVE);
        }
        if residuals.iter().all(|&r| r <= opts.tolerance) {
            // Fix the sign so the largest-magnitude entry is positive.
            let mut vectors: Vec<Vec<f64>> = block.into_iter().take(count).collect();
            for v in &mut vectors {
                let pivot = v.iter().fold(0.0f64, |a, &b| if b.abs() > a.abs() { b } else { a });
                if pivot < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            return Ok(EigenPairs {
                values: values[..count].to_vec(),
                vectors,
                iterations: iteration,
                residuals,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residual: residuals.iter().cloned().fold(0.0, f64::max),
    })
}

/// Modified Gram–Schmidt in the M inner product, applied twice. Vectors
/// that collapse are replaced by fresh random ones.
fn m_orthonormalize(m: &CsrMatrix, block: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    let n = m.nrows();
    for j in 0..block.len() {
        let mut attempts = 0;
        loop {
            let original = m.quadratic(&block[j]).sqrt();
            for _ in 0..2 {
                for i in 0..j {
                    let c = m.bilinear(&block[i], &block[j]);
                    let (head, tail) = block.split_at_mut(j);
                    tail[0].iter_mut().zip(&head[i]).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = m.quadratic(&block[j]).sqrt();
            if norm > 1e-10 * original && norm > 0.0 {
                block[j].iter_mut().for_each(|x| *x /= norm);
                break;
            }
            attempts += 1;
            assert!(attempts < 16, "cannot extend an M-orthonormal block in dimension {n}");
            block[j] = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        }
    }
}
