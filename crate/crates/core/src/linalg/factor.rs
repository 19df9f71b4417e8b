use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{MatMut, Par, Side};

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

static SEQUENTIAL: Once = Once::new();

/// Sparse Cholesky factorization of a symmetric positive definite matrix.
pub struct SpdFactor {
    llt: Llt<usize, f64>,
    n: usize,
}

impl std::fmt::Debug for SpdFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpdFactor").field("n", &self.n).finish()
    }
}

impl SpdFactor {
    /// Factors `a`, reading only its lower triangle. `what` names the
    /// operator in error messages.
    pub fn new(a: &CsrMatrix, what: &str) -> Result<Self> {
        // Sequential kernels keep results bit-identical across runs.
        SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::Singular(format!("{what} is not square")));
        }
        if n == 0 {
            return Err(Error::Singular(format!("{what} has no free degrees of freedom")));
        }
        let entries: Vec<Triplet<usize, usize, f64>> = a
            .triplets()
            .into_iter()
            .filter(|&(i, j, _)| i >= j)
            .map(|(row, col, val)| Triplet { row, col, val })
            .collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &entries)
            .map_err(|e| Error::Singular(format!("{what}: {e:?}")))?;
        let llt = mat
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Singular(format!("{what} is not positive definite ({e})")))?;
        Ok(Self { llt, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        assert_eq!(rhs.len(), self.n);
        let view = MatMut::from_column_major_slice_mut(rhs, self.n, 1);
        self.llt.solve_in_place(view);
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solves for several right-hand sides stored column-major in `block`.
    pub fn solve_block_in_place(&self, block: &mut [f64], ncols: usize) {
        assert_eq!(block.len(), self.n * ncols);
        let view = MatMut::from_column_major_slice_mut(block, self.n, ncols);
        self.llt.solve_in_place(view);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t);
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x);
        let f = SpdFactor::new(&a, "test").unwrap();
        let y = f.solve(&b);
        let err = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn indefinite_rejected() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(SpdFactor::new(&a, "test").is_err());
    }
}
