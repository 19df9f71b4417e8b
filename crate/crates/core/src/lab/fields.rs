use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point;

/// Closed-form field on the plane with its gradient.
pub trait TestField {
    fn value(&self, p: Point) -> f64;
    fn gradient(&self, p: Point) -> [f64; 2];
}

/// `Σ c · xⁱ yʲ` over `(i, j, c)` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial2 {
    pub terms: Vec<(u32, u32, f64)>,
}

impl Polynomial2 {
    pub fn new(terms: Vec<(u32, u32, f64)>) -> Self {
        Self { terms }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![(0, 0, c)])
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|&(i, j, _)| i + j).max().unwrap_or(0)
    }
}

fn pow(x: f64, k: u32) -> f64 {
    x.powi(k as i32)
}

impl TestField for Polynomial2 {
    fn value(&self, p: Point) -> f64 {
        self.terms.iter().map(|&(i, j, c)| c * pow(p.x, i) * pow(p.y, j)).sum()
    }

    fn gradient(&self, p: Point) -> [f64; 2] {
        let mut g = [0.0; 2];
        for &(i, j, c) in &self.terms {
            if i > 0 {
                g[0] += c * i as f64 * pow(p.x, i - 1) * pow(p.y, j);
            }
            if j > 0 {
                g[1] += c * j as f64 * pow(p.x, i) * pow(p.y, j - 1);
            }
        }
        g
    }
}

/// `count` polynomials of total degree `degree` with every coefficient
/// uniform on [−1, 1].
pub fn random_polynomials(count: usize, degree: u32, seed: u64) -> Vec<Polynomial2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut terms = Vec::new();
            for total in 0..=degree {
                for i in 0..=total {
                    terms.push((i, total - i, rng.random_range(-1.0..=1.0)));
                }
            }
            Polynomial2::new(terms)
        })
        .collect()
}
