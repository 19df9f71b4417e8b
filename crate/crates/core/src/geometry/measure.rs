use super::curve::PrefractalCurve;
use super::ifs::IfsSystem;
use super::similitude::Point;
use crate::error::{Error, Result};

/// `D_a = Σᵢ dᵢⁿ⁻¹` for every family `a` of the system, in family order.
pub fn contraction_sums(ifs: &IfsSystem, n: u32) -> Vec<f64> {
    ifs.families().iter().map(|f| f.contraction_sum(n)).collect()
}

/// `σₘ = Π_{j<m} D_{ξⱼ}⁻¹` in ambient dimension two.
pub fn sigma(ifs: &IfsSystem, m: usize) -> Result<f64> {
    sigma_in_dimension(ifs, m, 2)
}

pub fn sigma_in_dimension(ifs: &IfsSystem, m: usize, n: u32) -> Result<f64> {
    let d = contraction_sums(ifs, n);
    if ifs.families().len() == 1 {
        return Ok(d[0].powi(-(m as i32)));
    }
    let mut s = 1.0;
    for j in 0..m {
        s /= d[ifs.family_at(j)?];
    }
    Ok(s)
}

/// Self-similar measure of the cell `ψ_w(K)`: `Π d_{wⱼ}ⁿ⁻¹ / Π D_{ξⱼ}`.
pub fn cell_measure(ifs: &IfsSystem, word: &[u8], n: u32) -> Result<f64> {
    let mut mu = 1.0;
    for (j, &letter) in word.iter().enumerate() {
        let fam = &ifs.families()[ifs.family_at(j)?];
        let map = fam.maps.get(letter as usize).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "word letter {} at position {} exceeds family size {}",
                letter as usize + 1,
                j + 1,
                fam.len()
            ))
        })?;
        mu *= map.ratio().powi(n as i32 - 1) / fam.contraction_sum(n);
    }
    Ok(mu)
}

/// `ln 4 / (p₁ ln l₁ + p₂ ln l₂)`, the dimension of a two-family Koch mixture
/// whose environment visits family `a` with asymptotic frequency `p_a`.
pub fn mixture_dimension(p: [f64; 2], l: [f64; 2]) -> Result<f64> {
    if p.iter().any(|&v| !(0.0..=1.0).contains(&v)) || ((p[0] + p[1]) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "frequencies {p:?} must be non-negative and sum to 1"
        )));
    }
    for (a, &la) in l.iter().enumerate() {
        if p[a] > 0.0 && !(la > 2.0 && la < 4.0) {
            return Err(Error::InvalidParameter(format!("l_{} = {la} outside (2, 4)", a + 1)));
        }
    }
    let denom: f64 = (0..2)
        .filter(|&a| p[a] > 0.0)
        .map(|a| p[a] * l[a].ln())
        .sum();
    Ok(4f64.ln() / denom)
}

/// Similarity dimension `s` of a single family: the root of `Σ dᵢˢ = 1`.
pub fn similarity_dimension(ifs: &IfsSystem) -> f64 {
    let ratios: Vec<f64> = ifs.families()[0].maps.iter().map(|m| m.ratio()).collect();
    let f = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Length of the part of segment `a -> b` inside the closed disk `B(c, r)`.
pub fn segment_disk_length(a: Point, b: Point, c: Point, r: f64) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return 0.0;
    }
    let f = a - c;
    let half_b = d.dot(&f);
    let cc = f.norm_squared() - r * r;
    let disc = half_b * half_b - len2 * cc;
    if disc <= 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let t0 = ((-half_b - sq) / len2).max(0.0);
    let t1 = ((-half_b + sq) / len2).min(1.0);
    if t1 <= t0 {
        0.0
    } else {
        (t1 - t0) * len2.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySample {
    pub center: Point,
    pub radius: f64,
    pub ratio: f64,
}

/// `σₘ λ₁(B(P, r) ∩ Kₘ) / r` for each `(P, r)`.
pub fn measure_density_ratio(curve: &PrefractalCurve, samples: &[(Point, f64)]) -> Result<Vec<DensitySample>> {
    samples
        .iter()
        .map(|&(center, radius)| {
            if !(radius > 0.0 && radius <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "sample radius {radius} outside (0, 1]"
                )));
            }
            let length: f64 = curve
                .segments()
                .map(|s| segment_disk_length(s.start, s.end, center, radius))
                .sum();
            Ok(DensitySample {
                center,
                radius,
                ratio: curve.sigma() * length / radius,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    /// Contraction sum of each family.
    pub d: Vec<f64>,
    /// `σₘ` for `m = 0..=level`.
    pub sigma_per_level: Vec<f64>,
    pub density: Vec<DensitySample>,
    pub dimension: f64,
}

/// Collects `D`, the `σ` table up to the curve's level, the requested
/// density samples and the dimension of the limit set. For mixtures the
/// dimension uses the empirical family frequencies of the environment.
pub fn measure_report(ifs: &IfsSystem, curve: &PrefractalCurve, samples: &[(Point, f64)]) -> Result<MeasureReport> {
    let sigma_per_level = (0..=curve.level())
        .map(|m| sigma(ifs, m))
        .collect::<Result<Vec<_>>>()?;
    let dimension = if ifs.is_mixture() {
        let env = &ifs.environment()[..curve.level().max(1).min(ifs.environment().len())];
        let n = env.len().max(1) as f64;
        let mut denom = 0.0;
        for (a, fam) in ifs.families().iter().enumerate() {
            let freq = env.iter().filter(|&&e| e == a).count() as f64 / n;
            denom += freq * (1.0 / fam.maps[0].ratio()).ln();
        }
        (ifs.families()[0].len() as f64).ln() / denom
    } else {
        similarity_dimension(ifs)
    };
    Ok(MeasureReport {
        d: contraction_sums(ifs, 2),
        sigma_per_level,
        density: measure_density_ratio(curve, samples)?,
        dimension,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn chord_through_center() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 0.0);
        assert_relative_eq!(segment_disk_length(a, b, Point::new(0.5, 0.0), 0.2), 0.4, epsilon = 1e-15);
        assert_eq!(segment_disk_length(a, b, Point::new(0.5, 0.5), 0.2), 0.0);
        assert_relative_eq!(segment_disk_length(a, b, Point::new(0.0, 0.0), 0.3), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn koch_dimension() {
        assert_relative_eq!(similarity_dimension(&IfsSystem::koch()), 4f64.ln() / 3f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(similarity_dimension(&IfsSystem::minkowski()), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn mixture_dimension_limits() {
        let pure = mixture_dimension([1.0, 0.0], [3.0, 3.5]).unwrap();
        assert_relative_eq!(pure, 4f64.ln() / 3f64.ln(), epsilon = 1e-14);
        let near_line = mixture_dimension([0.0, 1.0], [3.0, 4.0 - 1e-9]).unwrap();
        assert!(near_line > 1.0 && near_line - 1.0 < 1e-8);
        assert!(mixture_dimension([0.6, 0.6], [3.0, 3.0]).is_err());
    }
}
