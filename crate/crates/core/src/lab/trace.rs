use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fields::TestField;
use super::report::{spread, strictly_decreasing, ConvergenceReport, Verdict};
use super::{StudyConfig, UNIFORMITY_BOUND};
use crate::error::{Error, Result};
use crate::geometry::{measure_density_ratio, sigma, Affine, IfsSystem, Point, PrefractalCurve};

/// Largest number of cells the measure oracle visits; the oracle depth is
/// lowered until the level fits.
pub const ORACLE_CELL_BUDGET: u128 = 1 << 24;
/// Levels added on top of the finest studied level for the oracle.
const ORACLE_EXTRA_LEVELS: usize = 4;
/// Differences below this count as converged in the Cauchy verdict.
const CAUCHY_FLOOR: f64 = 1e-12;
/// Allowed gap between the finest level and the oracle reference.
const REFERENCE_TOL: f64 = 1e-3;
/// Depth of the backward recursion for tail barycenters.
const TAIL_DEPTH: usize = 48;

/// Per-level affine maps and cell weights `dᵢ / D` for the walk.
struct Walk {
    maps: Vec<Vec<(Affine, f64)>>,
}

impl Walk {
    fn new(ifs: &IfsSystem, depth: usize) -> Result<Self> {
        let maps = (0..depth)
            .map(|j| {
                let fam = &ifs.families()[ifs.family_at(j)?];
                let d = fam.contraction_sum(2);
                Ok(fam.maps.iter().map(|s| (s.to_affine(), s.ratio() / d)).collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self { maps })
    }

    /// Calls `f(ψ_w, μ(ψ_w K))` for every word `w` of full depth, in
    /// head-to-tail order.
    fn for_each(&self, f: &mut dyn FnMut(&Affine, f64)) {
        self.visit(0, &Affine::identity(), 1.0, f);
    }

    fn visit(&self, j: usize, outer: &Affine, weight: f64, f: &mut dyn FnMut(&Affine, f64)) {
        if j == self.maps.len() {
            f(outer, weight);
            return;
        }
        for (map, w) in &self.maps[j] {
            self.visit(j + 1, &outer.compose(map), weight * w, f);
        }
    }
}

/// Neumaier compensated sum.
#[derive(Default)]
struct Sum {
    total: f64,
    carry: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.total + x;
        if self.total.abs() >= x.abs() {
            self.carry += (self.total - t) + x;
        } else {
            self.carry += (x - t) + self.total;
        }
        self.total = t;
    }

    fn value(&self) -> f64 {
        self.total + self.carry
    }
}

/// Barycenter of the measure generated from level `start` on, in base
/// coordinates. Levels past the end of a finite environment fall back to
/// the chord midpoint.
fn tail_barycenter(ifs: &IfsSystem, start: usize) -> Point {
    let (a, b) = ifs.base();
    let mut bary = Point::from((a.coords + b.coords) * 0.5);
    for j in (start..start + TAIL_DEPTH).rev() {
        let Ok(k) = ifs.family_at(j) else {
            bary = Point::from((a.coords + b.coords) * 0.5);
            continue;
        };
        let fam = &ifs.families()[k];
        let d = fam.contraction_sum(2);
        let mut next = nalgebra::Vector2::zeros();
        for s in &fam.maps {
            next += s.apply(bary).coords * (s.ratio() / d);
        }
        bary = Point::from(next);
    }
    bary
}

/// `σₘ Σ_segments ∫ g ds` over `Kₘ` with two-point Gauss on each segment,
/// divided by the base length so that `g ≡ 1` integrates to 1.
pub fn trace_integral(ifs: &IfsSystem, g: &dyn Fn(Point) -> f64, m: usize) -> Result<f64> {
    let (a, b) = ifs.base();
    let walk = Walk::new(ifs, m)?;
    let off = 0.5 / 3f64.sqrt();
    let mut total = Sum::default();
    walk.for_each(&mut |map, _| {
        let p = map.apply(a);
        let q = map.apply(b);
        let len = (q - p).norm();
        let g1 = g(p + (q - p) * (0.5 - off));
        let g2 = g(p + (q - p) * (0.5 + off));
        total.add(0.5 * (g1 + g2) * len);
    });
    Ok(sigma(ifs, m)? * total.value() / ifs.base_length())
}

/// `Σ_{|w| = depth} μ(ψ_w K) · g(ψ_w(b))` where `b` is the barycenter of
/// the tail measure, so affine `g` is integrated exactly.
pub fn measure_integral(ifs: &IfsSystem, g: &dyn Fn(Point) -> f64, depth: usize) -> Result<f64> {
    let walk = Walk::new(ifs, depth)?;
    let anchor = tail_barycenter(ifs, depth);
    let mut total = Sum::default();
    walk.for_each(&mut |map, w| total.add(w * g(map.apply(anchor))));
    Ok(total.value())
}

/// Deepest level not above `wanted` whose cell count fits the budget.
fn oracle_depth(ifs: &IfsSystem, wanted: usize) -> Result<usize> {
    let mut depth = wanted;
    while depth > 0 && ifs.segment_count(depth)? > ORACLE_CELL_BUDGET {
        depth -= 1;
    }
    Ok(depth)
}

/// `Iₘ` per level against the cell-sum reference at depth
/// `max level + 4` (capped by [`ORACLE_CELL_BUDGET`]).
pub fn trace_convergence_study(ifs: &IfsSystem, g: &dyn Fn(Point) -> f64, levels: &[usize]) -> Result<ConvergenceReport> {
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("levels {levels:?} must be strictly increasing")));
    }
    let finest = *levels.last().expect("non-empty");
    let depth = oracle_depth(ifs, finest + ORACLE_EXTRA_LEVELS)?;
    let reference = measure_integral(ifs, g, depth)?;
    let mut report = ConvergenceReport::new(
        "trace convergence",
        &["sigma", "trace_integral", "reference_gap", "successive_difference"],
    );
    let mut values = Vec::with_capacity(levels.len());
    for &m in levels {
        values.push(trace_integral(ifs, g, m)?);
    }
    for (k, &m) in levels.iter().enumerate() {
        let diff = values.get(k + 1).map_or(f64::NAN, |next| (next - values[k]).abs());
        report.push_row(m, vec![sigma(ifs, m)?, values[k], (values[k] - reference).abs(), diff]);
    }
    report.scalars.push(("reference".into(), reference));
    report.scalars.push(("oracle_depth".into(), depth as f64));

    let diffs: Vec<f64> = levels
        .iter()
        .zip(report.column("successive_difference").expect("column"))
        .filter(|(&m, d)| m >= 2 && !d.is_nan())
        .map(|(_, d)| d)
        .collect();
    let settled = diffs.iter().all(|&d| d <= CAUCHY_FLOOR);
    report.verdicts.push(Verdict::new(
        "successive differences strictly decreasing from level 2",
        settled || strictly_decreasing(&diffs),
        diffs.iter().enumerate().map(|(k, &d)| (format!("d{k}"), d)).collect(),
    ));
    let gap = (values[values.len() - 1] - reference).abs();
    report.verdicts.push(Verdict::new(
        "finest level within 1e-3 of the cell-sum reference",
        gap <= REFERENCE_TOL,
        vec![("gap".into(), gap), ("reference".into(), reference)],
    ));
    Ok(report)
}

/// Gauss–Legendre nodes and weights on [−1, 1] (Golub–Welsch).
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], 2.0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `‖u‖²_{H¹}` over the box `[lo, hi]` by tensor Gauss–Legendre.
fn h1_norm_sq_box(u: &dyn TestField, lo: Point, hi: Point, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let (hx, hy) = (0.5 * (hi.x - lo.x), 0.5 * (hi.y - lo.y));
    let mut total = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        for (yj, wj) in x.iter().zip(&w) {
            let p = Point::new(lo.x + hx * (xi + 1.0), lo.y + hy * (yj + 1.0));
            let v = u.value(p);
            let g = u.gradient(p);
            total += wi * wj * (v * v + g[0] * g[0] + g[1] * g[1]);
        }
    }
    total * hx * hy
}

/// `σₘ‖Tr u‖²_{L²(Kₘ)} / ‖u‖²_{H¹(Ω*)}` per level and field, where `Kₘ`
/// is the prefractal part of the level domain boundary and Ω* the bounding
/// box of all levels.
pub fn uniform_trace_ratio(study: &StudyConfig, fields: &[&dyn TestField]) -> Result<ConvergenceReport> {
    if fields.is_empty() {
        return Err(Error::InvalidParameter("no test fields".into()));
    }
    let (lo, hi) = study.bounding_box()?;
    let (gx, gw) = gauss_legendre(5);
    let names: Vec<String> = (0..fields.len()).map(|k| format!("ratio_{k}")).collect();
    let cols: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut report = ConvergenceReport::new("uniform trace ratio", &cols);
    let h1: Vec<f64> = fields.iter().map(|u| h1_norm_sq_box(*u, lo, hi, 10)).collect();
    for &m in &study.levels {
        let domain = study.domain(m)?;
        let s = study.sigma(m)?;
        let mut row = Vec::with_capacity(fields.len());
        for (u, norm) in fields.iter().zip(&h1) {
            let mut trace = 0.0;
            for (i, &piece) in domain.pieces().iter().enumerate() {
                if study.boundary.pieces[piece].prefractal.is_none() {
                    continue;
                }
                let (p, q) = domain.edge(i);
                let len = (q - p).norm();
                for (t, w) in gx.iter().zip(&gw) {
                    let v = u.value(p + (q - p) * (0.5 * (t + 1.0)));
                    trace += 0.5 * w * len * v * v;
                }
            }
            row.push(s * trace / norm);
        }
        report.push_row(m, row);
    }
    report.scalars.push(("omega_star_area".into(), (hi.x - lo.x) * (hi.y - lo.y)));
    let mut worst: f64 = 0.0;
    for name in &names {
        let col = report.column(name).expect("column");
        let sp = spread(&col);
        worst = worst.max(sp);
    }
    report.verdicts.push(Verdict::new(
        "trace ratio max/min across levels at most 10 for every field",
        worst <= UNIFORMITY_BOUND,
        vec![("worst_spread".into(), worst)],
    ));
    Ok(report)
}

/// Disks for the density diagnostic: centers uniform along `K₃`, radii
/// uniform on [0.05, 0.5] times the base length.
pub fn random_density_samples(ifs: &IfsSystem, count: usize, seed: u64) -> Result<Vec<(Point, f64)>> {
    let (a, b) = ifs.base();
    let maps = ifs.level_maps(3)?;
    let scale = ifs.base_length();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let (map, _) = &maps[rng.random_range(0..maps.len())];
            let t: f64 = rng.random_range(0.0..=1.0);
            let (p, q) = (map.apply(a), map.apply(b));
            let r = scale * rng.random_range(0.05..=0.5);
            (p + (q - p) * t, r.min(1.0))
        })
        .collect())
}

/// Per-level maximum and mean of `σₘ λ₁(B ∩ Kₘ) / r` over `samples`.
pub fn measure_density_study(ifs: &IfsSystem, levels: &[usize], samples: &[(Point, f64)]) -> Result<ConvergenceReport> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no density samples".into()));
    }
    let mut report = ConvergenceReport::new("measure density", &["sigma", "max_ratio", "mean_ratio"]);
    for &m in levels {
        let curve = PrefractalCurve::generate(ifs, m)?;
        let ratios = measure_density_ratio(&curve, samples)?;
        let max = ratios.iter().map(|s| s.ratio).fold(0.0, f64::max);
        let mean = ratios.iter().map(|s| s.ratio).sum::<f64>() / ratios.len() as f64;
        report.push_row(m, vec![curve.sigma(), max, mean]);
    }
    let sp = spread(&report.column("max_ratio").expect("column"));
    report.verdicts.push(Verdict::new(
        "maximum density ratio max/min across levels at most 10",
        sp <= UNIFORMITY_BOUND,
        vec![("spread".into(), sp)],
    ));
    Ok(report)
}
