use std::f64::consts::PI;

use approx::assert_relative_eq;
use prefractal::fem::*;
use prefractal::geometry::{IfsSystem, Point};
use prefractal::linalg::dot;
use prefractal::mesh::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square_mesh(spec: &BoundarySpec, h: f64) -> TaggedMesh {
    let d = build_domain(&unit_square(), spec, &IfsSystem::koch(), 0).unwrap();
    triangulate(&d, h).unwrap()
}

fn dirichlet_square(h: f64) -> FemSystem {
    assemble(&square_mesh(&BoundarySpec::uniform(BoundaryTag::Dirichlet, 4), h), 1.0, 1.0).unwrap()
}

fn sine(p: Point) -> f64 {
    (PI * p.x).sin() * (PI * p.y).sin()
}

#[test]
fn matrices_symmetric_and_definite() {
    let d = build_domain(&unit_square(), &BoundarySpec::square_default(), &IfsSystem::koch(), 2).unwrap();
    let sys = assemble(&triangulate(&d, 1.0 / 9.0).unwrap(), 2.0, 0.5625).unwrap();
    for m in [sys.mass(), sys.stiffness(), sys.robin(), sys.operator()] {
        assert!(m.asymmetry() <= 1e-12 * m.max_abs());
    }
    assert!(sys.warnings().is_empty());
    assert!(sys.operator_factor().is_ok());
    assert!(sys.mass_factor().is_ok() && sys.stiffness_factor().is_ok());
}

#[test]
fn robin_mass_total_is_weighted_length() {
    let d = build_domain(&unit_square(), &BoundarySpec::uniform(BoundaryTag::Robin, 4), &IfsSystem::koch(), 1).unwrap();
    let sys = assemble(&triangulate(&d, 1.0 / 3.0).unwrap(), 1.0, 0.75).unwrap();
    let ones = vec![1.0; sys.dim()];
    assert_relative_eq!(sys.robin().quadratic(&ones), 0.75 * d.perimeter(), max_relative = 1e-12);
    assert_relative_eq!(sys.mass().quadratic(&ones), d.area(), max_relative = 1e-12);
}

#[test]
fn singular_configuration_warned_and_reported() {
    let mesh = square_mesh(&BoundarySpec::uniform(BoundaryTag::Neumann, 4), 0.25);
    let sys = assemble(&mesh, 0.0, 1.0).unwrap();
    assert_eq!(sys.warnings().len(), 1);
    let err = solve_poisson(&sys, &vec![1.0; mesh.num_nodes()]).unwrap_err();
    assert!(err.to_string().contains("no Dirichlet"), "{err}");
    assert!(assemble(&mesh, -1.0, 1.0).is_err());
}

#[test]
fn manufactured_poisson_solution() {
    let sys = dirichlet_square(1.0 / 64.0);
    let f = sys.interpolate_nodal(|p| 2.0 * PI * PI * sine(p));
    let u = solve_poisson(&sys, &f).unwrap();
    let nodal = sys.expand(&u);
    let err = sys
        .mesh()
        .nodes()
        .iter()
        .zip(&nodal)
        .map(|(&p, &v)| (v - sine(p)).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-2, "{err}");

    let zero = solve_poisson(&sys, &vec![0.0; f.len()]).unwrap();
    assert!(zero.iter().all(|&v| v == 0.0));
    let f2: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
    let u2 = solve_poisson(&sys, &f2).unwrap();
    for (a, b) in u.iter().zip(&u2) {
        assert!((2.0 * a - b).abs() <= 1e-10 * 2.0 * a.abs().max(1e-3));
    }

    // Galerkin orthogonality against an arbitrary discrete test vector.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v: Vec<f64> = (0..sys.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let su = sys.operator().mul_vec(&u);
    let mf = sys.load_nodal(&f);
    let defect: f64 = v.iter().zip(su.iter().zip(&mf)).map(|(a, (s, m))| a * (s - m)).sum();
    assert!(defect.abs() <= 1e-9 * dot(&v, &mf).abs().max(1.0), "{defect}");
}

#[test]
fn p1_order_two_in_l2() {
    let coarse = square_mesh(&BoundarySpec::uniform(BoundaryTag::Dirichlet, 4), 1.0 / 32.0);
    let fine = coarse.refine();
    let mut errs = Vec::new();
    for mesh in [coarse, fine] {
        let sys = assemble(&mesh, 1.0, 1.0).unwrap();
        let f = sys.interpolate_nodal(|p| 2.0 * PI * PI * sine(p));
        let u = sys.expand(&solve_poisson(&sys, &f).unwrap());
        errs.push(l2_error_nodal(&sys, &u, sine));
    }
    let ratio = errs[0] / errs[1];
    assert!((3.5..=4.5).contains(&ratio), "{errs:?} ratio {ratio}");
}

#[test]
fn dirichlet_square_spectrum() {
    let sys = dirichlet_square(1.0 / 64.0);
    let basis = solve_eigen(&sys, 5).unwrap();
    let l = &basis.values;
    assert!((l[0] / (2.0 * PI * PI) - 1.0).abs() < 0.01, "{l:?}");
    assert!((l[1] / (5.0 * PI * PI) - 1.0).abs() < 0.01, "{l:?}");
    assert!((l[2] / (5.0 * PI * PI) - 1.0).abs() < 0.01, "{l:?}");
    for i in 0..5 {
        let si = sys.operator().mul_vec(&basis.vectors[i]);
        for j in 0..5 {
            let m = sys.mass().bilinear(&basis.vectors[i], &basis.vectors[j]);
            assert!((m - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
            let s = dot(&si, &basis.vectors[j]);
            let target = if i == j { l[i] } else { 0.0 };
            assert!((s - target).abs() <= 1e-6 * l[i], "{i} {j} {s}");
        }
    }
    assert!(l.windows(2).all(|w| w[0] <= w[1]) && l[0] > 0.0);

    let n = norms(&sys, &basis.vectors[0]).unwrap();
    assert_relative_eq!(n.v_norm * n.v_norm, l[0], max_relative = 1e-9);
    assert_relative_eq!(n.laplacian_l2, l[0], max_relative = 1e-8);
    assert_relative_eq!(n.l2, 1.0, max_relative = 1e-9);
}

#[test]
fn eigenvalues_do_not_increase_under_refinement() {
    let coarse = square_mesh(&BoundarySpec::square_default(), 1.0 / 8.0);
    let fine = coarse.refine();
    let a = solve_eigen(&assemble(&coarse, 1.0, 1.0).unwrap(), 5).unwrap();
    let b = solve_eigen(&assemble(&fine, 1.0, 1.0).unwrap(), 5).unwrap();
    for k in 0..5 {
        assert!(b.values[k] <= a.values[k] * (1.0 + 1e-10), "{k}: {} > {}", b.values[k], a.values[k]);
    }
}

#[test]
fn robin_penalty_limit() {
    let h = 1.0 / 32.0;
    let dir = solve_eigen(&dirichlet_square(h), 1).unwrap().values[0];
    let mesh = square_mesh(&BoundarySpec::uniform(BoundaryTag::Robin, 4), h);
    let pen = solve_eigen(&assemble(&mesh, 1e6, 1.0).unwrap(), 1).unwrap().values[0];
    assert!((pen / dir - 1.0).abs() < 0.02, "{pen} vs {dir}");
}

#[test]
fn poincare_constants() {
    let sys = dirichlet_square(1.0 / 32.0);
    let c = poincare_constant(&sys).unwrap();
    assert!((c / (1.0 / (2.0f64).sqrt() / PI) - 1.0).abs() < 0.01, "{c}");

    let mut spec = BoundarySpec::uniform(BoundaryTag::Neumann, 4);
    spec.pieces[3] = BoundaryPiece::straight(BoundaryTag::Dirichlet);
    let coarse = square_mesh(&spec, 1.0 / 64.0);
    let slab = poincare_constant(&assemble(&coarse, 1.0, 1.0).unwrap()).unwrap();
    assert!((slab / (2.0 / PI) - 1.0).abs() < 0.05, "{slab}");

    let c8 = poincare_constant(&assemble(&square_mesh(&spec, 1.0 / 8.0), 1.0, 1.0).unwrap()).unwrap();
    let c16 = poincare_constant(&assemble(&square_mesh(&spec, 1.0 / 8.0).refine(), 1.0, 1.0).unwrap()).unwrap();
    assert!(c16 >= c8 * (1.0 - 1e-12), "{c8} {c16}");

    let none = assemble(&square_mesh(&BoundarySpec::uniform(BoundaryTag::Robin, 4), 0.25), 1.0, 1.0).unwrap();
    assert!(poincare_constant(&none).is_err());
}

#[test]
fn zero_field_norms() {
    let sys = dirichlet_square(0.25);
    let n = norms(&sys, &vec![0.0; sys.dim()]).unwrap();
    assert_eq!((n.l2, n.h1, n.v_norm, n.laplacian_l2), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn embedding_ratio_diagnostics() {
    let sys = dirichlet_square(1.0 / 16.0);
    let a = embedding_ratios(&sys, 4, 11).unwrap();
    let b = embedding_ratios(&sys, 4, 11).unwrap();
    assert_eq!(a, b);
    assert!(a.l6_ratio_max.is_finite() && a.linf_ratio_max.is_finite());
    assert!(a.l6_ratio_max > 0.0 && a.linf_ratio_max > 0.0);

    let w = solve_eigen(&sys, 1).unwrap();
    let first = embedding_ratios_for(&sys, &[sys.expand(&w.vectors[0])]).unwrap();
    assert!(first.l6_ratio_max.is_finite() && first.l6_ratio_max > 0.0);

    let fine = assemble(&sys.mesh().refine(), 1.0, 1.0).unwrap();
    let finer = embedding_ratios_for(&fine, &[fine.expand(&solve_eigen(&fine, 1).unwrap().vectors[0])]).unwrap();
    assert!((finer.l6_ratio_max / first.l6_ratio_max - 1.0).abs() < 0.2);
    assert!((finer.linf_ratio_max / first.linf_ratio_max - 1.0).abs() < 0.2);
}

#[test]
fn embedding_ratios_uniform_over_koch_levels() {
    let ifs = IfsSystem::koch();
    let mut ratios = Vec::new();
    for m in 0..=4 {
        let d = build_domain(&unit_square(), &BoundarySpec::square_default(), &ifs, m).unwrap();
        let h = (1.0 / 16.0f64).min(d.min_edge());
        let sys = assemble(&triangulate(&d, h).unwrap(), 1.0, 0.75f64.powi(m as i32)).unwrap();
        let w = solve_eigen(&sys, 1).unwrap();
        ratios.push(embedding_ratios_for(&sys, &[sys.expand(&w.vectors[0])]).unwrap());
    }
    for r in &ratios[1..] {
        assert!(r.l6_ratio_max <= 2.0 * ratios[0].l6_ratio_max);
        assert!(r.linf_ratio_max <= 2.0 * ratios[0].linf_ratio_max);
    }
}

#[test]
fn reference_element_examples() {
    let p = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
    let k = element_stiffness(&p);
    assert_eq!(k[0], [1.0, -0.5, -0.5]);
    let e = edge_mass(0.6);
    assert_relative_eq!(e[0][0], 0.2, epsilon = 1e-15);
    assert_relative_eq!(e[1][0], 0.1, epsilon = 1e-15);
}

#[test]
fn triplet_export_sorted() {
    let sys = dirichlet_square(0.5);
    let text = sys.operator().to_triplet_text();
    let rows: Vec<(usize, usize)> = text
        .lines()
        .map(|l| {
            let mut it = l.split_whitespace();
            (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
        })
        .collect();
    assert!(rows.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(rows.len(), sys.operator().nnz());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn v_norm_identity_and_coercivity(seed in 0u64..1000, a in 0.0f64..5.0) {
        let mesh = square_mesh(&BoundarySpec::square_default(), 0.25);
        let sys = assemble(&mesh, a, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..sys.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = norms(&sys, &u).unwrap();
        let boundary = sys.robin().quadratic(&u);
        let lhs = n.v_norm * n.v_norm;
        let rhs = n.h1 * n.h1 - n.l2 * n.l2 + a * boundary;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1.0));
        let l1 = solve_eigen(&sys, 1).unwrap().values[0];
        prop_assert!(lhs >= l1 * n.l2 * n.l2 * (1.0 - 1e-9));
    }
}
