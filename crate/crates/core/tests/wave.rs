use std::f64::consts::PI;

use prefractal::fem::*;
use prefractal::geometry::{IfsSystem, Point};
use prefractal::mesh::*;
use prefractal::wave::*;

fn system(spec: &BoundarySpec, m: usize, h: f64) -> FemSystem {
    let d = build_domain(&unit_square(), spec, &IfsSystem::koch(), m).unwrap();
    let h = h.min(d.min_edge());
    assemble(&triangulate(&d, h).unwrap(), 1.0, 0.75f64.powi(m as i32)).unwrap()
}

fn dirichlet(h: f64) -> FemSystem {
    system(&BoundarySpec::uniform(BoundaryTag::Dirichlet, 4), 0, h)
}

fn sine(p: Point) -> f64 {
    (PI * p.x).sin() * (PI * p.y).sin()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn zero_data_zero_solution() {
    let sys = dirichlet(0.25);
    let z = vec![0.0; sys.dim()];
    let params = WaveParams::new(1.0, 0.5, 1.0, 0.1);
    let traj = implicit_time_integrate(&sys, &params, &z, &z, Forcing::Zero).unwrap();
    assert_eq!(traj.len(), 11);
    assert!(traj.u.iter().chain(&traj.v).chain(&traj.a).flatten().all(|&x| x == 0.0));
    let basis = solve_eigen(&sys, 3).unwrap();
    let spec = spectral_galerkin_solve(&sys, &basis, &params, &z, &z, Forcing::Zero).unwrap();
    assert!(spec.u.iter().flatten().all(|&x| x == 0.0));
    let report = apriori_check(&traj);
    assert_eq!(report.ratio_energy, None);
    assert_eq!(report.ratio_integral, None);
}

#[test]
fn energy_non_increasing_without_source() {
    for (spec, m) in [
        (BoundarySpec::uniform(BoundaryTag::Dirichlet, 4), 0),
        (BoundarySpec::square_default(), 2),
    ] {
        let sys = system(&spec, m, 1.0 / 16.0);
        let u0 = sys.interpolate(|p| p.x * (1.0 - p.x) * (p.y + 0.3).sin());
        let u1 = sys.interpolate(|p| (2.0 * p.x).cos() * p.y);
        let params = WaveParams::new(1.0, 0.05, 2.0, 0.01);
        let traj = implicit_time_integrate(&sys, &params, &u0, &u1, Forcing::Zero).unwrap();
        let e0 = traj.norms[0].energy.total;
        assert!(e0 > 0.0);
        for w in traj.norms.windows(2) {
            assert!(w[1].energy.total <= w[0].energy.total + 1e-10 * e0, "m={m} t={}", w[1].t);
        }
        assert_eq!(traj.u[0], u0);
        assert_eq!(traj.v[0], u1);
    }
}

#[test]
fn spectral_and_newmark_agree_at_second_order() {
    let sys = dirichlet(1.0 / 16.0);
    let basis = solve_eigen(&sys, 10).unwrap();
    let u0 = basis.vectors[0].clone();
    let u1: Vec<f64> = basis.vectors[2].iter().map(|x| 0.5 * x).collect();
    let mut errs = Vec::new();
    for dt in [0.1, 0.05, 0.025] {
        let params = WaveParams::new(1.0, 0.05, 1.0, dt);
        let a = spectral_galerkin_solve(&sys, &basis, &params, &u0, &u1, Forcing::Zero).unwrap();
        let b = implicit_time_integrate(&sys, &params, &u0, &u1, Forcing::Zero).unwrap();
        let diff: Vec<f64> = a.u.last().unwrap().iter().zip(b.u.last().unwrap()).map(|(x, y)| x - y).collect();
        errs.push(l2_norm(&sys, &diff));
    }
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!((3.5..=4.5).contains(&r), "{errs:?}");
    }
}

#[test]
fn steady_state_is_the_poisson_solution() {
    let sys = dirichlet(1.0 / 16.0);
    let lambda1 = solve_eigen(&sys, 1).unwrap().values[0];
    let nu = 0.1;
    let t_final = 50.0 / (nu * lambda1);
    let params = WaveParams::new(1.0, nu, t_final, 0.05);
    let f = |_t: f64, p: Point| 1.0 + p.x;
    let z = vec![0.0; sys.dim()];
    let traj = implicit_time_integrate(&sys, &params, &z, &z, Forcing::Function(&f)).unwrap();
    let poisson = solve_poisson(&sys, &sys.interpolate_nodal(|p| f(0.0, p))).unwrap();
    let diff: Vec<f64> = traj.u.last().unwrap().iter().zip(&poisson).map(|(a, b)| a - b).collect();
    let rel = l2_norm(&sys, &diff) / l2_norm(&sys, &poisson);
    assert!(rel < 0.01, "{rel}");
}

#[test]
fn eigenmode_potential_energy() {
    let sys = dirichlet(1.0 / 8.0);
    let basis = solve_eigen(&sys, 3).unwrap();
    let params = WaveParams::new(1.5, 0.2, 1.0, 0.1);
    for k in 0..3 {
        let e = energy(&sys, &params, &basis.vectors[k], &vec![0.0; sys.dim()]);
        assert!((e.potential - 0.5 * 2.25 * basis.values[k]).abs() < 1e-9 * basis.values[k]);
        assert_eq!(e.kinetic, 0.0);
    }
    let z = vec![0.0; sys.dim()];
    assert_eq!(energy(&sys, &params, &z, &z).total, 0.0);
}

#[test]
fn trajectories_are_linear_in_the_data() {
    let sys = system(&BoundarySpec::square_default(), 1, 1.0 / 9.0);
    let u0 = sys.interpolate(|p| p.x * (1.0 - p.x));
    let u1 = sys.interpolate(|p| p.y);
    let f = |t: f64, p: Point| (t + p.x).sin();
    let f3 = |t: f64, p: Point| 3.0 * (t + p.x).sin();
    let params = WaveParams::new(1.0, 0.3, 1.0, 0.05);
    let a = implicit_time_integrate(&sys, &params, &u0, &u1, Forcing::Function(&f)).unwrap();
    let scale = |v: &[f64]| v.iter().map(|x| 3.0 * x).collect::<Vec<_>>();
    let b = implicit_time_integrate(&sys, &params, &scale(&u0), &scale(&u1), Forcing::Function(&f3)).unwrap();
    for (x, y) in a.u.iter().zip(&b.u) {
        let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max_diff(&scale(x), y) <= 1e-10 * 3.0 * peak.max(1e-12));
    }
    let ra = apriori_check(&a);
    let rb = apriori_check(&b);
    let (ea, eb) = (ra.ratio_energy.unwrap(), rb.ratio_energy.unwrap());
    assert!((ea / eb - 1.0).abs() < 1e-10);
    assert!((ra.ratio_integral.unwrap() / rb.ratio_integral.unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn apriori_ratio_mesh_stable() {
    let coarse = dirichlet(1.0 / 16.0);
    let fine = assemble(&coarse.mesh().refine(), 1.0, 1.0).unwrap();
    let params = WaveParams::new(1.0, 0.5, 1.0, 0.02);
    let ratios: Vec<(f64, f64)> = [coarse, fine]
        .iter()
        .map(|sys| {
            let u0 = sys.interpolate(sine);
            let u1 = sys.interpolate(|p| 0.5 * sine(p));
            let f = |t: f64, p: Point| t * p.x;
            let traj = implicit_time_integrate(sys, &params, &u0, &u1, Forcing::Function(&f)).unwrap();
            let r = apriori_check(&traj);
            (r.ratio_energy.unwrap(), r.ratio_integral.unwrap())
        })
        .collect();
    assert!((ratios[0].0 / ratios[1].0 - 1.0).abs() < 0.2, "{ratios:?}");
    assert!((ratios[0].1 / ratios[1].1 - 1.0).abs() < 0.2, "{ratios:?}");
}

#[test]
fn cached_norms_finite_and_csv_shape() {
    let sys = system(&BoundarySpec::square_default(), 2, 1.0 / 9.0);
    let u0 = sys.interpolate(|p| p.x * (1.0 - p.x) * p.y);
    let z = vec![0.0; sys.dim()];
    let params = WaveParams::new(1.0, 0.5, 0.5, 0.05);
    let traj = implicit_time_integrate(&sys, &params, &u0, &z, Forcing::Zero).unwrap();
    assert!(traj.norms.iter().all(|n| n.laplacian_l2_u.is_finite() && n.energy.total.is_finite()));
    assert!(traj.x_norm().is_finite() && traj.x_norm() > 0.0);
    let csv = traj.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,l2_u,vnorm_u,l2_v,energy_total,laplacian_l2_u"));
    assert_eq!(lines.count(), 11);
    assert_eq!(csv, implicit_time_integrate(&sys, &params, &u0, &z, Forcing::Zero).unwrap().to_csv());
}

#[test]
fn early_stop_when_quiescent() {
    let sys = dirichlet(0.25);
    let u0 = sys.interpolate(sine);
    let z = vec![0.0; sys.dim()];
    let mut params = WaveParams::new(1.0, 1.0, 200.0, 0.1);
    params.early_stop = true;
    let traj = implicit_time_integrate(&sys, &params, &u0, &z, Forcing::Zero).unwrap();
    assert!(traj.len() < 2001);
    let last = traj.norms.last().unwrap().energy.total;
    assert!(last < 1e-12 * traj.norms[0].energy.total);
}

#[test]
fn parameters_validated() {
    let sys = dirichlet(0.5);
    let z = vec![0.0; sys.dim()];
    for params in [
        WaveParams::new(0.0, 1.0, 1.0, 0.1),
        WaveParams::new(1.0, 0.0, 1.0, 0.1),
        WaveParams::new(1.0, 1.0, 1.0, 2.0),
    ] {
        assert!(implicit_time_integrate(&sys, &params, &z, &z, Forcing::Zero).is_err());
    }
    let p = WaveParams::new(1.0, 1.0, 1.0, 0.3);
    assert_eq!(p.steps(), 4);
    assert!((p.step() - 0.25).abs() < 1e-15);
}
