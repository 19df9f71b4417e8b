//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! to stderr (unbuffered, so it shows even when test output is captured).

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use prefractal::fem::*;
use prefractal::geometry::{sigma, IfsSystem, Point};
use prefractal::lab::*;
use prefractal::mesh::*;
use prefractal::wave::*;
use prefractal::westervelt::*;

const SEED: u64 = 20240601;

fn report(id: u32, name: &str, passed: bool, detail: &str) {
    let line = format!(
        "acceptance {id:>2} [{}] {name}: {detail}\n",
        if passed { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(passed, "criterion {id} failed: {detail}");
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x / target - 1.0).abs() <= rel
}

fn square(spec: &BoundarySpec, ifs: &IfsSystem, m: usize, h: f64, sigma_weight: f64) -> FemSystem {
    let d = build_domain(&unit_square(), spec, ifs, m).unwrap();
    assemble(&triangulate(&d, h).unwrap(), 1.0, sigma_weight).unwrap()
}

fn dirichlet_square(h: f64) -> FemSystem {
    square(&BoundarySpec::uniform(BoundaryTag::Dirichlet, 4), &IfsSystem::koch(), 0, h, 1.0)
}

fn sine(p: Point) -> f64 {
    (PI * p.x).sin() * (PI * p.y).sin()
}

#[test]
fn c01_sigma_tables() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for m in 0..=8 {
        let k = sigma(&IfsSystem::koch(), m).unwrap();
        let s = sigma(&IfsSystem::minkowski(), m).unwrap();
        worst = worst.max((k - 0.75f64.powi(m as i32)).abs());
        worst = worst.max((s - 0.5f64.powi(m as i32)).abs());
    }
    let elapsed = start.elapsed();
    report(
        1,
        "sigma tables",
        worst <= 1e-12 && elapsed < Duration::from_secs(1),
        &format!("max error {worst:e}, {elapsed:?}"),
    );
}

#[test]
fn c02_trace_convergence() {
    let start = Instant::now();
    let levels: Vec<usize> = (0..=8).collect();
    let mut const_err: f64 = 0.0;
    for ifs in [IfsSystem::koch(), IfsSystem::minkowski()] {
        for &m in &levels {
            const_err = const_err.max((trace_integral(&ifs, &|_| 1.0, m).unwrap() - 1.0).abs());
        }
    }
    let koch = IfsSystem::koch();
    let lin = trace_convergence_study(&koch, &|p| p.x, &levels).unwrap();
    let i8 = lin.column("trace_integral").unwrap()[8];
    let reference = lin.scalar("reference").unwrap();
    let quad = trace_convergence_study(&koch, &|p| p.x * p.x, &levels).unwrap();
    let diffs = quad.column("successive_difference").unwrap();
    let cauchy = strictly_decreasing(&diffs[2..8]);
    let elapsed = start.elapsed();
    let passed = const_err <= 1e-12
        && (i8 - 0.5).abs() <= 1e-3
        && (reference - 0.5).abs() <= 1e-3
        && (i8 - reference).abs() <= 1e-3
        && cauchy
        && elapsed < Duration::from_secs(10);
    report(
        2,
        "trace convergence",
        passed,
        &format!(
            "|I_m(1)-1| <= {const_err:e}, I_8(x) = {i8}, reference {reference}, differences m=2..7 decreasing: {cauchy}, {elapsed:?}"
        ),
    );
}

#[test]
fn c03_dirichlet_spectrum() {
    let start = Instant::now();
    let sys = dirichlet_square(1.0 / 64.0);
    let l = solve_eigen(&sys, 3).unwrap().values;
    let elapsed = start.elapsed();
    let passed = within(l[0], 2.0 * PI * PI, 0.01)
        && within(l[1], 5.0 * PI * PI, 0.01)
        && within(l[2], 5.0 * PI * PI, 0.01)
        && elapsed < Duration::from_secs(60);
    report(3, "Dirichlet spectrum at h = 1/64", passed, &format!("lambda = {l:?}, {elapsed:?}"));
}

#[test]
fn c04_p1_order() {
    let mut errs = Vec::new();
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        let sys = dirichlet_square(h);
        let f = sys.interpolate_nodal(|p| 2.0 * PI * PI * sine(p));
        let u = sys.expand(&solve_poisson(&sys, &f).unwrap());
        errs.push(l2_error_nodal(&sys, &u, sine));
    }
    let ratio = errs[0] / errs[1];
    report(
        4,
        "P1 L2 order",
        (3.5..=4.5).contains(&ratio),
        &format!("errors {errs:?}, ratio {ratio}"),
    );
}

#[test]
fn c05_dissipativity() {
    let mut worst: f64 = f64::NEG_INFINITY;
    for (spec, m) in [
        (BoundarySpec::uniform(BoundaryTag::Dirichlet, 4), 0),
        (BoundarySpec::square_default(), 2),
    ] {
        let sys = square(&spec, &IfsSystem::koch(), m, 1.0 / 16.0, 0.75f64.powi(m as i32));
        let u0 = sys.interpolate(|p| p.x * (1.0 - p.x) * (p.y + 0.3).sin());
        let u1 = sys.interpolate(|p| (2.0 * p.x).cos() * p.y);
        let params = WaveParams::new(1.0, 0.05, 2.0, 0.01);
        let traj = implicit_time_integrate(&sys, &params, &u0, &u1, Forcing::Zero).unwrap();
        let e0 = traj.norms[0].energy.total;
        for w in traj.norms.windows(2) {
            worst = worst.max((w[1].energy.total - w[0].energy.total) / e0);
        }
    }
    let sys = dirichlet_square(1.0 / 16.0);
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
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let passed = worst <= 1e-10 && ratios.iter().all(|r| (3.5..=4.5).contains(r));
    report(
        5,
        "damped-wave dissipativity",
        passed,
        &format!("max relative energy increase {worst:e}, dt-halving ratios {ratios:?}"),
    );
}

fn westervelt_fixture() -> FemSystem {
    square(&BoundarySpec::square_default(), &IfsSystem::koch(), 1, 1.0 / 9.0, 0.75)
}

fn bump(sys: &FemSystem, eps: f64) -> Vec<f64> {
    sys.interpolate(|p| eps * (PI * p.x).sin() * (1.0 - p.y))
}

#[test]
fn c06_westervelt_consistency() {
    let sys = westervelt_fixture();
    let z = vec![0.0; sys.dim()];
    let nonlinear = WesterveltParams {
        wave: WaveParams::new(1.0, 0.5, 1.0, 0.02),
        alpha: 1.0,
    };
    let linear = WesterveltParams { alpha: 0.0, ..nonlinear };
    let opts = PicardOptions::default();

    let f = |t: f64, p: Point| t * p.x;
    let u0 = bump(&sys, 0.3);
    let lin = implicit_time_integrate(&sys, &linear.wave, &u0, &z, Forcing::Function(&f)).unwrap();
    let (pic, _) = picard_solve(&sys, &linear, &u0, &z, Forcing::Function(&f), opts, None).unwrap();
    let alpha0 = lin
        .u
        .iter()
        .flatten()
        .zip(pic.u.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let small = bump(&sys, 0.1);
    let (traj, rep) = picard_solve(&sys, &nonlinear, &small, &z, Forcing::Zero, opts, None).unwrap();
    let ratios = rep.ratios();
    let spread_ratios = spread(&ratios);
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);

    let newton = newton_step_solve(&sys, &nonlinear, &small, &z, Forcing::Zero).unwrap();
    let d: Vec<Vec<f64>> = traj
        .u
        .iter()
        .zip(&newton.trajectory.u)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    let agreement = y_norm(&sys, &d, traj.dt());
    let dt = nonlinear.wave.step();

    let mut gaps = Vec::new();
    for eps in [0.1, 0.05] {
        let u0 = bump(&sys, eps);
        let l = implicit_time_integrate(&sys, &nonlinear.wave, &u0, &z, Forcing::Zero).unwrap();
        let (t, _) = picard_solve(&sys, &nonlinear, &u0, &z, Forcing::Zero, opts, None).unwrap();
        let d: Vec<Vec<f64>> = t.u.iter().zip(&l.u).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
        gaps.push(y_norm(&sys, &d, t.dt()));
    }
    let scaling = gaps[0] / gaps[1];

    let passed = alpha0 <= 1e-10
        && max_ratio < 1.0
        && spread_ratios <= 1.2
        && agreement <= 1e-6f64.max(dt * dt)
        && (3.5..=4.5).contains(&scaling);
    report(
        6,
        "Westervelt consistency",
        passed,
        &format!(
            "alpha=0 gap {alpha0:e}, Picard ratios in [{:.4}, {max_ratio:.4}], Picard-Newton {agreement:e}, quadratic scaling {scaling:.4}",
            max_ratio / spread_ratios
        ),
    );
}

#[test]
fn c07_r_star() {
    let sys = westervelt_fixture();
    let base = WesterveltParams {
        wave: WaveParams::new(0.5, 1.0, 2.0, 0.02),
        alpha: 1.0,
    };
    let k1 = estimate_constants(&sys, &base, 6, SEED).unwrap();
    let mut doubled = base;
    doubled.wave.nu = 2.0;
    let k2 = estimate_constants(&sys, &doubled, 6, SEED).unwrap();
    let exact = (k1.consistency() - 1.0).abs();
    let ratio = k2.c_nu / k1.c_nu;
    let passed = exact <= 4.0 * f64::EPSILON && (ratio - 0.5).abs() <= 0.3 * 0.5;
    report(
        7,
        "r* report",
        passed,
        &format!("|r* 8 B C alpha - 1| = {exact:e}, C_nu(2 nu)/C_nu(nu) = {ratio:.4}, r* = {}", k1.r_star),
    );
}

fn uniformity_csvs() -> (Vec<ConvergenceReport>, Vec<String>) {
    let mut reports = Vec::new();
    let mut notes = Vec::new();
    let polys = random_polynomials(10, 3, SEED);
    let fields: Vec<&dyn TestField> = polys.iter().map(|p| p as &dyn TestField).collect();
    for (name, ifs) in [("koch", IfsSystem::koch()), ("minkowski", IfsSystem::minkowski())] {
        let samples = random_density_samples(&ifs, 200, SEED).unwrap();
        let density = measure_density_study(&ifs, &(0..=6).collect::<Vec<_>>(), &samples).unwrap();
        let mut study = StudyConfig::new(ifs.clone());
        study.levels = (0..=6).collect();
        let trace = uniform_trace_ratio(&study, &fields).unwrap();
        study.levels = (0..=4).collect();
        study.mesh = MeshRule::Conforming {
            h_max: 1.0 / 16.0,
            h_min: 1.0 / 128.0,
        };
        let poincare = poincare_uniformity_study(&study).unwrap();
        notes.push(format!(
            "{name}: density spread {:.3}, trace spread {:.3}, Poincare spread {:.3}",
            spread(&density.column("max_ratio").unwrap()),
            trace.verdicts[0].evidence[0].1,
            spread(&poincare.column("poincare_constant").unwrap()),
        ));
        reports.extend([density, trace, poincare]);
    }
    (reports, notes)
}

#[test]
fn c08_uniformity() {
    let (reports, notes) = uniformity_csvs();
    let passed = reports.iter().all(|r| r.passed());
    report(8, "uniformity diagnostics", passed, &notes.join("; "));
}

#[test]
fn c09_solution_cauchy() {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut passed = true;
    for (name, ifs) in [("koch", IfsSystem::koch()), ("minkowski", IfsSystem::minkowski())] {
        let study = StudyConfig::new(ifs);
        let r = solution_convergence_study(&study).unwrap();
        let e: Vec<f64> = r.column("e").unwrap().into_iter().filter(|x| !x.is_nan()).collect();
        passed &= e.len() == 4 && strictly_decreasing(&e) && study.physics.wave.step() == 1e-2;
        notes.push(format!("{name} e_1..e_4 = {e:?}"));
    }
    let elapsed = start.elapsed();
    passed &= elapsed < Duration::from_secs(600);
    report(9, "solution Cauchy convergence", passed, &format!("{}; {elapsed:?}", notes.join("; ")));
}

#[test]
fn c10_determinism() {
    let levels: Vec<usize> = (0..=8).collect();
    let trace = || trace_convergence_study(&IfsSystem::koch(), &|p| p.x * p.x, &levels).unwrap().to_csv();
    let uniform = || uniformity_csvs().0.iter().map(|r| r.to_csv()).collect::<Vec<_>>();
    let constants = || {
        let sys = westervelt_fixture();
        let params = WesterveltParams {
            wave: WaveParams::new(0.5, 1.0, 2.0, 0.02),
            alpha: 1.0,
        };
        let k = estimate_constants(&sys, &params, 6, SEED).unwrap();
        let (_, rep) = picard_solve(&sys, &params, &bump(&sys, 0.1), &vec![0.0; sys.dim()], Forcing::Zero, PicardOptions::default(), Some(k)).unwrap();
        rep.to_csv()
    };
    let cauchy = || solution_convergence_study(&StudyConfig::new(IfsSystem::koch())).unwrap().to_csv();
    let mut identical = 0;
    let mut total = 0;
    let mut check = |a: Vec<String>, b: Vec<String>| {
        total += a.len();
        identical += a.iter().zip(&b).filter(|(x, y)| x == y).count();
    };
    check(vec![trace()], vec![trace()]);
    check(uniform(), uniform());
    check(vec![constants()], vec![constants()]);
    check(vec![cauchy()], vec![cauchy()]);
    report(
        10,
        "determinism",
        identical == total,
        &format!("{identical}/{total} CSVs byte-identical on rerun"),
    );
}
