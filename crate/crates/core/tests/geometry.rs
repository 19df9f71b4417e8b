use approx::assert_relative_eq;
use prefractal::geometry::*;
use proptest::prelude::*;

fn koch() -> IfsSystem {
    IfsSystem::koch()
}

#[test]
fn level_zero_is_base_segment() {
    let c = PrefractalCurve::generate(&koch(), 0).unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(c.vertices(), &[Point::new(0.0, 0.0), Point::new(1.0, 0.0)]);
    assert_eq!(c.total_length(), 1.0);
    assert_eq!(c.weights(), &[1.0]);
}

#[test]
fn koch_level_one() {
    let c = PrefractalCurve::generate(&koch(), 1).unwrap();
    assert_eq!(c.len(), 4);
    assert_relative_eq!(c.total_length(), 4.0 / 3.0, epsilon = 1e-14);
    for w in c.weights() {
        assert_relative_eq!(*w, 0.25, epsilon = 1e-15);
    }
    let apex = c.vertices()[2];
    assert_relative_eq!(apex.x, 0.5, epsilon = 1e-15);
    assert_relative_eq!(apex.y, 3f64.sqrt() / 6.0, epsilon = 1e-15);
}

#[test]
fn minkowski_level_one() {
    let c = PrefractalCurve::generate(&IfsSystem::minkowski(), 1).unwrap();
    assert_eq!(c.len(), 8);
    assert_relative_eq!(c.total_length(), 2.0, epsilon = 1e-14);
}

#[test]
fn level_overflow_guard() {
    let err = PrefractalCurve::generate(&koch(), 11).unwrap_err();
    assert!(matches!(err, prefractal::Error::LevelOverflow { level: 11, .. }));
    assert!(PrefractalCurve::generate_with_cap(&koch(), 3, 63).is_err());
    assert!(PrefractalCurve::generate_with_cap(&koch(), 3, 64).is_ok());
}

#[test]
fn contraction_sums_match_hand_values() {
    assert_relative_eq!(contraction_sums(&koch(), 2)[0], 4.0 / 3.0, epsilon = 1e-15);
    assert_relative_eq!(contraction_sums(&IfsSystem::minkowski(), 2)[0], 2.0, epsilon = 1e-15);
    let single = Family {
        maps: vec![Similitude::new(0.3, false, 0.4, nalgebra::Vector2::new(0.1, 0.0)).unwrap()],
    };
    assert_relative_eq!(single.contraction_sum(2), 0.4);
}

#[test]
fn sigma_values() {
    assert_eq!(sigma(&koch(), 0).unwrap(), 1.0);
    assert_relative_eq!(sigma(&koch(), 2).unwrap(), 0.5625, epsilon = 1e-15);
    assert_relative_eq!(sigma(&IfsSystem::minkowski(), 3).unwrap(), 0.125, epsilon = 1e-15);
}

#[test]
fn sigma_of_mixture_follows_environment() {
    let ifs = IfsSystem::koch_mixture(&[3.0, 3.5], vec![0, 1, 1]).unwrap();
    let d = contraction_sums(&ifs, 2);
    assert_relative_eq!(d[1], 4.0 / 3.5, epsilon = 1e-15);
    let expected = 1.0 / (d[0] * d[1] * d[1]);
    assert_relative_eq!(sigma(&ifs, 3).unwrap(), expected, epsilon = 1e-15);
}

#[test]
fn cell_measures() {
    let mix = IfsSystem::koch_mixture(&[3.0, 3.7], vec![1, 0, 1, 1]).unwrap();
    assert_relative_eq!(cell_measure(&mix, &[2, 0, 3, 1], 2).unwrap(), 4f64.powi(-4), epsilon = 1e-16);
    assert_eq!(cell_measure(&koch(), &[], 2).unwrap(), 1.0);
    assert_relative_eq!(cell_measure(&IfsSystem::minkowski(), &[3, 7], 2).unwrap(), 1.0 / 64.0);
    assert!(cell_measure(&koch(), &[4], 2).is_err());
}

#[test]
fn osc_koch_and_minkowski_hold_at_levels_one_and_two() {
    let k = koch();
    let o = rhombus_over_base(&k, 3f64.sqrt() / 6.0).unwrap();
    let op = rhombus_over_base(&k, 0.5).unwrap();
    let m = IfsSystem::minkowski();
    let mo = rhombus_over_base(&m, 0.5).unwrap();
    let mop = rhombus_over_base(&m, 0.6).unwrap();
    for level in [1, 2] {
        assert!(check_open_set_condition_at_level(&k, &o, &op, level).unwrap().holds);
        let r = check_open_set_condition_at_level(&m, &mo, &mop, level).unwrap();
        assert!(r.holds, "{:?}", r.violations);
    }
}

#[test]
fn osc_detects_overlap() {
    let a = Point::new(0.0, 0.0);
    let b = Point::new(1.0, 0.0);
    let apex = Point::new(0.5, (0.81f64 - 0.25).sqrt());
    let fam = Family::from_polyline(a, b, &[a, apex, b], false).unwrap();
    assert!(fam.maps.iter().all(|m| (m.ratio() - 0.9).abs() < 1e-12));
    let ifs = IfsSystem::new(vec![fam], vec![], a, b).unwrap();
    let o = rhombus_over_base(&ifs, 0.5).unwrap();
    let op = rhombus_over_base(&ifs, 0.7).unwrap();
    let report = check_open_set_condition(&ifs, &o, &op).unwrap();
    assert!(!report.holds);
    match &report.violations[0] {
        OscViolation::Overlap { first, second, witness, area } => {
            assert_eq!((first.as_slice(), second.as_slice()), (&[0u8][..], &[1u8][..]));
            assert!(*area > 0.0);
            assert!(o.image(&ifs.level_maps(1).unwrap()[0].0).contains(*witness, 1e-12));
        }
        other => panic!("expected an overlap first, got {other:?}"),
    }
}

#[test]
fn osc_rejects_non_convex() {
    let dart = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(0.5, 0.1),
        Point::new(0.5, 1.0),
    ];
    assert!(matches!(ConvexPolygon::new(dart), Err(prefractal::Error::NonConvexPolygon(_))));
}

#[test]
fn density_ratio_examples() {
    let c0 = PrefractalCurve::generate(&koch(), 0).unwrap();
    let s = measure_density_ratio(&c0, &[(Point::new(0.4, 0.0), 0.1), (Point::new(0.5, 0.5), 0.2)]).unwrap();
    assert_relative_eq!(s[0].ratio, 2.0, epsilon = 1e-14);
    assert_eq!(s[1].ratio, 0.0);
    assert!(measure_density_ratio(&c0, &[(Point::new(0.5, 0.0), 0.0)]).is_err());
}

#[test]
fn density_ratio_uniform_over_levels() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let samples: Vec<(Point, f64)> = (0..200)
        .map(|_| {
            let x: f64 = rng.random_range(0.0..1.0);
            let y: f64 = rng.random_range(-0.05..0.3);
            let r: f64 = rng.random_range(0.01..0.5);
            (Point::new(x, y), r)
        })
        .collect();
    let max0 = measure_density_ratio(&PrefractalCurve::generate(&koch(), 0).unwrap(), &samples)
        .unwrap()
        .iter()
        .map(|s| s.ratio)
        .fold(0.0, f64::max);
    let max4 = measure_density_ratio(&PrefractalCurve::generate(&koch(), 4).unwrap(), &samples)
        .unwrap()
        .iter()
        .map(|s| s.ratio)
        .fold(0.0, f64::max);
    assert!(max0 > 0.0);
    assert!(max4 <= 10.0 * max0 && max4 >= max0 / 10.0, "{max0} {max4}");
}

#[test]
fn mixture_dimension_cases() {
    assert_relative_eq!(mixture_dimension([1.0, 0.0], [3.0, 3.9]).unwrap(), 1.261_859_507, epsilon = 1e-9);
    assert_relative_eq!(
        mixture_dimension([0.5, 0.5], [3.0, 3.0]).unwrap(),
        4f64.ln() / 3f64.ln(),
        epsilon = 1e-14
    );
    let mut prev = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let d = mixture_dimension([0.0, 1.0], [3.0, 4.0 - eps]).unwrap();
        assert!(d > 1.0 && d < prev);
        prev = d;
    }
}

#[test]
fn environment_rules() {
    let c = build_environment(&EnvironmentRule::Constant(0), 5, 2).unwrap();
    assert_eq!(c.sequence, vec![0; 5]);
    let p = build_environment(&EnvironmentRule::Periodic(vec![0, 1]), 4, 2).unwrap();
    assert_eq!(p.frequencies[3][0], 0.5);
    let rule = EnvironmentRule::FrequencyTarget {
        p: vec![0.75, 0.25],
        c0: 1.0,
    };
    let f = build_environment(&rule, 8, 2).unwrap();
    assert!(f.violations.is_empty());
    for (i, h) in f.frequencies.iter().enumerate() {
        let m = (i + 1) as f64;
        assert!((h[0] - 0.75).abs() <= 1.0 / m && (h[1] - 0.25).abs() <= 1.0 / m);
    }
}

#[test]
fn curve_text_round_trip() {
    for ifs in [koch(), IfsSystem::minkowski(), IfsSystem::koch_mixture(&[3.0, 3.5], vec![1, 0]).unwrap()] {
        let c = PrefractalCurve::generate(&ifs, 2).unwrap();
        let text = c.to_text();
        let back = PrefractalCurve::from_text(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);
    }
    let header = PrefractalCurve::generate(&koch(), 3).unwrap().to_text();
    assert!(header.starts_with("# ifs-curve level=3 D=1.3333333333333333\n"));
    assert_eq!(header.lines().count(), 65);
    assert!(header.lines().nth(1).unwrap().ends_with(" 1.1.1"));
}

#[test]
fn reflected_curve_mirrors_vertices() {
    let c = PrefractalCurve::generate(&koch(), 2).unwrap();
    let r = c.reflected();
    for (p, q) in c.vertices().iter().zip(r.vertices()) {
        assert_eq!(p.x, q.x);
        assert_eq!(p.y, -q.y);
    }
    let via_ifs = PrefractalCurve::generate(&koch().reflected(), 2).unwrap();
    for (p, q) in via_ifs.vertices().iter().zip(r.vertices()) {
        assert!((p - q).norm() < 1e-14);
    }
}

fn level_systems() -> Vec<IfsSystem> {
    vec![
        koch(),
        IfsSystem::minkowski(),
        IfsSystem::koch_mixture(&[3.0, 3.6], vec![0, 1, 1, 0, 1, 0]).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn endpoints_fixed_and_chain_closed(sys in 0usize..3, m in 0usize..6) {
        let ifs = &level_systems()[sys];
        let c = PrefractalCurve::generate(ifs, m).unwrap();
        let (a, b) = ifs.base();
        prop_assert_eq!(c.vertices()[0], a);
        prop_assert_eq!(*c.vertices().last().unwrap(), b);
        prop_assert_eq!(c.vertices().len(), c.len() + 1);
    }

    #[test]
    fn weights_sum_to_one(sys in 0usize..3, m in 0usize..7) {
        let c = PrefractalCurve::generate(&level_systems()[sys], m).unwrap();
        let total: f64 = c.weights().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn length_identity(sys in 0usize..2, m in 0usize..9) {
        // 8^7 Minkowski segments exceed the default cap.
        let m = if sys == 1 { m.min(6) } else { m };
        let ifs = &level_systems()[sys];
        let c = PrefractalCurve::generate(ifs, m).unwrap();
        let s = sigma(ifs, m).unwrap();
        prop_assert!((c.total_length() * s - ifs.base_length()).abs() <= 1e-10);
    }

    #[test]
    fn word_consistency(sys in 0usize..3, word in proptest::collection::vec(0u8..4, 0..5)) {
        let ifs = &level_systems()[sys];
        let n = ifs.families()[ifs.family_at(word.len()).unwrap_or(0)].len();
        let parent = cell_measure(ifs, &word, 2).unwrap();
        let children: f64 = (0..n as u8)
            .map(|i| {
                let mut w = word.clone();
                w.push(i);
                cell_measure(ifs, &w, 2).unwrap()
            })
            .sum();
        prop_assert!((parent - children).abs() <= 1e-12);
    }
}
