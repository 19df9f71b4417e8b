use approx::assert_relative_eq;
use prefractal::geometry::{IfsSystem, Point, PrefractalCurve};
use prefractal::mesh::*;

fn square_domain(spec: &BoundarySpec, ifs: &IfsSystem, m: usize) -> PolygonalDomain {
    build_domain(&unit_square(), spec, ifs, m).unwrap()
}

#[test]
fn level_zero_replacement_is_the_square() {
    let d = square_domain(&BoundarySpec::square_default(), &IfsSystem::koch(), 0);
    assert_eq!(d.vertices(), unit_square().as_slice());
    assert_eq!(d.area(), 1.0);
}

#[test]
fn koch_level_two_outward_area() {
    let d = square_domain(&BoundarySpec::square_default(), &IfsSystem::koch(), 2);
    assert_eq!(d.vertices().len(), 16 + 3);
    let expected = 1.0 + 3f64.sqrt() / 36.0 * (1.0 + 4.0 / 9.0);
    assert_relative_eq!(d.area(), expected, epsilon = 1e-14);
    for (v, tag) in d.vertices().iter().zip(d.tags()) {
        if *tag == BoundaryTag::Robin {
            assert!(v.y <= 0.0);
        }
    }
}

#[test]
fn minkowski_level_one_area_unchanged() {
    let d = square_domain(&BoundarySpec::square_default(), &IfsSystem::minkowski(), 1);
    assert_eq!(d.tagged_length(BoundaryTag::Robin), 2.0);
    assert_relative_eq!(d.area(), 1.0, epsilon = 1e-14);
}

#[test]
fn self_intersection_reported() {
    let base = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 0.05),
        Point::new(0.0, 0.05),
    ];
    let mut spec = BoundarySpec::uniform(BoundaryTag::Dirichlet, 4);
    spec.pieces[0] = BoundaryPiece::prefractal(BoundaryTag::Robin, Orientation::Inward);
    let err = build_domain(&base, &spec, &IfsSystem::koch(), 1).unwrap_err();
    assert!(matches!(err, prefractal::Error::SelfIntersection { .. }), "{err}");
}

#[test]
fn coarse_square_two_triangles() {
    let spec = BoundarySpec::uniform(BoundaryTag::Dirichlet, 4);
    let d = square_domain(&spec, &IfsSystem::koch(), 0);
    let mesh = triangulate(&d, 2.0).unwrap();
    assert_eq!(mesh.num_triangles(), 2);
    assert_eq!(mesh.num_nodes(), 4);
}

#[test]
fn square_at_one_eighth() {
    let spec = BoundarySpec::uniform(BoundaryTag::Dirichlet, 4);
    let mesh = triangulate(&square_domain(&spec, &IfsSystem::koch(), 0), 0.125).unwrap();
    assert!(mesh.max_edge_length() <= 0.125 * (1.0 + 1e-8));
    assert!((81..=400).contains(&mesh.num_nodes()), "{}", mesh.num_nodes());
    assert_relative_eq!(mesh.area(), 1.0, epsilon = 1e-12);
    assert!(mesh.warnings().is_empty(), "{:?}", mesh.warnings());
}

#[test]
fn koch_robin_edges_conform() {
    let ifs = IfsSystem::koch();
    let d = square_domain(&BoundarySpec::square_default(), &ifs, 2);
    let mesh = triangulate(&d, 1.0 / 9.0).unwrap();
    let curve = PrefractalCurve::generate(&ifs, 2).unwrap().reflected();
    let robin = mesh.boundary_mass_support(BoundaryTag::Robin);
    assert_eq!(robin.len(), 16);
    let mut ends: Vec<(f64, f64)> = robin
        .iter()
        .flat_map(|(e, _)| e.nodes.map(|n| (mesh.nodes()[n].x, mesh.nodes()[n].y)))
        .collect();
    let mut expected: Vec<(f64, f64)> = curve
        .segments()
        .flat_map(|s| [(s.start.x, s.start.y), (s.end.x, s.end.y)])
        .collect();
    ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(ends, expected);
    for (_, len) in &robin {
        assert_relative_eq!(*len, 1.0 / 9.0, epsilon = 1e-14);
    }
}

#[test]
fn invariants_across_levels_and_refinement() {
    for ifs in [IfsSystem::koch(), IfsSystem::minkowski()] {
        for m in 0..=3 {
            let d = square_domain(&BoundarySpec::square_default(), &ifs, m);
            let h = d.min_edge().min(0.25);
            let mut mesh = triangulate(&d, h).unwrap();
            for _ in 0..2 {
                assert_relative_eq!(mesh.area(), d.area(), max_relative = 1e-10);
                let tagged: f64 = [BoundaryTag::Dirichlet, BoundaryTag::Neumann, BoundaryTag::Robin]
                    .iter()
                    .flat_map(|&t| mesh.boundary_mass_support(t))
                    .map(|(_, l)| l)
                    .sum();
                assert_relative_eq!(tagged, d.perimeter(), max_relative = 1e-10);
                assert!(mesh.max_edge_length() <= mesh.h_max() * (1.0 + 1e-8));
                let refined = mesh.refine();
                assert_eq!(&refined.nodes()[..mesh.num_nodes()], mesh.nodes());
                assert_eq!(refined.boundary().len(), 2 * mesh.boundary().len());
                assert_eq!(refined.num_triangles(), 4 * mesh.num_triangles());
                mesh = refined;
            }
        }
    }
}

#[test]
fn robin_support_examples() {
    let d = square_domain(&BoundarySpec::square_default(), &IfsSystem::koch(), 0);
    let mesh = triangulate(&d, 0.5).unwrap();
    let robin = mesh.boundary_mass_support(BoundaryTag::Robin);
    assert_eq!(robin.len(), 2);
    assert!(robin.iter().all(|(_, l)| *l == 0.5));

    let d1 = square_domain(&BoundarySpec::square_default(), &IfsSystem::koch(), 1);
    let mut mesh = triangulate(&d1, 1.0 / 3.0).unwrap();
    for k in 0..3 {
        let support = mesh.boundary_mass_support(BoundaryTag::Robin);
        assert_eq!(support.len(), 4 << k);
        assert_relative_eq!(support.iter().map(|(_, l)| l).sum::<f64>(), 4.0 / 3.0, epsilon = 1e-14);
        mesh = mesh.refine();
    }

    let all_d = square_domain(&BoundarySpec::uniform(BoundaryTag::Dirichlet, 4), &IfsSystem::koch(), 0);
    let mesh = triangulate(&all_d, 0.5).unwrap();
    assert!(mesh.boundary_mass_support(BoundaryTag::Neumann).is_empty());
    assert!(matches!(BoundaryTag::parse("periodic"), Err(prefractal::Error::UnknownTag(_))));
}

#[test]
fn triangulation_is_deterministic_and_round_trips() {
    let d = square_domain(&BoundarySpec::square_default(), &IfsSystem::minkowski(), 2);
    let a = triangulate(&d, 1.0 / 16.0).unwrap();
    let b = triangulate(&d, 1.0 / 16.0).unwrap();
    assert_eq!(a, b);
    let text = a.to_text();
    assert_eq!(TaggedMesh::from_text(&text).unwrap().to_text(), text);
}

#[test]
fn bad_h_rejected() {
    let d = square_domain(&BoundarySpec::square_default(), &IfsSystem::koch(), 0);
    assert!(triangulate(&d, 0.0).is_err());
    assert!(triangulate(&d, f64::NAN).is_err());
}
