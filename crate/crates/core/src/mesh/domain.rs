use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{
    segment_intersection, signed_area, Affine, IfsSystem, Point, PrefractalCurve,
    SegmentIntersection,
};

use super::BoundaryTag;

/// Side of the base edge a prefractal bump points to, relative to the
/// domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Bumps point away from the interior; the domain grows.
    Outward,
    /// Bumps point into the interior.
    Inward,
}

/// Boundary condition and optional prefractal replacement for one edge of
/// the base polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryPiece {
    pub tag: BoundaryTag,
    pub prefractal: Option<Orientation>,
}

impl BoundaryPiece {
    pub fn straight(tag: BoundaryTag) -> Self {
        Self {
            tag,
            prefractal: None,
        }
    }

    pub fn prefractal(tag: BoundaryTag, orientation: Orientation) -> Self {
        Self {
            tag,
            prefractal: Some(orientation),
        }
    }
}

/// One piece per edge of the base polygon, in vertex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundarySpec {
    pub pieces: Vec<BoundaryPiece>,
}

impl BoundarySpec {
    /// Unit-square layout used by the studies: bottom edge is the Robin
    /// prefractal (outward), left and right Dirichlet, top Neumann.
    pub fn square_default() -> Self {
        Self {
            pieces: vec![
                BoundaryPiece::prefractal(BoundaryTag::Robin, Orientation::Outward),
                BoundaryPiece::straight(BoundaryTag::Dirichlet),
                BoundaryPiece::straight(BoundaryTag::Neumann),
                BoundaryPiece::straight(BoundaryTag::Dirichlet),
            ],
        }
    }

    pub fn uniform(tag: BoundaryTag, edges: usize) -> Self {
        Self {
            pieces: vec![BoundaryPiece::straight(tag); edges],
        }
    }
}

pub fn unit_square() -> Vec<Point> {
    vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ]
}

/// Simple counter-clockwise polygon whose edge `i` runs from vertex `i` to
/// vertex `i + 1` and carries `tags[i]`, originating from base piece
/// `pieces[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalDomain {
    vertices: Vec<Point>,
    tags: Vec<BoundaryTag>,
    pieces: Vec<usize>,
    level: usize,
}

impl PolygonalDomain {
    pub fn new(vertices: Vec<Point>, tags: Vec<BoundaryTag>, pieces: Vec<usize>, level: usize) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Degenerate(format!("{} polygon vertices", vertices.len())));
        }
        if tags.len() != vertices.len() || pieces.len() != vertices.len() {
            return Err(Error::InvalidParameter(
                "one tag and one piece index per polygon edge required".into(),
            ));
        }
        check_simple(&vertices)?;
        let area = signed_area(&vertices);
        if area <= 0.0 {
            return Err(Error::Degenerate(format!(
                "polygon has non-positive signed area {area}; vertices must run counter-clockwise"
            )));
        }
        Ok(Self {
            vertices,
            tags,
            pieces,
            level,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn tags(&self) -> &[BoundaryTag] {
        &self.tags
    }

    pub fn pieces(&self) -> &[usize] {
        &self.pieces
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn edge(&self, i: usize) -> (Point, Point) {
        (self.vertices[i], self.vertices[(i + 1) % self.vertices.len()])
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.vertices.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                (b - a).norm()
            })
            .sum()
    }

    pub fn tagged_length(&self, tag: BoundaryTag) -> f64 {
        (0..self.vertices.len())
            .filter(|&i| self.tags[i] == tag)
            .map(|i| {
                let (a, b) = self.edge(i);
                (b - a).norm()
            })
            .sum()
    }

    /// Smallest edge length of the polygon.
    pub fn min_edge(&self) -> f64 {
        (0..self.vertices.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                (b - a).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        bounding_box(&self.vertices)
    }
}

pub fn bounding_box(points: &[Point]) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

/// Replaces the marked edges of `base` by the level-`m` prefractal of `ifs`.
pub fn build_domain(base: &[Point], spec: &BoundarySpec, ifs: &IfsSystem, m: usize) -> Result<PolygonalDomain> {
    let curve = if spec.pieces.iter().any(|p| p.prefractal.is_some()) {
        Some(PrefractalCurve::generate(ifs, m)?)
    } else {
        None
    };
    build_domain_with_curve(base, spec, curve.as_ref(), m)
}

/// Same as [`build_domain`] with a precomputed curve.
pub fn build_domain_with_curve(
    base: &[Point],
    spec: &BoundarySpec,
    curve: Option<&PrefractalCurve>,
    level: usize,
) -> Result<PolygonalDomain> {
    if spec.pieces.len() != base.len() {
        return Err(Error::InvalidParameter(format!(
            "boundary spec has {} pieces for a polygon with {} edges",
            spec.pieces.len(),
            base.len()
        )));
    }
    if signed_area(base) <= 0.0 {
        return Err(Error::Degenerate(
            "base polygon must be counter-clockwise with positive area".into(),
        ));
    }
    let mut vertices = Vec::new();
    let mut tags = Vec::new();
    let mut pieces = Vec::new();
    for (k, piece) in spec.pieces.iter().enumerate() {
        let p = base[k];
        let q = base[(k + 1) % base.len()];
        let pts: Vec<Point> = match (piece.prefractal, curve) {
            (None, _) => vec![p],
            (Some(_), None) => {
                return Err(Error::InvalidParameter(format!(
                    "piece {k} requests a prefractal but no curve was supplied"
                )))
            }
            (Some(orientation), Some(curve)) => {
                let cv = curve.vertices();
                let a = cv[0];
                let b = cv[cv.len() - 1];
                // Generators bump to the left of A -> B, which is the interior
                // side of a counter-clockwise edge.
                let flip = match orientation {
                    Orientation::Inward => Affine::identity(),
                    Orientation::Outward => Affine::reflection_across(a, b),
                };
                let map = similarity_onto(a, b, p, q).compose(&flip);
                let mut mapped: Vec<Point> = cv[..cv.len() - 1].iter().map(|&v| map.apply(v)).collect();
                mapped[0] = p;
                mapped
            }
        };
        for v in pts {
            vertices.push(v);
            tags.push(piece.tag);
            pieces.push(k);
        }
    }
    PolygonalDomain::new(vertices, tags, pieces, level)
}

/// Orientation-preserving similarity sending `a -> p` and `b -> q`.
fn similarity_onto(a: Point, b: Point, p: Point, q: Point) -> Affine {
    let u = b - a;
    let v = q - p;
    let den = u.norm_squared();
    let re = (v.x * u.x + v.y * u.y) / den;
    let im = (v.y * u.x - v.x * u.y) / den;
    let linear = nalgebra::Matrix2::new(re, -im, im, re);
    Affine {
        linear,
        translation: p.coords - linear * a.coords,
    }
}

/// Rejects polygons whose edges cross, touch away from shared endpoints, or
/// fold back onto their neighbours.
pub fn check_simple(vertices: &[Point]) -> Result<()> {
    let n = vertices.len();
    let edge = |i: usize| (vertices[i], vertices[(i + 1) % n]);
    let mut lengths = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = edge(i);
        let len = (b - a).norm();
        if len == 0.0 {
            return Err(Error::Degenerate(format!("edge {i} has zero length")));
        }
        lengths.push(len);
    }
    let (lo, hi) = bounding_box(vertices);
    let extent = (hi.x - lo.x).max(hi.y - lo.y);
    let tol = 1e-12 * extent;
    let mean = lengths.iter().sum::<f64>() / n as f64;
    let cell = mean.max(extent / 1024.0);
    let key = |x: f64, y: f64| (((x - lo.x) / cell).floor() as i64, ((y - lo.y) / cell).floor() as i64);

    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..n {
        let (a, b) = edge(i);
        let (x0, y0) = key(a.x.min(b.x) - tol, a.y.min(b.y) - tol);
        let (x1, y1) = key(a.x.max(b.x) + tol, a.y.max(b.y) + tol);
        for gx in x0..=x1 {
            for gy in y0..=y1 {
                grid.entry((gx, gy)).or_default().push(i);
            }
        }
    }
    let mut cells: Vec<_> = grid.into_iter().collect();
    cells.sort_by_key(|(k, _)| *k);
    let mut worst: Option<(usize, usize, Point)> = None;
    for (_, list) in &cells {
        for (ii, &i) in list.iter().enumerate() {
            for &j in &list[ii + 1..] {
                let (i, j) = (i.min(j), i.max(j));
                let (p1, p2) = edge(i);
                let (q1, q2) = edge(j);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let hit = match segment_intersection(p1, p2, q1, q2, tol) {
                    SegmentIntersection::None => None,
                    SegmentIntersection::Overlap(x, _) => Some(x),
                    SegmentIntersection::Point(x) => {
                        if adjacent {
                            None
                        } else {
                            Some(x)
                        }
                    }
                };
                if let Some(x) = hit {
                    if worst.map_or(true, |(a, b, _)| (i, j) < (a, b)) {
                        worst = Some((i, j, x));
                    }
                }
            }
        }
    }
    match worst {
        Some((first, second, x)) => Err(Error::SelfIntersection {
            first,
            second,
            x: x.x,
            y: x.y,
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bowtie_rejected_with_witness() {
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        match check_simple(&v) {
            Err(Error::SelfIntersection { first, second, x, y }) => {
                assert_eq!((first, second), (0, 2));
                assert!((x - 0.5).abs() < 1e-12 && (y - 0.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn clockwise_rejected() {
        let mut v = unit_square();
        v.reverse();
        let tags = vec![BoundaryTag::Dirichlet; 4];
        assert!(PolygonalDomain::new(v, tags, vec![0, 1, 2, 3], 0).is_err());
    }

    #[test]
    fn inward_koch_shrinks_square() {
        let mut spec = BoundarySpec::square_default();
        spec.pieces[0].prefractal = Some(Orientation::Inward);
        let d = build_domain(&unit_square(), &spec, &IfsSystem::koch(), 1).unwrap();
        assert!((d.area() - (1.0 - 3f64.sqrt() / 36.0)).abs() < 1e-14);
    }
}
