use super::similitude::{Affine, Point};
use crate::error::{Error, Result};

/// Signed shoelace area; positive for counter-clockwise vertex order.
pub fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let mut twice = 0.0;
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        twice += p.x * q.y - q.x * p.y;
    }
    0.5 * twice
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex polygon with counter-clockwise vertices and no repeated or
/// collinear vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Accepts either orientation; the stored order is counter-clockwise.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::NonConvexPolygon(format!("{} vertices", vertices.len())));
        }
        let area = signed_area(&vertices);
        let scale: f64 = vertices
            .iter()
            .flat_map(|p| [p.x.abs(), p.y.abs()])
            .fold(0.0, f64::max)
            .max(1e-300);
        if area.abs() <= 1e-14 * scale * scale {
            return Err(Error::NonConvexPolygon("zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let c = cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if c <= 1e-14 * scale * scale {
                return Err(Error::NonConvexPolygon(format!(
                    "turn at vertex {} is not strictly left",
                    (i + 1) % n
                )));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Image under an invertible affine map, re-oriented counter-clockwise.
    pub fn image(&self, map: &Affine) -> Self {
        let mut vertices: Vec<Point> = self.vertices.iter().map(|&p| map.apply(p)).collect();
        if map.linear.determinant() < 0.0 {
            vertices.reverse();
        }
        Self { vertices }
    }

    /// Whether `p` lies in the closed polygon, up to `tol` in distance.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.edges().all(|(a, b)| {
            let e = b - a;
            cross(a, b, p) / e.norm() >= -tol
        })
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Intersection of two convex polygons by Sutherland–Hodgman clipping.
    /// Returns the clipped vertex list, which may be empty or degenerate.
    pub fn clip(&self, other: &ConvexPolygon) -> Vec<Point> {
        let mut output = self.vertices.clone();
        for (a, b) in other.edges() {
            if output.is_empty() {
                break;
            }
            let input = std::mem::take(&mut output);
            let n = input.len();
            for i in 0..n {
                let cur = input[i];
                let prev = input[(i + n - 1) % n];
                let cur_in = cross(a, b, cur) >= 0.0;
                let prev_in = cross(a, b, prev) >= 0.0;
                if cur_in {
                    if !prev_in {
                        output.push(line_intersection(prev, cur, a, b));
                    }
                    output.push(cur);
                } else if prev_in {
                    output.push(line_intersection(prev, cur, a, b));
                }
            }
        }
        output
    }

    /// Whether a separating axis exists with a gap of at least `-tol`, i.e.
    /// the open interiors are disjoint up to `tol`.
    pub fn interiors_disjoint(&self, other: &ConvexPolygon, tol: f64) -> bool {
        for poly in [self, other] {
            for (a, b) in poly.edges() {
                let e = b - a;
                let normal = nalgebra::Vector2::new(e.y, -e.x) / e.norm();
                let (min1, max1) = project(&self.vertices, normal);
                let (min2, max2) = project(&other.vertices, normal);
                if max1 <= min2 + tol || max2 <= min1 + tol {
                    return true;
                }
            }
        }
        false
    }
}

fn project(vertices: &[Point], axis: nalgebra::Vector2<f64>) -> (f64, f64) {
    vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let v = p.coords.dot(&axis);
        (lo.min(v), hi.max(v))
    })
}

fn line_intersection(p: Point, q: Point, a: Point, b: Point) -> Point {
    let d1 = cross(a, b, p);
    let d2 = cross(a, b, q);
    let t = d1 / (d1 - d2);
    p + (q - p) * t
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&d) / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Intersection of two closed segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentIntersection {
    None,
    Point(Point),
    Overlap(Point, Point),
}

/// Intersection of segments `p1p2` and `q1q2`, with `tol` used both for the
/// parallel test and for endpoint snapping.
pub fn segment_intersection(p1: Point, p2: Point, q1: Point, q2: Point, tol: f64) -> SegmentIntersection {
    let r = p2 - p1;
    let s = q2 - q1;
    let denom = r.x * s.y - r.y * s.x;
    let qp = q1 - p1;
    let rn = r.norm();
    let sn = s.norm();
    if denom.abs() <= tol * rn * sn {
        // Parallel: overlapping only if collinear.
        let offset = (qp.x * r.y - qp.y * r.x).abs() / rn.max(f64::MIN_POSITIVE);
        if offset > tol {
            return SegmentIntersection::None;
        }
        let rr = r.norm_squared();
        let t0 = qp.dot(&r) / rr;
        let t1 = (q2 - p1).dot(&r) / rr;
        let lo = t0.min(t1).max(0.0);
        let hi = t0.max(t1).min(1.0);
        let tol_t = tol / rn;
        if hi < lo - tol_t {
            return SegmentIntersection::None;
        }
        if hi - lo <= tol_t {
            return SegmentIntersection::Point(p1 + r * (0.5 * (lo + hi)).clamp(0.0, 1.0));
        }
        return SegmentIntersection::Overlap(p1 + r * lo, p1 + r * hi);
    }
    let t = (qp.x * s.y - qp.y * s.x) / denom;
    let u = (qp.x * r.y - qp.y * r.x) / denom;
    let tt = tol / rn;
    let tu = tol / sn;
    if t < -tt || t > 1.0 + tt || u < -tu || u > 1.0 + tu {
        return SegmentIntersection::None;
    }
    SegmentIntersection::Point(p1 + r * t.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square() -> ConvexPolygon {
        ConvexPolygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn orientation_normalized() {
        let cw = ConvexPolygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(cw.area() > 0.0);
    }

    #[test]
    fn non_convex_rejected() {
        let dart = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 0.3),
            Point::new(1.0, 2.0),
        ];
        assert!(ConvexPolygon::new(dart).is_err());
    }

    #[test]
    fn clip_overlap_area() {
        let a = square();
        let shift = Affine {
            linear: nalgebra::Matrix2::identity(),
            translation: nalgebra::Vector2::new(0.5, 0.5),
        };
        let b = a.image(&shift);
        assert_relative_eq!(signed_area(&a.clip(&b)), 0.25, epsilon = 1e-14);
        assert!(!a.interiors_disjoint(&b, 1e-12));
    }

    #[test]
    fn touching_squares_are_disjoint() {
        let a = square();
        let shift = Affine {
            linear: nalgebra::Matrix2::identity(),
            translation: nalgebra::Vector2::new(1.0, 0.0),
        };
        assert!(a.interiors_disjoint(&a.image(&shift), 1e-12));
    }

    #[test]
    fn segment_cases() {
        let o = Point::new(0.0, 0.0);
        let x = Point::new(1.0, 0.0);
        match segment_intersection(o, x, Point::new(0.5, -1.0), Point::new(0.5, 1.0), 1e-12) {
            SegmentIntersection::Point(p) => assert_relative_eq!(p.x, 0.5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            segment_intersection(o, x, Point::new(0.5, 0.0), Point::new(2.0, 0.0), 1e-12),
            SegmentIntersection::Overlap(_, _)
        ));
        assert_eq!(
            segment_intersection(o, x, Point::new(0.0, 1.0), Point::new(1.0, 1.0), 1e-12),
            SegmentIntersection::None
        );
    }
}
