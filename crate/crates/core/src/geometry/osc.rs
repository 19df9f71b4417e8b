use super::ifs::IfsSystem;
use super::polygon::{segment_intersection, signed_area, ConvexPolygon, SegmentIntersection};
use super::similitude::Point;
use crate::error::Result;

const TOL: f64 = 1e-10;
const MAX_OVERLAPS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum OscViolation {
    /// Two cell images share interior points. `witness` is the centroid of
    /// the clipped intersection and `area` its area.
    Overlap {
        first: Vec<u8>,
        second: Vec<u8>,
        witness: Point,
        area: f64,
    },
    /// A vertex of a cell image lies outside `O`.
    NotContained { word: Vec<u8>, vertex: Point },
    /// One of the boundary intersections differs from the endpoint set of
    /// `K₀`; `extra` lists the offending points (overlap pieces contribute
    /// both ends).
    BoundaryContact { which: &'static str, extra: Vec<Point> },
    /// `O` is not a proper subset of `O'`.
    NotNested,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscReport {
    pub holds: bool,
    pub level: usize,
    pub violations: Vec<OscViolation>,
}

/// Checks the strong open set condition with the level-one cells.
pub fn check_open_set_condition(ifs: &IfsSystem, o: &ConvexPolygon, o_prime: &ConvexPolygon) -> Result<OscReport> {
    check_open_set_condition_at_level(ifs, o, o_prime, 1)
}

/// Checks the strong open set condition using the images of `O` under all
/// level-`level` composite maps: pairwise disjoint interiors, containment in
/// `O`, and `∂O ∩ K₀ = ∂O' ∩ K₀ = ∂O ∩ ∂O' = {A, B}`.
pub fn check_open_set_condition_at_level(
    ifs: &IfsSystem,
    o: &ConvexPolygon,
    o_prime: &ConvexPolygon,
    level: usize,
) -> Result<OscReport> {
    let scale = ifs.base_length();
    let tol = TOL * scale;
    let mut violations = Vec::new();

    let maps = ifs.level_maps(level)?;
    let cells: Vec<ConvexPolygon> = maps.iter().map(|(m, _)| o.image(m)).collect();

    let mut overlaps = 0;
    'outer: for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            if cells[i].interiors_disjoint(&cells[j], tol) {
                continue;
            }
            let clipped = cells[i].clip(&cells[j]);
            let area = signed_area(&clipped);
            if area <= tol * scale {
                continue;
            }
            violations.push(OscViolation::Overlap {
                first: maps[i].1.clone(),
                second: maps[j].1.clone(),
                witness: centroid(&clipped),
                area,
            });
            overlaps += 1;
            if overlaps >= MAX_OVERLAPS {
                break 'outer;
            }
        }
    }

    for (cell, (_, word)) in cells.iter().zip(&maps) {
        if let Some(&v) = cell.vertices().iter().find(|&&v| !o.contains(v, tol)) {
            violations.push(OscViolation::NotContained {
                word: word.clone(),
                vertex: v,
            });
        }
    }

    let (a, b) = ifs.base();
    let endpoints = [a, b];
    let base_edges = [(a, b)];
    let checks: [(&'static str, Vec<(Point, Point)>, Vec<(Point, Point)>); 3] = [
        ("dO & K0", o.edges().collect(), base_edges.to_vec()),
        ("dO' & K0", o_prime.edges().collect(), base_edges.to_vec()),
        ("dO & dO'", o.edges().collect(), o_prime.edges().collect()),
    ];
    for (which, first, second) in checks {
        let mut extra = Vec::new();
        let mut found = [false; 2];
        for &(p1, p2) in &first {
            for &(q1, q2) in &second {
                let pts = match segment_intersection(p1, p2, q1, q2, tol) {
                    SegmentIntersection::None => continue,
                    SegmentIntersection::Point(p) => vec![p],
                    SegmentIntersection::Overlap(p, q) => {
                        extra.push(p);
                        extra.push(q);
                        continue;
                    }
                };
                for p in pts {
                    match endpoints.iter().position(|e| (e - p).norm() <= 1e3 * tol) {
                        Some(k) => found[k] = true,
                        None => extra.push(p),
                    }
                }
            }
        }
        if !found[0] || !found[1] || !extra.is_empty() {
            violations.push(OscViolation::BoundaryContact { which, extra });
        }
    }

    let nested = o.vertices().iter().all(|&v| o_prime.contains(v, tol)) && o_prime.area() > o.area() + tol * scale;
    if !nested {
        violations.push(OscViolation::NotNested);
    }

    Ok(OscReport {
        holds: violations.is_empty(),
        level,
        violations,
    })
}

fn centroid(vertices: &[Point]) -> Point {
    let n = vertices.len() as f64;
    let sum = vertices.iter().fold(nalgebra::Vector2::zeros(), |acc, p| acc + p.coords);
    Point::from(sum / n)
}

/// Symmetric rhombus with diagonal `K₀` and half-height `apex`, a convenient
/// choice of `O` and `O'`.
pub fn rhombus_over_base(ifs: &IfsSystem, apex: f64) -> Result<ConvexPolygon> {
    let (a, b) = ifs.base();
    let mid = nalgebra::center(&a, &b);
    let d = (b - a).normalize();
    let normal = nalgebra::Vector2::new(-d.y, d.x) * apex * ifs.base_length();
    ConvexPolygon::new(vec![a, mid - normal, b, mid + normal])
}
