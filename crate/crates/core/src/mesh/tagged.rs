use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Point;

use super::BoundaryTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    /// Endpoints in counter-clockwise boundary order.
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
    /// Index of the base-polygon edge this boundary edge came from.
    pub piece: usize,
}

/// Conforming P1 triangulation with tagged boundary edges.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedMesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    h_max: f64,
    warnings: Vec<String>,
}

pub(crate) fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
}

fn min_angle(a: Point, b: Point, c: Point) -> f64 {
    let angle = |p: Point, q: Point, r: Point| {
        let u = q - p;
        let v = r - p;
        (u.x * v.y - u.y * v.x).abs().atan2(u.dot(&v))
    };
    angle(a, b, c).min(angle(b, c, a)).min(angle(c, a, b))
}

impl TaggedMesh {
    /// Validates orientation, element areas and that each boundary edge is
    /// an edge of exactly one triangle.
    pub fn new(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<BoundaryEdge>,
        h_max: f64,
        warnings: Vec<String>,
    ) -> Result<Self> {
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nodes.len()) {
                return Err(Error::Degenerate(format!("triangle {t} references a missing node")));
            }
            let area = triangle_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if area <= 1e-14 {
                return Err(Error::Degenerate(format!(
                    "triangle {t} has area {area:e}; positive orientation and area above 1e-14 required"
                )));
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        for (i, e) in boundary.iter().enumerate() {
            let [a, b] = e.nodes;
            if edge_count.get(&(a.min(b), a.max(b))) != Some(&1) {
                return Err(Error::Degenerate(format!(
                    "boundary edge {i} ({a}, {b}) does not belong to exactly one triangle"
                )));
            }
        }
        Ok(Self {
            nodes,
            triangles,
            boundary,
            h_max,
            warnings,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Target mesh size the mesh was built for.
    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]]
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle_points(t);
                triangle_area(a, b, c)
            })
            .sum()
    }

    /// Longest triangle edge.
    pub fn max_edge_length(&self) -> f64 {
        self.unique_edges()
            .iter()
            .map(|&(a, b)| (self.nodes[a] - self.nodes[b]).norm())
            .fold(0.0, f64::max)
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_degrees(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle_points(t);
                min_angle(a, b, c).to_degrees()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Undirected edges `(min, max)` sorted lexicographically.
    pub fn unique_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn edge_length(&self, e: &BoundaryEdge) -> f64 {
        (self.nodes[e.nodes[1]] - self.nodes[e.nodes[0]]).norm()
    }

    /// Nodes touched by boundary edges carrying `tag`, sorted.
    pub fn tagged_nodes(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary
            .iter()
            .filter(|e| e.tag == tag)
            .flat_map(|e| e.nodes)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn has_tag(&self, tag: BoundaryTag) -> bool {
        self.boundary.iter().any(|e| e.tag == tag)
    }

    /// Uniform red refinement: every triangle splits into four, boundary
    /// edges split in two and keep their tags, existing nodes keep their
    /// indices.
    pub fn refine(&self) -> TaggedMesh {
        let mut nodes = self.nodes.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, nodes: &mut Vec<Point>| -> usize {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                nodes.push(nalgebra::center(&nodes[a], &nodes[b]));
                nodes.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut nodes);
            let bc = mid(b, c, &mut nodes);
            let ca = mid(c, a, &mut nodes);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let mut boundary = Vec::with_capacity(2 * self.boundary.len());
        for e in &self.boundary {
            let m = mid(e.nodes[0], e.nodes[1], &mut nodes);
            boundary.push(BoundaryEdge {
                nodes: [e.nodes[0], m],
                ..*e
            });
            boundary.push(BoundaryEdge {
                nodes: [m, e.nodes[1]],
                ..*e
            });
        }
        TaggedMesh {
            nodes,
            triangles,
            boundary,
            h_max: 0.5 * self.h_max,
            warnings: self.warnings.clone(),
        }
    }

    /// Boundary edges with `tag` and their lengths; empty when no edge
    /// carries the tag. Tag names are validated by [`BoundaryTag::parse`].
    pub fn boundary_mass_support(&self, tag: BoundaryTag) -> Vec<(BoundaryEdge, f64)> {
        self.boundary
            .iter()
            .filter(|e| e.tag == tag)
            .map(|e| (*e, self.edge_length(e)))
            .collect()
    }

    /// Plain-text serialization with sections `NODES`, `TRIANGLES` and
    /// `BOUNDARY`. Floats use shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = "writing to a String cannot fail";
        writeln!(out, "# tagged-mesh h_max={}", self.h_max).expect(w);
        for warning in &self.warnings {
            writeln!(out, "# warning {warning}").expect(w);
        }
        writeln!(out, "NODES {}", self.nodes.len()).expect(w);
        for (i, p) in self.nodes.iter().enumerate() {
            writeln!(out, "{i} {} {}", p.x, p.y).expect(w);
        }
        writeln!(out, "TRIANGLES {}", self.triangles.len()).expect(w);
        for (i, t) in self.triangles.iter().enumerate() {
            writeln!(out, "{i} {} {} {}", t[0], t[1], t[2]).expect(w);
        }
        writeln!(out, "BOUNDARY {}", self.boundary.len()).expect(w);
        for e in &self.boundary {
            writeln!(out, "{} {} {} {}", e.nodes[0], e.nodes[1], e.tag.name(), e.piece).expect(w);
        }
        out
    }

    /// Parses the output of [`TaggedMesh::to_text`]. Boundary rows may omit
    /// the piece column, in which case it defaults to 0.
    pub fn from_text(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Nodes,
            Triangles,
            Boundary,
        }
        let mut section = Section::None;
        let mut h_max = None;
        let mut warnings = Vec::new();
        let mut nodes = Vec::new();
        let mut triangles = Vec::new();
        let mut boundary = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| Error::Parse { line, message };
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix("# tagged-mesh h_max=") {
                h_max = Some(rest.parse::<f64>().map_err(|e| err(e.to_string()))?);
                continue;
            }
            if let Some(rest) = raw.strip_prefix("# warning ") {
                warnings.push(rest.to_string());
                continue;
            }
            if trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split_whitespace().collect();
            match cols[0] {
                "NODES" => {
                    section = Section::Nodes;
                    continue;
                }
                "TRIANGLES" => {
                    section = Section::Triangles;
                    continue;
                }
                "BOUNDARY" => {
                    section = Section::Boundary;
                    continue;
                }
                _ => {}
            }
            let int = |s: &str| s.parse::<usize>().map_err(|e| err(format!("{s}: {e}")));
            let float = |s: &str| s.parse::<f64>().map_err(|e| err(format!("{s}: {e}")));
            match section {
                Section::None => return Err(err("data before the first section".into())),
                Section::Nodes => {
                    if cols.len() != 3 {
                        return Err(err("node rows need 3 columns".into()));
                    }
                    if int(cols[0])? != nodes.len() {
                        return Err(err("node ids must be consecutive from 0".into()));
                    }
                    nodes.push(Point::new(float(cols[1])?, float(cols[2])?));
                }
                Section::Triangles => {
                    if cols.len() != 4 {
                        return Err(err("triangle rows need 4 columns".into()));
                    }
                    if int(cols[0])? != triangles.len() {
                        return Err(err("triangle ids must be consecutive from 0".into()));
                    }
                    triangles.push([int(cols[1])?, int(cols[2])?, int(cols[3])?]);
                }
                Section::Boundary => {
                    if cols.len() != 3 && cols.len() != 4 {
                        return Err(err("boundary rows need 3 or 4 columns".into()));
                    }
                    let tag = BoundaryTag::parse(cols[2]).map_err(|e| err(e.to_string()))?;
                    let piece = if cols.len() == 4 { int(cols[3])? } else { 0 };
                    boundary.push(BoundaryEdge {
                        nodes: [int(cols[0])?, int(cols[1])?],
                        tag,
                        piece,
                    });
                }
            }
        }
        let h_max = match h_max {
            Some(h) => h,
            None => {
                let tmp = TaggedMesh::new(nodes.clone(), triangles.clone(), Vec::new(), 0.0, Vec::new())?;
                tmp.max_edge_length()
            }
        };
        TaggedMesh::new(nodes, triangles, boundary, h_max, warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_triangle_square() -> TaggedMesh {
        let nodes = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let tags = [
            BoundaryTag::Robin,
            BoundaryTag::Dirichlet,
            BoundaryTag::Neumann,
            BoundaryTag::Dirichlet,
        ];
        let boundary = (0..4)
            .map(|i| BoundaryEdge {
                nodes: [i, (i + 1) % 4],
                tag: tags[i],
                piece: i,
            })
            .collect();
        TaggedMesh::new(nodes, vec![[0, 1, 2], [0, 2, 3]], boundary, 2f64.sqrt(), Vec::new()).unwrap()
    }

    #[test]
    fn red_refinement_counts() {
        let m = two_triangle_square();
        let r = m.refine();
        assert_eq!(r.num_triangles(), 8);
        assert_eq!(r.boundary().len(), 8);
        assert_eq!(r.refine().h_max(), m.h_max() / 4.0);
        assert_eq!(&r.nodes()[..4], m.nodes());
        assert!((r.area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let m = two_triangle_square().refine();
        let text = m.to_text();
        let back = TaggedMesh::from_text(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn inverted_triangle_rejected() {
        let m = two_triangle_square();
        let r = TaggedMesh::new(m.nodes().to_vec(), vec![[0, 2, 1]], Vec::new(), 1.0, Vec::new());
        assert!(r.is_err());
    }

    #[test]
    fn angles() {
        let m = two_triangle_square();
        assert!((m.min_angle_degrees() - 45.0).abs() < 1e-12);
    }
}
