use std::collections::{HashMap, VecDeque};

use spade::handles::FixedVertexHandle;
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::Point;

use super::domain::PolygonalDomain;
use super::tagged::{BoundaryEdge, TaggedMesh};
use super::BoundaryTag;

type Cdt = ConstrainedDelaunayTriangulation<Point2<f64>>;

const MIN_ANGLE_DEG: f64 = 20.0;
const MAX_LENGTH_PASSES: usize = 64;

/// Constrained Delaunay triangulation of `domain` with every edge at most
/// `h_max` long. Boundary edges are split into equal pieces first so the
/// polygon vertices are all mesh nodes; interior Steiner points come from
/// quality refinement and from edge midpoints inserted in lexicographic
/// order until the length bound holds.
pub fn triangulate(domain: &PolygonalDomain, h_max: f64) -> Result<TaggedMesh> {
    if !(h_max > 0.0) || !h_max.is_finite() {
        return Err(Error::InvalidParameter(format!("h_max = {h_max} must be positive")));
    }
    let verts = domain.vertices();
    let n = verts.len();

    let mut cdt = Cdt::new();
    let insert = |cdt: &mut Cdt, p: Point| -> Result<FixedVertexHandle> {
        cdt.insert(Point2::new(p.x, p.y))
            .map_err(|e| Error::Degenerate(format!("cannot insert ({}, {}): {e:?}", p.x, p.y)))
    };

    // Boundary sub-edges keyed by the (unordered) spade vertex pair.
    let mut boundary_info: HashMap<(usize, usize), (BoundaryTag, usize)> = HashMap::new();
    let corner: Vec<FixedVertexHandle> = verts.iter().map(|&p| insert(&mut cdt, p)).collect::<Result<_>>()?;
    let mut chain: Vec<(FixedVertexHandle, FixedVertexHandle, BoundaryTag, usize)> = Vec::new();
    for i in 0..n {
        let (a, b) = domain.edge(i);
        let pieces = ((b - a).norm() / h_max - 1e-9).ceil().max(1.0) as usize;
        let mut prev = corner[i];
        for k in 1..=pieces {
            let next = if k == pieces {
                corner[(i + 1) % n]
            } else {
                insert(&mut cdt, a + (b - a) * (k as f64 / pieces as f64))?
            };
            chain.push((prev, next, domain.tags()[i], domain.pieces()[i]));
            prev = next;
        }
    }
    for &(a, b, tag, piece) in &chain {
        if a == b {
            return Err(Error::Degenerate("coincident boundary vertices".into()));
        }
        cdt.try_add_constraint(a, b);
        if !cdt.exists_constraint(a, b) {
            return Err(Error::Degenerate(
                "boundary edge crosses or passes through another boundary vertex".into(),
            ));
        }
        let (ia, ib) = (a.index(), b.index());
        boundary_info.insert((ia.min(ib), ia.max(ib)), (tag, piece));
    }

    let area_cap = 0.5 * h_max * h_max;
    let params = || {
        RefinementParameters::<f64>::new()
            .exclude_outer_faces(true)
            .keep_constraint_edges()
            .with_angle_limit(AngleLimit::from_deg(MIN_ANGLE_DEG))
            .with_max_allowed_area(area_cap)
            .with_max_additional_vertices(50_000_000)
    };
    cdt.refine(params());

    let mut passes = 0;
    loop {
        let inside = inside_faces(&cdt);
        let mut midpoints: Vec<(f64, f64)> = Vec::new();
        for face in cdt.inner_faces() {
            if !inside[face.fix().index()] {
                continue;
            }
            for e in face.adjacent_edges() {
                if e.as_undirected().is_constraint_edge() {
                    continue;
                }
                let [p, q] = e.positions();
                let len2 = (p.x - q.x).powi(2) + (p.y - q.y).powi(2);
                if len2 > h_max * h_max {
                    midpoints.push((0.5 * (p.x + q.x), 0.5 * (p.y + q.y)));
                }
            }
        }
        if midpoints.is_empty() {
            break;
        }
        passes += 1;
        if passes > MAX_LENGTH_PASSES {
            return Err(Error::Degenerate("edge-length refinement did not terminate".into()));
        }
        midpoints.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        midpoints.dedup();
        for (x, y) in midpoints {
            insert(&mut cdt, Point::new(x, y))?;
        }
        cdt.refine(params());
    }

    // Collect inside triangles and compact the node numbering.
    let inside = inside_faces(&cdt);
    let mut node_map: Vec<Option<usize>> = vec![None; cdt.num_vertices()];
    let mut nodes = Vec::new();
    let mut triangles = Vec::new();
    let mut boundary = Vec::new();
    let mut node_id = |v: usize, pos: Point2<f64>, nodes: &mut Vec<Point>| -> usize {
        *node_map[v].get_or_insert_with(|| {
            nodes.push(Point::new(pos.x, pos.y));
            nodes.len() - 1
        })
    };
    for face in cdt.inner_faces() {
        if !inside[face.fix().index()] {
            continue;
        }
        let vs = face.vertices();
        let ids = vs.map(|v| node_id(v.fix().index(), v.position(), &mut nodes));
        triangles.push(ids);
        for e in face.adjacent_edges() {
            let twin = e.rev().face();
            let outside = twin.as_inner().map_or(true, |f| !inside[f.fix().index()]);
            if !outside {
                continue;
            }
            let (a, b) = (e.from().fix().index(), e.to().fix().index());
            let &(tag, piece) = boundary_info.get(&(a.min(b), a.max(b))).ok_or_else(|| {
                Error::Degenerate("mesh boundary edge is not part of the polygon boundary".into())
            })?;
            boundary.push(BoundaryEdge {
                nodes: [
                    node_id(a, e.from().position(), &mut nodes),
                    node_id(b, e.to().position(), &mut nodes),
                ],
                tag,
                piece,
            });
        }
    }
    if triangles.is_empty() {
        return Err(Error::Degenerate("triangulation has no interior triangles".into()));
    }
    boundary.sort_by_key(|e| (e.piece, e.nodes));

    let mut mesh = TaggedMesh::new(nodes, triangles, boundary, h_max, Vec::new())?;
    let angle = mesh.min_angle_degrees();
    if angle < MIN_ANGLE_DEG - 1e-9 {
        let warning = format!("minimum angle {angle:.3} deg below {MIN_ANGLE_DEG} deg");
        mesh = TaggedMesh::new(
            mesh.nodes().to_vec(),
            mesh.triangles().to_vec(),
            mesh.boundary().to_vec(),
            h_max,
            vec![warning],
        )?;
    }
    Ok(mesh)
}

/// Marks inner faces not reachable from the unbounded face without crossing
/// a constraint edge.
fn inside_faces(cdt: &Cdt) -> Vec<bool> {
    let mut inside = vec![true; cdt.num_all_faces()];
    let mut queue = VecDeque::new();
    for face in cdt.inner_faces() {
        for e in face.adjacent_edges() {
            if e.rev().face().is_outer() && !e.as_undirected().is_constraint_edge() {
                let idx = face.fix().index();
                if inside[idx] {
                    inside[idx] = false;
                    queue.push_back(face.fix());
                }
            }
        }
    }
    while let Some(f) = queue.pop_front() {
        for e in cdt.face(f).adjacent_edges() {
            if e.as_undirected().is_constraint_edge() {
                continue;
            }
            if let Some(nb) = e.rev().face().as_inner() {
                let idx = nb.fix().index();
                if inside[idx] {
                    inside[idx] = false;
                    queue.push_back(nb.fix());
                }
            }
        }
    }
    inside
}
