//! Polygonal domains with tagged boundary pieces and their triangulations.

mod domain;
mod tagged;
mod triangulate;

use crate::error::{Error, Result};

pub use domain::{
    bounding_box, build_domain, build_domain_with_curve, check_simple, unit_square, BoundaryPiece,
    BoundarySpec, Orientation, PolygonalDomain,
};
pub use tagged::{BoundaryEdge, TaggedMesh};
pub(crate) use tagged::triangle_area;
pub use triangulate::triangulate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
    Robin,
}

impl BoundaryTag {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Dirichlet => "dirichlet",
            BoundaryTag::Neumann => "neumann",
            BoundaryTag::Robin => "robin",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(BoundaryTag::Dirichlet),
            "neumann" => Ok(BoundaryTag::Neumann),
            "robin" => Ok(BoundaryTag::Robin),
            _ => Err(Error::UnknownTag(s.to_string())),
        }
    }
}
