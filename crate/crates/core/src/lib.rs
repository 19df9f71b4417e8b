//! Finite elements on domains with prefractal boundaries.
//!
//! The crate builds Koch-type prefractal curves from iterated function
//! systems, meshes polygonal domains whose Robin boundary is such a curve,
//! and solves the Poisson, strongly damped wave and Westervelt equations on
//! them. The `lab` module runs the level-by-level convergence studies.

pub mod error;
pub mod fem;
pub mod geometry;
pub mod lab;
pub mod linalg;
pub mod mesh;
pub mod wave;
pub mod westervelt;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/prefractals.md")]
    mod prefractals {}
    #[doc = include_str!("../../../book/src/meshes.md")]
    mod meshes {}
    #[doc = include_str!("../../../book/src/finite-elements.md")]
    mod finite_elements {}
    #[doc = include_str!("../../../book/src/damped-waves.md")]
    mod damped_waves {}
    #[doc = include_str!("../../../book/src/westervelt.md")]
    mod westervelt {}
    #[doc = include_str!("../../../book/src/studies.md")]
    mod studies {}
}
