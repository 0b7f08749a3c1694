//! Maximal Poisson-disk sampling in 2D with variable radii.
//!
//! Samples are weighted points kept in a regular triangulation. A triangle
//! whose power center has positive power holds an uncovered region, which is
//! bounded by convex gap primitives and filled by rejection sampling inside
//! them. The resulting sets can be remeshed by the optimizer in [`optimize`]
//! and measured with [`mesh`] and [`analysis`].

pub mod analysis;
pub mod density;
pub mod domain;
pub mod error;
pub mod gap;
pub mod geom;
pub mod grid;
pub mod io;
pub mod mesh;
pub mod optimize;
pub mod polygon;
pub mod predicates;
pub mod rng;
pub mod sampler;
pub mod svg;
pub mod triangulation;

pub use geom::{Point2, SiteId, WeightedSite};
pub use error::{Error, Result};
