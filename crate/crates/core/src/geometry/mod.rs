//! Rational convex-polytope kernel.

mod family;
pub(crate) mod polytope;
mod triangulate;

pub use family::{CombinedClass, ToricClassFamily};
pub use polytope::{support_max, Halfspace, Polytope};
pub use triangulate::{triangulate, Simplex};

/// Largest ambient dimension accepted by the vertex enumeration.
pub const MAX_DIM: usize = 6;
