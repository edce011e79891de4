//! Calculators for weighted Kähler geometry on toric data: weighted
//! Duistermaat–Heckman barycenters, greatest weighted Ricci lower bounds and
//! their upper bounds, compatible beta invariants of semisimple principal
//! fibrations, and checkers for sufficient conditions of weighted cscK
//! existence.
//!
//! Rational inputs with polynomial weights are handled in exact arithmetic
//! throughout; other weights fall back to tagged floating point.

pub mod conditions;
pub mod dh;
pub mod error;
pub mod fibration;
pub mod geometry;
pub mod invariants;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod poly;
pub mod scalar;
pub mod weights;

pub use error::{Error, Result};
pub use geometry::{Halfspace, Polytope, Simplex, ToricClassFamily};
pub use scalar::{Extended, Scalar, Vector};
pub use weights::{Factor, PositivityWitness, Weight};
