//! Exact step functions on dyadic breakpoints, Schauder frames of integer
//! translates in `L^p(ℝ)`, finite-dimensional decompositions built from
//! translates, and the restriction/compactness diagnostics that go with them.

pub mod certificate;
pub mod error;
pub mod fdd;
pub mod frame;
pub mod haar;
pub mod numeric;
pub mod placement;
pub mod probe;
pub mod restriction;
pub mod stepfn;

pub use error::{Error, Result};
