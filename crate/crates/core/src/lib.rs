//! Explicit bijections between families of `2n`-step simple random walk
//! paths, with their inverses, closed-form and enumerative cardinalities,
//! an exhaustive verifier and an SVG renderer.
//!
//! Two pairs of families are connected:
//!
//! * bridges starting upward (`A'`) and strictly positive walks (`B'`), by
//!   reflecting each valley below the running maximum ([`bijections::phi1`]);
//! * excursions (`C`) and non-negative bridges with exactly one interior
//!   return to zero (`D`), by lowering descending points before the first
//!   revisit of height one ([`bijections::phi2`]).

pub mod bijections;
pub mod cli;
pub mod error;
pub mod path;
pub mod render;
pub mod sets;
pub mod verify;

pub use error::{Error, Result};
pub use path::{Path, Step, StepSeq};
pub use sets::{Cardinality, SetId};
