//! Z_p-torsion modules of abelian p-ramification over quadratic fields.
//!
//! Three independent routes are implemented: rank formulas and Rédei matrices,
//! the Coates order formula with fundamental units, and ray class groups
//! stabilized over increasing levels.

pub mod arith;
pub mod error;
pub mod linalg;
pub mod padic;
pub mod localsym;
pub mod quadclass;
pub mod tmod;
pub mod rayclass;
pub mod harness;

pub use error::{Result, TmodError};
pub use linalg::{AbGroup, F2Mat};
