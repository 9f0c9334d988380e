//! Norms of signed measures on finite metric spaces.
//!
//! The crate computes the total-variation, Kantorovich-Rubinstein,
//! Monge-Kantorovich and Hanin norms by explicit linear programs, returns
//! optimality certificates (dual witness functions and primal
//! decompositions), and ships a property suite that checks primal/dual
//! equality, witness achievement, norm equivalence, and grid-refinement
//! convergence on seeded random instances.

pub mod approx;
pub mod flow;
pub mod func;
pub mod json;
pub mod lp;
pub mod measure;
pub mod metric;
pub mod norms;
pub mod rng;
pub mod verify;

pub use func::DiscreteFunction;
pub use measure::SignedMeasure;
pub use metric::FiniteMetricSpace;
