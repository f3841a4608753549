//! Random motion on piecewise-flat simplicial complexes.
//!
//! The crate builds metric simplicial complexes whose simplices are flat
//! Euclidean (given by squared edge lengths), traces exact straight-line
//! geodesics through them with randomized branching at codimension-one
//! faces, and runs the isotropic transport process on top: exponential
//! renewal clocks with uniform link resampling of the direction. Diffusive
//! rescaling of that process, empirical finite-dimensional distributions
//! and tightness diagnostics live in [`scaling`]; the dual-graph chain
//! used to classify recurrence/transience lives in [`dual`].
//!
//! All randomness is derived from a single 64-bit master seed with one
//! counter-mode stream per path, so every run is bit-reproducible
//! regardless of thread count.

pub mod complex;
pub mod dual;
pub mod fields;
pub mod geodesic;
pub mod linalg;
pub mod report;
pub mod rng;
pub mod scaling;
pub mod stats;
pub mod transport;

pub use complex::{Complex, ComplexError, GeneratorSpec, LinkStructure, MetricSimplex, Point, SimplexRef, VertexId};
pub use geodesic::{BranchRule, FaceHit, FlowEvent, FlowEventKind, PhasePoint};
pub use stats::Estimate;
