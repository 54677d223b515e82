//! Coarse degree, coarse homotopy checks and coarse fixed point witnesses on
//! finite lattice windows of Euclidean space.
//!
//! The crate is organized bottom-up:
//!
//! - [`lattice`]: windows, the oriented Kuhn triangulation and the windowed
//!   fundamental cycle.
//! - [`chains`]: sparse integer controlled chains and their boundary.
//! - [`maps`]: map descriptions, the expression language, the half-space fold
//!   and sampled estimators for properness and bornology.
//! - [`degree`]: pushforward along a vertex map and signed covering counts.
//! - [`homotopy`]: the linear homotopy and the three uniform conditions.
//! - [`cfpp`]: ray witnesses for the coarse fixed point property.
//! - [`demo`]: bundled reproduction runs used by the CLI and acceptance suite.
//!
//! Sample loops run on rayon when the `parallel` feature is enabled (the
//! default) and sequentially otherwise. Results do not depend on the mode.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cfpp;
pub mod chains;
pub mod degree;
pub mod demo;
pub mod homotopy;
pub mod lattice;
pub mod maps;
pub mod par;
mod exact;
mod sampling;

pub use cfpp::{RayWitness, SearchVerdict};
pub use chains::{Chain, ControlRadius};
pub use degree::DegreeResult;
pub use homotopy::{HomotopyFamily, HomotopyReport, TriangleBound};
pub use lattice::{LatticePoint, OrientedSimplex, Window};
pub use maps::{CoarseMap, MapSpec};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
