//! Simulation and exact analytics for the k-neighbour preferential
//! attachment model.
//!
//! * [`graph`]: multigraph with an edge-end array for O(1) degree-proportional draws.
//! * [`growth`]: the k-neighbour and LCD processes plus an exhaustive
//!   enumeration oracle for tiny instances.
//! * [`urn`]: triangular-urn pmf, moments and their independent oracles.
//! * [`analytics`]: Monte Carlo replicas and comparison reports.
//! * [`acceptance`]: the end-to-end verification suite.

pub mod acceptance;
pub mod analytics;
pub mod error;
pub mod graph;
pub mod growth;
pub mod numerics;
pub mod pmf;
pub mod urn;

pub use error::{Error, Result};
pub use graph::{MultiGraph, RngStream, VertexId};
pub use growth::{grow_kneighbour, grow_lcd, GrowthConfig, SeedGraph};
pub use numerics::{EvalMode, Rational};
pub use pmf::DegreePmf;
pub use urn::TriangularUrnSpec;
