//! Exemplar clustering of images and tags from one bipartite collection.
//!
//! Each side has a sparse similarity graph; image–tag association edges
//! couple the two. [`ap::ap_run`] clusters each side on its own with
//! Affinity Propagation. [`h2mp::h2mp_run`] solves both sides jointly,
//! rewarding an image and an associated tag for both being exemplars.
//!
//! [`oracle`] holds exhaustive and vector-message reference solvers used to
//! check the scalar engines on small instances.

pub mod ap;
pub mod cli;
pub mod error;
pub mod graph;
pub mod h2mp;
pub mod objective;
pub mod oracle;

pub use ap::{ap_run, SolverConfig};
pub use error::{Error, Result, SideKind};
pub use graph::{EdgePotential, HetPotential, HeteroGraph, Similarities};
pub use h2mp::{h2mp_run, H2mpConfig};
pub use objective::{evaluate, Labeling, ObjectiveBreakdown, SolveResult};
