//! Node-differentially-private estimates of the number of connected
//! components (equivalently, the spanning-forest size) of an undirected
//! graph.
//!
//! The pipeline releases a noisy extension value: a degree-bounded forest
//! polytope LP yields, for each bound Δ, a Δ-Lipschitz underestimate of the
//! spanning-forest size that is exact on every graph with a spanning
//! Δ-forest; a generalized exponential mechanism picks Δ privately; Laplace
//! noise calibrated to the chosen Δ finishes the release. Exponential-time
//! reference oracles verify every combinatorial claim at desk scale.

pub mod error;
pub mod forest;
pub mod gen;
pub mod graph;
mod maxflow;
pub mod mech;
pub mod oracle;
pub mod polytope;
pub mod release;
pub mod stars;
pub mod stream;

pub use error::{Error, Result};
pub use graph::{connected_components, spanning_forest_size, Graph, VertexSet};
pub use mech::PrivacyBudget;
pub use polytope::{eval_extension_bruteforce, eval_lipschitz_extension, DEFAULT_TOL};
pub use release::{private_cc, private_sf, ReleaseReport};
pub use stream::RngStream;
