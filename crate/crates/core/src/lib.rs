//! Request-offer resource dependency simulator.
//!
//! Vertices of a configuration-model multigraph produce a perishable
//! resource each step. Vertices short of their survival threshold buy the
//! deficit from neighbours with surplus, paying one unit of money per unit
//! of resource. A vertex dies when it cannot afford its deficit or when no
//! neighbour offers it. The crate provides the graph generators, the money
//! allocation, the offer-ordering strategies, the step engine, survivability
//! metrics and an ensemble harness that writes CSV results.

pub mod dynamics;
pub mod error;
pub mod graphgen;
pub mod harness;
pub mod metrics;
pub mod moneyinit;
pub mod strategies;

pub use error::{Error, Result};

/// Random stream used throughout the simulator.
///
/// Every stochastic operation takes this concrete generator so that a
/// single 64-bit seed reproduces a run bit for bit.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Index of a vertex in a [`graphgen::Multigraph`].
pub type VertexId = usize;
