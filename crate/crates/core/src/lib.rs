//! Analysis toolkit for directed weighted networks of federated-platform instances.
//!
//! Graphs are built from anonymized edge lists ([`graph`], [`io`]) or projected
//! from user-level follow records ([`netmodel`]), then analyzed for macroscopic
//! statistics ([`macrostats`]), degree-distribution fits ([`distfit`]),
//! community structure ([`mesoscale`]), core decomposition ([`coredecomp`]),
//! statistically significant backbones ([`backbone`]) and prestige rankings
//! ([`ranking`]).

pub mod backbone;
pub mod coredecomp;
pub mod distfit;
pub mod error;
pub mod graph;
pub mod io;
pub mod macrostats;
pub mod mesoscale;
pub mod netmodel;
pub mod ranking;

pub use error::{Error, Result};
pub use graph::{build_graph, EdgeRecord, InstanceGraph, NodeIdx, NodeMeta, Platform, Status};
