//! Random stack triangulations.
//!
//! Samplers for ternary trees under the uniform and increasing models, the
//! labelled-tree encoding of planar drawings, occupation measures and their
//! limits, and the statistical batteries that check the limit laws.

pub mod config;
pub mod geometry;
pub mod json;
pub mod labeling;
pub mod measures;
pub mod oracle;
pub mod parallel;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod tree;
pub mod verify;

pub use rng::{Purpose, Seed};
pub use tree::{NodeId, NodeWord, TernaryTree, TreeError};
