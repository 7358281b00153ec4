//! Disjoint tree-gradings of finite weighted graphs.
//!
//! The crate decomposes a connected weighted multigraph into pieces (the
//! 2-edge-connected blocks, or any user-declared valid grading) and a tree
//! portion, and builds on that decomposition: metric quotients that collapse
//! pieces, canonical retractions, free-product normal forms of loops, the
//! finite-projection essential-loop test, grade-preserving maps, and
//! universal-cover path lifting.

pub mod cli;
pub mod covers;
pub mod error;
pub mod folding;
pub mod gen;
pub mod grading;
pub mod graph;
pub mod homotopy;
pub mod mapgen;
pub mod maps;
pub mod quotient;
pub mod rational;
pub mod selftest;
pub mod space;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeId, EdgeLoop, EdgePath, Traversal, VertexId, WeightedGraph};
pub use grading::{Piece, PieceId, TreeGrading};
pub use rational::Rational;
