//! Graph alignment by spectral rounding (EigenAlign) and by projected power
//! iteration over permutations (Projected Power Alignment), with an
//! experiment harness for planted Erdős–Rényi instances.

pub mod algorithms;
pub mod cli;
pub mod error;
pub mod graph;
pub mod harness;
pub mod operator;
pub mod rounding;
pub mod selftest;
pub mod spectral;

pub use algorithms::{
    eigen_align, projected_power_align, AlignConfig, Algorithm, AlignmentResult, TrajectoryStep,
};
pub use error::{Error, Result};
pub use graph::{Graph, Permutation, RngSeed};
pub use operator::{AlignmentOperator, ScoringParams};
pub use rounding::ScoreMatrix;
pub use spectral::EigenResult;
