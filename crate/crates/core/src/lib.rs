//! Curvature invariants of CR-submanifolds and pointwise certification of
//! the inequalities relating them to extrinsic data.

pub mod ambient;
pub mod catalog;
pub mod chart;
pub mod chartfile;
pub mod config;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod inequalities;
pub mod intrinsic;
pub mod invariants;
pub mod jet;
pub mod linalg;
pub mod report;
pub mod runner;
pub mod subspace;
pub mod tensor;

pub use error::{Error, Result};
