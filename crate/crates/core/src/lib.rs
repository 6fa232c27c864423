//! Exact analysis of resolution graphs of normal surface singularities.
//!
//! The pipeline reads a weighted dual graph, solves the adjunction system for
//! the canonical cycle over the rationals, classifies the singularity, checks
//! the structural constraints on non-log-canonical minimal resolutions, and
//! builds a holomorphic plumbing certificate whose identities are verified
//! symbolically over cyclotomic scalars.

pub mod classify;
pub mod corpus;
pub mod cyclo;
pub mod forms;
pub mod graph;
pub mod linalg;
pub mod plumbing;
pub mod report;
