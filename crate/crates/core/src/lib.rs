//! Computational tools for homologically constrained minimal sets.
//!
//! * [`complex`]: simplicial complexes, Kuhn-triangulated grids, integer chains.
//! * [`homology`]: exact integer homology via Smith normal form ([`snf`]).
//! * [`complement`]: complement models and spanning / competitor checks.
//! * [`solver`]: minimization of weighted area over unions of faces.
//! * [`grassmann`]: 2-vectors in R⁴, plane projections and their bounds.
//! * [`problem`] / [`cli`]: problem files, command dispatch and reports.

pub mod cli;
pub mod complement;
pub mod complex;
pub mod error;
pub mod exec;
pub mod grassmann;
pub mod homology;
pub mod matrix;
pub mod problem;
pub mod snf;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Execution;
