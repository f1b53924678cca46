//! Exact, finite-window machinery for shift-invariant closed uniform forms on
//! configuration spaces over crystal lattices.
//!
//! The crate is organised bottom-up:
//!
//! * [`multigraph`]: symmetric directed multi-graphs, morphisms, quotients and coverings.
//! * [`crystal`]: periodic lattices in block-coordinate presentation, windows,
//!   essentially-Euclidean classification and maximal abelian covers.
//! * [`interaction`]: state sets, interaction tables, conserved quantities and
//!   irreducibility evidence.
//! * [`configspace`]: configurations and the transition structure on them.
//! * [`calculus`]: local and uniform functions, forms, the differential and potentials.
//! * [`varadhan`]: pairings, cocycle splitting, the linear-growth functions and the
//!   decomposition engine.
//! * [`verify`]: the acceptance suites shared by the test target and the CLI.
//!
//! All arithmetic is exact over [`Q`].

pub mod calculus;
pub mod configspace;
pub mod crystal;
pub mod error;
pub mod interaction;
pub mod linalg;
pub mod multigraph;
pub mod rational;
pub mod varadhan;
pub mod verify;

pub use error::{Error, Result};
pub use rational::Q;
