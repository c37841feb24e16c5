//! Svetlichny-inequality machinery for N-qubit generalized GHZ (GGHZ) and
//! maximal-slice (MS) states.
//!
//! The crate is layered bottom-up:
//!
//! * [`qcore`]: statevectors, Bloch-direction observables, single-qubit
//!   kernels and a small dense-matrix oracle.
//! * [`states`]: the two state families and their n-tangle.
//! * [`svetlichny`]: the ν± sign table, two independent expectation engines,
//!   the GGHZ closed form and its θ-gradient, every closed-form maximum, the
//!   two-party block decomposition and violation reports.
//! * [`maximizer`]: multi-start block-coordinate ascent over the 4N
//!   measurement angles, used to certify the closed-form bounds numerically.
//! * [`cli`]: the `svetlichny` command-line front end.

pub mod cli;
pub mod error;
pub mod maximizer;
pub mod qcore;
pub mod states;
pub mod svetlichny;

pub use error::{Error, Result};
