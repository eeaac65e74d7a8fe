//! Online placement and chaining of VNF forwarding graphs for CDN
//! value-added services.
//!
//! Given a deployment snapshot and a mix of existing and new service requests,
//! the toolkit computes a placement (content server, VNF deployment, VNF
//! assignment, links) of minimum reconfiguration cost under capacity and
//! delay constraints.
//!
//! - [`model`]: instance and plan types, validation, feasibility checking, snapshot diffs
//! - [`costs`]: the reconfiguration cost components and service delay
//! - [`ilp`]: the binary program, MPS / LP export and solution import
//! - [`solver`]: exact branch-and-bound and a brute-force oracle
//! - [`scenario`]: seeded instance generation and reuse comparisons

pub mod costs;
mod error;
pub mod ilp;
pub mod model;
pub mod scenario;
pub mod solver;

pub use error::{Error, Result};
