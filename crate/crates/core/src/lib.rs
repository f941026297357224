//! Bipartite allocation toolkit: decide when an instance admits a perfect
//! proportional allocation, compute the weights by iterative matrix
//! scaling, and build a perfect rank-based allocation on arbitrary
//! instances through decomposition into matching-covered parts.
//!
//! Modules:
//! - [`instance`]: data model, validation, JSON, generators.
//! - [`flow`]: exact maximum assignment value (OPT) and Hall witnesses.
//! - [`structure`]: connectivity, matching-covered verdicts, decomposition.
//! - [`scaling`]: alternating row/column scaling and weight extraction.
//! - [`allocation`]: proportional and rank-based allocators and values.
//! - [`twocap`]: two-capacity instances and violation measurement.
//! - [`oracle`]: exhaustive brute-force verifiers for desk-scale checks.

pub mod allocation;
pub mod flow;
pub mod instance;
pub mod oracle;
pub mod scaling;
pub mod structure;
pub mod twocap;

pub use allocation::{Allocation, RankedStrategy};
pub use flow::FlowResult;
pub use instance::Instance;
pub use scaling::{ScalingResult, ScalingStatus, WeightVector};
pub use structure::{DmDecomposition, DmPart, McVerdict};
pub use twocap::{TwoCapInstance, ViolationReport};
