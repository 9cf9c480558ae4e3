//! Three-patch logistic metapopulation model with directed migration.
//!
//! The crate enumerates the admissible migration topologies, finds every
//! equilibrium (closed form where one is known, numerically otherwise),
//! classifies local stability, sweeps parameters for bifurcations and
//! integrates trajectories.

pub mod bifurcation;
pub mod conditions;
pub mod equilibria;
pub mod error;
pub mod model;
pub mod qmc;
pub mod sampling;
pub mod simulate;
pub mod solve;
pub mod stability;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
pub use model::{ModelParams, ModelState, ParamName};
pub use topology::TopologyId;
