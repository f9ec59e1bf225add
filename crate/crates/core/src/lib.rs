//! Simulation of continuous-wave dynamically decoupled NV-center spin qubits.

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod noise;
pub mod numeric;
pub mod propagate;
pub mod series;
pub mod spin;

pub use error::{Error, Result};
