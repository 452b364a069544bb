//! Options extracted from one-hidden-layer ReLU policies by neural-tree
//! decomposition, selected by Levin loss, and used by option-augmented PPO
//! agents on ComboGrid and maze gridworlds.

pub mod decompose;
pub mod env;
pub mod error;
pub mod grid;
pub mod harness;
pub mod nn;
pub mod option_env;
pub mod options;
pub mod trainer;

pub use error::{Error, Result};
