//! Residual reactive navigation.

pub mod env;
pub mod error;
pub mod eval;
pub mod nn;
pub mod policy;
pub mod prior;
pub mod rollout;
pub mod td3;
pub mod world;
pub mod worldgen;

pub use error::{Error, Result};
