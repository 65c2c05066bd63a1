pub mod agent;
pub mod baselines;
pub mod cli;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod net;
pub mod percept;
pub mod sim;

pub use error::{Error, Result};
