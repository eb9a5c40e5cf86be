pub mod centrality;
pub mod cli;
pub mod certainty;
pub mod error;
pub mod families;
pub mod graph;
pub mod simulator;
pub mod tolerance;

pub use error::{Error, Result};
