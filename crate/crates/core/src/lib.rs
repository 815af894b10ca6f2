pub mod baseline;
pub mod bench;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod exact;
pub mod graph;
pub mod heuristic;
pub mod instance;
pub mod linalg;
pub mod model;
pub mod relaxation;
pub mod scenario;
pub mod simulator;

pub use error::{Error, Result};
