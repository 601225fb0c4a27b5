pub mod error;
pub mod experiment;
pub mod formats;
pub mod graph_model;
pub mod metrics;
pub mod model_spectrum;
pub mod permutation;
pub mod seriation;
pub mod solver;

pub use error::{Error, Result};
