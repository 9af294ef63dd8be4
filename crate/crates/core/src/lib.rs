//! Exact Gibbs-sampler kernels on bipartite Markov random fields, and tools
//! for comparing random-update against alternating-scan orders.

pub mod chain;
pub mod coupling;
pub mod error;
pub mod export;
pub mod identities;
pub mod linalg;
pub mod lumped;
pub mod mixing;
pub mod model;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
