//! Numerical laboratory for self-similar doubly stochastic Yule cascades.

pub mod cascade;
pub mod checks;
pub mod criteria;
pub mod error;
pub mod estimators;
pub mod kernels;
pub mod quad;
pub mod samplers;
pub mod solution;
pub mod specfun;
pub mod stats;
pub mod vector;

pub use error::{Error, Result};
pub use specfun::Params;
pub use vector::WaveVector;
