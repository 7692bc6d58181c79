pub mod admissibility;
pub mod bessel;
pub mod cli;
pub mod dispersion;
pub mod error;
pub mod kernel_analysis;
pub mod par;
pub mod params;
pub mod quad;
pub mod rational;
pub mod spectral;
pub mod toolkit;

pub use error::{Error, Result};
pub use params::ModelParams;
pub use rational::Q;
