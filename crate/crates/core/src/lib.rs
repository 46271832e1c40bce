pub mod bits;
pub mod error;
pub mod fourier;
pub mod par;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub mod f2;
pub mod phase_walk;
pub mod acceptance;
pub mod bounds;
pub mod dense_sim;
