//! Simulation of data-preprocessing pitfalls in undersampled MRI
//! reconstruction: k-space zero-padding and JPEG compression applied before
//! retrospective subsampling, and how they bias reconstruction metrics.

pub mod error;
pub mod harness;
pub mod imaging;
pub mod metrics;
pub mod pipelines;
pub mod sampling;
pub mod seeding;
pub mod solvers;
pub mod transforms;

pub use error::{Error, Result};
