//! Volume-preserving mean curvature flow of spherical graphs in
//! asymptotically flat 3-metrics, with the spectral and mass diagnostics
//! needed to watch the flow settle onto constant-mean-curvature leaves.

pub mod ambient;
pub mod cli;
pub mod error;
pub mod flow;
pub mod foliation;
pub mod harmonics;
pub mod spectral;
pub mod surface;

pub use error::{Error, Result};
