//! Approximation of Gaussian location mixtures by finitely supported
//! mixing laws: constructions (Gauss quadrature, local moment matching,
//! truncation), f-divergence evaluation, and certified spectral lower
//! bounds on the best achievable error, so that the unknown optimum is
//! sandwiched between a certificate and a measured error.

#![forbid(unsafe_code)]

pub mod approx;
pub mod certify;
pub mod dd;
pub mod eigen;
pub mod error;
pub mod laws;
pub mod mixture;
pub mod npmle;
pub mod orthopoly;
pub mod quad;

pub use dd::{Dd, PrecisionMode, Real};
pub use error::{Error, Result};
pub use laws::{AtomicLaw, MixingLaw};
