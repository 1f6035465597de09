//! Normalized ground states of the coupled fractional Schrödinger system
//!
//! ```text
//! (-Delta)^s u + lambda1 u = mu1 |u|^{2p-2} u + beta |v|^p |u|^{p-2} u
//! (-Delta)^s v + lambda2 v = mu2 |v|^{2p-2} v + beta |u|^p |v|^{p-2} v
//! int u^2 = a1^2,  int v^2 = a2^2
//! ```
//!
//! on a periodic box, with the fractional Laplacian applied as the Fourier
//! multiplier `|k|^{2s}`. Alongside the two system solvers the crate provides
//! the scalar ground state and its scaling family, Gagliardo-Nirenberg
//! constants, fiber maps and Pohozaev functionals, and the coupling
//! thresholds that separate the two existence regimes.
//!
//! Start with the runnable programs under `examples/`.

pub mod checks;
pub mod cli;
pub mod config;
pub mod coupled;
pub mod error;
pub mod fiber;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod params;
pub mod scalar;
pub mod spectral;
pub mod thresholds;

pub use error::{Error, Result};
pub use grid::{Field, Grid};
pub use params::{Exponents, ProblemParams, SystemParams};
