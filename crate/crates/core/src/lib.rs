//! Restricted additive Schwarz solvers for the 2D high-frequency Helmholtz
//! equation, with per-subdomain PML and impedance transmission conditions.
//!
//! The crate is organized bottom-up:
//!
//! - [`grid`]: the PML-extended Cartesian grid and its overlapping
//!   decomposition into subdomains.
//! - [`pml`]: complex coordinate stretching and the weak-form coefficients.
//! - [`assembly`]: Q1 finite element assembly of global and local systems.
//! - [`linalg`]: direct subdomain solvers and right-preconditioned GMRES.
//! - [`schwarz`]: partition of unity, halo plans, the RAS preconditioner and
//!   the Richardson / GMRES drivers.
//! - [`oracle`]: independent reference computations used for verification.

pub mod assembly;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod oracle;
pub mod pml;
pub mod problem;
pub mod schwarz;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
