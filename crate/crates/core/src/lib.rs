//! Exact and effective dynamics of a harmonic oscillator coupled to a
//! harmonic environment: time-domain reference integration, retarded Green
//! functions and self-energies, finite-observation-time spectra, and the
//! closed-time-path propagator algebra.

pub mod cli;
pub mod config;
pub mod ctp;
pub mod green;
pub mod grid;
pub mod model;
pub mod oracle;
pub mod output;
pub mod series;
pub mod transform;
pub mod window;
