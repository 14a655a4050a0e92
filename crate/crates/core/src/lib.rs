//! Aharonov-Bohm type forces between magnetic fluxons in a charged
//! background.
//!
//! - [`units`]: CGS constants, natural units, flux folding, line fits.
//! - [`analytic`]: closed-form energy and force laws.
//! - [`partial_wave`]: exact disk spectra with a central fluxon.
//! - [`screening`]: radial screening of a fluxon by circulating currents.
//! - [`lattice`]: tight-binding simulations with Peierls phases.
//! - [`cli`]: the `fluxon` command-line front end.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod lattice;
pub mod partial_wave;
pub mod screening;
pub mod units;

pub use error::{Error, Result};
