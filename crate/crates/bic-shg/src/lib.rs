//! Scattering resonances, bound states in the radiation continuum, and
//! second-harmonic conversion for a double periodic array of subwavelength
//! nonlinear dielectric cylinders (TM polarization, point-scatterer limit).
//!
//! The pipeline, bottom to top:
//!
//! - [`channels`] / [`dispersion`]: diffraction channels and the lattice
//!   sums alpha, beta forming the 2x2 coupling matrix of the two arrays;
//! - [`siegert`]: resonance curves k_r(h), widths, and the bound states
//!   where the width vanishes;
//! - [`shg`]: the non-perturbative nonlinear solve near a symmetric bound
//!   state (Cardano closed form plus validity region);
//! - [`flux`]: far-field amplitudes, conversion ratios sigma_1/sigma_2,
//!   conservation accounting, optimal inter-array distance;
//! - [`oracle`]: independent brute-force validators used by the tests;
//! - [`cli`] / [`config`] / [`output`]: the batch front end.
//!
//! Lengths are in units of the array period throughout; the incident
//! amplitude is one.

pub mod channels;
pub mod cli;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod flux;
pub mod oracle;
pub mod output;
pub mod params;
pub mod shg;
pub mod siegert;

pub use error::{Error, Result};
pub use params::{Numerics, StructureParams};
