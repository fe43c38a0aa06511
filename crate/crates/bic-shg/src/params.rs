//! Structure parameters and numerical knobs.
//!
//! All lengths are measured in units of the array period, so the cylinder
//! radius satisfies R < 1/2 and the Bloch momentum lives in [0, pi). The
//! incident amplitude is fixed to one; chi_c enters only through
//! nu = chi_c / (4 pi (eps_c - 1)).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry and material of the double cylinder array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureParams {
    /// Cylinder radius in period units, 0 < R < 1/2.
    pub radius: f64,
    /// Linear dielectric constant of the cylinders, > 1.
    pub eps_c: f64,
    /// Second-order susceptibility, >= 0.
    pub chi_c: f64,
    /// Bloch momentum component along the array, 0 <= kx < pi.
    pub kx: f64,
}

impl StructureParams {
    pub fn new(radius: f64, eps_c: f64, chi_c: f64, kx: f64) -> Result<Self> {
        let p = Self {
            radius,
            eps_c,
            chi_c,
            kx,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius < 0.5) {
            return Err(Error::InvalidParam(format!(
                "radius must be in (0, 0.5), got {}",
                self.radius
            )));
        }
        if !(self.eps_c > 1.0) {
            return Err(Error::InvalidParam(format!(
                "eps_c must be > 1, got {}",
                self.eps_c
            )));
        }
        if !(self.chi_c >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "chi_c must be >= 0, got {}",
                self.chi_c
            )));
        }
        if !(self.kx >= 0.0 && self.kx < std::f64::consts::PI) {
            return Err(Error::InvalidParam(format!(
                "kx must be in [0, pi), got {}",
                self.kx
            )));
        }
        if !self.nu().is_finite() {
            return Err(Error::InvalidParam(
                "nu = chi_c/(4 pi (eps_c-1)) not finite".into(),
            ));
        }
        Ok(())
    }

    /// Reduced nonlinearity nu = chi_c / (4 pi (eps_c - 1)).
    pub fn nu(&self) -> f64 {
        self.chi_c / (4.0 * std::f64::consts::PI * (self.eps_c - 1.0))
    }

    /// Single-cylinder scattering phase delta_0(q) = (qR)^2 (eps_c - 1) / 4.
    pub fn delta0(&self, q: f64) -> f64 {
        let qr = q * self.radius;
        0.25 * qr * qr * (self.eps_c - 1.0)
    }

    /// Same structure with a different nonlinear susceptibility.
    pub fn with_chi(&self, chi_c: f64) -> Self {
        Self { chi_c, ..*self }
    }
}

/// Numerical tolerances and limits. Defaults implement the tolerances the
/// solver is specified against; sweeps may loosen `lattice_tol` for speed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Numerics {
    /// Absolute truncation target for the lattice sums alpha and beta.
    pub lattice_tol: f64,
    /// Reject wavenumbers closer than this to any diffraction threshold.
    pub threshold_margin: f64,
    /// Absolute tolerance on k^2 in resonance root-finding.
    pub root_tol_k2: f64,
    /// Residual target |Re{1 - alpha -+ beta}| at a converged resonance.
    pub root_residual: f64,
    /// Relative step in k^2 for the central difference in the width formula.
    pub fd_step_rel: f64,
    /// Points in the initial bracket scan over the one-channel k-window.
    pub scan_points: usize,
    /// |det(1-H2)| below this is treated as a second-harmonic resonance.
    pub sh_det_threshold: f64,
    /// |1/zeta| below this raises ZetaSingular.
    pub zeta_inv_threshold: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            lattice_tol: 1e-10,
            threshold_margin: 1e-6,
            root_tol_k2: 1e-12,
            root_residual: 1e-10,
            fd_step_rel: 1e-6,
            scan_points: 200,
            sh_det_threshold: 1e-8,
            zeta_inv_threshold: 1e-12,
        }
    }
}
