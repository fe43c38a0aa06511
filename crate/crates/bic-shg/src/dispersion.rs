//! Lattice sums of the subwavelength (point-scatterer) approximation.
//!
//! The action of the quasi-periodic Green operator on the pair of cylinder
//! axes is fully characterized by two coefficients,
//!
//! ```text
//! alpha(q, qx)    = 2 pi i d0(q) [ sum_m ( 1/q_{z,m} - 1/(2 pi i (|m|+1)) ) + (i/pi) ln(2 pi R) ]
//! beta(q, qx, h)  = 2 pi i d0(q)   sum_m exp(2 i h q_{z,m}) / q_{z,m}
//! ```
//!
//! with d0 the single-cylinder scattering phase. The alpha series is only
//! conditionally regularized: the paired terms decay like 1/m^2, so a plain
//! truncation converges like 1/M and can never reach 1e-10. The symmetric
//! tail sum is therefore evaluated analytically: binomial expansion of
//! 1/sqrt((2 pi m +- qx)^2 - q^2) in 1/m, telescoping of the 1/m - 1/(m+1)
//! piece, and Hurwitz-zeta partial sums for the rest. The beta series decays
//! exponentially in the closed channels and is truncated by a geometric
//! bound.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::channels::{channel_set, open_m_max, qz_of, ChannelSet};
use crate::error::Result;
use crate::params::StructureParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// sum_{m > a-1} m^{-s} by Euler-Maclaurin, accurate to ~a^{-s-5}.
fn zeta_tail(s: f64, a: f64) -> f64 {
    a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s) + s / 12.0 * a.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * a.powf(-s - 3.0)
}

/// Regularized alpha series term for order m (without the 2 pi i d0 prefactor).
fn alpha_term(q: f64, qx: f64, m: i32) -> Complex64 {
    1.0 / qz_of(q, qx, m) - 1.0 / (2.0 * PI * I * (m.abs() as f64 + 1.0))
}

/// Symmetric tail sum_{m > m0} [term(m) + term(-m)] evaluated analytically.
///
/// Requires every |m| > m0 closed and (q / (2 pi m0 - |qx|))^2 well below 1.
/// Returns (tail, remainder_bound).
fn alpha_tail(q: f64, qx: f64, m0: usize) -> (Complex64, f64) {
    let a = qx / (2.0 * PI);
    let m1 = (m0 + 1) as f64;
    let h3 = zeta_tail(3.0, m1);
    let h5 = zeta_tail(5.0, m1);
    let h7 = zeta_tail(7.0, m1);

    // 1/sqrt(mu^2 - q^2) expanded as 1/mu + q^2/(2 mu^3) + 3 q^4/(8 mu^5),
    // then the pair mu = 2 pi m +- qx expanded in a/m:
    //   pair of 1/mu:   (1/pi)(1/m + a^2/m^3 + a^4/m^5 + ...)
    //   pair of 1/mu^3: (1/(4 pi^3))(1/m^3 + 6 a^2/m^5 + ...)
    //   pair of 1/mu^5: (1/(16 pi^5))(1/m^5 + ...)
    let q2 = q * q;
    let q4 = q2 * q2;
    let c3 = a * a / PI + q2 / (8.0 * PI.powi(3));
    let c5 =
        a.powi(4) / PI + 3.0 * q2 * a * a / (4.0 * PI.powi(3)) + 3.0 * q4 / (128.0 * PI.powi(5));
    // Telescoping: sum_{m>m0} (1/(pi m) - 1/(pi (m+1))) = 1/(pi (m0+1)).
    let real_sum = 1.0 / (PI * m1) + c3 * h3 + c5 * h5;

    // Everything dropped is O(1/m^7) with coefficients bounded by the next
    // binomial/pair orders; r < 1 guards the geometric factor.
    let r = (q + qx.abs()) / (2.0 * PI * m1);
    let c7 = (a.powi(6) / PI
        + q2 * a.powi(4) / PI.powi(3)
        + q4 * a * a / PI.powi(5)
        + q4 * q2 / PI.powi(7))
        * 4.0;
    let remainder = c7 * h7 / (1.0 - r * r).max(0.25);

    // Closed channels: 1/q_z = -i/|q_z|; regularizer = +i/(2 pi (|m|+1)).
    (Complex64::new(0.0, -real_sum), remainder)
}

/// Lattice sum alpha(q, qx) to absolute tolerance tol.
pub fn alpha(q: f64, qx: f64, params: &StructureParams, tol: f64) -> Result<Complex64> {
    let d0 = params.delta0(q);
    let pref = 2.0 * PI * d0;
    // Explicit block: covers all open and near-threshold channels.
    let mut m0 = (3 * open_m_max(q, qx).max(1) as usize + 16).max(64);
    // channel_set performs the threshold-proximity check once.
    channel_set(
        q,
        qx,
        1,
        crate::params::Numerics::default().threshold_margin,
    )?;

    loop {
        let mut s = alpha_term(q, qx, 0);
        for m in 1..=m0 {
            s += alpha_term(q, qx, m as i32) + alpha_term(q, qx, -(m as i32));
        }
        let (tail, rem) = alpha_tail(q, qx, m0);
        if pref * rem < tol || m0 > 1 << 22 {
            let total = s + tail + I / PI * (2.0 * PI * params.radius).ln();
            return Ok(2.0 * PI * I * d0 * total);
        }
        m0 *= 2;
    }
}

/// Lattice sum beta(q, qx, h) to absolute tolerance tol.
pub fn beta(q: f64, qx: f64, h: f64, params: &StructureParams, tol: f64) -> Result<Complex64> {
    if !(h > 0.0) {
        return Err(crate::error::Error::InvalidParam(format!(
            "h must be > 0, got {h}"
        )));
    }
    let d0 = params.delta0(q);
    let pref = 2.0 * PI * d0;
    channel_set(
        q,
        qx,
        1,
        crate::params::Numerics::default().threshold_margin,
    )?;

    let open_reach = open_m_max(q, qx) as usize;
    let term = |m: i32| -> Complex64 {
        let qz = qz_of(q, qx, m);
        (2.0 * I * h * qz).exp() / qz
    };

    let mut s = term(0);
    let mut m = 1usize;
    loop {
        let tp = term(m as i32);
        let tm = term(-(m as i32));
        s += tp + tm;
        if m > open_reach + 1 {
            // Both channels closed from here on; |q_{z,m}| >= pi m for
            // m beyond the open range, so the tail is geometric.
            let mag = tp.norm().max(tm.norm());
            let ratio = (-2.0 * h * PI).exp();
            let bound = 2.0 * mag * ratio / (1.0 - ratio);
            if pref * bound < tol {
                break;
            }
        }
        m += 1;
        if m > 1 << 22 {
            break;
        }
    }
    Ok(2.0 * PI * I * d0 * s)
}

/// The symmetric 2x2 coupling matrix [[alpha, beta], [beta, alpha]] at (q, qx, h).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub q: f64,
    pub qx: f64,
    pub h: f64,
}

impl CouplingMatrix {
    /// Eigenvalue on the symmetric subspace (1, 1).
    pub fn sym_eig(&self) -> Complex64 {
        self.alpha + self.beta
    }

    /// Eigenvalue on the antisymmetric subspace (1, -1).
    pub fn anti_eig(&self) -> Complex64 {
        self.alpha - self.beta
    }

    /// det(1 - H) = (1 - alpha - beta)(1 - alpha + beta).
    pub fn det_one_minus(&self) -> Complex64 {
        (1.0 - self.sym_eig()) * (1.0 - self.anti_eig())
    }

    /// Action psi± -> alpha psi± + beta psi∓.
    pub fn apply(&self, psi_plus: Complex64, psi_minus: Complex64) -> (Complex64, Complex64) {
        (
            self.alpha * psi_plus + self.beta * psi_minus,
            self.alpha * psi_minus + self.beta * psi_plus,
        )
    }
}

/// Evaluate the coupling matrix at (q, qx, h).
pub fn coupling_matrix(
    q: f64,
    qx: f64,
    h: f64,
    params: &StructureParams,
    tol: f64,
) -> Result<CouplingMatrix> {
    Ok(CouplingMatrix {
        alpha: alpha(q, qx, params, tol)?,
        beta: beta(q, qx, h, params, tol)?,
        q,
        qx,
        h,
    })
}

/// Outgoing far-field amplitude of one open channel.
#[derive(Debug, Clone, Copy)]
pub struct FarFieldAmp {
    pub m: i32,
    /// Coefficient of exp(i |z| q_{z,m}) as z -> -infinity.
    pub towards_minus: Complex64,
    /// Coefficient of exp(i |z| q_{z,m}) as z -> +infinity.
    pub towards_plus: Complex64,
}

/// Per-channel outgoing amplitudes radiated by axis values (psi_+, psi_-).
///
/// Valid in the asymptotic region |z| > h + R. Closed channels decay and are
/// omitted.
pub fn far_field_coefficients(
    q: f64,
    qx: f64,
    h: f64,
    psi_plus: Complex64,
    psi_minus: Complex64,
    params: &StructureParams,
    margin: f64,
) -> Result<Vec<FarFieldAmp>> {
    let cs: ChannelSet = channel_set(q, qx, open_m_max(q, qx), margin)?;
    let pref = 2.0 * PI * I * params.delta0(q);
    Ok(cs
        .open_channels()
        .map(|c| {
            let ph = (I * h * c.qz).exp();
            FarFieldAmp {
                m: c.m,
                towards_minus: pref * (psi_plus * ph + psi_minus / ph) / c.qz,
                towards_plus: pref * (psi_plus / ph + psi_minus * ph) / c.qz,
            }
        })
        .collect())
}
