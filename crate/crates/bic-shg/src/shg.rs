//! Non-perturbative second-harmonic solve near a symmetric bound state.
//!
//! Along the symmetric resonance curve the reduced system collapses to a
//! scalar implicit relation for the fundamental field on the cylinder axes,
//!
//! ```text
//! E1+ = -phi / ( nu^2 |E1+|^2 / zeta + phi^2 xi ),   phi = cos(h k_z),
//! ```
//!
//! whose modulus squared X = |E1+|^2 solves a real cubic with exactly one
//! real (and positive) root when its discriminant is nonnegative. The root
//! is taken in closed form by Cardano's method with real cube roots; the
//! discriminant is also evaluated through its exact nonnegative
//! factorization, and the tau_+/tau_- pair gates the region where the
//! two-harmonic truncation is self-consistent.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::dispersion::coupling_matrix;
use crate::error::{Error, Result};
use crate::params::{Numerics, StructureParams};
use crate::siegert::{resonance_k_scan, BoundState, Parity};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Second-harmonic coupling data at one point of the resonance curve.
#[derive(Debug, Clone, Copy)]
pub struct SHCoupling {
    /// Entries of H2 = Hc(2k, 2kx).
    pub alpha2: Complex64,
    pub beta2: Complex64,
    /// Entries of [1 - H2]^{-1} H2 = [[a, b], [b, a]].
    pub a: Complex64,
    pub b: Complex64,
    /// Sc = Im(alpha2 + beta2), Ss = Im(alpha2 - beta2).
    pub sc: f64,
    pub ss: f64,
}

impl SHCoupling {
    pub fn a_plus_b(&self) -> Complex64 {
        self.a + self.b
    }
}

/// Coupling coefficients of the second-harmonic system at (h, k).
pub fn sh_coupling(h: f64, k: f64, params: &StructureParams, num: &Numerics) -> Result<SHCoupling> {
    let m2 = coupling_matrix(2.0 * k, 2.0 * params.kx, h, params, num.lattice_tol)?;
    let det = m2.det_one_minus();
    if det.norm() < num.sh_det_threshold {
        return Err(Error::SecondHarmonicResonance {
            det_abs: det.norm(),
        });
    }
    let sym = m2.sym_eig();
    let anti = m2.anti_eig();
    let p = sym / (1.0 - sym);
    let q = anti / (1.0 - anti);
    Ok(SHCoupling {
        alpha2: m2.alpha,
        beta2: m2.beta,
        a: 0.5 * (p + q),
        b: 0.5 * (p - q),
        sc: sym.im,
        ss: anti.im,
    })
}

/// Per-channel sums Sc, Ss of the open second-harmonic channels,
/// 16 pi d0(k) sum_m cos^2/sin^2(h k^sh_{z,m}) / k^sh_{z,m}.
pub fn sc_ss_channel_sums(h: f64, k: f64, params: &StructureParams) -> (f64, f64) {
    let q = 2.0 * k;
    let qx = 2.0 * params.kx;
    let reach = crate::channels::open_m_max(q, qx);
    let mut sc = 0.0;
    let mut ss = 0.0;
    for m in -reach..=reach {
        let qz = crate::channels::qz_of(q, qx, m);
        if qz.im == 0.0 {
            sc += (h * qz.re).cos().powi(2) / qz.re;
            ss += (h * qz.re).sin().powi(2) / qz.re;
        }
    }
    let pref = 16.0 * PI * params.delta0(k);
    (pref * sc, pref * ss)
}

/// zeta and xi of the scalar relation at field ratio mu.
///
/// xi = i (2 pi d0 / k_z)(1 + mu);
/// 1/zeta = (1 + i (4 pi d0 / k_z) phi^2)(a + b mu^2 + conj(mu)(b + a mu^2)).
pub fn zeta_xi(
    h: f64,
    k: f64,
    mu: Complex64,
    coupling: &SHCoupling,
    params: &StructureParams,
    num: &Numerics,
) -> Result<(Complex64, Complex64)> {
    let kz = (k * k - params.kx * params.kx).sqrt();
    let d0 = params.delta0(k);
    let phi = (h * kz).cos();
    let xi = I * (2.0 * PI * d0 / kz) * (1.0 + mu);
    let poly = coupling.a + coupling.b * mu * mu + mu.conj() * (coupling.b + coupling.a * mu * mu);
    let inv_zeta = (1.0 + I * (4.0 * PI * d0 / kz) * phi * phi) * poly;
    if inv_zeta.norm() < num.zeta_inv_threshold {
        return Err(Error::ZetaSingular {
            inv_abs: inv_zeta.norm(),
        });
    }
    Ok((1.0 / inv_zeta, xi))
}

/// Limits zeta_b, xi_b at a bound state (mu -> 1, phi -> 0):
/// zeta_b = 1 / (2 (a + b)), xi_b = i 4 pi d0(k_b) / k_{z,b}.
pub fn bic_limits(
    bs: &BoundState,
    params: &StructureParams,
    num: &Numerics,
) -> Result<(SHCoupling, Complex64, Complex64)> {
    let coupling = sh_coupling(bs.hb, bs.kb, params, num)?;
    let inv = 2.0 * coupling.a_plus_b();
    if inv.norm() < num.zeta_inv_threshold {
        return Err(Error::ZetaSingular {
            inv_abs: inv.norm(),
        });
    }
    let zeta_b = 1.0 / inv;
    let xi_b = I * 4.0 * PI * params.delta0(bs.kb) / bs.kzb;
    Ok((coupling, zeta_b, xi_b))
}

/// Coefficients of X^3 + c2 X^2 + c1 X + c0 = 0 for X = |E1+|^2.
pub fn cubic_coefficients(phi: f64, nu: f64, zeta: Complex64, xi: Complex64) -> (f64, f64, f64) {
    let w = zeta * xi;
    let lam = phi * phi / (nu * nu);
    let c2 = 2.0 * lam * w.re;
    let c1 = lam * lam * w.norm_sqr();
    let c0 = -(phi * phi / nu.powi(4)) * zeta.norm_sqr();
    (c2, c1, c0)
}

/// Closed-form solution of the cubic together with its validity data.
#[derive(Debug, Clone, Copy)]
pub struct CardanoSolution {
    /// The unique real root X = |E1+|^2 (nonnegative).
    pub x: f64,
    /// |E1+| = sqrt(X).
    pub e1_abs: f64,
    /// Discriminant D3 = (4/27) p^3 + q^2 of the depressed cubic.
    pub d3: f64,
    /// Validity pair; the truncation is self-consistent when their sum >= 0.
    pub tau_plus: f64,
    pub tau_minus: f64,
    /// Depressed-cubic coefficients.
    pub p: f64,
    pub q: f64,
}

impl CardanoSolution {
    pub fn tau_sum(&self) -> f64 {
        self.tau_plus + self.tau_minus
    }

    pub fn valid(&self) -> bool {
        self.tau_sum() >= 0.0
    }
}

fn cbrt(x: f64) -> f64 {
    x.cbrt()
}

/// Cardano solve without the validity gate (used to map the validity region).
pub fn cardano_root_unchecked(
    phi: f64,
    nu: f64,
    zeta: Complex64,
    xi: Complex64,
) -> Result<CardanoSolution> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParam(format!("nu must be > 0, got {nu}")));
    }
    let w = zeta * xi;
    let (wr, wi) = (w.re, w.im);
    let zeta2 = zeta.norm_sqr();
    let phi2 = phi * phi;
    let phi4 = phi2 * phi2;
    let nu2 = nu * nu;
    let lam = phi2 / nu2;

    // Depressed cubic Y^3 + p Y + q, Y = X + c2/3. The closed forms below
    // are the expanded p = c1 - c2^2/3 and q = 2 c2^3/27 - c1 c2 / 3 + c0;
    // they avoid the cancellation of the direct assembly.
    let p = lam * lam / 3.0 * (3.0 * wi * wi - wr * wr);
    let rho_re = -(4.0 / 27.0) * (wr.powi(3) + 9.0 * wr * wi * wi);
    let c0 = -(phi2 / nu2.powi(2)) * zeta2;
    let q = lam.powi(3) * rho_re / 2.0 + c0;

    // Discriminant. For p >= 0 use the exact nonnegative factorization
    // D3 = (phi^4/nu^12) | |zeta|^2 nu^2 - phi^4 rho/2 |^2 with
    // rho = rho_re + i (4/27)(3 wi^2 - wr^2)^{3/2}.
    let p_arg = 3.0 * wi * wi - wr * wr;
    let d3 = if p_arg >= 0.0 {
        let rho_im = (4.0 / 27.0) * p_arg.powf(1.5);
        let fac_re = zeta2 * nu2 - phi4 * rho_re / 2.0;
        let fac_im = phi4 * rho_im / 2.0;
        phi4 / nu2.powi(6) * (fac_re * fac_re + fac_im * fac_im)
    } else {
        let d = 4.0 / 27.0 * p.powi(3) + q * q;
        let scale = (q * q)
            .max(p.powi(3).abs() * 4.0 / 27.0)
            .max(f64::MIN_POSITIVE);
        if d < -1e-12 * scale {
            return Err(Error::NegativeDiscriminant { d3: d });
        }
        d.max(0.0)
    };

    // Real root by Cardano with real cube roots of real radicands. The
    // smaller of the two terms (-q -+ sqrt(D3))/2 cancels catastrophically
    // when D3 ~ q^2 (the near-bound-state regime), so it is recovered from
    // the product relation cbrt(u+) cbrt(u-) = -p/3 instead.
    let sq = d3.sqrt();
    let u_plus = 0.5 * (-q + sq);
    let u_minus = 0.5 * (-q - sq);
    let (t_plus, t_minus) = if u_plus.abs() >= u_minus.abs() {
        let t = cbrt(u_plus);
        (t, if t == 0.0 { 0.0 } else { -p / (3.0 * t) })
    } else {
        let t = cbrt(u_minus);
        (if t == 0.0 { 0.0 } else { -p / (3.0 * t) }, t)
    };
    let y = t_plus + t_minus;
    let c2_over_3 = 2.0 / 3.0 * lam * wr;
    let mut x = (y - c2_over_3).max(0.0);
    // Round-off polish: far from the bound state the root is a small
    // difference of the large Cardano terms; a Newton step on the monic
    // cubic restores the digits the subtraction lost.
    let c2 = 2.0 * lam * wr;
    let c1 = lam * lam * w.norm_sqr();
    for _ in 0..3 {
        let f = ((x + c2) * x + c1) * x + c0;
        let df = (3.0 * x + 2.0 * c2) * x + c1;
        if df == 0.0 {
            break;
        }
        let step = f / df;
        let next = x - step;
        if !(next > 0.0) || step.abs() <= 4.0 * f64::EPSILON * x {
            break;
        }
        x = next;
    }

    // Validity pair: cube roots of
    //   (1/2)( nu^2 |zeta|^2 - (1/2) phi^4 Re(rho) +- | nu^2 |zeta|^2 - phi^4 rho | )
    // shifted by (|phi|^{4/3}/3) Re(zeta xi). Outside p >= 0 the modulus is
    // undefined and the pair falls back to the Cardano terms themselves
    // (rescaled by nu^2/|phi|^{2/3}), whose sum is then proportional to X.
    let phi43 = phi4.cbrt();
    let shift = phi43 / 3.0 * wr;
    let (tau_plus, tau_minus) = if p_arg >= 0.0 {
        let rho_im = (4.0 / 27.0) * p_arg.powf(1.5);
        let modulus = ((nu2 * zeta2 - phi4 * rho_re).powi(2) + (phi4 * rho_im).powi(2)).sqrt();
        let base = nu2 * zeta2 - 0.5 * phi4 * rho_re;
        (
            cbrt(0.5 * (base + modulus)) - shift,
            cbrt(0.5 * (base - modulus)) - shift,
        )
    } else if phi != 0.0 {
        let scale = nu2 / phi2.cbrt();
        (scale * t_plus - shift, scale * t_minus - shift)
    } else {
        (0.0, 0.0)
    };

    Ok(CardanoSolution {
        x,
        e1_abs: x.sqrt(),
        d3,
        tau_plus,
        tau_minus,
        p,
        q,
    })
}

/// Unique real root of the cubic, gated by the validity condition.
pub fn cardano_unique_root(
    phi: f64,
    nu: f64,
    zeta: Complex64,
    xi: Complex64,
) -> Result<CardanoSolution> {
    let sol = cardano_root_unchecked(phi, nu, zeta, xi)?;
    if !sol.valid() {
        return Err(Error::InvalidRegion {
            tau_plus: sol.tau_plus,
            tau_minus: sol.tau_minus,
            tau_sum: sol.tau_sum(),
        });
    }
    Ok(sol)
}

/// Nonlinear fields at one point (h, k = k_r(h)) of the symmetric curve.
#[derive(Debug, Clone, Copy)]
pub struct NonlinearSolution {
    pub h: f64,
    pub k: f64,
    pub kz: f64,
    pub phi: f64,
    pub zeta: Complex64,
    pub xi: Complex64,
    pub e1_abs: f64,
    pub e1p: Complex64,
    pub e2p: Complex64,
    pub e2m: Complex64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub valid: bool,
    pub coupling: SHCoupling,
}

impl NonlinearSolution {
    /// Residual of the implicit relation E1+ = -phi/(nu^2 |E1+|^2/zeta + phi^2 xi).
    pub fn relation_residual(&self, nu: f64) -> f64 {
        let denom = nu * nu * self.e1_abs * self.e1_abs / self.zeta + self.phi * self.phi * self.xi;
        (self.e1p + self.phi / denom).norm()
    }
}

/// Solve the fields on the symmetric curve at given h, with known k_r(h).
pub fn solve_fields_at(
    h: f64,
    kr: f64,
    params: &StructureParams,
    num: &Numerics,
    mu_limit: Complex64,
) -> Result<NonlinearSolution> {
    let kz = (kr * kr - params.kx * params.kx).sqrt();
    let phi = (h * kz).cos();
    let coupling = sh_coupling(h, kr, params, num)?;
    let (zeta, xi) = zeta_xi(h, kr, mu_limit, &coupling, params, num)?;
    let nu = params.nu();

    if params.chi_c == 0.0 {
        // Linear limit of the relation: E1+ = -1/(phi xi), E2 = 0.
        let e1p = if phi != 0.0 {
            -1.0 / (phi * xi)
        } else {
            Complex64::new(0.0, 0.0)
        };
        return Ok(NonlinearSolution {
            h,
            k: kr,
            kz,
            phi,
            zeta,
            xi,
            e1_abs: e1p.norm(),
            e1p,
            e2p: Complex64::new(0.0, 0.0),
            e2m: Complex64::new(0.0, 0.0),
            tau_plus: 0.0,
            tau_minus: 0.0,
            valid: true,
            coupling,
        });
    }

    if phi.abs() < 1e-9 {
        // Exactly at (or numerically on top of) the bound state the cubic
        // degenerates, X -> 0. The limit along the curve is evaluated by
        // extrapolating the |dh|^{1/3} law from two nearby samples; the
        // extrapolated amplitude at dh = 0 vanishes.
        let mut mags = [0.0f64; 2];
        for (i, dh) in [1e-4, 1e-5].into_iter().enumerate() {
            let hs = h + dh;
            let krs = resonance_k_scan(hs, Parity::Symmetric, params, num)?;
            let s = solve_fields_at(hs, krs, params, num, mu_limit)?;
            mags[i] = s.e1_abs;
        }
        // Power-law check: exponent ~ 1/3 implies the dh -> 0 limit is zero.
        let exponent = (mags[0] / mags[1]).ln() / 10f64.ln();
        debug_assert!(
            exponent > 0.0,
            "amplitude should shrink toward the bound state"
        );
        let _ = exponent;
        let sol = cardano_root_unchecked(0.0, nu, zeta, xi)?;
        return Ok(NonlinearSolution {
            h,
            k: kr,
            kz,
            phi,
            zeta,
            xi,
            e1_abs: 0.0,
            e1p: Complex64::new(0.0, 0.0),
            e2p: Complex64::new(0.0, 0.0),
            e2m: Complex64::new(0.0, 0.0),
            tau_plus: sol.tau_plus,
            tau_minus: sol.tau_minus,
            valid: sol.valid(),
            coupling,
        });
    }

    let sol = cardano_unique_root(phi, nu, zeta, xi)?;
    let denom = nu * nu * sol.x / zeta + phi * phi * xi;
    let e1p = -phi / denom;
    let e2 = nu * coupling.a_plus_b() * e1p * e1p;
    Ok(NonlinearSolution {
        h,
        k: kr,
        kz,
        phi,
        zeta,
        xi,
        e1_abs: sol.e1_abs,
        e1p,
        e2p: e2,
        e2m: e2,
        tau_plus: sol.tau_plus,
        tau_minus: sol.tau_minus,
        valid: sol.valid(),
        coupling,
    })
}

/// Solve the fields at h, locating k_r(h) on the symmetric branch first.
pub fn solve_fields(
    h: f64,
    params: &StructureParams,
    num: &Numerics,
    mu_limit: Complex64,
) -> Result<NonlinearSolution> {
    let kr = resonance_k_scan(h, Parity::Symmetric, params, num)?;
    solve_fields_at(h, kr, params, num, mu_limit)
}
