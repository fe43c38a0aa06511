//! Resonance curves, widths, and bound states in the radiation continuum.
//!
//! In the one-open-channel window kx < k < 2 pi - kx the poles of the
//! resolvent split by parity: the symmetric branch solves
//! Re(1 - alpha - beta) = 0, the antisymmetric one Re(1 - alpha + beta) = 0,
//! both in the spectral parameter k^2. Linearizing the pole condition at the
//! real root gives the width
//!
//! ```text
//! Gamma = Im(1 - alpha -+ beta) / d/dk^2 Re(1 - alpha -+ beta) |_{k^2 = k_r^2}
//! ```
//!
//! which is nonnegative on both branches (numerator and denominator are both
//! negative at a resonance). A bound state occurs where the width vanishes,
//! i.e. cos(h k_z) = 0 on the symmetric branch: h k_z = (n - 1/2) pi.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dispersion::coupling_matrix;
use crate::error::{Error, Result};
use crate::params::{Numerics, StructureParams};

/// Parity of a resonance branch under z -> -z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

impl Parity {
    pub fn sign(&self) -> i32 {
        match self {
            Parity::Symmetric => 1,
            Parity::Antisymmetric => -1,
        }
    }
}

/// One point (h, k_r, Gamma) on a resonance curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResonancePoint {
    pub h: f64,
    pub kr: f64,
    pub gamma: f64,
    pub parity: Parity,
}

/// A bound state in the radiation continuum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundState {
    /// Branch index; h_b k_{z,b} = (n - 1/2) pi on the symmetric branch.
    pub n: usize,
    pub hb: f64,
    pub kb: f64,
    pub kzb: f64,
    pub parity: Parity,
}

/// Re(1 - alpha -+ beta) as a function of k at fixed h.
fn branch_fn(k: f64, h: f64, parity: Parity, params: &StructureParams, tol: f64) -> Result<f64> {
    let m = coupling_matrix(k, params.kx, h, params, tol)?;
    let eig = match parity {
        Parity::Symmetric => m.sym_eig(),
        Parity::Antisymmetric => m.anti_eig(),
    };
    Ok(1.0 - eig.re)
}

/// One-open-channel window (kx, 2 pi - kx) shrunk by the scan margin.
pub fn one_channel_window(params: &StructureParams, num: &Numerics) -> (f64, f64) {
    let margin = num.threshold_margin * 2.0;
    (params.kx + margin, 2.0 * PI - params.kx - margin)
}

/// Scan the window for a sign change of the branch function.
pub fn scan_bracket(
    h: f64,
    parity: Parity,
    params: &StructureParams,
    num: &Numerics,
) -> Result<(f64, f64)> {
    let (lo, hi) = one_channel_window(params, num);
    let n = num.scan_points.max(8);
    let mut prev_k = lo;
    let mut prev_f = branch_fn(prev_k, h, parity, params, num.lattice_tol)?;
    for i in 1..=n {
        let k = lo + (hi - lo) * i as f64 / n as f64;
        let f = branch_fn(k, h, parity, params, num.lattice_tol)?;
        if prev_f == 0.0 {
            return Ok((prev_k, prev_k));
        }
        if prev_f * f < 0.0 {
            return Ok((prev_k, k));
        }
        prev_k = k;
        prev_f = f;
    }
    Err(Error::NoBracket { h, lo, hi })
}

/// Bisection-safeguarded secant root of the branch function in k^2.
fn refine_root(
    h: f64,
    parity: Parity,
    params: &StructureParams,
    num: &Numerics,
    bracket: (f64, f64),
) -> Result<f64> {
    let tol = num.lattice_tol.min(1e-12);
    let f = |k2: f64| branch_fn(k2.sqrt(), h, parity, params, tol);
    let (mut a, mut b) = (bracket.0 * bracket.0, bracket.1 * bracket.1);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a.sqrt());
    }
    if fb == 0.0 {
        return Ok(b.sqrt());
    }
    if fa * fb > 0.0 {
        return Err(Error::NoBracket {
            h,
            lo: bracket.0,
            hi: bracket.1,
        });
    }
    // Illinois false position: halving the retained endpoint's value
    // prevents one-sided stagnation on steep branches.
    let mut best = (0.5 * (a + b), f64::INFINITY);
    let mut side = 0i8;
    for _ in 0..300 {
        let denom = fb - fa;
        let mut x = if denom != 0.0 {
            b - fb * (b - a) / denom
        } else {
            0.5 * (a + b)
        };
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if fx.abs() < best.1 {
            best = (x, fx.abs());
        }
        if fx.abs() < num.root_residual {
            return Ok(x.sqrt());
        }
        if fa * fx < 0.0 {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
        if (b - a) < num.root_tol_k2.max(4.0 * f64::EPSILON * x) {
            break;
        }
    }
    // Interval is at resolution; accept the best residual seen if it is
    // small on the scale of the function, else report the lost bracket.
    if best.1 < num.root_residual * 100.0 {
        Ok(best.0.sqrt())
    } else {
        Err(Error::NoBracket {
            h,
            lo: bracket.0,
            hi: bracket.1,
        })
    }
}

/// Resonant wavenumber k_r(h) on the given branch, from a caller bracket in k.
pub fn resonance_k(
    h: f64,
    parity: Parity,
    params: &StructureParams,
    num: &Numerics,
    bracket: (f64, f64),
) -> Result<f64> {
    refine_root(h, parity, params, num, bracket)
}

/// Resonant wavenumber found by a fresh window scan.
pub fn resonance_k_scan(
    h: f64,
    parity: Parity,
    params: &StructureParams,
    num: &Numerics,
) -> Result<f64> {
    let bracket = scan_bracket(h, parity, params, num)?;
    refine_root(h, parity, params, num, bracket)
}

/// Resonance width by linearization of the pole condition at k_r.
pub fn width(
    h: f64,
    kr: f64,
    parity: Parity,
    params: &StructureParams,
    num: &Numerics,
) -> Result<f64> {
    let tol = num.lattice_tol.min(1e-12);
    let m = coupling_matrix(kr, params.kx, h, params, tol)?;
    let eig = match parity {
        Parity::Symmetric => m.sym_eig(),
        Parity::Antisymmetric => m.anti_eig(),
    };
    let im = (1.0 - eig).im;

    let k2 = kr * kr;
    let dk2 = num.fd_step_rel * k2;
    let fp = branch_fn((k2 + dk2).sqrt(), h, parity, params, tol)?;
    let fm = branch_fn((k2 - dk2).sqrt(), h, parity, params, tol)?;
    let deriv = (fp - fm) / (2.0 * dk2);
    if deriv.abs() < 1e-8 {
        return Err(Error::DegenerateDerivative { value: deriv });
    }
    let gamma = im / deriv;
    if gamma < -1e-12 {
        return Err(Error::DegenerateDerivative { value: gamma });
    }
    Ok(gamma.max(0.0))
}

/// Resonance point (k_r, Gamma) at distance parameter h.
pub fn resonance_point(
    h: f64,
    parity: Parity,
    params: &StructureParams,
    num: &Numerics,
) -> Result<ResonancePoint> {
    let kr = resonance_k_scan(h, parity, params, num)?;
    let gamma = width(h, kr, parity, params, num)?;
    Ok(ResonancePoint {
        h,
        kr,
        gamma,
        parity,
    })
}

/// Natural continuation of the resonance curve over [h_range.0, h_range.1].
///
/// The curve is sampled on a monotone h grid with the given step; each point
/// is re-solved to full tolerance, using the previous k_r to seed a local
/// bracket and falling back to a window scan when the local bracket fails.
pub fn trace_curve(
    parity: Parity,
    params: &StructureParams,
    num: &Numerics,
    h_range: (f64, f64),
    step: f64,
) -> Result<Vec<ResonancePoint>> {
    if !(step > 0.0) || !(h_range.1 > h_range.0) || !(h_range.0 > 0.0) {
        return Err(Error::InvalidParam(format!(
            "bad h_range/step: ({}, {}) step {}",
            h_range.0, h_range.1, step
        )));
    }
    let (klo, khi) = one_channel_window(params, num);
    let n_steps = ((h_range.1 - h_range.0) / step).round() as usize;
    let mut points = Vec::with_capacity(n_steps + 1);
    let mut prev_kr: Option<f64> = None;
    let mut started = false;
    for i in 0..=n_steps {
        let h = h_range.0 + i as f64 * step;
        let kr = match prev_kr {
            Some(k0) => {
                // Widening local brackets around the previous root.
                let mut found = None;
                for widen in [4.0 * step, 16.0 * step, 0.2] {
                    let lo = (k0 - widen).max(klo);
                    let hi = (k0 + widen).min(khi);
                    if let Ok(k) = refine_root(h, parity, params, num, (lo, hi)) {
                        found = Some(k);
                        break;
                    }
                }
                match found {
                    Some(k) => k,
                    None => match resonance_k_scan(h, parity, params, num) {
                        Ok(k) => k,
                        Err(_) => return Err(Error::CurveLost { h }),
                    },
                }
            }
            None => match resonance_k_scan(h, parity, params, num) {
                Ok(k) => k,
                Err(Error::NoBracket { .. }) if !started => {
                    // Branch has not emerged yet at this h (antisymmetric
                    // resonances only exist beyond a minimum separation).
                    continue;
                }
                Err(e) => return Err(e),
            },
        };
        started = true;
        let gamma = width(h, kr, parity, params, num)?;
        points.push(ResonancePoint {
            h,
            kr,
            gamma,
            parity,
        });
        prev_kr = Some(kr);
    }
    Ok(points)
}

/// Locate bound states n = 1..n_max on the symmetric branch.
///
/// Nested root-finding: the outer equation g(h) = h k_z(h) - (n - 1/2) pi
/// brackets each bound state; k_z(h) = sqrt(k_r(h)^2 - kx^2) uses the inner
/// resonance solve.
pub fn find_bound_states(
    parity: Parity,
    params: &StructureParams,
    num: &Numerics,
    n_max: usize,
) -> Result<Vec<BoundState>> {
    if parity == Parity::Antisymmetric {
        return Err(Error::InvalidParam(
            "bound-state location is implemented for the symmetric branch only".into(),
        ));
    }
    if n_max == 0 {
        return Ok(Vec::new());
    }
    let kx = params.kx;
    let mut kz_of_h_cache: Option<(f64, f64)> = None;
    let mut kz_of_h = |h: f64| -> Result<f64> {
        if let Some((hc, kz)) = kz_of_h_cache {
            if hc == h {
                return Ok(kz);
            }
        }
        let kr = resonance_k_scan(h, Parity::Symmetric, params, num)?;
        let kz = (kr * kr - kx * kx).sqrt();
        kz_of_h_cache = Some((h, kz));
        Ok(kz)
    };

    let mut out = Vec::with_capacity(n_max);
    let h_scan_step = 0.02;
    let h_max = 0.8 * n_max as f64 + 1.0;
    let mut h_prev = 0.04f64;
    let mut g_prev = h_prev * kz_of_h(h_prev)?;
    for n in 1..=n_max {
        let target = (n as f64 - 0.5) * PI;
        // March until g crosses the target.
        let (mut a, mut b, mut ga, mut gb);
        loop {
            let h = h_prev + h_scan_step;
            let g = h * kz_of_h(h)?;
            if (g_prev - target) * (g - target) <= 0.0 {
                a = h_prev;
                b = h;
                ga = g_prev - target;
                gb = g - target;
                h_prev = h;
                g_prev = g;
                break;
            }
            h_prev = h;
            g_prev = g;
            if h > h_max {
                return Err(Error::NotFound { n, h_max });
            }
        }
        // Bisection-safeguarded secant on g(h) - target.
        let mut hb = 0.5 * (a + b);
        for _ in 0..100 {
            let mut x = b - gb * (b - a) / (gb - ga);
            if !(x > a && x < b) {
                x = 0.5 * (a + b);
            }
            let gx = x * kz_of_h(x)? - target;
            hb = x;
            if gx.abs() < 1e-11 || (b - a) < 1e-13 {
                break;
            }
            if ga * gx < 0.0 {
                b = x;
                gb = gx;
            } else {
                a = x;
                ga = gx;
            }
        }
        let kb = resonance_k_scan(hb, Parity::Symmetric, params, num)?;
        let kzb = (kb * kb - kx * kx).sqrt();
        out.push(BoundState {
            n,
            hb,
            kb,
            kzb,
            parity: Parity::Symmetric,
        });
    }
    Ok(out)
}

/// First-order threshold estimate of the bound-state wavenumber:
/// k_b ~ (2 pi - kx) - 8 pi^2 d0^2(2 pi - kx) / (2 pi - kx).
pub fn kb_threshold_estimate(params: &StructureParams) -> f64 {
    let kt = 2.0 * PI - params.kx;
    let d0 = params.delta0(kt);
    kt - 8.0 * PI * PI * d0 * d0 / kt
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::coupling_matrix;

    fn params_r(radius: f64) -> StructureParams {
        StructureParams::new(radius, 2.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn resonance_residual_below_tolerance() {
        let p = params_r(0.08);
        let num = Numerics::default();
        let kr = resonance_k_scan(0.26, Parity::Symmetric, &p, &num).unwrap();
        let f = branch_fn(kr, 0.26, Parity::Symmetric, &p, 1e-13).unwrap();
        assert!(f.abs() < 1e-10, "residual {f:e}");
        assert!(kr < 2.0 * PI && kr > 0.9 * 2.0 * PI, "kr = {kr}");
    }

    #[test]
    fn continuation_matches_cold_start() {
        let p = params_r(0.08);
        let num = Numerics::default();
        let pts = trace_curve(Parity::Symmetric, &p, &num, (0.2, 0.4), 0.01).unwrap();
        for pt in pts.iter().step_by(1) {
            let cold = resonance_k_scan(pt.h, Parity::Symmetric, &p, &num).unwrap();
            assert!(
                (pt.kr - cold).abs() < 1e-9,
                "h={}: {} vs {}",
                pt.h,
                pt.kr,
                cold
            );
        }
        assert_eq!(pts.len(), 21);
    }

    #[test]
    fn width_vanishes_at_bound_state() {
        let p = params_r(0.1);
        let num = Numerics::default();
        let bs = &find_bound_states(Parity::Symmetric, &p, &num, 1).unwrap()[0];
        let g = width(bs.hb, bs.kb, Parity::Symmetric, &p, &num).unwrap();
        assert!(g.abs() < 1e-8, "Gamma(hb) = {g:e}");
        // Defining equation residual.
        assert!((bs.hb * bs.kzb).cos().abs() < 1e-8);
        // Eigenvector of the 2x2 problem is symmetric: 1 - alpha - beta = 0
        // as a full complex equation at (hb, kb).
        let m = coupling_matrix(bs.kb, 0.0, bs.hb, &p, 1e-13).unwrap();
        assert!((1.0 - m.sym_eig()).norm() < 1e-7);
    }

    #[test]
    fn first_bound_state_location() {
        let p = params_r(0.1);
        let num = Numerics::default();
        let bs = &find_bound_states(Parity::Symmetric, &p, &num, 1).unwrap()[0];
        assert!((bs.hb - 0.259).abs() < 0.02, "hb = {}", bs.hb);
        assert!(
            bs.kb > 0.95 * 2.0 * PI && bs.kb < 2.0 * PI,
            "kb = {}",
            bs.kb
        );
    }

    #[test]
    fn width_quadratic_near_bound_state() {
        let p = params_r(0.1);
        let num = Numerics::default();
        let bs = &find_bound_states(Parity::Symmetric, &p, &num, 1).unwrap()[0];
        // log-log fit of Gamma vs |h - hb| over dh in [1e-3, 1e-2].
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..10 {
            let dh = 1e-3 * 10f64.powf(i as f64 / 9.0);
            let h = bs.hb + dh;
            let kr = resonance_k_scan(h, Parity::Symmetric, &p, &num).unwrap();
            let g = width(h, kr, Parity::Symmetric, &p, &num).unwrap();
            assert!(g > 0.0);
            xs.push(dh.ln());
            ys.push(g.ln());
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
        assert!((slope - 2.0).abs() < 0.1, "slope = {slope}");
    }

    #[test]
    fn widths_positive_between_bound_states() {
        let p = params_r(0.1);
        let num = Numerics::default();
        let bs = find_bound_states(Parity::Symmetric, &p, &num, 2).unwrap();
        let (h1, h2) = (bs[0].hb, bs[1].hb);
        for i in 1..8 {
            let h = h1 + (h2 - h1) * i as f64 / 8.0;
            let kr = resonance_k_scan(h, Parity::Symmetric, &p, &num).unwrap();
            let g = width(h, kr, Parity::Symmetric, &p, &num).unwrap();
            assert!(g > 1e-10, "Gamma({h}) = {g:e}");
        }
    }

    #[test]
    fn bound_state_ordering_and_threshold() {
        let p = params_r(0.1);
        let num = Numerics::default();
        let bs = find_bound_states(Parity::Symmetric, &p, &num, 3).unwrap();
        assert_eq!(bs.len(), 3);
        assert!(bs.windows(2).all(|w| w[0].hb < w[1].hb));
        for b in &bs {
            assert!(b.kb < 2.0 * PI && b.kb > 0.9 * 2.0 * PI);
            assert!((b.hb * b.kzb - (b.n as f64 - 0.5) * PI).abs() < 1e-8);
        }
    }

    #[test]
    fn curve_stays_in_window_and_interleaves() {
        // Fig. 1(c)-style families: symmetric curve exists at small h,
        // the antisymmetric branch only emerges at larger separations.
        let p = params_r(0.08);
        let num = Numerics::default();
        let sym = trace_curve(Parity::Symmetric, &p, &num, (0.1, 1.3), 0.02).unwrap();
        assert!(sym.iter().all(|pt| pt.kr < 2.0 * PI));
        assert!(sym.first().unwrap().h < 0.15);
        let anti = trace_curve(Parity::Antisymmetric, &p, &num, (0.1, 1.3), 0.02).unwrap();
        assert!(!anti.is_empty());
        assert!(anti.iter().all(|pt| pt.kr < 2.0 * PI));
        assert!(
            anti.first().unwrap().h > sym.first().unwrap().h,
            "antisymmetric branch should emerge later: {} vs {}",
            anti.first().unwrap().h,
            sym.first().unwrap().h
        );
    }

    #[test]
    fn imaginary_identity_along_curve() {
        // Cross-module invariant: Im(1 - alpha - beta) = -(4 pi d0/k_z) phi^2
        // with phi = cos(h k_z), at every traced resonance point.
        let p = params_r(0.1);
        let num = Numerics::default();
        let pts = trace_curve(Parity::Symmetric, &p, &num, (0.2, 0.6), 0.05).unwrap();
        for pt in pts {
            let m = coupling_matrix(pt.kr, 0.0, pt.h, &p, 1e-12).unwrap();
            let kz = pt.kr;
            let phi = (pt.h * kz).cos();
            let lhs = (1.0 - m.sym_eig()).im;
            let rhs = -4.0 * PI * p.delta0(pt.kr) / kz * phi * phi;
            let scale = 4.0 * PI * p.delta0(pt.kr) / kz;
            assert!(
                (lhs - rhs).abs() <= 1e-8 * scale,
                "h={}: {lhs} vs {rhs}",
                pt.h
            );
        }
    }

    #[test]
    fn grid_independence_of_trace() {
        let p = params_r(0.08);
        let num = Numerics::default();
        let coarse = trace_curve(Parity::Symmetric, &p, &num, (0.24, 0.3), 0.01).unwrap();
        let fine = trace_curve(Parity::Symmetric, &p, &num, (0.24, 0.3), 0.005).unwrap();
        for c in &coarse {
            let f = fine.iter().find(|f| (f.h - c.h).abs() < 1e-12).unwrap();
            assert!((f.kr - c.kr).abs() < 1e-8);
        }
    }
}
