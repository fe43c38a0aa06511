//! Error types shared across the solver.

use thiserror::Error;

/// Failure modes of the solver pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A structure or run parameter violates its invariant.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A wavenumber sits too close to a diffraction threshold; the channel
    /// sums are singular there (1/q_{z,m} blows up as a channel opens).
    #[error("wavenumber q={q} within {distance:.3e} of diffraction threshold m={m}")]
    ThresholdProximity { q: f64, m: i32, distance: f64 },

    /// No sign change of the resonance function in the scanned window.
    #[error("no resonance bracket in k-window ({lo}, {hi}) at h={h}")]
    NoBracket { h: f64, lo: f64, hi: f64 },

    /// Continuation lost the resonance curve mid-trace.
    #[error("resonance curve lost at h={h}")]
    CurveLost { h: f64 },

    /// A requested bound state was not found in the search window.
    #[error("bound state n={n} not found for h <= {h_max}")]
    NotFound { n: usize, h_max: f64 },

    /// The k^2-derivative in the width formula is numerically degenerate.
    #[error("degenerate d/dk^2 derivative ({value:.3e}) in width evaluation")]
    DegenerateDerivative { value: f64 },

    /// det(1 - H2) is near zero: (2k)^2 sits on a second-harmonic pole,
    /// violating the regularity assumption behind the reduced system.
    #[error("second-harmonic resonance: |det(1-H2)| = {det_abs:.3e} below threshold")]
    SecondHarmonicResonance { det_abs: f64 },

    /// |1/zeta| vanished; contradicts the nonzero-limit property of zeta_b.
    #[error("1/zeta below threshold (|1/zeta| = {inv_abs:.3e})")]
    ZetaSingular { inv_abs: f64 },

    /// tau_+ + tau_- < 0: the two-harmonic truncation is not self-consistent
    /// at this (nu, h); fields are not reported there.
    #[error("outside validity region: tau_+ + tau_- = {tau_sum:.3e} < 0")]
    InvalidRegion {
        tau_plus: f64,
        tau_minus: f64,
        tau_sum: f64,
    },

    /// The cubic discriminant came out negative beyond round-off, which
    /// contradicts its exact nonnegative factorization.
    #[error("cubic discriminant D3 = {d3:.3e} < 0 (internal error)")]
    NegativeDiscriminant { d3: f64 },

    /// The coupled-system iteration did not converge.
    #[error("no convergence after {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    /// sigma_1 + sigma_2 exceeded 1 beyond tolerance.
    #[error("flux conservation violated: sigma1+sigma2 = {total}")]
    ConservationViolation { total: f64 },

    /// Optimal-distance solution fell outside the validity region.
    #[error("optimal distance at h={h} lies outside the validity region")]
    OutsideValidity { h: f64 },

    /// Configuration file / CLI problem.
    #[error("config error ({location}): {message}")]
    Config { location: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
