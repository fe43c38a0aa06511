//! Diffraction channels of the periodic array.
//!
//! The m-th channel carries tangential wavenumber qx + 2 pi m and normal
//! wavenumber q_{z,m} = sqrt(q^2 - (qx + 2 pi m)^2). The root is taken on
//! the positive real axis for open (propagating) channels and on the
//! positive imaginary axis for closed (evanescent) ones; the branch is
//! chosen by explicit comparison, never by a generic complex sqrt.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// One diffraction channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    /// Diffraction order.
    pub m: i32,
    /// Normal wavenumber; positive real (open) or positive imaginary (closed).
    pub qz: Complex64,
    /// Whether the channel propagates.
    pub open: bool,
}

/// The channels |m| <= m_max at total wavenumber q and tangential wavenumber qx.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub q: f64,
    pub qx: f64,
    pub channels: Vec<Channel>,
}

impl ChannelSet {
    pub fn open_channels(&self) -> impl Iterator<Item = &Channel> {
        self.channels.iter().filter(|c| c.open)
    }

    pub fn open_count(&self) -> usize {
        self.channels.iter().filter(|c| c.open).count()
    }

    /// The m = 0 channel.
    pub fn principal(&self) -> &Channel {
        self.channels
            .iter()
            .find(|c| c.m == 0)
            .expect("channel set always contains m = 0")
    }
}

/// Normal wavenumber of a single channel, two-case branch rule.
pub fn qz_of(q: f64, qx: f64, m: i32) -> Complex64 {
    let t = qx + 2.0 * PI * m as f64;
    let d = q * q - t * t;
    if d > 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-d).sqrt())
    }
}

/// Distance from q to the nearest diffraction threshold |qx + 2 pi m|.
pub fn threshold_distance(q: f64, qx: f64) -> (f64, i32) {
    // Only orders with |qx + 2 pi m| near q can be close.
    let reach = ((q + qx.abs()) / (2.0 * PI)).ceil() as i32 + 1;
    let mut best = f64::INFINITY;
    let mut best_m = 0;
    for m in -reach..=reach {
        let t = (qx + 2.0 * PI * m as f64).abs();
        let d = (q - t).abs();
        if d < best {
            best = d;
            best_m = m;
        }
    }
    (best, best_m)
}

/// Build the channel set for |m| <= m_max, rejecting near-threshold q.
pub fn channel_set(q: f64, qx: f64, m_max: i32, margin: f64) -> Result<ChannelSet> {
    if !(q > 0.0) {
        return Err(Error::InvalidParam(format!("q must be > 0, got {q}")));
    }
    let (dist, m) = threshold_distance(q, qx);
    if dist < margin {
        return Err(Error::ThresholdProximity {
            q,
            m,
            distance: dist,
        });
    }
    let channels = (-m_max..=m_max)
        .map(|m| {
            let qz = qz_of(q, qx, m);
            Channel {
                m,
                qz,
                open: qz.im == 0.0,
            }
        })
        .collect();
    Ok(ChannelSet { q, qx, channels })
}

/// Smallest m_max that covers all open channels (plus a small buffer).
pub fn open_m_max(q: f64, qx: f64) -> i32 {
    ((q + qx.abs()) / (2.0 * PI)).ceil() as i32 + 1
}
