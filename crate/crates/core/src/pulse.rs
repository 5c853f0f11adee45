//! Root-raised-cosine pulses and discrete ISI taps.
//!
//! In the equivalent FTN model the transmit pulse `h(t)` is expanded over
//! `tau*T`-orthonormal pulses, giving the discrete taps
//! `h_n = sqrt(tau*T) * h(n*tau*T)`. The model holds for
//! `tau < 1/(1 + rolloff)`.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Default one-sided generation span, in taps.
pub const DEFAULT_SPAN: usize = 40;

/// Root-raised-cosine pulse parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrcParams {
    /// Roll-off factor in `[0, 1]`.
    pub rolloff: f64,
    /// Nyquist symbol period `T`.
    pub symbol_period: f64,
    /// One-sided number of taps generated by [`sample_taps`].
    pub span: usize,
}

impl RrcParams {
    pub fn new(rolloff: f64, symbol_period: f64, span: usize) -> Result<Self> {
        let p = RrcParams {
            rolloff,
            symbol_period,
            span,
        };
        p.validate()?;
        Ok(p)
    }

    /// Unit symbol period and the default span.
    pub fn with_rolloff(rolloff: f64) -> Result<Self> {
        Self::new(rolloff, 1.0, DEFAULT_SPAN)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::InvalidPulse(format!(
                "rolloff {} outside [0, 1]",
                self.rolloff
            )));
        }
        if !(self.symbol_period > 0.0 && self.symbol_period.is_finite()) {
            return Err(Error::InvalidPulse(format!(
                "symbol period {} must be positive",
                self.symbol_period
            )));
        }
        if self.span == 0 {
            return Err(Error::InvalidPulse("span must be at least 1".into()));
        }
        Ok(())
    }

    /// Largest admissible acceleration factor (exclusive).
    pub fn tau_limit(&self) -> f64 {
        1.0 / (1.0 + self.rolloff)
    }
}

/// Unit-energy root-raised-cosine pulse evaluated at `t`.
///
/// The removable singularities at `t = 0` and `|t| = T/(4*rolloff)` are
/// replaced by their limits.
pub fn rrc_pulse(params: &RrcParams, t: f64) -> f64 {
    let b = params.rolloff;
    let ts = params.symbol_period;
    let x = t / ts;
    let scale = 1.0 / ts.sqrt();
    if x.abs() < 1e-12 {
        return scale * (1.0 - b + 4.0 * b / PI);
    }
    let four_bx = 4.0 * b * x;
    let denom_poly = 1.0 - four_bx * four_bx;
    if b > 0.0 && denom_poly.abs() < 1e-10 {
        let arg = PI / (4.0 * b);
        return scale * b / 2f64.sqrt()
            * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
    }
    let num = (PI * x * (1.0 - b)).sin() + four_bx * (PI * x * (1.0 + b)).cos();
    scale * num / (PI * x * denom_poly)
}

/// Discrete ISI coefficients `h_n`, `n = -L..=L`, stored with `h_0` at the center.
#[derive(Debug, Clone, PartialEq)]
pub struct TapSet {
    taps: Vec<f64>,
    tau: f64,
}

impl TapSet {
    /// Builds a tap set from an odd-length coefficient vector centered on `h_0`.
    pub fn new(taps: Vec<f64>, tau: f64) -> Result<Self> {
        if taps.len() % 2 == 0 {
            return Err(Error::NotOdd {
                what: "tap count",
                value: taps.len(),
            });
        }
        if let Some(i) = taps.iter().position(|h| !h.is_finite()) {
            return Err(Error::OutOfRange(format!("tap {i} is not finite")));
        }
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::OutOfRange(format!("tau {tau} outside (0, 1]")));
        }
        Ok(TapSet { taps, tau })
    }

    /// Tap set not derived from a pulse (e.g. hand-picked toy taps); `tau` is 1.
    pub fn from_taps(taps: Vec<f64>) -> Result<Self> {
        Self::new(taps, 1.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// `L`, so that taps run over `n = -L..=L`.
    pub fn half_len(&self) -> usize {
        self.taps.len() / 2
    }

    /// Index of `h_0` in [`TapSet::as_slice`].
    pub fn center_index(&self) -> usize {
        self.half_len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `h_n`, zero outside the support.
    pub fn get(&self, n: isize) -> f64 {
        let idx = n + self.half_len() as isize;
        if idx < 0 || idx as usize >= self.taps.len() {
            0.0
        } else {
            self.taps[idx as usize]
        }
    }

    /// Sum of squared taps.
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|h| h * h).sum()
    }

    /// Keeps the `nt` taps centered on `h_0`. No renormalisation is applied.
    pub fn truncate(&self, nt: usize) -> Result<TapSet> {
        truncate_taps(self, nt)
    }
}

/// Samples `h_n = sqrt(tau*T) h(n*tau*T)` for `n = -span..=span`.
pub fn sample_taps(params: &RrcParams, tau: f64) -> Result<TapSet> {
    params.validate()?;
    let limit = params.tau_limit();
    if !(tau > 0.0) || tau >= limit {
        return Err(Error::ModelValidity {
            tau,
            rolloff: params.rolloff,
            limit,
        });
    }
    let step = tau * params.symbol_period;
    let gain = step.sqrt();
    let span = params.span as isize;
    let taps = (-span..=span)
        .map(|n| {
            // evaluate |n| so that h_n == h_-n bit for bit
            gain * rrc_pulse(params, n.unsigned_abs() as f64 * step)
        })
        .collect();
    TapSet::new(taps, tau)
}

/// Dominant-tap truncation: the contiguous block of `nt` taps centered on `h_0`.
pub fn truncate_taps(full: &TapSet, nt: usize) -> Result<TapSet> {
    if nt % 2 == 0 {
        return Err(Error::NotOdd {
            what: "nt",
            value: nt,
        });
    }
    if nt > full.len() {
        return Err(Error::OutOfRange(format!(
            "nt = {nt} exceeds the {} available taps",
            full.len()
        )));
    }
    let drop = (full.len() - nt) / 2;
    TapSet::new(full.taps[drop..drop + nt].to_vec(), full.tau)
}
